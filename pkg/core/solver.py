"""
Solver Escalonado
CrackSense - Compósitos Autossensíveis

Montagem Q4 dos subproblemas de deslocamento e campo de fase, Newton-Raphson
com eliminação das condições de Dirichlet e passo escalonado
deslocamento → variáveis internas → histórico → campo de fase, seguido da
varredura elétrica (cascata de sentido único).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import splu

from common.exceptions import (
    ConvergenceError,
    CrackSenseError,
    DomainError,
    SolverError,
)
from common.logging import get_logger
from common.metrics import SimulationMetrics, metrics, track_metrics
from common.types import ELECTRODE_PAIRS, RATIO_COLUMNS, RESISTANCE_COLUMNS, RESISTANCE_PAIRS, STEP_COLUMNS
from core.fracture import crack_tip_x, normalized_crack_length
from core.material import (
    MaterialState,
    crack_driving_energy,
    eval_stress,
    integrate_internal,
    spatial_tangent,
    update_history,
)
from core.mesh import SHAPE_N, Mesh
from core.microstructure import OrientationSpec, gradient_anisotropy
from core.sensing import ConductanceVector, ElectrodeSet, build_electrodes, eit_sweep, resistance_and_norm
from domain.parameters import MaterialParams, PhaseFieldParams
from domain.run_schema import SimConfig

logger = get_logger(__name__)


# ============================================================================
# TIPOS
# ============================================================================

@dataclass
class FieldState:
    """Campos nodais e estados materiais nos pontos de Gauss."""
    u: np.ndarray
    phi: np.ndarray
    phi_e: np.ndarray
    gp_states: MaterialState
    u_top: float = 0.0
    reaction_top: float = 0.0
    step: int = 0
    time: float = 0.0

    @classmethod
    def initial(cls, mesh: Mesh, theta: float) -> "FieldState":
        return cls(
            u=np.zeros(2 * mesh.n_nodes),
            phi=np.zeros(mesh.n_nodes),
            phi_e=np.zeros(mesh.n_nodes),
            gp_states=MaterialState.reference((mesh.n_elements, 4), theta),
        )

    def copy(self) -> "FieldState":
        return FieldState(
            u=self.u.copy(),
            phi=self.phi.copy(),
            phi_e=self.phi_e.copy(),
            gp_states=self.gp_states.copy(),
            u_top=self.u_top,
            reaction_top=self.reaction_top,
            step=self.step,
            time=self.time,
        )


@dataclass
class NewtonReport:
    iterations: int
    residuals: List[float]
    tangent_builds: int = 0


@dataclass
class StepRecord:
    """Linha de steps.csv."""
    step: int
    time_s: float
    disp_mm: float
    force_N: float
    a_tilde: float
    C_tilde: float
    ratios: np.ndarray
    resistances: np.ndarray = field(default_factory=lambda: np.full(len(RESISTANCE_COLUMNS), np.nan))

    def as_row(self) -> Dict[str, float]:
        row = {
            "step": self.step,
            "time_s": self.time_s,
            "disp_mm": self.disp_mm,
            "force_N": self.force_N,
            "a_tilde": self.a_tilde,
            "C_tilde": self.C_tilde,
        }
        row.update(zip(RATIO_COLUMNS, (float(r) for r in self.ratios)))
        row.update(zip(RESISTANCE_COLUMNS, (float(r) for r in self.resistances)))
        return {k: row[k] for k in STEP_COLUMNS}


@dataclass
class StepDiagnostics:
    """Linha de diagnostics.csv."""
    step: int
    x_tip_mm: float
    stagger_iterations: int = 0
    newton_iterations: int = 0
    reductions: int = 0

    def as_row(self) -> Dict[str, float]:
        return {
            "step": self.step,
            "x_tip_mm": self.x_tip_mm,
            "stagger_iterations": self.stagger_iterations,
            "newton_iterations": self.newton_iterations,
            "reductions": self.reductions,
        }


@dataclass
class StepOutcome:
    fields: FieldState
    record: StepRecord
    diagnostics: StepDiagnostics
    newton_reports: List[NewtonReport] = field(default_factory=list)


@dataclass(frozen=True)
class DirichletSet:
    """DOFs prescritos: base vertical, pino horizontal na origem e topo vertical."""
    fixed: np.ndarray
    free: np.ndarray
    top: np.ndarray
    bottom: np.ndarray


def mechanical_dirichlet(mesh: Mesh) -> DirichletSet:
    bottom = 2 * mesh.tags["bottom"] + 1
    top = 2 * mesh.tags["top"] + 1
    corner = np.intersect1d(mesh.tags["bottom"], mesh.tags["left"])
    if corner.size == 0:
        raise DomainError("Mesh has no bottom-left corner node for the horizontal pin")
    pin = np.array([2 * corner[0]])
    fixed = np.unique(np.concatenate([bottom, top, pin]))
    free = np.setdiff1d(np.arange(2 * mesh.n_nodes), fixed)
    return DirichletSet(fixed=fixed, free=free, top=top, bottom=bottom)


# ============================================================================
# MONTAGEM
# ============================================================================

def _sparse(values: np.ndarray, dofs: np.ndarray, n: int) -> csr_matrix:
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).ravel()
    cols = np.tile(dofs, (1, k)).ravel()
    return coo_matrix((values.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def spatial_gradients(mesh: Mesh, F: np.ndarray) -> np.ndarray:
    """∇ₓN = ∇_X N·F⁻¹, shape (ne, 4, 4, 2)."""
    F_inv = np.linalg.inv(F[..., :2, :2])
    return np.einsum('egak,egkj->egaj', mesh.dN_dX, F_inv)


def assemble_mechanical(
    mesh: Mesh,
    fields: FieldState,
    orientation: OrientationSpec,
    params: MaterialParams,
    tangent: bool = True,
    eps_pert: float = 1e-5,
    thickness: float = 1.0,
):
    """
    Matriz tangente K^{uu} (material + geométrica) e vetor de forças internas.

    Variáveis internas congeladas em fields.gp_states; integração na
    configuração atual com dv = J·dV.

    Returns:
        (K ou None, f_int, StressResult)
    """
    F = mesh.deformation_gradient(fields.u)
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        bad = np.unique(np.where(J <= 0.0)[0])
        raise DomainError(
            "Inverted element during mechanical assembly",
            {"elements": bad[:10].tolist(), "count": int(bad.size)}
        )

    st = fields.gp_states
    phi_gp = np.clip(mesh.interpolate(fields.phi), 0.0, 1.0)
    result = eval_stress(F, st.Fv, st.Fvp, phi_gp, st.theta, orientation, params)
    s2 = result.sigma[..., :2, :2]
    gx = spatial_gradients(mesh, F)
    dv = J * mesh.dV * thickness

    dofs = mesh.element_dofs
    fe = np.einsum('egij,egaj,eg->eai', s2, gx, dv).reshape(mesh.n_elements, 8)
    f_int = np.bincount(dofs.ravel(), weights=fe.ravel(), minlength=2 * mesh.n_nodes)
    if not tangent:
        return None, f_int, result

    state = MaterialState(F=F, Fv=st.Fv, Fvp=st.Fvp, history=st.history, theta=st.theta)
    D = spatial_tangent(state, phi_gp, orientation, params, eps_pert, sigma=result.sigma)

    B = np.zeros(gx.shape[:2] + (3, 8))
    B[..., 0, 0::2] = gx[..., 0]
    B[..., 1, 1::2] = gx[..., 1]
    B[..., 2, 0::2] = gx[..., 1]
    B[..., 2, 1::2] = gx[..., 0]
    K_mat = np.einsum('egpi,egpq,egqj,eg->eij', B, D, B, dv)

    G = np.einsum('egai,egij,egbj,eg->eab', gx, s2, gx, dv)
    K_geo = np.einsum('eab,ij->eaibj', G, np.eye(2)).reshape(mesh.n_elements, 8, 8)

    K = _sparse(K_mat + K_geo, dofs, 2 * mesh.n_nodes)
    return K, f_int, result


def assemble_phasefield(
    mesh: Mesh,
    phi: np.ndarray,
    history: np.ndarray,
    pf: PhaseFieldParams,
    A_hat: np.ndarray,
):
    """
    Tangente K^{φφ} e resíduo do campo de fase AT2 anisotrópico.

    Integrado na configuração de referência (o fator J⁻¹ do volume atual já
    está absorvido em dV); g'' = 2.

    Returns:
        (K^{φφ}, resíduo)
    """
    mass = (2.0 * history + pf.Gc / pf.l0) * mesh.dV
    K_mass = np.einsum('ga,gb,eg->eab', SHAPE_N, SHAPE_N, mass)
    K_diff = pf.Gc * pf.l0 * np.einsum('egai,ij,egbj,eg->eab', mesh.dN_dX, A_hat, mesh.dN_dX, mesh.dV)
    Ke = K_mass + K_diff

    phi_e = np.asarray(phi)[mesh.elements]
    source = np.einsum('ga,eg->ea', SHAPE_N, 2.0 * history * mesh.dV)
    re = np.einsum('eab,eb->ea', Ke, phi_e) - source

    n = mesh.n_nodes
    residual = np.bincount(mesh.elements.ravel(), weights=re.ravel(), minlength=n)
    return _sparse(Ke, mesh.elements, n), residual


def _factorize(K: csr_matrix):
    try:
        return splu(K.tocsc())
    except RuntimeError as e:
        raise SolverError("Singular system matrix", {"error": str(e)}) from e


# ============================================================================
# SOLVER ACOPLADO
# ============================================================================

class CoupledSolver:
    """
    Solver escalonado para o corpo de prova SEN.

    Mantém as referências de normalização C₀ (primeiro passo com força não
    nula) e G⁰ (passo 0) usadas nos registros de passo.
    """

    def __init__(self, mesh: Mesh, config: SimConfig, electrodes: Optional[ElectrodeSet] = None):
        self.mesh = mesh
        self.config = config
        self.params = config.material
        self.electrical = config.electrical
        self.solver_config = config.solver
        self.orientation = config.orientation_spec()
        self.thickness = config.geometry.thickness
        self.A_hat = gradient_anisotropy(self.orientation.A, self.params.alpha_hat)
        self.bc = mechanical_dirichlet(mesh)
        self.electrodes = electrodes or build_electrodes(mesh, self.electrical.electrode_half_width)

        self.C0: Optional[float] = None
        self.G0: Optional[ConductanceVector] = None
        self._last_ratios = np.ones(len(RATIO_COLUMNS))
        self._last_resistances = np.full(len(RESISTANCE_COLUMNS), np.nan)
        self.last_sweep: Optional[ConductanceVector] = None
        self._factor = None

        logger.info(
            "Coupled solver initialized",
            extra_data={
                "dofs": 2 * mesh.n_nodes,
                "families": len(self.orientation.families),
                "A11": self.orientation.A11,
                "A12": self.orientation.A12,
            }
        )

    # ------------------------------------------------------------------
    # Subproblemas
    # ------------------------------------------------------------------

    def _tangent_factor(self, fields: FieldState):
        K, _, _ = assemble_mechanical(
            self.mesh, fields, self.orientation, self.params,
            tangent=True, eps_pert=self.solver_config.tangent_eps, thickness=self.thickness,
        )
        metrics.increment(SimulationMetrics.TANGENT_BUILDS)
        return _factorize(K[self.bc.free][:, self.bc.free])

    def solve_displacement(self, fields: FieldState, u_top: float) -> tuple:
        """
        Newton-Raphson do deslocamento com variáveis internas congeladas.

        A fatoração da tangente é reaproveitada entre iterações, passos
        escalonados e incrementos; ela é reconstruída no iterado atual quando
        ‖r_k‖/‖r_{k−1}‖ excede tangent_refresh_ratio. Com razão 0 toda
        iteração usa tangente nova (Newton completo).

        Raises:
            ConvergenceError: Resíduo acima da tolerância após newton_max_iter
        """
        cfg = self.solver_config
        bc = self.bc
        trial = fields.copy()
        trial.u[bc.fixed] = np.where(np.isin(bc.fixed, bc.top), u_top, 0.0)

        residuals: List[float] = []
        builds = 0
        for iteration in range(cfg.newton_max_iter + 1):
            _, f_int, _ = assemble_mechanical(
                self.mesh, trial, self.orientation, self.params, tangent=False, thickness=self.thickness,
            )
            r_free = -f_int[bc.free]
            reactions = f_int[bc.fixed]
            norm = float(np.linalg.norm(r_free) / max(np.linalg.norm(reactions), 1.0))
            residuals.append(norm)
            if norm < cfg.newton_tol:
                return trial.u, NewtonReport(iterations=iteration, residuals=residuals, tangent_builds=builds)
            if iteration == cfg.newton_max_iter or not np.isfinite(norm):
                break
            stalled = len(residuals) > 1 and norm > cfg.tangent_refresh_ratio * residuals[-2]
            if self._factor is None or stalled:
                self._factor = self._tangent_factor(trial)
                builds += 1
            trial.u[bc.free] += self._factor.solve(r_free)

        self._factor = None
        raise ConvergenceError(
            "Displacement Newton did not converge",
            {"iterations": len(residuals) - 1, "residual": residuals[-1]}
        )

    def solve_phasefield(self, phi: np.ndarray, history: np.ndarray) -> np.ndarray:
        """Newton do campo de fase (linear em φ); projeta o resultado em [0, 1]."""
        cfg = self.solver_config
        pf = self.params.phase_field
        phi = phi.copy()
        scale = max(float(np.sum(2.0 * history * self.mesh.dV)), 1.0)
        for _ in range(cfg.newton_max_iter):
            K, residual = assemble_phasefield(self.mesh, phi, history, pf, self.A_hat)
            if np.linalg.norm(residual) / scale < cfg.newton_tol:
                break
            phi += _factorize(K).solve(-residual)
        else:
            raise ConvergenceError("Phase-field Newton did not converge")

        lo, hi = float(phi.min()), float(phi.max())
        if lo < -1e-6 or hi > 1.0 + 1e-6:
            logger.warning("Phase field left [0, 1] before projection", extra_data={"min": lo, "max": hi})
        return np.clip(phi, 0.0, 1.0)

    # ------------------------------------------------------------------
    # Registros
    # ------------------------------------------------------------------

    def reaction_force(self, fields: FieldState) -> float:
        _, f_int, _ = assemble_mechanical(
            self.mesh, fields, self.orientation, self.params, tangent=False, thickness=self.thickness
        )
        return float(np.sum(f_int[self.bc.top]))

    def _sweep(self, fields: FieldState) -> ConductanceVector:
        F = self.mesh.deformation_gradient(fields.u)
        self.last_sweep = eit_sweep(
            self.mesh, F, fields.phi, self.orientation, self.electrical,
            self.electrodes, reference=self.G0, thickness=self.thickness,
        )
        return self.last_sweep

    def _resistances(self, sweep: ConductanceVector) -> np.ndarray:
        """(R, R/R₀) dos pares opostos E1–E5 e E3–E7."""
        out = []
        for pair in RESISTANCE_PAIRS:
            p = ELECTRODE_PAIRS.index(pair)
            R, sigma_ratio = resistance_and_norm(float(sweep.values[p]), float(sweep.reference[p]))
            out.extend((R, 1.0 / sigma_ratio))
        return np.array(out)

    def reference_record(self, fields: FieldState) -> tuple:
        """Registro do passo 0 e fixação de G⁰ no estado não deformado."""
        self.G0 = None
        self._factor = None
        sweep = self._sweep(fields)
        self.G0 = sweep
        self._last_ratios = np.ones(len(RATIO_COLUMNS))
        self._last_resistances = self._resistances(sweep)
        record = StepRecord(
            step=0, time_s=0.0, disp_mm=0.0, force_N=0.0, a_tilde=0.0, C_tilde=1.0,
            ratios=self._last_ratios.copy(), resistances=self._last_resistances.copy(),
        )
        diagnostics = StepDiagnostics(step=0, x_tip_mm=float(self.mesh.notch_length))
        return record, diagnostics

    def make_record(self, fields: FieldState, run_eit: bool = True) -> StepRecord:
        pf = self.params.phase_field
        a_tilde = normalized_crack_length(fields.phi, self.mesh, pf.l0, self.mesh.width)

        force = fields.reaction_top
        C_tilde = 1.0
        if abs(force) > 1e-12 and fields.u_top > 0.0:
            compliance = fields.u_top / force
            if self.C0 is None:
                self.C0 = compliance
            C_tilde = compliance / self.C0
        elif self.C0 is not None:
            C_tilde = float("nan")

        if run_eit:
            if self.G0 is None:
                raise SolverError("Reference conductances not set; call reference_record first")
            sweep = self._sweep(fields)
            self._last_ratios = sweep.ratios
            self._last_resistances = self._resistances(sweep)
        return StepRecord(
            step=fields.step,
            time_s=fields.time,
            disp_mm=fields.u_top,
            force_N=force,
            a_tilde=a_tilde,
            C_tilde=C_tilde,
            ratios=self._last_ratios.copy(),
            resistances=self._last_resistances.copy(),
        )

    # ------------------------------------------------------------------
    # Passo escalonado
    # ------------------------------------------------------------------

    @track_metrics(SimulationMetrics.STEP_DURATION)
    def staggered_step(
        self,
        fields: FieldState,
        delta_u_bar: float,
        dt: float,
        run_eit: bool = True,
    ) -> StepOutcome:
        """
        Um incremento de carga: iterações escalonadas até convergência conjunta.

        Raises:
            ConvergenceError: Qualquer subproblema falhou ou a iteração
                escalonada excedeu stagger_max_iter
        """
        cfg = self.solver_config
        states_n = fields.gp_states
        u_top = fields.u_top + delta_u_bar
        u_iter = fields.u.copy()
        phi_iter = fields.phi.copy()
        internal = states_n.copy()
        reports: List[NewtonReport] = []

        try:
            if delta_u_bar == 0.0 and dt == 0.0:
                stagger = 0
            else:
                for stagger in range(1, cfg.stagger_max_iter + 1):
                    trial = FieldState(u=u_iter, phi=phi_iter, phi_e=fields.phi_e, gp_states=internal, u_top=u_top)
                    u_new, report = self.solve_displacement(trial, u_top)
                    reports.append(report)

                    F = self.mesh.deformation_gradient(u_new)
                    phi_gp = np.clip(self.mesh.interpolate(phi_iter), 0.0, 1.0)
                    if dt > 0.0:
                        internal = integrate_internal(
                            F, states_n, dt, phi_gp, self.orientation, self.params,
                            tol=cfg.fixed_point_tol, max_iter=cfg.fixed_point_max_iter,
                        )
                    else:
                        internal = MaterialState(
                            F=F, Fv=states_n.Fv.copy(), Fvp=states_n.Fvp.copy(),
                            history=states_n.history.copy(), theta=states_n.theta,
                        )
                    stress = eval_stress(F, internal.Fv, internal.Fvp, phi_gp, internal.theta, self.orientation, self.params)
                    internal.history = update_history(states_n.history, crack_driving_energy(stress.breakdown))

                    phi_new = self.solve_phasefield(phi_iter, internal.history)

                    du = np.linalg.norm(u_new - u_iter) / max(np.linalg.norm(u_new), 1e-12)
                    dphi = np.linalg.norm(phi_new - phi_iter) / max(np.linalg.norm(phi_new), 1e-8)
                    u_iter, phi_iter = u_new, phi_new
                    if du <= cfg.stagger_tol and dphi <= cfg.stagger_tol:
                        break
                else:
                    raise ConvergenceError(
                        "Staggered iteration did not converge",
                        {"iterations": cfg.stagger_max_iter, "du": du, "dphi": dphi}
                    )
        except ConvergenceError:
            self._factor = None
            raise
        except CrackSenseError as e:
            self._factor = None
            raise ConvergenceError(f"Step failed: {e.message}", e.details) from e

        new_fields = FieldState(
            u=u_iter,
            phi=phi_iter,
            phi_e=fields.phi_e.copy(),
            gp_states=internal,
            u_top=u_top,
            step=fields.step + 1,
            time=fields.time + dt,
        )
        new_fields.reaction_top = self.reaction_force(new_fields)

        record = self.make_record(new_fields, run_eit=run_eit)
        newton_total = sum(r.iterations for r in reports)
        diagnostics = StepDiagnostics(
            step=new_fields.step,
            x_tip_mm=crack_tip_x(new_fields.phi, self.mesh, cfg.crack_tip_threshold),
            stagger_iterations=stagger,
            newton_iterations=newton_total,
        )
        SimulationMetrics.record_step(stagger, newton_total, float(new_fields.phi.max()))
        logger.debug(
            "Staggered step converged",
            extra_data={"step": new_fields.step, "u_top": u_top, "force": new_fields.reaction_top, "stagger": stagger,
                        "tangent_builds": sum(r.tangent_builds for r in reports)}
        )
        return StepOutcome(fields=new_fields, record=record, diagnostics=diagnostics, newton_reports=reports)
