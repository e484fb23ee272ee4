"""
Material
CrackSense - Compósitos Autossensíveis

Modelo constitutivo viscoelástico-viscoplástico em deformações finitas para
compósitos de fibra curta: energias livres, tensão de Cauchy, integração das
variáveis internas por mapa exponencial, energia motriz da trinca e tangente
espacial numérica.

Todas as operações são vetorizadas sobre lotes de pontos materiais: tensores
com shape (..., 3, 3) e escalares com shape (...). O problema 2D é tratado em
estado plano de deformação com F33 = 1.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.exceptions import DomainError, IntegrationError
from common.logging import get_logger
from common.metrics import metrics, SimulationMetrics
from common.types import (
    DEFAULT_FIXED_POINT_MAX_ITER,
    DEFAULT_FIXED_POINT_TOL,
    DEFAULT_LOCAL_NEWTON_MAX_ITER,
    DEFAULT_MAX_SUBDIVISIONS,
    DEFAULT_TANGENT_EPS,
)
from core.fracture import degradation
from core.microstructure import OrientationSpec
from core.tensorlab import (
    dev,
    frobenius_norm,
    green_lagrange,
    polar_decompose,
    sym,
    sym_matrix_exp,
    transpose,
)
from domain.parameters import MaterialParams

logger = get_logger(__name__)

I3 = np.eye(3)
VOIGT_PAIRS = ((0, 0), (1, 1), (0, 1))


# ============================================================================
# TIPOS
# ============================================================================

@dataclass
class MaterialState:
    """Estado de um lote de pontos materiais."""
    F: np.ndarray
    Fv: np.ndarray
    Fvp: np.ndarray
    history: np.ndarray
    theta: float

    @classmethod
    def reference(cls, batch_shape: Tuple[int, ...], theta: float) -> "MaterialState":
        """Estado não deformado, sem histórico."""
        eye = np.broadcast_to(I3, batch_shape + (3, 3)).copy()
        return cls(
            F=eye.copy(),
            Fv=eye.copy(),
            Fvp=eye.copy(),
            history=np.zeros(batch_shape),
            theta=float(theta),
        )

    def copy(self) -> "MaterialState":
        return MaterialState(
            F=self.F.copy(),
            Fv=self.Fv.copy(),
            Fvp=self.Fvp.copy(),
            history=self.history.copy(),
            theta=self.theta,
        )


@dataclass
class EnergyBreakdown:
    """Densidades de energia de equilíbrio, não equilíbrio e volumétrica (MJ/m³ = MPa)."""
    psi_eq: np.ndarray
    psi_neq: np.ndarray
    psi_vol_plus: np.ndarray
    psi_vol_minus: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.psi_eq + self.psi_neq + self.psi_vol_plus + self.psi_vol_minus


@dataclass
class StressResult:
    """Tensão de Cauchy total, parte de não equilíbrio e energias."""
    sigma: np.ndarray
    sigma_neq: np.ndarray
    breakdown: EnergyBreakdown
    g: np.ndarray = field(default=None)


# ============================================================================
# LEIS ESCALARES
# ============================================================================

def temperature_moduli(theta: float, params: MaterialParams) -> Tuple[float, float]:
    """
    Módulos de cisalhamento dependentes da temperatura (Kitagawa modificado).

    Raises:
        DomainError: Se o fator 2 − exp(α(θ − θ0)) não for positivo
    """
    exponent = params.alpha_theta * (theta - params.theta0)
    if not np.isfinite(exponent):
        raise DomainError("Temperature exponent is not finite", {"theta": theta})
    factor = 2.0 - np.exp(exponent)
    if factor <= 0.0:
        raise DomainError(
            "Temperature too high: shear moduli would be non-positive",
            {"theta": theta, "factor": float(factor)}
        )
    return params.mu_eq0 * factor, params.mu_neq0 * factor


def thermal_jacobian(theta: float, params: MaterialParams) -> float:
    """J_θ = 1 + α_exp(θ − θ0), aplicado uma vez no início da simulação."""
    J_theta = 1.0 + params.alpha_expansion * (theta - params.theta0)
    if J_theta <= 0.0:
        raise DomainError("Thermal volume ratio must be positive", {"J_theta": J_theta})
    return J_theta


def viscous_rate(tau_neq, theta: float, params: MaterialParams) -> np.ndarray:
    """Taxa viscosa de Argon com ativação de Arrhenius (1/s)."""
    tau = np.asarray(tau_neq, dtype=float)
    if np.any(tau < -1e-12):
        raise DomainError("Viscous driving stress must be non-negative")
    tau = np.maximum(tau, 0.0)
    activation = params.delta_H / (params.kb * theta)
    return params.eps_dot0 * np.exp(activation * ((tau / params.tau0) ** params.m_exp - 1.0))


def viscoplastic_rate(tau_tot, eps, eps_dot, params: MaterialParams) -> np.ndarray:
    """Taxa viscoplástica com limiar σ0; base (ε − ε0) truncada em zero."""
    tau_tot = np.asarray(tau_tot, dtype=float)
    base = np.maximum(np.asarray(eps, dtype=float) - params.eps0_vp, 0.0)
    rate = params.a_vp * base ** params.b_vp * np.asarray(eps_dot, dtype=float)
    return np.where(tau_tot < params.sigma0_vp, 0.0, rate)


# ============================================================================
# ENERGIAS E TENSÕES
# ============================================================================

def _fiber_coefficients(I4: np.ndarray, v: float, params: MaterialParams):
    """Funções de enrijecimento f, g1, g2 e suas derivadas em relação a Ī4."""
    e = np.exp(params.a3 * (I4 - 1.0))
    f = params.a1 + params.a2 * e
    fp = params.a2 * params.a3 * e

    den1 = (1.0 - v) * f + 1.0 + v
    g1 = ((1.0 + v) * f + (1.0 - v)) / den1
    g1p = fp * ((1.0 + v) ** 2 - (1.0 - v) ** 2) / den1 ** 2

    den2 = (1.0 - v) * f + 0.4 + v
    g2 = ((1.0 + 0.4 * v) * f + 0.4 * (1.0 - v)) / den2
    g2p = fp * ((1.0 + 0.4 * v) * (0.4 + v) - 0.4 * (1.0 - v) ** 2) / den2 ** 2
    return f, fp, g1, g1p, g2, g2p


def _branch_response(
    Fbar: np.ndarray,
    mu: float,
    orientation: OrientationSpec,
    params: MaterialParams,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Energia e tensão de Kirchhoff isocórica de um ramo (equilíbrio ou não equilíbrio).

    Matriz neo-Hookeana mais uma contribuição por família de fibras ponderada
    pela sua fração volumétrica efetiva.
    """
    C = transpose(Fbar) @ Fbar
    B = Fbar @ transpose(Fbar)
    I1 = np.trace(C, axis1=-2, axis2=-1)

    psi = 0.5 * mu * (I1 - 3.0)
    tau = mu * dev(B)

    vm = orientation.vm
    for family, a0 in zip(orientation.families, orientation.directions_3d()):
        v = family.volume_fraction
        if v <= 0.0:
            continue
        fa = Fbar @ a0
        Ca0 = C @ a0
        I4 = np.einsum('...i,...i->...', fa, fa)
        I5 = np.einsum('...i,...i->...', Ca0, Ca0)
        f, fp, g1, g1p, g2, g2p = _fiber_coefficients(I4, v, params)

        P = vm + v * f
        Q = I4 + 2.0 * I4 ** -0.5 - 3.0
        shear = (I5 - I4 ** 2) / I4
        cross = I1 - (I5 + 2.0 * I4 ** 0.5) / I4

        psi_f = 0.5 * mu * (P * Q + g1 * shear + g2 * cross)
        W1 = 0.5 * mu * g2
        W4 = 0.5 * mu * (
            v * fp * Q
            + P * (1.0 - I4 ** -1.5)
            + g1p * shear
            - g1 * (I5 / I4 ** 2 + 1.0)
            + g2p * cross
            + g2 * (I5 / I4 ** 2 + I4 ** -1.5)
        )
        W5 = mu / (2.0 * I4) * (g1 - g2)

        Bfa = np.einsum('...ij,...j->...i', B, fa)
        fa_fa = np.einsum('...i,...j->...ij', fa, fa)
        fa_Bfa = np.einsum('...i,...j->...ij', fa, Bfa)
        tau_tilde = 2.0 * (
            W1[..., None, None] * B
            + W4[..., None, None] * fa_fa
            + W5[..., None, None] * (fa_Bfa + transpose(fa_Bfa))
        )
        psi = psi + v * psi_f
        tau = tau + v * dev(tau_tilde)

    return psi, tau


def _volumetric(J: np.ndarray, theta: float, params: MaterialParams):
    """Energia e pressão volumétricas em função de J_m = J/J_θ."""
    J_theta = thermal_jacobian(theta, params)
    Jm = J / J_theta
    psi = 0.5 * params.kv0 * (0.5 * (Jm ** 2 - 1.0) - np.log(Jm))
    pressure = 0.5 * params.kv0 * (Jm - 1.0 / Jm) / J_theta
    return Jm, psi, pressure


def _kinematics(F: np.ndarray, Fv: np.ndarray, Fvp: np.ndarray):
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        raise DomainError(
            "Deformation gradient must have positive determinant",
            {"min_det": float(np.min(J))}
        )
    Fbar = J[..., None, None] ** (-1.0 / 3.0) * F
    Fbar_ve = Fbar @ np.linalg.inv(Fvp)
    Fbar_e = Fbar_ve @ np.linalg.inv(Fv)
    return J, Fbar, Fbar_ve, Fbar_e


def eval_stress(
    F: np.ndarray,
    Fv: np.ndarray,
    Fvp: np.ndarray,
    phi,
    theta: float,
    orientation: OrientationSpec,
    params: MaterialParams,
) -> StressResult:
    """
    Tensão de Cauchy total com degradação assimétrica tração/compressão.

    σ = g(φ)(σ_dev + ⟨σ_vol⟩₊) + ⟨σ_vol⟩₋

    Raises:
        DomainError: Se det(F) ≤ 0
    """
    F = np.asarray(F, dtype=float)
    J, _, Fbar_ve, Fbar_e = _kinematics(F, np.asarray(Fv, float), np.asarray(Fvp, float))
    mu_eq, mu_neq = temperature_moduli(theta, params)

    psi_eq, tau_eq = _branch_response(Fbar_ve, mu_eq, orientation, params)
    psi_neq, tau_neq = _branch_response(Fbar_e, mu_neq, orientation, params)
    Jm, psi_vol, pressure = _volumetric(J, theta, params)

    phi = np.broadcast_to(np.asarray(phi, dtype=float), J.shape)
    g, _, _ = degradation(phi, params.k_res)

    J_inv = (1.0 / J)[..., None, None]
    sigma_dev = (tau_eq + tau_neq) * J_inv
    sigma_neq = tau_neq * J_inv
    sigma_vol = pressure[..., None, None] * I3

    tensile = Jm >= 1.0
    gm = g[..., None, None]
    sigma = np.where(
        tensile[..., None, None],
        gm * (sigma_dev + sigma_vol),
        gm * sigma_dev + sigma_vol,
    )

    breakdown = EnergyBreakdown(
        psi_eq=psi_eq,
        psi_neq=psi_neq,
        psi_vol_plus=np.where(tensile, psi_vol, 0.0),
        psi_vol_minus=np.where(tensile, 0.0, psi_vol),
    )
    return StressResult(sigma=sym(sigma), sigma_neq=sigma_neq, breakdown=breakdown, g=g)


def crack_driving_energy(breakdown: EnergyBreakdown) -> np.ndarray:
    """Y = ψ_eq + ψ_neq + ⟨ψ_vol⟩₊."""
    return breakdown.psi_eq + breakdown.psi_neq + breakdown.psi_vol_plus


def update_history(H_n, Y_new) -> np.ndarray:
    """Campo histórico irreversível: H_{n+1} = max(H_n, Y)."""
    H_n = np.asarray(H_n, dtype=float)
    if np.any(H_n < 0.0):
        raise DomainError("History field must be non-negative")
    return np.maximum(H_n, Y_new)


# ============================================================================
# INTEGRAÇÃO DAS VARIÁVEIS INTERNAS
# ============================================================================

STRESS_FLOOR = 1e-12
LOCAL_TOL_FACTOR = 1e-3
LOCAL_TOL_FLOOR = 1e-13
LOCAL_JACOBIAN_STEP = 1e-8
MAX_LINE_SEARCH_HALVINGS = 12


def _deviatoric_basis() -> np.ndarray:
    """Base ortonormal (Frobenius) dos tensores 3×3 simétricos de traço nulo."""
    basis = np.zeros((5, 3, 3))
    basis[0] = np.diag([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    basis[1] = np.diag([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    for k, (i, j) in enumerate(((0, 1), (0, 2), (1, 2)), start=2):
        basis[k, i, j] = basis[k, j, i] = 1.0 / np.sqrt(2.0)
    return basis


DEV_BASIS = _deviatoric_basis()


def _to_components(T: np.ndarray) -> np.ndarray:
    return np.einsum('...ij,kij->...k', T, DEV_BASIS)


def _from_components(x: np.ndarray) -> np.ndarray:
    return np.einsum('...k,kij->...ij', x, DEV_BASIS)


@dataclass
class _ViscousProblem:
    """
    Atualização viscosa de um lote achatado de pontos.

    Incógnita x: componentes de Γ = Δt·Dᵛ na base desviadora, com
    F̄ᵛ = exp(Γ)·F̄ᵛₙ. Resíduo R(x) = x − Δt·ε̇ᵛ(‖s‖)·s/‖s‖, com s a tensão de
    não equilíbrio degradada girada por R_e para a configuração intermediária.
    """
    Fbar_ve: np.ndarray
    Fv_n_inv: np.ndarray
    scale: np.ndarray
    dt: float
    mu_neq: float
    theta: float
    orientation: OrientationSpec
    params: MaterialParams

    def subset(self, idx: np.ndarray) -> "_ViscousProblem":
        return replace(self, Fbar_ve=self.Fbar_ve[idx], Fv_n_inv=self.Fv_n_inv[idx], scale=self.scale[idx])

    def elastic(self, x: np.ndarray) -> np.ndarray:
        return self.Fbar_ve @ self.Fv_n_inv @ sym_matrix_exp(-_from_components(x))

    def stress(self, Fbar_e: np.ndarray, Re: np.ndarray) -> np.ndarray:
        """Componentes de s = dev(R_eᵀ·(g/J)·τ_neq·R_e)."""
        _, tau = _branch_response(Fbar_e, self.mu_neq, self.orientation, self.params)
        rotated = transpose(Re) @ (self.scale[:, None, None] * tau) @ Re
        return _to_components(dev(sym(rotated)))

    def residual(self, x: np.ndarray, Re: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """R(x) e a rotação usada; com Re dado a rotação fica congelada."""
        Fbar_e = self.elastic(x)
        if Re is None:
            Re = polar_decompose(Fbar_e).rotation
        s = self.stress(Fbar_e, Re)
        norm = np.linalg.norm(s, axis=1)
        active = norm > STRESS_FLOOR
        with np.errstate(over="ignore", invalid="ignore"):
            amount = self.dt * viscous_rate(norm, self.theta, self.params)
            flow = np.where(active[:, None], amount[:, None] * s / np.where(active, norm, 1.0)[:, None], 0.0)
        return x - flow, Re


def _trial_magnitude(
    problem: _ViscousProblem,
    N: np.ndarray,
    Re: np.ndarray,
    cap: np.ndarray,
    max_iter: int = 100,
) -> np.ndarray:
    """
    Preditor escalar: Δγ = Δt·ε̇ᵛ(N:s(Δγ·N)) ao longo da direção de tentativa N.

    Regula falsi (Illinois) sobre [0, min(Δt·ε̇ᵛ(s₀), cap)] com R_e congelado.
    """
    def projected(gamma: np.ndarray) -> np.ndarray:
        Fbar_e = problem.elastic(gamma[:, None] * N)
        return np.einsum('nk,nk->n', N, problem.stress(Fbar_e, Re))

    def residual(gamma: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            rate = viscous_rate(np.maximum(projected(gamma), 0.0), problem.theta, problem.params)
        return gamma - problem.dt * rate

    lo = np.zeros(N.shape[0])
    f_lo = residual(lo)
    hi = np.minimum(-f_lo, cap)
    f_hi = residual(hi)
    gamma = np.where(f_hi <= 0.0, hi, lo)
    pending = (f_hi > 0.0) & (f_lo < 0.0) & (hi > 0.0)

    for _ in range(max_iter):
        if not np.any(pending):
            break
        with np.errstate(invalid="ignore"):
            c = np.where(pending, hi - f_hi * (hi - lo) / np.where(pending, f_hi - f_lo, 1.0), gamma)
        c = np.clip(np.nan_to_num(c, nan=0.5 * (lo + hi)), np.minimum(lo, hi), np.maximum(lo, hi))
        f_c = residual(c)
        same_side = f_c * f_hi > 0.0
        # Illinois: reduz pela metade o valor da extremidade retida
        f_lo = np.where(pending & same_side, 0.5 * f_lo, f_lo)
        lo = np.where(pending & ~same_side, hi, lo)
        f_lo = np.where(pending & ~same_side, f_hi, f_lo)
        hi = np.where(pending, c, hi)
        f_hi = np.where(pending, f_c, f_hi)
        gamma = np.where(pending, c, gamma)
        done = (np.abs(f_c) <= 1e-15 + 1e-12 * np.abs(c)) | (np.abs(hi - lo) <= 1e-15)
        pending = pending & ~done

    return gamma


def _newton_direction(problem: _ViscousProblem, x: np.ndarray, R: np.ndarray, Re: np.ndarray) -> np.ndarray:
    """Passo de Newton com jacobiano 5×5 por diferenças progressivas (R_e congelado)."""
    jac = np.empty(x.shape + (x.shape[1],))
    for k in range(x.shape[1]):
        shifted = x.copy()
        shifted[:, k] += LOCAL_JACOBIAN_STEP
        R_k, _ = problem.residual(shifted, Re)
        jac[:, :, k] = (R_k - R) / LOCAL_JACOBIAN_STEP
    try:
        return -np.linalg.solve(jac, R[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise IntegrationError(
            "Singular local Jacobian in viscous update",
            residual=float(np.max(np.linalg.norm(R, axis=1))),
            details={"error": str(e)},
        ) from e


def _line_search(
    problem: _ViscousProblem,
    x: np.ndarray,
    R: np.ndarray,
    Re: np.ndarray,
    norm: np.ndarray,
    step: np.ndarray,
):
    """Backtracking por ponto com decréscimo suficiente de ‖R‖; o último corte é aceito se finito."""
    x, R, Re, norm = x.copy(), R.copy(), Re.copy(), norm.copy()
    alpha = np.ones(x.shape[0])
    todo = np.arange(x.shape[0])
    reference = norm.copy()
    for halving in range(MAX_LINE_SEARCH_HALVINGS + 1):
        trial = x[todo] + alpha[todo, None] * step[todo]
        R_t, Re_t = problem.subset(todo).residual(trial)
        n_t = np.linalg.norm(R_t, axis=1)
        finite = np.isfinite(n_t)
        accept = finite & (n_t <= (1.0 - 1e-4 * alpha[todo]) * reference[todo])
        if halving == MAX_LINE_SEARCH_HALVINGS:
            accept = finite
        sel = todo[accept]
        x[sel], R[sel], Re[sel], norm[sel] = trial[accept], R_t[accept], Re_t[accept], n_t[accept]
        todo = todo[~accept]
        if todo.size == 0:
            break
        alpha[todo] *= 0.5
    return x, R, Re, norm


def _viscous_update(
    Fbar_ve: np.ndarray,
    J: np.ndarray,
    Fv_n: np.ndarray,
    g: np.ndarray,
    dt: float,
    mu_neq: float,
    theta: float,
    orientation: OrientationSpec,
    params: MaterialParams,
    tol: float,
    max_iter: int = DEFAULT_LOCAL_NEWTON_MAX_ITER,
) -> np.ndarray:
    """
    F̄ᵛ_{n+1} implícito: direção e magnitude do fluxo resolvidas juntas.

    Preditor escalar ao longo da direção de tentativa seguido de Newton
    local nas cinco componentes desviadoras, com busca linear.

    Raises:
        IntegrationError: ‖R‖ acima de tol após max_iter iterações
    """
    batch = J.shape
    problem = _ViscousProblem(
        Fbar_ve=Fbar_ve.reshape(-1, 3, 3),
        Fv_n_inv=np.linalg.inv(Fv_n).reshape(-1, 3, 3),
        scale=(g / J).reshape(-1),
        dt=dt,
        mu_neq=mu_neq,
        theta=theta,
        orientation=orientation,
        params=params,
    )
    n = problem.scale.size
    x = np.zeros((n, DEV_BASIS.shape[0]))

    Fbar_e0 = problem.elastic(x)
    Re0 = polar_decompose(Fbar_e0).rotation
    s0 = problem.stress(Fbar_e0, Re0)
    s0_norm = np.linalg.norm(s0, axis=1)
    active = np.where(s0_norm > STRESS_FLOOR)[0]
    if active.size:
        sub = problem.subset(active)
        N = s0[active] / s0_norm[active, None]
        cap = s0_norm[active] / (sub.scale * mu_neq) + 1e-14
        x[active] = _trial_magnitude(sub, N, Re0[active], cap)[:, None] * N

    R, Re = problem.residual(x)
    norm = np.linalg.norm(R, axis=1)
    pending = np.where(~(norm <= tol))[0]
    iterations = 0
    while pending.size and iterations < max_iter:
        iterations += 1
        sub = problem.subset(pending)
        step = _newton_direction(sub, x[pending], R[pending], Re[pending])
        x[pending], R[pending], Re[pending], norm[pending] = _line_search(
            sub, x[pending], R[pending], Re[pending], norm[pending], step
        )
        pending = pending[~(norm[pending] <= tol)]

    if pending.size:
        raise IntegrationError(
            "Viscous update did not converge",
            residual=float(np.max(norm[pending])),
            details={"points": int(pending.size), "dt": dt, "max_iter": max_iter},
        )
    metrics.increment(SimulationMetrics.LOCAL_NEWTON_ITERATIONS, value=iterations)
    Fv = sym_matrix_exp(_from_components(x)) @ Fv_n.reshape(-1, 3, 3)
    return Fv.reshape(batch + (3, 3))


def _integrate_step(
    F_next: np.ndarray,
    state_n: MaterialState,
    dt: float,
    phi: np.ndarray,
    orientation: OrientationSpec,
    params: MaterialParams,
    tol: float,
    max_iter: int,
) -> MaterialState:
    """Um incremento sem subdivisão: ponto fixo entre F̄ᵛᵖ explícito na tensão e F̄ᵛ implícito."""
    J, Fbar, _, _ = _kinematics(F_next, state_n.Fv, state_n.Fvp)
    theta = state_n.theta
    _, mu_neq = temperature_moduli(theta, params)
    g, _, _ = degradation(phi, params.k_res)
    local_tol = max(LOCAL_TOL_FACTOR * tol, LOCAL_TOL_FLOOR)

    E_next = green_lagrange(F_next)
    eps = frobenius_norm(E_next)
    eps_dot = frobenius_norm(E_next - green_lagrange(state_n.F)) / dt

    Fv = state_n.Fv.copy()
    Fvp = state_n.Fvp.copy()
    solved_for: Optional[np.ndarray] = None
    residual = np.inf

    for iteration in range(1, max_iter + 1):
        result = eval_stress(F_next, Fv, Fvp, phi, theta, orientation, params)
        s_dev = dev(result.sigma)
        tau_tot = frobenius_norm(s_dev)
        rate_vp = viscoplastic_rate(tau_tot, eps, eps_dot, params)
        plastic = (rate_vp > 0.0) & (tau_tot > 0.0)

        if np.any(plastic):
            Rve = polar_decompose(Fbar @ np.linalg.inv(Fvp)).rotation
            Dvp = dev(sym(transpose(Rve) @ s_dev @ Rve))
            Dvp = Dvp * np.where(plastic, rate_vp / np.where(plastic, tau_tot, 1.0), 0.0)[..., None, None]
            Fvp_new = sym_matrix_exp(dt * Dvp) @ state_n.Fvp
        else:
            Fvp_new = state_n.Fvp.copy()

        if solved_for is None or not np.array_equal(Fvp_new, solved_for):
            Fbar_ve = Fbar @ np.linalg.inv(Fvp_new)
            Fv_new = _viscous_update(Fbar_ve, J, state_n.Fv, g, dt, mu_neq, theta, orientation, params, local_tol)
            solved_for = Fvp_new

        change = frobenius_norm(Fv_new - Fv) + frobenius_norm(Fvp_new - Fvp)
        residual = float(np.max(change)) if change.size else 0.0
        Fv, Fvp = Fv_new, Fvp_new
        if residual < tol:
            metrics.increment(SimulationMetrics.INTERNAL_ITERATIONS, value=iteration)
            return MaterialState(F=F_next.copy(), Fv=Fv, Fvp=Fvp, history=state_n.history.copy(), theta=theta)

    raise IntegrationError(
        "Internal variable fixed-point iteration did not converge",
        residual=residual,
        details={"max_iter": max_iter, "dt": dt},
    )


def integrate_internal(
    F_next: np.ndarray,
    state_n: MaterialState,
    dt: float,
    phi,
    orientation: OrientationSpec,
    params: MaterialParams,
    tol: float = DEFAULT_FIXED_POINT_TOL,
    max_iter: int = DEFAULT_FIXED_POINT_MAX_ITER,
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS,
) -> MaterialState:
    """
    Integra F̄ᵛ e F̄ᵛᵖ em [t_n, t_{n+1}] pelo mapa exponencial.

    O fluxo viscoso é implícito em direção e magnitude (Newton local); a
    tensão de não equilíbrio é girada pela rotação elástica R_e antes de
    dirigir o fluxo. O fluxo viscoplástico só é ativado quando τ_tot ≥ σ0.
    Se o incremento falhar, Δt é dividido em 2, 4, … até 2^max_subdivisions
    subpassos com F interpolado linearmente entre F_n e F_{n+1}.

    Raises:
        DomainError: Se dt ≤ 0 ou det(F_next) ≤ 0
        IntegrationError: Se nem a maior subdivisão convergir
    """
    if dt <= 0.0:
        raise DomainError("Time increment must be positive", {"dt": dt})
    F_next = np.asarray(F_next, dtype=float)
    F_n = np.broadcast_to(state_n.F, F_next.shape)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), F_next.shape[:-2])

    failure: Optional[IntegrationError] = None
    for level in range(max_subdivisions + 1):
        n_sub = 2 ** level
        try:
            state = state_n
            for k in range(1, n_sub + 1):
                F_k = F_next if k == n_sub else F_n + (k / n_sub) * (F_next - F_n)
                state = _integrate_step(F_k, state, dt / n_sub, phi, orientation, params, tol, max_iter)
        except IntegrationError as e:
            failure = e
            continue
        if level:
            metrics.increment(SimulationMetrics.INTERNAL_SUBDIVISIONS)
            logger.debug("Internal integration subdivided", extra_data={"substeps": n_sub, "dt": dt})
        return state

    raise IntegrationError(
        "Internal variable integration failed at every subdivision",
        residual=failure.residual,
        details={**failure.details, "substeps": 2 ** max_subdivisions},
    )


# ============================================================================
# TANGENTE ESPACIAL
# ============================================================================

def spatial_tangent(
    state: MaterialState,
    phi,
    orientation: OrientationSpec,
    params: MaterialParams,
    eps_pert: float = DEFAULT_TANGENT_EPS,
    sigma: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Tangente espacial no plano em notação de Voigt (11, 22, 12), cisalhamento de engenharia.

    Colunas Jaumann por diferenças centrais com perturbações simétricas
    ΔF = ±(ε/2)(e_k⊗e_l + e_l⊗e_k)F e variáveis internas congeladas, seguidas
    da correção para a taxa de Truesdell e simetrização maior. As seis
    perturbações são avaliadas numa única chamada vetorizada sobre o lote.
    """
    if eps_pert <= 0.0:
        raise DomainError("Perturbation size must be positive", {"eps_pert": eps_pert})
    F = state.F
    if sigma is None:
        sigma = eval_stress(F, state.Fv, state.Fvp, phi, state.theta, orientation, params).sigma

    perturbations = np.zeros((2 * len(VOIGT_PAIRS), 3, 3))
    for a, (k, l) in enumerate(VOIGT_PAIRS):
        perturbations[2 * a, k, l] += 0.5 * eps_pert
        perturbations[2 * a, l, k] += 0.5 * eps_pert
        perturbations[2 * a + 1] = -perturbations[2 * a]
    F_stack = F + np.einsum('pij,...jk->p...ik', perturbations, F)
    s_stack = eval_stress(F_stack, state.Fv, state.Fvp, phi, state.theta, orientation, params).sigma

    batch = F.shape[:-2]
    C = np.zeros(batch + (2, 2, 2, 2))
    for a, (k, l) in enumerate(VOIGT_PAIRS):
        column = (s_stack[2 * a] - s_stack[2 * a + 1])[..., :2, :2] / (2.0 * eps_pert)
        C[..., :, :, k, l] = column
        C[..., :, :, l, k] = column

    s2 = sigma[..., :2, :2]
    d = np.eye(2)
    correction = 0.5 * (
        np.einsum('ik,...jl->...ijkl', d, s2)
        + np.einsum('il,...jk->...ijkl', d, s2)
        + np.einsum('...ik,jl->...ijkl', s2, d)
        + np.einsum('...il,jk->...ijkl', s2, d)
    )
    c_hat = C - correction + np.einsum('...ij,kl->...ijkl', s2, d)

    D = np.empty(batch + (3, 3))
    for a, (i, j) in enumerate(VOIGT_PAIRS):
        for b, (k, l) in enumerate(VOIGT_PAIRS):
            D[..., a, b] = c_hat[..., i, j, k, l]
    return 0.5 * (D + transpose(D))


# ============================================================================
# VARREDURA POLAR DA FORÇA MOTRIZ
# ============================================================================

def _stretch_along(angles_rad: np.ndarray, strain: float) -> np.ndarray:
    """Estiramento isocórico no plano: λ ao longo de d, 1/λ na normal, F33 = 1."""
    lam = 1.0 + strain
    c, s = np.cos(angles_rad), np.sin(angles_rad)
    d = np.stack([c, s, np.zeros_like(c)], axis=-1)
    n = np.stack([-s, c, np.zeros_like(c)], axis=-1)
    F = (
        lam * np.einsum('...i,...j->...ij', d, d)
        + (1.0 / lam) * np.einsum('...i,...j->...ij', n, n)
    )
    F[..., 2, 2] = 1.0
    return F


def polar_sweep(
    strain_magnitude: float,
    directions: Sequence[float],
    times: Sequence[float],
    orientation: OrientationSpec,
    params: MaterialParams,
    theta: Optional[float] = None,
    substeps: int = 20,
) -> List[Dict[str, float]]:
    """
    Força motriz da trinca em função da direção de carregamento durante relaxação.

    Para cada direção (radianos) aplica-se instantaneamente o estiramento em
    t = 0 e mantém-se F fixo; cada instante listado é alcançado por subpassos
    geometricamente espaçados. A linha t = 0 é a resposta instantânea (pico).

    Returns:
        Lista de linhas com direction_deg, time_s, Y, psi_eq, psi_neq, psi_vol
    """
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])) or (times and times[0] <= 0.0):
        raise DomainError("Hold times must be positive and strictly ascending")

    theta = params.theta0 if theta is None else theta
    angles = np.asarray(directions, dtype=float)
    F = _stretch_along(angles, strain_magnitude)
    state = MaterialState.reference(angles.shape, theta)
    state.F = F.copy()

    rows: List[Dict[str, float]] = []

    def record(t: float, current: MaterialState) -> None:
        result = eval_stress(current.F, current.Fv, current.Fvp, 0.0, theta, orientation, params)
        b = result.breakdown
        Y = crack_driving_energy(b)
        for k, angle in enumerate(angles):
            rows.append({
                "direction_deg": float(np.degrees(angle)),
                "time_s": t,
                "Y": float(Y[k]),
                "psi_eq": float(b.psi_eq[k]),
                "psi_neq": float(b.psi_neq[k]),
                "psi_vol": float(b.psi_vol_plus[k] + b.psi_vol_minus[k]),
            })

    record(0.0, state)
    t_prev = 0.0
    for t in times:
        start = max(t_prev, min(times[0], 1e-9) * 1e-3)
        marks = np.geomspace(start, t, substeps + 1)
        if t_prev == 0.0:
            marks = np.concatenate([[0.0], marks])
        for t0, t1 in zip(marks[:-1], marks[1:]):
            state = integrate_internal(F, state, float(t1 - t0), 0.0, orientation, params)
        record(t, state)
        t_prev = t

    logger.info(
        "Polar sweep completed",
        extra_data={"directions": len(angles), "times": len(times), "strain": strain_magnitude}
    )
    return rows
