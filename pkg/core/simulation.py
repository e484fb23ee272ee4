"""
Driver de Simulação
CrackSense - Compósitos Autossensíveis

Carregamento por deslocamento prescrito no topo com taxa constante,
redução adaptativa do incremento em caso de falha de convergência,
critérios de parada e coleta de snapshots dos campos.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from common.exceptions import ConvergenceError, SimulationError
from common.logging import get_logger, log_execution_time
from common.metrics import SimulationMetrics, metrics
from common.types import ELECTRODE_PAIRS
from core.mesh import Mesh, build_sen_mesh
from core.sensing import conductance_pair, conductivity_tensor, solve_electric
from core.solver import CoupledSolver, FieldState, StepDiagnostics, StepOutcome, StepRecord
from domain.run_schema import SimConfig

logger = get_logger(__name__)

DISPLACEMENT_TOL = 1e-12
SNAPSHOT_PAIR = (1, 5)
SWEEP_AGREEMENT_RTOL = 1e-6


@dataclass
class Snapshot:
    """
    Campos nodais em um deslocamento marcado.

    φ_e é o potencial do par E1→E5 e G_15 a condutância do mesmo par.
    """
    step: int
    disp_mm: float
    u: np.ndarray
    phi: np.ndarray
    phi_e: np.ndarray
    G_15: float = float("nan")


@dataclass
class SimulationResult:
    mesh: Mesh
    records: List[StepRecord] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    termination: str = "max_displacement"
    peak_force: float = 0.0


def build_mesh(config: SimConfig) -> Mesh:
    g, m = config.geometry, config.mesh
    return build_sen_mesh(g.width, g.height, g.notch, m.h, m.band, coarse_h=m.h_coarse)


def _snapshot(solver: CoupledSolver, fields: FieldState) -> Snapshot:
    mesh = solver.mesh
    F = mesh.deformation_gradient(fields.u)
    phi_gp = np.clip(mesh.interpolate(fields.phi), 0.0, 1.0)
    sigma = conductivity_tensor(F, phi_gp, solver.orientation, solver.electrical)
    anode, cathode = SNAPSHOT_PAIR
    potential = solve_electric(
        mesh, sigma, solver.electrodes[anode], solver.electrodes[cathode],
        solver.electrical.v_app, scale=solver.electrical.sigma_par0,
    )
    G = conductance_pair(
        mesh, potential, sigma, solver.electrodes[anode], solver.electrical.v_app, thickness=solver.thickness,
    )
    swept_now = fields.step % solver.config.outputs.eit_every == 0
    if swept_now and solver.last_sweep is not None:
        G_sweep = float(solver.last_sweep.values[ELECTRODE_PAIRS.index(SNAPSHOT_PAIR)])
        if not np.isclose(G, G_sweep, rtol=SWEEP_AGREEMENT_RTOL, atol=0.0):
            logger.warning(
                "Snapshot conductance disagrees with EIT sweep",
                extra_data={"step": fields.step, "G_direct": G, "G_sweep": G_sweep}
            )
    fields.phi_e = potential
    return Snapshot(
        step=fields.step, disp_mm=fields.u_top,
        u=fields.u.copy(), phi=fields.phi.copy(), phi_e=potential, G_15=G,
    )


@log_execution_time(logger)
def run_simulation(
    config: SimConfig,
    on_step: Optional[Callable[[StepRecord, StepDiagnostics], None]] = None,
) -> SimulationResult:
    """
    Executa o ensaio de tração controlado por deslocamento.

    dt = Δū/taxa. Em falha de convergência Δū e dt são divididos por k_red
    até n_red vezes; esgotadas as reduções a execução termina preservando
    os passos já convergidos.

    Raises:
        SimulationError: Falha antes do primeiro passo de carga
    """
    mesh = build_mesh(config)
    solver = CoupledSolver(mesh, config)
    fields = FieldState.initial(mesh, config.theta)

    loading, cfg = config.loading, config.solver
    rate = loading.rate_mm_s
    targets = sorted(config.outputs.snapshot_displacements)

    result = SimulationResult(mesh=mesh)
    try:
        record, diagnostics = solver.reference_record(fields)
    except Exception as e:
        raise SimulationError("Reference electric sweep failed", {"error": str(e)}) from e
    result.records.append(record)
    result.diagnostics.append(diagnostics)
    if on_step:
        on_step(record, diagnostics)

    past_peak = False
    while fields.u_top < loading.max_displacement - DISPLACEMENT_TOL:
        du = min(loading.initial_increment, loading.max_displacement - fields.u_top)
        run_eit = (fields.step + 1) % config.outputs.eit_every == 0
        reductions = 0
        outcome: Optional[StepOutcome] = None
        while outcome is None:
            try:
                outcome = solver.staggered_step(fields, du, du / rate, run_eit=run_eit)
            except ConvergenceError as e:
                if reductions >= cfg.n_red:
                    logger.warning(
                        "Load reductions exhausted; terminating run",
                        extra_data={"step": fields.step + 1, "u_top": fields.u_top, "error": str(e)}
                    )
                    result.termination = "reductions_exhausted"
                    metrics.increment(SimulationMetrics.RUNS_FAILED)
                    return result
                reductions += 1
                du /= cfg.k_red
                SimulationMetrics.record_reduction(reductions)
                logger.info("Reducing load increment", extra_data={"level": reductions, "du": du})

        fields = outcome.fields
        outcome.diagnostics.reductions = reductions
        result.records.append(outcome.record)
        result.diagnostics.append(outcome.diagnostics)
        if on_step:
            on_step(outcome.record, outcome.diagnostics)

        while targets and fields.u_top >= targets[0] - DISPLACEMENT_TOL:
            targets.pop(0)
            result.snapshots.append(_snapshot(solver, fields))

        force = fields.reaction_top
        if force > result.peak_force:
            result.peak_force = force
        elif force < result.peak_force:
            past_peak = True
        if past_peak and force < loading.stop_force_ratio * result.peak_force:
            result.termination = "force_drop"
            break

    logger.info(
        "Simulation finished",
        extra_data={
            "name": config.name,
            "steps": len(result.records) - 1,
            "peak_force": result.peak_force,
            "termination": result.termination,
        }
    )
    return result
