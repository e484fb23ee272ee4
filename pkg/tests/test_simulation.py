"""
Testes para o Driver de Simulação
CrackSense - Compósitos Autossensíveis
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from adapters.config_loader import load_sim_config
from common.exceptions import ConvergenceError
from common.metrics import SimulationMetrics, metrics
from common.types import ELECTRODE_PAIRS, RATIO_COLUMNS
from core import pipeline
from core.simulation import run_simulation
from core.solver import CoupledSolver
from domain.run_schema import SimConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _tiny(**loading) -> SimConfig:
    """Placa de fumaça com dois passos de carga."""
    return SimConfig.model_validate({
        "name": "tiny",
        "geometry": {"width": 1.0, "height": 1.0, "notch": 0.5},
        "mesh": {"h": 0.05, "band": 0.2, "h_coarse": 0.1},
        "orientation": {"kind": "angles", "angles_deg": [0.0]},
        "vf": 0.3,
        "theta": 298.0,
        "material": {"l0": 0.1},
        "loading": {"rate_mm_min": 1.0, "max_displacement": 0.001, "initial_increment": 0.0005, **loading},
        "solver": {"n_red": 3, "k_red": 2.0},
        "outputs": {"snapshot_displacements": [0.001]},
    })


class TestLoadReduction:
    """Testes para a redução adaptativa do incremento."""

    def test_exhausted_reductions_terminate_run(self, monkeypatch):
        """Testa n_red reduções por k_red e término preservando o passo 0."""
        increments = []

        def never_converges(self, fields, delta_u_bar, dt, run_eit=True):
            increments.append((delta_u_bar, dt))
            raise ConvergenceError("Staggered iteration did not converge", {"iterations": 1})

        metrics.reset()
        monkeypatch.setattr(CoupledSolver, "staggered_step", never_converges)
        result = run_simulation(_tiny())

        assert [du for du, _ in increments] == pytest.approx([5e-4, 2.5e-4, 1.25e-4, 6.25e-5])
        rate = 1.0 / 60.0
        assert [dt for _, dt in increments] == pytest.approx([du / rate for du, _ in increments])
        assert result.termination == "reductions_exhausted"
        assert len(result.records) == 1 and result.records[0].step == 0
        for level in (1, 2, 3):
            assert metrics.get_counter(SimulationMetrics.LOAD_REDUCTIONS, {"level": str(level)}) == 1
        assert metrics.get_counter(SimulationMetrics.RUNS_FAILED) == 1

    def test_reduced_step_recovers(self, monkeypatch):
        """Testa retomada após uma redução e registro nos diagnósticos."""
        original = CoupledSolver.staggered_step

        def coarse_increment_fails(self, fields, delta_u_bar, dt, run_eit=True):
            if delta_u_bar > 6e-4:
                raise ConvergenceError("Displacement Newton did not converge", {"iterations": 25})
            return original(self, fields, delta_u_bar, dt, run_eit=run_eit)

        monkeypatch.setattr(CoupledSolver, "staggered_step", coarse_increment_fails)
        result = run_simulation(_tiny(initial_increment=0.001, max_displacement=0.001))

        assert result.termination == "max_displacement"
        assert [d.reductions for d in result.diagnostics] == [0, 1, 0]
        assert [r.disp_mm for r in result.records] == pytest.approx([0.0, 5e-4, 1e-3])
        assert len(result.snapshots) == 1
        assert np.isfinite(result.snapshots[0].G_15) and result.snapshots[0].G_15 > 0.0


class TestDeterminism:
    """Testes para reprodutibilidade das execuções."""

    def test_steps_file_is_bit_identical(self, tmp_path):
        """Testa steps.csv idêntico byte a byte em duas execuções da mesma configuração."""
        config = _tiny()
        pipeline.run_case(config, str(tmp_path / "a"))
        pipeline.run_case(config, str(tmp_path / "b"))
        first = (tmp_path / "a" / "steps.csv").read_bytes()
        assert first == (tmp_path / "b" / "steps.csv").read_bytes()
        assert len(first.splitlines()) == 4


# ============================================================================
# CASO DE REFERÊNCIA
# ============================================================================

def _peak(result):
    forces = np.array([r.force_N for r in result.records])
    k = int(np.argmax(forces))
    return k, float(forces[k]), float(result.records[k].disp_mm)


@pytest.fixture(scope="module")
def reference_runs():
    """Caso de referência a 253, 296 e 323 K."""
    base = load_sim_config(str(CONFIGS / "reference.yaml"))
    runs = {}
    for theta in (253.0, 296.0, 323.0):
        config = SimConfig.model_validate({**base.model_dump(mode="json"), "theta": theta})
        runs[theta] = run_simulation(config)
    return runs


@pytest.mark.slow
@pytest.mark.integration
class TestReferenceCase:
    """Assinaturas do ensaio acoplado completo."""

    def test_runs_reach_fracture(self, reference_runs):
        """Testa término por queda de força."""
        assert all(r.termination == "force_drop" for r in reference_runs.values())

    def test_colder_is_stronger_and_more_brittle(self, reference_runs):
        """Testa força de pico maior e deslocamento de fratura menor a 253 K do que a 323 K."""
        _, cold_force, cold_disp = _peak(reference_runs[253.0])
        _, hot_force, hot_disp = _peak(reference_runs[323.0])
        assert cold_force > hot_force
        assert cold_disp < hot_disp

    def test_crack_length_jumps_after_peak(self, reference_runs):
        """Testa ã pequeno antes do pico e salto de pelo menos 0.1 em até 5 passos."""
        result = reference_runs[296.0]
        k, _, _ = _peak(result)
        a = np.array([r.a_tilde for r in result.records])
        assert np.all(a[:k] < 0.02)
        assert np.max(a[k:k + 6]) - a[k] >= 0.1

    def test_conductance_signatures(self, reference_runs):
        """Testa razões iniciais unitárias e queda maior no par que cruza a trinca."""
        result = reference_runs[296.0]
        steps = pd.DataFrame([r.as_row() for r in result.records])
        ratios = steps[RATIO_COLUMNS].to_numpy()

        np.testing.assert_allclose(ratios[0], 1.0)
        assert ratios[-1].min() < 0.5

        g15 = steps["g_15"].to_numpy()
        g37 = steps["g_37"].to_numpy()
        assert 1.0 - g15[-1] > 1.0 - g37[-1]
        assert steps["R_15_norm"].iloc[-1] == pytest.approx(1.0 / g15[-1])
        assert len(ELECTRODE_PAIRS) == ratios.shape[1]
