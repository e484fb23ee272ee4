"""
Testes para Schemas de Execução
CrackSense - Compósitos Autossensíveis
"""

import numpy as np
import pytest
from pydantic import ValidationError

from common.types import CaseRole, InputsMode, StopReason
from domain.parameters import ElectricalParams, MaterialParams
from domain.presets import ORIENTATION_PRESETS, TEMPERATURES_K, desk_plan, full_plan
from domain.run_schema import (
    ModelDocument,
    OrientationConfig,
    SimConfig,
    SweepCase,
    SweepPlan,
    TrainConfig,
    deep_merge,
)


def test_sim_config_defaults():
    """Testa configuração padrão válida."""
    config = SimConfig()

    assert config.geometry.width > config.geometry.notch
    assert config.mesh.h <= 0.5 * config.material.l0
    assert config.descriptors() == {"A11": 0.5, "A12": 0.0, "vf": 0.3, "theta": config.theta}


def test_sim_config_rejects_unknown_keys():
    """Testa que chaves desconhecidas são rejeitadas."""
    with pytest.raises(ValidationError):
        SimConfig.model_validate({"name": "x", "meshh": {"h": 0.01}})

    with pytest.raises(ValidationError):
        SimConfig.model_validate({"material": {"mu_eq": 700.0}})


def test_sim_config_mesh_resolution():
    """Testa h ≤ l0/2 na faixa refinada."""
    with pytest.raises(ValidationError):
        SimConfig.model_validate({"mesh": {"h": 0.02}, "material": {"l0": 0.02}})


def test_geometry_notch_must_be_inside():
    """Testa entalhe menor que a largura."""
    with pytest.raises(ValidationError):
        SimConfig.model_validate({"geometry": {"width": 1.0, "notch": 1.0}})


@pytest.mark.parametrize("vf", [-0.1, 1.5])
def test_volume_fraction_range(vf):
    """Testa v_f fora de [0, 1]."""
    with pytest.raises(ValidationError):
        SimConfig(vf=vf)


def test_orientation_kinds():
    """Testa as três formas de orientação."""
    angles = OrientationConfig(kind="angles", angles_deg=[0.0, 90.0])
    assert angles.weights == [0.5, 0.5]
    np.testing.assert_allclose(angles.tensor(), 0.5 * np.eye(2), atol=1e-15)

    tensor = OrientationConfig(kind="tensor", A11=0.7, A12=0.1)
    np.testing.assert_allclose(tensor.tensor(), [[0.7, 0.1], [0.1, 0.3]])

    np.testing.assert_allclose(OrientationConfig().tensor(), 0.5 * np.eye(2))


def test_orientation_requires_fields():
    """Testa campos obrigatórios por tipo de orientação."""
    with pytest.raises(ValidationError):
        OrientationConfig(kind="angles")
    with pytest.raises(ValidationError):
        OrientationConfig(kind="tensor", A11=0.5)
    with pytest.raises(ValidationError):
        OrientationConfig(kind="angles", angles_deg=[0.0, 45.0], weights=[1.0])


def test_material_params_frozen_and_validated():
    """Testa parâmetros imutáveis e limites."""
    params = MaterialParams()
    assert params.phase_field.l0 == params.l0

    with pytest.raises(ValidationError):
        MaterialParams(k_res=0.1)
    with pytest.raises(ValidationError):
        params.mu_eq0 = 1.0


def test_electrical_params_gauge_factor():
    """Testa gauge factor negativo."""
    with pytest.raises(ValidationError):
        ElectricalParams(gf_par=-1.0)


def test_deep_merge():
    """Testa mescla recursiva sem alterar a base."""
    base = {"mesh": {"h": 0.01, "band": 0.1}, "vf": 0.3}
    merged = deep_merge(base, {"mesh": {"h": 0.005}, "theta": 253.0})

    assert merged == {"mesh": {"h": 0.005, "band": 0.1}, "vf": 0.3, "theta": 253.0}
    assert base["mesh"]["h"] == 0.01


# ============================================================================
# PLANOS DE VARREDURA
# ============================================================================

def test_sweep_plan_resolve():
    """Testa resolução de um caso sobre a base."""
    plan = SweepPlan(
        base={"mesh": {"h": 0.01}, "vf": 0.3},
        cases=[SweepCase(name="a", role="Test", overrides={"vf": 0.5})],
    )
    config = plan.resolve(plan.cases[0])

    assert config.name == "a"
    assert config.vf == 0.5
    assert plan.cases[0].role == CaseRole.TEST


def test_sweep_plan_empty():
    """Testa plano sem casos."""
    with pytest.raises(ValidationError):
        SweepPlan(cases=[])


def test_sweep_plan_duplicate_names():
    """Testa nomes de caso duplicados."""
    with pytest.raises(ValidationError):
        SweepPlan(cases=[SweepCase(name="a"), SweepCase(name="a")])


def test_desk_plan():
    """Testa plano reduzido: sete casos a 298 K, um de teste."""
    plan = desk_plan()

    assert len(plan.cases) == 7
    assert [c.name for c in plan.cases if c.role == CaseRole.TEST] == ["0_60_50_50_vf30_T298"]
    for case in plan.cases:
        config = plan.resolve(case)
        assert config.theta == 298.0


def test_full_plan():
    """Testa plano completo em três temperaturas."""
    plan = full_plan()

    assert len(plan.cases) == 18 * len(TEMPERATURES_K)
    tests = sorted(c.name for c in plan.cases if c.role == CaseRole.TEST)
    assert tests == ["0_60_50_50_vf30_T298", "random_vf30_T298"]


def test_plan_case_descriptors_match_presets():
    """Testa descritores dos casos contra os presets."""
    plan = desk_plan()
    config = plan.resolve(plan.cases[-2])
    preset = ORIENTATION_PRESETS["0_60_50_50"]

    assert config.descriptors()["A11"] == pytest.approx(preset.A11, abs=5e-4)
    assert config.descriptors()["A12"] == pytest.approx(preset.A12, abs=5e-4)


# ============================================================================
# TREINAMENTO E MODELO
# ============================================================================

def test_train_config_defaults():
    """Testa configuração de treinamento padrão."""
    config = TrainConfig()

    assert config.hidden_layers == [16, 16]
    assert config.inputs_mode == InputsMode.WITH_TEMPERATURE
    assert config.lambda0 == pytest.approx(1e-3)


def test_train_config_patience():
    """Testa paciência menor que o número máximo de épocas."""
    with pytest.raises(ValidationError):
        TrainConfig(max_epochs=10, patience=10)


def _model_document(**overrides):
    data = {
        "layer_sizes": [2, 3, 2],
        "inputs_mode": 31,
        "input_columns": ["A11", "A12"],
        "output_columns": ["a_tilde", "C_tilde"],
        "layers": [
            {"weights": [[0.0, 0.0]] * 3, "biases": [0.0] * 3, "activation": "tanh"},
            {"weights": [[0.0] * 3] * 2, "biases": [0.0] * 2, "activation": "linear"},
        ],
        "input_stats": {"mean": [0.0, 0.0], "std": [1.0, 1.0]},
        "output_stats": {"mean": [0.0, 0.0], "std": [1.0, 1.0]},
        "metadata": {"seed": 1, "epochs_run": 0, "best_epoch": 0, "stop_reason": "max_epochs"},
    }
    data.update(overrides)
    return data


def test_model_document_valid():
    """Testa documento de modelo consistente."""
    doc = ModelDocument.model_validate(_model_document())

    assert doc.metadata.stop_reason == StopReason.MAX_EPOCHS
    assert doc.input_stats.provenance == "train"


def test_model_document_shape_mismatch():
    """Testa camadas inconsistentes com layer_sizes."""
    with pytest.raises(ValidationError):
        ModelDocument.model_validate(_model_document(layer_sizes=[2, 4, 2]))

    with pytest.raises(ValidationError):
        ModelDocument.model_validate(_model_document(input_columns=["A11"]))
