"""
Testes para Config Loader
CrackSense - Compósitos Autossensíveis
"""

from pathlib import Path

import pytest
import yaml

from adapters.config_loader import (
    load_sim_config,
    load_sweep_plan,
    load_train_config,
    read_yaml,
)
from common.exceptions import ConfigurationError
from common.types import CaseRole, InputsMode

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(path: Path, data) -> str:
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestReadYaml:
    """Testes para leitura de YAML."""

    def test_missing_file(self, tmp_path):
        """Testa arquivo inexistente."""
        with pytest.raises(ConfigurationError):
            read_yaml(str(tmp_path / "nope.yaml"))

    def test_invalid_yaml(self, tmp_path):
        """Testa YAML malformado."""
        path = tmp_path / "bad.yaml"
        path.write_text("mesh: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            read_yaml(str(path))

    def test_non_mapping_root(self, tmp_path):
        """Testa raiz que não é mapeamento."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            read_yaml(str(path))


class TestSimConfig:
    """Testes para carregamento de SimConfig."""

    def test_bundled_configs(self):
        """Testa os arquivos de configuração do repositório."""
        smoke = load_sim_config(str(CONFIGS / "smoke.yaml"))
        assert smoke.name == "smoke"
        assert smoke.outputs.snapshot_displacements == [0.0025, 0.005]
        assert load_sim_config(str(CONFIGS / "reference.yaml")).mesh.h <= 0.01

    def test_unknown_key_named_in_error(self, tmp_path):
        """Testa que a chave rejeitada aparece no erro."""
        path = _write(tmp_path / "bad.yaml", {"name": "x", "loading": {"rate": 1.0}})
        with pytest.raises(ConfigurationError) as exc_info:
            load_sim_config(path)
        assert "loading.rate" in exc_info.value.details["keys"]


class TestSweepPlan:
    """Testes para carregamento de planos de varredura."""

    def test_bundled_desk_plan(self):
        """Testa plano de bancada do repositório."""
        plan = load_sweep_plan(str(CONFIGS / "desk_plan.yaml"))
        assert len(plan.cases) == 7
        assert sum(c.role == CaseRole.TEST for c in plan.cases) == 1

    def test_named_preset(self):
        """Testa preset sem arquivo."""
        assert len(load_sweep_plan(preset="full").cases) == 54

    def test_unknown_preset(self):
        """Testa preset desconhecido."""
        with pytest.raises(ConfigurationError):
            load_sweep_plan(preset="huge")

    def test_explicit_cases(self, tmp_path):
        """Testa plano com casos explícitos."""
        path = _write(tmp_path / "plan.yaml", {
            "base": {"mesh": {"h": 0.01}},
            "cases": [
                {"name": "a", "overrides": {"vf": 0.2}},
                {"name": "b", "role": "Test", "overrides": {"theta": 253.0}},
            ],
        })
        plan = load_sweep_plan(path)
        assert [c.name for c in plan.cases] == ["a", "b"]

    def test_invalid_case_fails_upfront(self, tmp_path):
        """Testa caso inválido detectado antes da varredura."""
        path = _write(tmp_path / "plan.yaml", {
            "cases": [{"name": "a"}, {"name": "b", "overrides": {"vf": 2.0}}],
        })
        with pytest.raises(ConfigurationError) as exc_info:
            load_sweep_plan(path)
        assert exc_info.value.details["case"] == "b"

    def test_preset_with_extra_keys(self, tmp_path):
        """Testa chaves extras ao lado de preset."""
        path = _write(tmp_path / "plan.yaml", {"preset": "desk", "cases": []})
        with pytest.raises(ConfigurationError):
            load_sweep_plan(path)

    def test_duplicate_case_names(self, tmp_path):
        """Testa nomes duplicados."""
        path = _write(tmp_path / "plan.yaml", {"cases": [{"name": "a"}, {"name": "a"}]})
        with pytest.raises(ConfigurationError):
            load_sweep_plan(path)


class TestTrainConfig:
    """Testes para carregamento de TrainConfig."""

    def test_bundled_train_config(self):
        """Testa arquivo de treinamento do repositório."""
        config = load_train_config(str(CONFIGS / "train.yaml"))
        assert config.patience == 20
        assert config.inputs_mode == InputsMode.WITH_TEMPERATURE

    def test_overrides(self):
        """Testa overrides não nulos prevalecendo."""
        config = load_train_config(None, seed=3, inputs_mode=InputsMode.WITHOUT_TEMPERATURE, max_epochs=None)
        assert config.seed == 3
        assert config.inputs_mode == InputsMode.WITHOUT_TEMPERATURE
        assert config.max_epochs == 1000

    def test_invalid_train_config(self, tmp_path):
        """Testa valor inválido."""
        path = _write(tmp_path / "train.yaml", {"val_fraction": 0.9})
        with pytest.raises(ConfigurationError):
            load_train_config(path)
