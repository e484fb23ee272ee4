"""
Config Loader
CrackSense - Compósitos Autossensíveis

Lê arquivos YAML e os valida contra os schemas Pydantic de execução,
varredura e treinamento.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

import yaml
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from common.exceptions import ConfigurationError
from common.logging import get_logger
from domain.presets import PLAN_PRESETS
from domain.run_schema import SimConfig, SweepCase, SweepPlan, TrainConfig

logger = get_logger(__name__)

M = TypeVar("M", bound=BaseModel)


def read_yaml(path: str) -> Dict[str, Any]:
    """
    Carrega um documento YAML como dicionário.

    Raises:
        ConfigurationError: Arquivo ausente, YAML inválido ou raiz não mapeável
    """
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigurationError(f"Arquivo de configuração não encontrado: {path}", {"path": path})
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"YAML inválido: {path}", {"error": str(e)}) from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Raiz do YAML deve ser um mapeamento: {path}", {"path": path})
    return data


def offending_keys(error: PydanticValidationError) -> List[str]:
    """Caminhos pontuados das chaves rejeitadas pelo schema."""
    return [".".join(str(p) for p in e["loc"]) or "<root>" for e in error.errors()]


def validate_model(model: Type[M], data: Dict[str, Any], source: str) -> M:
    try:
        return model.model_validate(data)
    except PydanticValidationError as e:
        keys = offending_keys(e)
        raise ConfigurationError(
            f"Configuração inválida em {source}: {', '.join(keys)}",
            {"source": source, "keys": keys, "errors": [err["msg"] for err in e.errors()]}
        ) from e


def load_sim_config(path: str) -> SimConfig:
    config = validate_model(SimConfig, read_yaml(path), path)
    logger.info("Simulation config loaded", extra_data={"path": path, "name": config.name})
    return config


def load_sweep_plan(path: Optional[str] = None, preset: Optional[str] = None) -> SweepPlan:
    """
    Carrega um plano de varredura.

    O YAML pode trazer `preset: desk|full` com uma `base` opcional, ou
    `base` e `cases` explícitos. Sem arquivo, usa o preset nomeado.

    Raises:
        ConfigurationError: Preset desconhecido, plano inválido ou caso inválido
    """
    data: Dict[str, Any] = read_yaml(path) if path else {}
    source = path or f"preset:{preset}"
    preset = data.pop("preset", preset)

    if preset is not None:
        if preset not in PLAN_PRESETS:
            raise ConfigurationError(f"Preset desconhecido: {preset}", {"available": sorted(PLAN_PRESETS)})
        extra = sorted(set(data) - {"base"})
        if extra:
            raise ConfigurationError(f"Configuração inválida em {source}: {', '.join(extra)}", {"keys": extra})
        plan = PLAN_PRESETS[preset](data.get("base"))
    else:
        plan = validate_model(SweepPlan, data, source)

    # Falha cedo em vez de no meio da varredura
    for case in plan.cases:
        resolve_case(plan, case, source)

    logger.info("Sweep plan loaded", extra_data={"source": source, "cases": len(plan.cases)})
    return plan


def resolve_case(plan: SweepPlan, case: SweepCase, source: str = "plan") -> SimConfig:
    try:
        return plan.resolve(case)
    except PydanticValidationError as e:
        keys = offending_keys(e)
        raise ConfigurationError(
            f"Caso {case.name} inválido em {source}: {', '.join(keys)}",
            {"case": case.name, "keys": keys}
        ) from e


def load_train_config(path: Optional[str] = None, **overrides: Any) -> TrainConfig:
    """TrainConfig a partir de YAML opcional; overrides não nulos prevalecem."""
    data = read_yaml(path) if path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return validate_model(TrainConfig, data, path or "<defaults>")
