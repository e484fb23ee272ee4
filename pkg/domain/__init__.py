"""
Domain Layer - Modelos de Domínio
CrackSense - Compósitos Autossensíveis

Este módulo contém os modelos de domínio da aplicação:
- Parâmetros de material e elétricos
- Schemas de execução, varredura e modelo
- Presets de orientação e planos
"""

from .parameters import ElectricalParams, MaterialParams, PhaseFieldParams
from .presets import ORIENTATION_PRESETS, PLAN_PRESETS, desk_plan, full_plan
from .run_schema import ModelDocument, SimConfig, SweepPlan, TrainConfig

__all__ = [
    "ElectricalParams",
    "MaterialParams",
    "PhaseFieldParams",
    "ORIENTATION_PRESETS",
    "PLAN_PRESETS",
    "desk_plan",
    "full_plan",
    "ModelDocument",
    "SimConfig",
    "SweepPlan",
    "TrainConfig",
]
