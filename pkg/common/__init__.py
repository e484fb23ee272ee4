"""
Common Layer - Código Compartilhado
CrackSense - Compósitos Autossensíveis

Este módulo contém código compartilhado por toda a aplicação:
- Exceções customizadas
- Tipos e constantes
- Logging estruturado
- Sistema de métricas
"""

from .exceptions import (
    CrackSenseError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    MeshError,
    ConvergenceError,
    SimulationError,
    SolverError,
    IngestionError,
    TrainingError,
    ValidationError,
)
from .types import (
    CaseRole,
    InputsMode,
    OrientationKind,
    DataSplit,
    StopReason,
    LeastSquaresModel,
    Result,
    ELECTRODE_PAIRS,
    RATIO_COLUMNS,
    RESISTANCE_COLUMNS,
    RESISTANCE_PAIRS,
    STEP_COLUMNS,
    DATASET_COLUMNS,
)
from .logging import (
    get_logger,
    setup_logging,
    set_context,
    clear_context,
    LogContext,
    log_execution_time,
)
from .metrics import (
    metrics,
    MetricsCollector,
    SimulationMetrics,
    track_metrics,
)

__all__ = [
    # Exceptions
    "CrackSenseError",
    "ConfigurationError",
    "DomainError",
    "IntegrationError",
    "MeshError",
    "ConvergenceError",
    "SimulationError",
    "SolverError",
    "IngestionError",
    "TrainingError",
    "ValidationError",
    # Types
    "CaseRole",
    "InputsMode",
    "OrientationKind",
    "DataSplit",
    "StopReason",
    "LeastSquaresModel",
    "Result",
    "ELECTRODE_PAIRS",
    "RATIO_COLUMNS",
    "RESISTANCE_COLUMNS",
    "RESISTANCE_PAIRS",
    "STEP_COLUMNS",
    "DATASET_COLUMNS",
    # Logging
    "get_logger",
    "setup_logging",
    "set_context",
    "clear_context",
    "LogContext",
    "log_execution_time",
    # Metrics
    "metrics",
    "MetricsCollector",
    "SimulationMetrics",
    "track_metrics",
]
