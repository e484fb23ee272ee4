"""
Tipos e Constantes
CrackSense - Compósitos Autossensíveis

Define tipos, enums, protocols e constantes usadas em toda a aplicação.
"""

from enum import Enum
from itertools import combinations
from typing import Protocol, List, Optional, Dict, Any, TypeVar, Generic, Tuple
from dataclasses import dataclass

import numpy as np


# ============================================================================
# ENUMS
# ============================================================================

class CaseRole(str, Enum):
    """Papel de um caso no plano de varredura."""
    TRAINING = "Training"
    TEST = "Test"


class InputsMode(int, Enum):
    """Dimensão de entrada da rede (com ou sem temperatura)."""
    WITHOUT_TEMPERATURE = 31
    WITH_TEMPERATURE = 32


class OrientationKind(str, Enum):
    """Formas aceitas para descrever a orientação das fibras."""
    ANGLES = "angles"
    TENSOR = "tensor"
    RANDOM = "random"


class DataSplit(str, Enum):
    """Partições do conjunto de dados."""
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class StopReason(str, Enum):
    """Motivo de término do treinamento Levenberg-Marquardt."""
    EARLY_STOPPING = "early_stopping"
    MAX_EPOCHS = "max_epochs"
    DAMPING_OVERFLOW = "damping_overflow"


# ============================================================================
# PROTOCOLS - Interfaces para tipagem estrutural
# ============================================================================

class LeastSquaresModel(Protocol):
    """Protocol para modelos treináveis por Levenberg-Marquardt."""

    def get_params(self) -> np.ndarray:
        """Retorna o vetor de parâmetros achatado."""
        ...

    def set_params(self, params: np.ndarray) -> None:
        """Define o vetor de parâmetros achatado."""
        ...

    def predict_normalized(self, x: np.ndarray) -> np.ndarray:
        """Saídas no espaço normalizado, shape (n, n_out)."""
        ...

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Jacobiano das saídas em relação aos parâmetros, shape (n*n_out, n_params)."""
        ...


# ============================================================================
# TYPES - Type aliases e generics
# ============================================================================

ElectrodePair = Tuple[int, int]
T = TypeVar('T')


@dataclass
class Result(Generic[T]):
    """Resultado de uma operação com sucesso/erro."""
    success: bool
    data: Optional[T] = None
    error: Optional[str] = None
    details: Optional[Dict[str, Any]] = None

    @classmethod
    def ok(cls, data: T) -> 'Result[T]':
        """Cria resultado de sucesso."""
        return cls(success=True, data=data)

    @classmethod
    def fail(cls, error: str, details: Optional[Dict[str, Any]] = None) -> 'Result[T]':
        """Cria resultado de falha."""
        return cls(success=False, error=error, details=details)


# ============================================================================
# CONSTANTES
# ============================================================================

# Mecânica (MPa, s, J, K)
DEFAULT_MU_EQ0 = 760.0
DEFAULT_MU_NEQ0 = 790.0
DEFAULT_KV0 = 1154.0
DEFAULT_EPS_DOT0 = 1.0447e12
DEFAULT_DELTA_H = 1.977e-19
DEFAULT_M_EXP = 0.657
DEFAULT_TAU0 = 40.0
DEFAULT_A_VP = 0.005
DEFAULT_B_VP = 1.1
DEFAULT_SIGMA0_VP = 25.0
DEFAULT_EPS0_VP = 0.02
DEFAULT_ALPHA_THETA = 0.01093
DEFAULT_ALPHA_EXPANSION = 0.0
DEFAULT_FIBER_A1 = 9.0
DEFAULT_FIBER_A2 = 1.0
DEFAULT_FIBER_A3 = 1.0
DEFAULT_THETA0 = 296.0
BOLTZMANN = 1.380649e-23

# Campo de fase
DEFAULT_GC = 0.2
DEFAULT_L0 = 0.02
DEFAULT_K_RES = 1e-6
DEFAULT_ALPHA_HAT = 0.0

# Elétrico (S/mm, V)
DEFAULT_SIGMA_M = 1e-14
DEFAULT_SIGMA_PAR0 = 66.7
DEFAULT_SIGMA_PERP0 = 15.9
DEFAULT_GF_PAR = 2.0
DEFAULT_GF_PERP = 2.0
DEFAULT_P_EXP = 2.0
DEFAULT_K_E = 1e-6
DEFAULT_V_APP = 1.0
CONDUCTIVITY_FLOOR = 1e-3

# Integração das variáveis internas
DEFAULT_FIXED_POINT_TOL = 1e-8
DEFAULT_FIXED_POINT_MAX_ITER = 50
DEFAULT_TANGENT_EPS = 1e-5
DEFAULT_LOCAL_NEWTON_MAX_ITER = 50
DEFAULT_MAX_SUBDIVISIONS = 6
DEFAULT_TANGENT_REFRESH_RATIO = 0.1

# Solver escalonado
DEFAULT_NEWTON_TOL = 1e-6
DEFAULT_NEWTON_MAX_ITER = 25
DEFAULT_STAGGER_TOL = 1e-4
DEFAULT_STAGGER_MAX_ITER = 200
DEFAULT_N_RED = 4
DEFAULT_K_RED = 2.0
DEFAULT_LOADING_RATE = 1.0  # mm/min
DEFAULT_CRACK_TIP_THRESHOLD = 0.95

# Geometria SEN (mm)
DEFAULT_WIDTH = 1.0
DEFAULT_HEIGHT = 1.0
DEFAULT_NOTCH = 0.5
DEFAULT_THICKNESS = 1.0
DEFAULT_ELECTRODE_HALF_WIDTH_RATIO = 0.05

# Rede neural
HIDDEN_LAYERS = (16, 16)
N_OUTPUTS = 2
DEFAULT_MAX_EPOCHS = 1000
DEFAULT_PATIENCE = 20
DEFAULT_VAL_FRACTION = 0.15
DEFAULT_LM_LAMBDA0 = 1e-3
DEFAULT_LM_FACTOR = 10.0
DEFAULT_LM_LAMBDA_MAX = 1e10
STD_FLOOR = 1e-12
DEFAULT_SEED = 42

# Eletrodos e pares EIT
N_ELECTRODES = 8
ELECTRODE_PAIRS: List[ElectrodePair] = list(combinations(range(1, N_ELECTRODES + 1), 2))
RATIO_COLUMNS: List[str] = [f"g_{i}{j}" for i, j in ELECTRODE_PAIRS]
RESISTANCE_PAIRS: List[ElectrodePair] = [(1, 5), (3, 7)]
RESISTANCE_COLUMNS: List[str] = [
    name for i, j in RESISTANCE_PAIRS for name in (f"R_{i}{j}", f"R_{i}{j}_norm")
]

# Interface CSV estável
STEP_COLUMNS: List[str] = [
    "step", "time_s", "disp_mm", "force_N", "a_tilde", "C_tilde", *RATIO_COLUMNS, *RESISTANCE_COLUMNS
]
DESCRIPTOR_COLUMNS: List[str] = ["A11", "A12", "vf", "theta"]
TARGET_COLUMNS: List[str] = ["a_tilde", "C_tilde"]
DATASET_COLUMNS: List[str] = [
    "case", "role", "step", *DESCRIPTOR_COLUMNS, *RATIO_COLUMNS, *TARGET_COLUMNS
]
DIAGNOSTIC_COLUMNS: List[str] = [
    "step", "x_tip_mm", "stagger_iterations", "newton_iterations", "reductions"
]

# Nomes de arquivo de uma execução
STEPS_FILE = "steps.csv"
DIAGNOSTICS_FILE = "diagnostics.csv"
MANIFEST_FILE = "manifest.yaml"
METRICS_FILE = "metrics.json"
SNAPSHOT_DIR = "snapshots"
