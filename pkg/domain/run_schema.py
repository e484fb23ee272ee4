"""
Schemas de Execução - Modelos Pydantic
CrackSense - Compósitos Autossensíveis

Configuração de simulação, plano de varredura, configuração de treinamento
e documento do modelo treinado. Chaves desconhecidas são rejeitadas.
"""

import copy
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from common import types as T
from common.types import CaseRole, InputsMode, OrientationKind, StopReason
from core.microstructure import (
    OrientationSpec,
    decompose_families,
    orientation_from_angles,
    random_orientation,
)
from domain.parameters import ElectricalParams, MaterialParams


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================================================
# SIMULAÇÃO
# ============================================================================

class GeometryConfig(_Strict):
    """Corpo de prova SEN (mm)."""
    width: float = Field(default=T.DEFAULT_WIDTH, gt=0.0)
    height: float = Field(default=T.DEFAULT_HEIGHT, gt=0.0)
    notch: float = Field(default=T.DEFAULT_NOTCH, ge=0.0)
    thickness: float = Field(default=T.DEFAULT_THICKNESS, gt=0.0)

    @model_validator(mode="after")
    def validate_notch(self) -> "GeometryConfig":
        if self.notch >= self.width:
            raise ValueError(f"notch ({self.notch}) deve ser menor que width ({self.width})")
        return self


class MeshConfig(_Strict):
    h: float = Field(default=0.01, gt=0.0, description="Tamanho de elemento na faixa refinada (mm)")
    band: float = Field(default=0.1, ge=0.0, description="Espessura da faixa refinada (mm)")
    h_coarse: float = Field(default=0.05, gt=0.0, description="Tamanho de elemento fora da faixa (mm)")


class OrientationConfig(_Strict):
    """Orientação por ângulos/pesos, por componentes (A11, A12) ou aleatória."""
    kind: OrientationKind = OrientationKind.RANDOM
    angles_deg: Optional[List[float]] = None
    weights: Optional[List[float]] = None
    A11: Optional[float] = None
    A12: Optional[float] = None

    @model_validator(mode="after")
    def validate_kind(self) -> "OrientationConfig":
        if self.kind == OrientationKind.ANGLES:
            if not self.angles_deg:
                raise ValueError("angles_deg é obrigatório para kind=angles")
            if self.weights is None:
                self.weights = [1.0 / len(self.angles_deg)] * len(self.angles_deg)
            if len(self.weights) != len(self.angles_deg):
                raise ValueError("angles_deg e weights devem ter o mesmo tamanho")
        elif self.kind == OrientationKind.TENSOR:
            if self.A11 is None or self.A12 is None:
                raise ValueError("A11 e A12 são obrigatórios para kind=tensor")
        return self

    def tensor(self) -> np.ndarray:
        if self.kind == OrientationKind.ANGLES:
            return orientation_from_angles(np.radians(self.angles_deg), self.weights)
        if self.kind == OrientationKind.TENSOR:
            return np.array([[self.A11, self.A12], [self.A12, 1.0 - self.A11]])
        return random_orientation()


class LoadingConfig(_Strict):
    rate_mm_min: float = Field(default=T.DEFAULT_LOADING_RATE, gt=0.0)
    max_displacement: float = Field(default=0.03, gt=0.0, description="Deslocamento máximo do topo (mm)")
    initial_increment: float = Field(default=0.0005, gt=0.0, description="Incremento inicial Δū (mm)")
    stop_force_ratio: float = Field(
        default=0.02, ge=0.0, lt=1.0,
        description="Encerra após o pico quando F < razão·F_pico"
    )

    @property
    def rate_mm_s(self) -> float:
        return self.rate_mm_min / 60.0


class SolverConfig(_Strict):
    newton_tol: float = Field(default=T.DEFAULT_NEWTON_TOL, gt=0.0)
    newton_max_iter: int = Field(default=T.DEFAULT_NEWTON_MAX_ITER, ge=1)
    stagger_tol: float = Field(default=T.DEFAULT_STAGGER_TOL, gt=0.0)
    stagger_max_iter: int = Field(default=T.DEFAULT_STAGGER_MAX_ITER, ge=1)
    n_red: int = Field(default=T.DEFAULT_N_RED, ge=0)
    k_red: float = Field(default=T.DEFAULT_K_RED, gt=1.0)
    fixed_point_tol: float = Field(default=T.DEFAULT_FIXED_POINT_TOL, gt=0.0)
    fixed_point_max_iter: int = Field(default=T.DEFAULT_FIXED_POINT_MAX_ITER, ge=1)
    tangent_eps: float = Field(default=T.DEFAULT_TANGENT_EPS, gt=0.0)
    tangent_refresh_ratio: float = Field(default=T.DEFAULT_TANGENT_REFRESH_RATIO, ge=0.0, lt=1.0)
    crack_tip_threshold: float = Field(default=T.DEFAULT_CRACK_TIP_THRESHOLD, gt=0.0, lt=1.0)


class OutputConfig(_Strict):
    snapshot_displacements: List[float] = Field(default_factory=list)
    eit_every: int = Field(default=1, ge=1, description="Varredura EIT a cada N passos")


class SimConfig(_Strict):
    """Configuração completa de uma simulação."""
    name: str = Field(default="run", min_length=1)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    mesh: MeshConfig = Field(default_factory=MeshConfig)
    orientation: OrientationConfig = Field(default_factory=OrientationConfig)
    vf: float = Field(default=0.3, ge=0.0, le=1.0)
    theta: float = Field(default=T.DEFAULT_THETA0, gt=0.0)
    loading: LoadingConfig = Field(default_factory=LoadingConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    material: MaterialParams = Field(default_factory=MaterialParams)
    electrical: ElectricalParams = Field(default_factory=ElectricalParams)
    outputs: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def validate_resolution(self) -> "SimConfig":
        if self.mesh.h > 0.5 * self.material.l0 + 1e-12:
            raise ValueError(
                f"mesh.h ({self.mesh.h}) deve ser ≤ l0/2 ({0.5 * self.material.l0}) na faixa refinada"
            )
        return self

    def orientation_spec(self) -> OrientationSpec:
        return decompose_families(self.orientation.tensor(), self.vf)

    def descriptors(self) -> Dict[str, float]:
        A = self.orientation.tensor()
        return {"A11": float(A[0, 0]), "A12": float(A[0, 1]), "vf": self.vf, "theta": self.theta}


# ============================================================================
# PLANO DE VARREDURA
# ============================================================================

def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Mescla recursiva de dicionários; valores de override prevalecem."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class SweepCase(_Strict):
    name: str = Field(..., min_length=1)
    role: CaseRole = CaseRole.TRAINING
    overrides: Dict[str, Any] = Field(default_factory=dict)


class SweepPlan(_Strict):
    """Lista de deltas sobre uma configuração base, cada um com papel Training/Test."""
    base: Dict[str, Any] = Field(default_factory=dict)
    cases: List[SweepCase]

    @field_validator("cases")
    @classmethod
    def validate_cases(cls, v: List[SweepCase]) -> List[SweepCase]:
        if not v:
            raise ValueError("o plano de varredura não pode ser vazio")
        names = [c.name for c in v]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"nomes de casos duplicados: {duplicates}")
        return v

    def resolve(self, case: SweepCase) -> SimConfig:
        data = deep_merge(self.base, case.overrides)
        data["name"] = case.name
        return SimConfig.model_validate(data)


# ============================================================================
# TREINAMENTO E MODELO
# ============================================================================

class TrainConfig(_Strict):
    max_epochs: int = Field(default=T.DEFAULT_MAX_EPOCHS, ge=1)
    patience: int = Field(default=T.DEFAULT_PATIENCE, ge=1)
    val_fraction: float = Field(default=T.DEFAULT_VAL_FRACTION, gt=0.0, lt=0.5)
    lambda0: float = Field(default=T.DEFAULT_LM_LAMBDA0, gt=0.0)
    lambda_factor: float = Field(default=T.DEFAULT_LM_FACTOR, gt=1.0)
    lambda_max: float = Field(default=T.DEFAULT_LM_LAMBDA_MAX, gt=0.0)
    seed: int = T.DEFAULT_SEED
    inputs_mode: InputsMode = InputsMode.WITH_TEMPERATURE
    hidden_layers: List[int] = Field(default_factory=lambda: list(T.HIDDEN_LAYERS))

    @model_validator(mode="after")
    def validate_patience(self) -> "TrainConfig":
        if self.patience >= self.max_epochs:
            raise ValueError(f"patience ({self.patience}) deve ser menor que max_epochs ({self.max_epochs})")
        return self


class LayerDocument(_Strict):
    weights: List[List[float]]
    biases: List[float]
    activation: str


class NormalizationDocument(_Strict):
    mean: List[float]
    std: List[float]
    provenance: str = "train"


class EpochRecord(_Strict):
    epoch: int
    train_mse: float
    val_mse: float
    damping: float


class TrainingMetadata(_Strict):
    seed: int
    epochs_run: int
    best_epoch: int
    stop_reason: StopReason
    holdout: List[str] = Field(default_factory=list)
    train_rows: List[str] = Field(default_factory=list)
    val_rows: List[str] = Field(default_factory=list)
    history: List[EpochRecord] = Field(default_factory=list)


class ModelDocument(_Strict):
    """Documento autodescritivo do modelo treinado."""
    format_version: str = "1"
    layer_sizes: List[int]
    inputs_mode: InputsMode
    input_columns: List[str]
    output_columns: List[str]
    layers: List[LayerDocument]
    input_stats: NormalizationDocument
    output_stats: NormalizationDocument
    metadata: TrainingMetadata

    @model_validator(mode="after")
    def validate_shapes(self) -> "ModelDocument":
        if len(self.layers) != len(self.layer_sizes) - 1:
            raise ValueError("número de camadas inconsistente com layer_sizes")
        for k, layer in enumerate(self.layers):
            expected = (self.layer_sizes[k + 1], self.layer_sizes[k])
            got = (len(layer.weights), len(layer.weights[0]) if layer.weights else 0)
            if got != expected or len(layer.biases) != expected[0]:
                raise ValueError(f"camada {k}: shape {got} diferente de {expected}")
        if len(self.input_columns) != self.layer_sizes[0]:
            raise ValueError("input_columns inconsistente com layer_sizes[0]")
        return self
