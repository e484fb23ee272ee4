"""
Parâmetros de Material - Modelos Pydantic
CrackSense - Compósitos Autossensíveis

Constantes mecânicas, de fratura e elétricas com valores padrão da
calibração de referência do sistema fibra de carbono/epóxi.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator

from common import types as T


class PhaseFieldParams(BaseModel):
    """Parâmetros do campo de fase anisotrópico."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    Gc: float = Field(default=T.DEFAULT_GC, gt=0.0, description="Taxa crítica de liberação de energia (N/mm)")
    l0: float = Field(default=T.DEFAULT_L0, gt=0.0, description="Comprimento de regularização (mm)")
    alpha_hat: float = Field(default=T.DEFAULT_ALPHA_HAT, ge=0.0, description="Anisotropia adimensional do gradiente")
    k_res: float = Field(default=T.DEFAULT_K_RES, gt=0.0, le=1e-3, description="Rigidez residual")


class MaterialParams(BaseModel):
    """
    Constantes do modelo viscoelástico-viscoplástico e da fratura.

    Unidades: MPa, s, J, K, N/mm, mm.
    """

    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={
            "examples": [{"mu_eq0": 760.0, "mu_neq0": 790.0, "kv0": 1154.0, "Gc": 0.2, "l0": 0.02}]
        },
    )

    mu_eq0: float = Field(default=T.DEFAULT_MU_EQ0, gt=0.0, description="Módulo de cisalhamento de equilíbrio (MPa)")
    mu_neq0: float = Field(default=T.DEFAULT_MU_NEQ0, gt=0.0, description="Módulo de cisalhamento de não equilíbrio (MPa)")
    kv0: float = Field(default=T.DEFAULT_KV0, gt=0.0, description="Módulo volumétrico (MPa)")
    eps_dot0: float = Field(default=T.DEFAULT_EPS_DOT0, gt=0.0, description="Taxa pré-exponencial (1/s)")
    delta_H: float = Field(default=T.DEFAULT_DELTA_H, gt=0.0, description="Energia de ativação (J)")
    m_exp: float = Field(default=T.DEFAULT_M_EXP, gt=0.0, description="Expoente de tensão")
    tau0: float = Field(default=T.DEFAULT_TAU0, gt=0.0, description="Resistência atérmica (MPa)")
    a_vp: float = Field(default=T.DEFAULT_A_VP, ge=0.0, description="Coeficiente viscoplástico (condição seca)")
    b_vp: float = Field(default=T.DEFAULT_B_VP, gt=0.0, description="Expoente viscoplástico")
    sigma0_vp: float = Field(default=T.DEFAULT_SIGMA0_VP, gt=0.0, description="Limiar viscoplástico (MPa)")
    eps0_vp: float = Field(default=T.DEFAULT_EPS0_VP, ge=0.0, description="Deformação de início viscoplástico")
    alpha_theta: float = Field(default=T.DEFAULT_ALPHA_THETA, description="Sensibilidade térmica dos módulos (1/K)")
    alpha_expansion: float = Field(default=T.DEFAULT_ALPHA_EXPANSION, description="Coeficiente de expansão volumétrica (1/K)")
    a1: float = Field(default=T.DEFAULT_FIBER_A1, description="Enrijecimento de fibra a1")
    a2: float = Field(default=T.DEFAULT_FIBER_A2, description="Enrijecimento de fibra a2")
    a3: float = Field(default=T.DEFAULT_FIBER_A3, description="Enrijecimento de fibra a3")
    Gc: float = Field(default=T.DEFAULT_GC, gt=0.0, description="Taxa crítica de liberação de energia (N/mm)")
    l0: float = Field(default=T.DEFAULT_L0, gt=0.0, description="Comprimento de regularização (mm)")
    alpha_hat: float = Field(default=T.DEFAULT_ALPHA_HAT, ge=0.0, description="Anisotropia do gradiente de fase")
    k_res: float = Field(default=T.DEFAULT_K_RES, gt=0.0, le=1e-3, description="Rigidez residual")
    theta0: float = Field(default=T.DEFAULT_THETA0, gt=0.0, description="Temperatura de referência (K)")
    kb: float = Field(default=T.BOLTZMANN, gt=0.0, description="Constante de Boltzmann (J/K)")

    @property
    def phase_field(self) -> PhaseFieldParams:
        return PhaseFieldParams(Gc=self.Gc, l0=self.l0, alpha_hat=self.alpha_hat, k_res=self.k_res)


class ElectricalParams(BaseModel):
    """Modelo piezoresistivo e harness de eletrodos."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma_m: float = Field(default=T.DEFAULT_SIGMA_M, ge=0.0, description="Condutividade da matriz (S/mm)")
    sigma_par0: float = Field(default=T.DEFAULT_SIGMA_PAR0, gt=0.0, description="Condutividade axial da fibra (S/mm)")
    sigma_perp0: float = Field(default=T.DEFAULT_SIGMA_PERP0, ge=0.0, description="Condutividade transversal da fibra (S/mm)")
    gf_par: float = Field(default=T.DEFAULT_GF_PAR, description="Gauge factor longitudinal")
    gf_perp: float = Field(default=T.DEFAULT_GF_PERP, description="Gauge factor transversal")
    p_exp: float = Field(default=T.DEFAULT_P_EXP, gt=0.0, description="Expoente de degradação elétrica")
    k_e: float = Field(default=T.DEFAULT_K_E, gt=0.0, description="Condutividade residual")
    v_app: float = Field(default=T.DEFAULT_V_APP, gt=0.0, description="Tensão aplicada (V)")
    electrode_half_width: float | None = Field(
        default=None,
        gt=0.0,
        description="Meia largura l_c dos eletrodos (mm); padrão 0.05·W"
    )

    @field_validator("gf_par", "gf_perp")
    @classmethod
    def validate_gauge_factor(cls, v: float) -> float:
        """Valida gauge factor não negativo."""
        if v < 0.0:
            raise ValueError(f"gauge factor deve ser não negativo. Recebido: {v}")
        return v
