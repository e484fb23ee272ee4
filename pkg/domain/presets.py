"""
Presets de Orientação e Planos de Varredura
CrackSense - Compósitos Autossensíveis

Arquiteturas de fibra de referência com os componentes (A11, A12) esperados
e os planos de varredura completo e reduzido (escala de bancada).
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from common.types import CaseRole
from domain.run_schema import SweepCase, SweepPlan

TEMPERATURES_K = (253.0, 298.0, 323.0)
SINGLE_FAMILY_ANGLES = (-60.0, -45.0, -30.0, 0.0, 30.0, 45.0, 60.0, 90.0)


@dataclass(frozen=True)
class OrientationPreset:
    """Arquitetura de fibras e componentes de A esperados."""
    label: str
    angles_deg: Tuple[float, ...]
    weights: Tuple[float, ...]
    A11: float
    A12: float

    def as_config(self) -> Dict[str, Any]:
        if not self.angles_deg:
            return {"kind": "random"}
        return {"kind": "angles", "angles_deg": list(self.angles_deg), "weights": list(self.weights)}


def _single(angle: float, A11: float, A12: float) -> OrientationPreset:
    return OrientationPreset(f"single_{int(angle)}", (angle,), (1.0,), A11, A12)


# O primeiro percentual pondera o primeiro ângulo listado; "±45" lista −45° primeiro.
ORIENTATION_PRESETS: Dict[str, OrientationPreset] = {
    p.label: p for p in [
        _single(-60.0, 0.250, -0.433),
        _single(-45.0, 0.500, -0.500),
        _single(-30.0, 0.750, -0.433),
        _single(0.0, 1.000, 0.000),
        _single(30.0, 0.750, 0.433),
        _single(45.0, 0.500, 0.500),
        _single(60.0, 0.250, 0.433),
        _single(90.0, 0.000, 0.000),
        OrientationPreset("pm45_30_70", (-45.0, 45.0), (0.3, 0.7), 0.500, 0.200),
        OrientationPreset("pm45_50_50", (-45.0, 45.0), (0.5, 0.5), 0.500, 0.000),
        OrientationPreset("pm45_70_30", (-45.0, 45.0), (0.7, 0.3), 0.500, -0.200),
        OrientationPreset("0_90_30_70", (0.0, 90.0), (0.3, 0.7), 0.300, 0.000),
        OrientationPreset("0_90_50_50", (0.0, 90.0), (0.5, 0.5), 0.500, 0.000),
        OrientationPreset("0_90_70_30", (0.0, 90.0), (0.7, 0.3), 0.700, 0.000),
        OrientationPreset("0_60_50_50", (0.0, 60.0), (0.5, 0.5), 0.625, 0.217),
        OrientationPreset("random", (), (), 0.500, 0.000),
    ]
}


def _case(preset: str, vf: float, theta: float, role: CaseRole) -> SweepCase:
    name = f"{preset}_vf{int(round(vf * 100)):02d}_T{int(theta)}"
    return SweepCase(
        name=name,
        role=role,
        overrides={"orientation": ORIENTATION_PRESETS[preset].as_config(), "vf": vf, "theta": theta},
    )


def full_plan(base: Dict[str, Any] = None) -> SweepPlan:
    """Plano completo: famílias simples, duas famílias e aleatório em três temperaturas."""
    cases: List[SweepCase] = []
    for theta in TEMPERATURES_K:
        for angle in SINGLE_FAMILY_ANGLES:
            cases.append(_case(f"single_{int(angle)}", 0.3, theta, CaseRole.TRAINING))
        for label in ("pm45_30_70", "pm45_50_50", "pm45_70_30", "0_90_30_70", "0_90_50_50", "0_90_70_30"):
            cases.append(_case(label, 0.3, theta, CaseRole.TRAINING))
        role = CaseRole.TEST if theta == 298.0 else CaseRole.TRAINING
        cases.append(_case("0_60_50_50", 0.3, theta, role))
        for vf in (0.1, 0.5):
            cases.append(_case("random", vf, theta, CaseRole.TRAINING))
        cases.append(_case("random", 0.3, theta, role))
    return SweepPlan(base=base or {}, cases=cases)


DESK_BASE: Dict[str, Any] = {
    "mesh": {"h": 0.01, "band": 0.1, "h_coarse": 0.05},
    "loading": {"max_displacement": 0.03, "initial_increment": 0.0005},
}


def desk_plan(base: Dict[str, Any] = None) -> SweepPlan:
    """Plano reduzido a 298 K: quatro famílias simples, duas com duas famílias e aleatório."""
    theta = 298.0
    cases = [_case(f"single_{a}", 0.3, theta, CaseRole.TRAINING) for a in (-45, 0, 45, 90)]
    cases.append(_case("pm45_30_70", 0.3, theta, CaseRole.TRAINING))
    cases.append(_case("0_60_50_50", 0.3, theta, CaseRole.TEST))
    cases.append(_case("random", 0.3, theta, CaseRole.TRAINING))
    return SweepPlan(base=base if base is not None else dict(DESK_BASE), cases=cases)


PLAN_PRESETS = {"full": full_plan, "desk": desk_plan}
