"""
Microestrutura
CrackSense - Compósitos Autossensíveis

Tensor de orientação de segunda ordem, decomposição em famílias discretas
de fibras e tensor de anisotropia do gradiente do campo de fase.
"""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from common.exceptions import DomainError
from core.tensorlab import Tensor2, sym_eigen

MIN_FAMILY_EIGENVALUE = 1e-9


@dataclass(frozen=True)
class FiberFamily:
    """Direção principal de fibras (configuração de referência) e fração volumétrica efetiva."""
    direction: np.ndarray
    volume_fraction: float

    def __post_init__(self):
        norm = float(np.linalg.norm(self.direction))
        if abs(norm - 1.0) > 1e-12:
            raise DomainError("Fiber direction must be a unit vector", {"norm": norm})
        if self.volume_fraction < 0.0:
            raise DomainError(
                "Fiber volume fraction must be non-negative",
                {"volume_fraction": self.volume_fraction}
            )


@dataclass(frozen=True)
class OrientationSpec:
    """Tensor A, famílias de fibras e frações volumétricas."""
    A: Tensor2
    families: List[FiberFamily] = field(default_factory=list)
    vf_total: float = 0.0

    @property
    def vm(self) -> float:
        return 1.0 - self.vf_total

    @property
    def A11(self) -> float:
        return float(self.A[0, 0])

    @property
    def A12(self) -> float:
        return float(self.A[0, 1])

    def directions_3d(self) -> np.ndarray:
        """Direções a0 embutidas em 3D, shape (n_families, 3)."""
        out = np.zeros((len(self.families), 3))
        for i, family in enumerate(self.families):
            out[i, :2] = family.direction
        return out

    def volume_fractions(self) -> np.ndarray:
        return np.array([f.volume_fraction for f in self.families], dtype=float)


def orientation_from_angles(angles: Sequence[float], weights: Sequence[float]) -> Tensor2:
    """
    A = Σ wₖ aₖ⊗aₖ com aₖ = (cos θₖ, sin θₖ).

    Args:
        angles: Ângulos em radianos
        weights: Pesos não negativos com soma 1

    Raises:
        DomainError: Lista vazia, pesos negativos ou soma diferente de 1
    """
    angles = np.asarray(angles, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if angles.size == 0:
        raise DomainError("At least one fiber angle is required")
    if angles.shape != weights.shape:
        raise DomainError(
            "Angles and weights must have the same length",
            {"angles": angles.size, "weights": weights.size}
        )
    if np.any(weights < 0.0):
        raise DomainError("Orientation weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-10:
        raise DomainError("Orientation weights must sum to 1", {"sum": float(weights.sum())})

    a = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return np.einsum('k,ki,kj->ij', weights, a, a)


def random_orientation() -> Tensor2:
    """Tensor isotrópico 2D."""
    return 0.5 * np.eye(2)


def decompose_families(A: Tensor2, vf_total: float) -> OrientationSpec:
    """
    Decompõe A em famílias alinhadas aos autovetores.

    Famílias com autovalor abaixo de 1e-9 são descartadas.

    Raises:
        DomainError: Traço diferente de 1, A não simétrico ou não PSD
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise DomainError("Orientation tensor must be 2x2", {"shape": A.shape})
    if not 0.0 <= vf_total <= 1.0:
        raise DomainError("Fiber volume fraction must lie in [0, 1]", {"vf": vf_total})
    tr = float(np.trace(A))
    if abs(tr - 1.0) > 1e-6:
        raise DomainError("Orientation tensor trace must be 1", {"trace": tr})

    pairs = sym_eigen(A)
    if pairs[-1][0] < -1e-12:
        raise DomainError(
            "Orientation tensor must be positive semi-definite",
            {"min_eigenvalue": pairs[-1][0]}
        )

    kept = [(lam, v) for lam, v in pairs if lam >= MIN_FAMILY_EIGENVALUE]
    total = sum(lam for lam, _ in kept)
    families = [
        FiberFamily(direction=v / np.linalg.norm(v), volume_fraction=vf_total * lam / total)
        for lam, v in kept
    ]
    return OrientationSpec(A=A.copy(), families=families, vf_total=float(vf_total))


def gradient_anisotropy(A: Tensor2, alpha_hat: float) -> Tensor2:
    """Â = I + α̂·A."""
    if alpha_hat < 0.0:
        raise DomainError("alpha_hat must be non-negative", {"alpha_hat": alpha_hat})
    A = np.asarray(A, dtype=float)
    return np.eye(A.shape[-1]) + alpha_hat * A
