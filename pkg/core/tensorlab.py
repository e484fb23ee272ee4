"""
Tensorlab
CrackSense - Compósitos Autossensíveis

Álgebra densa de tensores 2×2/3×3 usada pelas leis constitutivas e pela
orientação de fibras. Todas as funções aceitam lotes com shape (..., n, n).
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.linalg import expm

from common.exceptions import DomainError

Tensor2 = np.ndarray


@dataclass(frozen=True)
class PolarPair:
    """Decomposição polar F = R·U."""
    rotation: Tensor2
    stretch: Tensor2


def as_tensor2(values) -> Tensor2:
    """Converte para array float validando dimensão (2 ou 3) e finitude."""
    T = np.asarray(values, dtype=float)
    if T.ndim < 2 or T.shape[-1] != T.shape[-2] or T.shape[-1] not in (2, 3):
        raise DomainError("Tensor must be 2x2 or 3x3", {"shape": T.shape})
    if not np.all(np.isfinite(T)):
        raise DomainError("Tensor has non-finite entries")
    return T


def identity_like(T: Tensor2) -> Tensor2:
    n = T.shape[-1]
    return np.broadcast_to(np.eye(n), T.shape).copy()


def trace(T: Tensor2) -> np.ndarray:
    return np.trace(T, axis1=-2, axis2=-1)


def dev(T: Tensor2) -> Tensor2:
    """Parte desviadora T − tr(T)/n·I."""
    n = T.shape[-1]
    return T - (trace(T) / n)[..., None, None] * np.eye(n)


def sym(T: Tensor2) -> Tensor2:
    return 0.5 * (T + np.swapaxes(T, -1, -2))


def frobenius_norm(T: Tensor2) -> np.ndarray:
    return np.sqrt(np.einsum('...ij,...ij->...', T, T))


def transpose(T: Tensor2) -> Tensor2:
    return np.swapaxes(T, -1, -2)


def green_lagrange(F: Tensor2) -> Tensor2:
    """E = ½(FᵀF − I)."""
    return 0.5 * (transpose(F) @ F - np.eye(F.shape[-1]))


def polar_decompose(F: Tensor2) -> PolarPair:
    """
    Decomposição polar à direita via SVD.

    Raises:
        DomainError: Se det(F) ≤ 0 em algum ponto do lote
    """
    F = as_tensor2(F)
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        raise DomainError(
            "Polar decomposition requires det(F) > 0",
            {"min_det": float(np.min(J))}
        )
    W, s, Vt = np.linalg.svd(F)
    R = W @ Vt
    U = transpose(Vt) @ (s[..., :, None] * Vt)
    return PolarPair(rotation=R, stretch=sym(U))


def matrix_exp(A: Tensor2) -> Tensor2:
    """Exponencial de matriz geral (Padé com scaling-and-squaring)."""
    A = as_tensor2(A)
    return expm(A)


def sym_matrix_exp(S: Tensor2) -> Tensor2:
    """Exponencial de matriz simétrica via autodecomposição."""
    lam, V = np.linalg.eigh(sym(S))
    return V @ (np.exp(lam)[..., :, None] * transpose(V))


def sym_eigen(S: Tensor2, tol: float = 1e-10) -> List[Tuple[float, np.ndarray]]:
    """
    Autopares de um tensor simétrico, em ordem decrescente.

    O sinal de cada autovetor é fixado tornando positiva a componente de
    maior módulo; autovalores iguais são ordenados pelo eixo dominante.

    Raises:
        DomainError: Se S não for simétrico
    """
    S = as_tensor2(S)
    if S.ndim != 2:
        raise DomainError("sym_eigen expects a single tensor", {"shape": S.shape})
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.max(np.abs(S - S.T)) > tol * scale:
        raise DomainError("sym_eigen requires a symmetric tensor")

    lam, V = np.linalg.eigh(sym(S))
    pairs = []
    for k in range(len(lam)):
        v = V[:, k]
        dominant = int(np.argmax(np.abs(v)))
        if v[dominant] < 0.0:
            v = -v
        pairs.append((float(lam[k]), v, dominant))

    pairs.sort(key=lambda p: (-round(p[0], 12), p[2]))
    return [(value, vector) for value, vector, _ in pairs]


def embed_3d(T: Tensor2) -> Tensor2:
    """Embute tensores 2×2 no plano de um 3×3 (componente 33 unitária)."""
    if T.shape[-1] == 3:
        return T
    out = np.zeros(T.shape[:-2] + (3, 3))
    out[..., :2, :2] = T
    out[..., 2, 2] = 1.0
    return out
