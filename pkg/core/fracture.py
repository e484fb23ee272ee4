"""
Fratura
CrackSense - Compósitos Autossensíveis

Grandezas do campo de fase fora do ponto material: função de degradação,
funcional de superfície da trinca, comprimento normalizado e ponta da trinca.
"""

from typing import Tuple, TYPE_CHECKING

import numpy as np

from common.exceptions import DomainError
from common.logging import get_logger
from common.types import DEFAULT_K_RES

if TYPE_CHECKING:
    from core.mesh import Mesh

logger = get_logger(__name__)


def degradation(phi, k_res: float = DEFAULT_K_RES) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Degradação quadrática g = (1−φ)² + k e derivadas.

    Valores de φ fora de [0, 1] são projetados no intervalo com aviso.

    Returns:
        (g, g', g'')
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0.0) or np.any(phi > 1.0):
        logger.warning(
            "Phase field outside [0, 1] clamped",
            extra_data={"min": float(np.min(phi)), "max": float(np.max(phi))}
        )
        phi = np.clip(phi, 0.0, 1.0)
    g = (1.0 - phi) ** 2 + k_res
    g_prime = -2.0 * (1.0 - phi)
    g_double_prime = np.full_like(phi, 2.0)
    return g, g_prime, g_double_prime


def crack_surface_length(phi_field: np.ndarray, mesh: "Mesh", l0: float) -> float:
    """
    Funcional de densidade de superfície ∫(φ²/(2l0) + l0/2·|∇φ|²) dV por quadratura de Gauss.

    Para o problema 2D o resultado tem unidade de comprimento (mm).
    """
    if l0 <= 0.0:
        raise DomainError("l0 must be positive", {"l0": l0})
    phi_gp = mesh.interpolate(phi_field)
    grad = mesh.gradient(phi_field)
    density = phi_gp ** 2 / (2.0 * l0) + 0.5 * l0 * np.einsum('egi,egi->eg', grad, grad)
    # soma por elemento e depois entre elementos, em ordem fixa
    return float(np.sum(np.sum(density * mesh.dV, axis=1)))


def normalized_crack_length(phi_field: np.ndarray, mesh: "Mesh", l0: float, width: float) -> float:
    """ã = ℓ_crack / W."""
    if width <= 0.0:
        raise DomainError("Specimen width must be positive", {"width": width})
    return crack_surface_length(phi_field, mesh, l0) / width


def crack_tip_x(phi_field: np.ndarray, mesh: "Mesh", threshold: float) -> float:
    """Maior coordenada x entre nós com φ ≥ threshold; ponta do entalhe se nenhum nó qualificar."""
    if not 0.0 < threshold < 1.0:
        raise DomainError("Crack tip threshold must lie in (0, 1)", {"threshold": threshold})
    cracked = np.asarray(phi_field) >= threshold
    if not np.any(cracked):
        return float(mesh.notch_length)
    return float(max(mesh.nodes[cracked, 0].max(), mesh.notch_length))
