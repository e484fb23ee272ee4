"""
Malha SEN
CrackSense - Compósitos Autossensíveis

Malha estruturada de quadriláteros Q4 para o corpo de prova com entalhe
lateral (SEN), com faixa refinada no plano esperado da trinca, entalhe
representado como fenda geométrica (nós duplicados) e quadratura 2×2.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from common.exceptions import MeshError
from common.logging import get_logger

logger = get_logger(__name__)

GEOM_TOL = 1e-9

# Nós locais em ordem anti-horária
_XI_NODES = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
_GP = 1.0 / np.sqrt(3.0)
GAUSS_POINTS = np.array([[-_GP, -_GP], [_GP, -_GP], [_GP, _GP], [-_GP, _GP]])
GAUSS_WEIGHTS = np.ones(4)


def _shape_functions(xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """N (n_pts, 4) e dN/dξ (n_pts, 4, 2) do Q4 bilinear."""
    s = 1.0 + xi[:, None, 0] * _XI_NODES[None, :, 0]
    t = 1.0 + xi[:, None, 1] * _XI_NODES[None, :, 1]
    N = 0.25 * s * t
    dN = np.stack([0.25 * _XI_NODES[None, :, 0] * t, 0.25 * _XI_NODES[None, :, 1] * s], axis=-1)
    return N, dN


SHAPE_N, SHAPE_DN = _shape_functions(GAUSS_POINTS)


@dataclass
class Mesh:
    """Malha Q4 com geometria de referência pré-computada nos pontos de Gauss."""
    nodes: np.ndarray
    elements: np.ndarray
    tags: Dict[str, np.ndarray]
    width: float
    height: float
    notch_length: float
    dN_dX: np.ndarray = field(init=False, repr=False)
    dV: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X_e = self.nodes[self.elements]
        # J[e, g, i, j] = Σ_a ∂N_a/∂ξ_i · X_a,j
        J = np.einsum('gai,eaj->egij', SHAPE_DN, X_e)
        detJ = np.linalg.det(J)
        if np.any(detJ <= 0.0):
            bad = np.unique(np.where(detJ <= 0.0)[0])
            raise MeshError(
                "Degenerate element: non-positive Jacobian",
                {"elements": bad[:10].tolist(), "count": int(bad.size)}
            )
        invJ = np.linalg.inv(J)
        self.dN_dX = np.einsum('egji,gai->egaj', invJ, SHAPE_DN)
        self.dV = detJ * GAUSS_WEIGHTS[None, :]

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def element_dofs(self) -> np.ndarray:
        """Graus de liberdade de deslocamento por elemento (ne, 8), intercalados x/y."""
        e = self.elements
        return np.stack([2 * e, 2 * e + 1], axis=-1).reshape(e.shape[0], 8)

    def gauss_coordinates(self) -> np.ndarray:
        return np.einsum('ga,eai->egi', SHAPE_N, self.nodes[self.elements])

    def interpolate(self, nodal: np.ndarray) -> np.ndarray:
        """Valores nodais escalares nos pontos de Gauss, shape (ne, 4)."""
        return np.einsum('ga,ea->eg', SHAPE_N, np.asarray(nodal)[self.elements])

    def gradient(self, nodal: np.ndarray) -> np.ndarray:
        """Gradiente de referência de um campo escalar, shape (ne, 4, 2)."""
        return np.einsum('egai,ea->egi', self.dN_dX, np.asarray(nodal)[self.elements])

    def deformation_gradient(self, u: np.ndarray) -> np.ndarray:
        """F = I + ∇u em estado plano de deformação, shape (ne, 4, 3, 3)."""
        u_e = np.asarray(u).reshape(-1, 2)[self.elements]
        H = np.einsum('eai,egaj->egij', u_e, self.dN_dX)
        F = np.zeros(H.shape[:2] + (3, 3))
        F[..., :2, :2] = H
        F += np.eye(3)
        return F


# ============================================================================
# CONSTRUÇÃO DA MALHA
# ============================================================================

def _segment(a: float, b: float, h: float) -> np.ndarray:
    n = max(1, int(np.ceil((b - a) / h - GEOM_TOL)))
    return np.linspace(a, b, n + 1)


def graded_axis(breakpoints: List[Tuple[float, float, float]]) -> np.ndarray:
    """Concatena segmentos (início, fim, espaçamento) uniformes em um eixo."""
    pieces = [_segment(a, b, h) for a, b, h in breakpoints if b - a > GEOM_TOL]
    coords = np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])
    return coords


def build_sen_mesh(
    width: float,
    height: float,
    notch_length: float,
    target_h: float,
    refine_band: float,
    coarse_h: float = None,
) -> Mesh:
    """
    Constrói a malha SEN com entalhe à meia altura a partir da borda esquerda.

    Args:
        width: Largura W (mm)
        height: Altura H (mm)
        notch_length: Comprimento do entalhe (mm), 0 ≤ a < W
        target_h: Tamanho de elemento na faixa refinada (mm)
        refine_band: Espessura da faixa refinada em torno de y = H/2 (mm)
        coarse_h: Tamanho fora da faixa (padrão 5·target_h)

    Raises:
        MeshError: Geometria inválida ou elemento degenerado
    """
    if width <= 0.0 or height <= 0.0:
        raise MeshError("Specimen dimensions must be positive", {"W": width, "H": height})
    if not 0.0 <= notch_length < width:
        raise MeshError("Notch length must lie in [0, W)", {"notch": notch_length, "W": width})
    if target_h <= 0.0 or refine_band < 0.0:
        raise MeshError("Mesh sizes must be positive", {"h": target_h, "band": refine_band})
    coarse_h = 5.0 * target_h if coarse_h is None else max(coarse_h, target_h)

    y_mid = 0.5 * height
    y_lo = max(0.0, y_mid - 0.5 * refine_band)
    y_hi = min(height, y_mid + 0.5 * refine_band)
    ys = graded_axis([
        (0.0, y_lo, coarse_h),
        (y_lo, y_mid, target_h),
        (y_mid, y_hi, target_h),
        (y_hi, height, coarse_h),
    ])

    x_fine = max(0.0, notch_length - 0.5 * refine_band)
    xs = graded_axis([
        (0.0, x_fine, coarse_h),
        (x_fine, notch_length, target_h),
        (notch_length, width, target_h),
    ])

    nx, ny = xs.size, ys.size
    X, Y = np.meshgrid(xs, ys, indexing='xy')
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def node_id(i, j):
        return j * nx + i

    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing='xy')
    ii, jj = ii.ravel(), jj.ravel()
    elements = np.column_stack([
        node_id(ii, jj), node_id(ii + 1, jj), node_id(ii + 1, jj + 1), node_id(ii, jj + 1)
    ])

    # Fenda: nós em y = H/2 com x < a recebem cópias usadas pelos elementos acima
    j_mid = int(np.argmin(np.abs(ys - y_mid)))
    slit_i = np.where(xs < notch_length - GEOM_TOL)[0]
    slit_nodes = node_id(slit_i, j_mid)
    duplicates = nodes.shape[0] + np.arange(slit_nodes.size)
    if slit_nodes.size:
        nodes = np.vstack([nodes, nodes[slit_nodes]])
        lookup = np.arange(nodes.shape[0])
        lookup[slit_nodes] = duplicates
        above = jj >= j_mid
        elements[above] = lookup[elements[above]]

    x, y = nodes[:, 0], nodes[:, 1]
    tags = {
        "bottom": np.where(np.abs(y) < GEOM_TOL)[0],
        "top": np.where(np.abs(y - height) < GEOM_TOL)[0],
        "left": np.where(np.abs(x) < GEOM_TOL)[0],
        "right": np.where(np.abs(x - width) < GEOM_TOL)[0],
        "notch_lower": slit_nodes,
        "notch_upper": duplicates,
    }

    mesh = Mesh(nodes=nodes, elements=elements, tags=tags, width=width, height=height, notch_length=notch_length)
    logger.info(
        "SEN mesh built",
        extra_data={"nodes": mesh.n_nodes, "elements": mesh.n_elements, "slit_nodes": int(slit_nodes.size)}
    )
    return mesh


def expected_node_count(xs: np.ndarray, ys: np.ndarray, notch_length: float) -> int:
    """Contagem analítica: grade nx·ny mais um nó duplicado por nó da fenda."""
    return xs.size * ys.size + int(np.sum(xs < notch_length - GEOM_TOL))


def rectangle_mesh(width: float, height: float, nx: int, ny: int) -> Mesh:
    """Malha retangular uniforme nx × ny sem entalhe."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing='xy')
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing='xy')
    ii, jj = ii.ravel(), jj.ravel()
    n0 = jj * (nx + 1) + ii
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    x, y = nodes[:, 0], nodes[:, 1]
    tags = {
        "bottom": np.where(np.abs(y) < GEOM_TOL)[0],
        "top": np.where(np.abs(y - height) < GEOM_TOL)[0],
        "left": np.where(np.abs(x) < GEOM_TOL)[0],
        "right": np.where(np.abs(x - width) < GEOM_TOL)[0],
        "notch_lower": np.array([], dtype=int),
        "notch_upper": np.array([], dtype=int),
    }
    return Mesh(nodes=nodes, elements=elements, tags=tags, width=width, height=height, notch_length=0.0)
