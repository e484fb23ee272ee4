"""
Sensoriamento Piezoresistivo
CrackSense - Compósitos Autossensíveis

Condutividade efetiva deformação/dano dependente, harness de oito eletrodos,
solução do potencial elétrico estacionário e varredura EIT dos 28 pares.

O problema elétrico é resolvido na configuração de referência; a deformação
entra apenas pelos termos de gauge factor. As condutividades são escaladas
por σ∥⁰ antes da fatoração e reescaladas no resultado.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import splu

from common.exceptions import DomainError, MeshError, SolverError
from common.logging import get_logger
from common.metrics import metrics, SimulationMetrics
from common.types import (
    CONDUCTIVITY_FLOOR,
    DEFAULT_ELECTRODE_HALF_WIDTH_RATIO,
    ELECTRODE_PAIRS,
    N_ELECTRODES,
)
from core.mesh import GEOM_TOL, Mesh
from core.microstructure import OrientationSpec
from core.tensorlab import green_lagrange
from domain.parameters import ElectricalParams

logger = get_logger(__name__)


# ============================================================================
# TIPOS
# ============================================================================

@dataclass
class ElectrodeSet:
    """Eletrodos E1–E8: nós de contorno de cada segmento."""
    nodes: Dict[int, np.ndarray]
    centers: Dict[int, Tuple[float, float]]
    half_width: float

    def __getitem__(self, index: int) -> np.ndarray:
        return self.nodes[index]


@dataclass
class ConductanceVector:
    """Condutâncias dos 28 pares em ordem lexicográfica e a referência G⁰."""
    values: np.ndarray
    reference: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.values / self.reference

    def as_dict(self) -> Dict[Tuple[int, int], float]:
        return dict(zip(ELECTRODE_PAIRS, self.values.tolist()))


# ============================================================================
# CONDUTIVIDADE
# ============================================================================

def conductivity_tensor(F, phi, orientation: OrientationSpec, params: ElectricalParams) -> np.ndarray:
    """
    Tensor de condutividade efetivo no plano, shape (..., 2, 2), em S/mm.

    σ̂₀ = σ_m I + Σ v_f[σ∥ a⊗a + σ⊥(I − a⊗a)], σ̂_eff = ((1−φ)^p + k_e)·σ̂₀
    """
    F = np.asarray(F, dtype=float)
    E = green_lagrange(F)[..., :2, :2]
    tr_E = np.trace(E, axis1=-2, axis2=-1)
    phi = np.clip(np.broadcast_to(np.asarray(phi, dtype=float), E.shape[:-2]), 0.0, 1.0)

    I2 = np.eye(2)
    sigma = np.broadcast_to(params.sigma_m * I2, E.shape).copy()
    for family in orientation.families:
        a = family.direction
        aa = np.outer(a, a)
        eps_par = np.einsum('i,...ij,j->...', a, E, a)
        eps_perp = 0.5 * (tr_E - eps_par)
        s_par = params.sigma_par0 * np.maximum(1.0 - params.gf_par * eps_par, CONDUCTIVITY_FLOOR)
        s_perp = params.sigma_perp0 * np.maximum(1.0 - params.gf_perp * eps_perp, CONDUCTIVITY_FLOOR)
        sigma += family.volume_fraction * (
            s_par[..., None, None] * aa + s_perp[..., None, None] * (I2 - aa)
        )

    h_e = (1.0 - phi) ** params.p_exp + params.k_e
    return h_e[..., None, None] * sigma


# ============================================================================
# ELETRODOS
# ============================================================================

def electrode_centers(width: float, height: float) -> Dict[int, Tuple[str, float, float]]:
    """
    Centros nos quartos de cada aresta: E1–E2 base, E3–E4 direita, E5–E6 topo, E7–E8 esquerda.

    E1→E5 cruza o plano da trinca na diagonal e E3→E7 é horizontal abaixo dele.
    """
    return {
        1: ("bottom", 0.25 * width, 0.0),
        2: ("bottom", 0.75 * width, 0.0),
        3: ("right", width, 0.25 * height),
        4: ("right", width, 0.75 * height),
        5: ("top", 0.75 * width, height),
        6: ("top", 0.25 * width, height),
        7: ("left", 0.0, 0.25 * height),
        8: ("left", 0.0, 0.75 * height),
    }


def build_electrodes(mesh: Mesh, half_width: Optional[float] = None) -> ElectrodeSet:
    """
    Seleciona os nós de contorno a até l_c do centro de cada eletrodo.

    Raises:
        MeshError: Segmento vazio ou segmentos sobrepostos
    """
    l_c = DEFAULT_ELECTRODE_HALF_WIDTH_RATIO * mesh.width if half_width is None else half_width
    nodes: Dict[int, np.ndarray] = {}
    centers: Dict[int, Tuple[float, float]] = {}
    for index, (edge, cx, cy) in electrode_centers(mesh.width, mesh.height).items():
        candidates = mesh.tags[edge]
        along = 0 if edge in ("bottom", "top") else 1
        coord = mesh.nodes[candidates, along]
        center = cx if along == 0 else cy
        selected = np.sort(candidates[np.abs(coord - center) <= l_c + GEOM_TOL])
        if selected.size == 0:
            raise MeshError("Electrode segment has no nodes", {"electrode": index, "half_width": l_c})
        nodes[index] = selected
        centers[index] = (cx, cy)

    stacked = np.concatenate(list(nodes.values()))
    if np.unique(stacked).size != stacked.size:
        raise MeshError("Electrode segments overlap", {"half_width": l_c})
    return ElectrodeSet(nodes=nodes, centers=centers, half_width=l_c)


# ============================================================================
# PROBLEMA ELÉTRICO
# ============================================================================

def assemble_conduction(mesh: Mesh, sigma_field: np.ndarray, thickness: float = 1.0) -> csr_matrix:
    """K^{ee} = ∫ ∇N·σ̂·∇N dV na configuração de referência."""
    Ke = np.einsum('egai,egij,egbj,eg->eab', mesh.dN_dX, sigma_field, mesh.dN_dX, mesh.dV) * thickness
    rows = np.repeat(mesh.elements, 4, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 4)).ravel()
    n = mesh.n_nodes
    return coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _gauss_conductivity(mesh, F_field, phi_field, orientation, params):
    phi_gp = np.clip(mesh.interpolate(phi_field), 0.0, 1.0)
    return conductivity_tensor(F_field, phi_gp, orientation, params)


def solve_electric(
    mesh: Mesh,
    sigma_field: np.ndarray,
    anode: np.ndarray,
    cathode: np.ndarray,
    v_app: float,
    scale: float = 1.0,
) -> np.ndarray:
    """
    Potencial com φ_e = v_app no ânodo, 0 no cátodo e Neumann homogêneo no restante.

    Raises:
        DomainError: Ânodo e cátodo com nós em comum
        SolverError: Sistema singular
    """
    anode = np.asarray(anode)
    cathode = np.asarray(cathode)
    if np.intersect1d(anode, cathode).size:
        raise DomainError("Anode and cathode must be disjoint")

    K = assemble_conduction(mesh, sigma_field / scale)
    fixed = np.concatenate([anode, cathode])
    free = np.setdiff1d(np.arange(mesh.n_nodes), fixed)
    potential = np.zeros(mesh.n_nodes)
    potential[anode] = v_app

    K_ff = K[free][:, free].tocsc()
    rhs = -K[free][:, fixed] @ potential[fixed]
    try:
        potential[free] = splu(K_ff).solve(rhs)
    except RuntimeError as e:
        raise SolverError("Electric system is singular", {"error": str(e)}) from e
    if not np.all(np.isfinite(potential)):
        raise SolverError("Electric solve produced non-finite potential")
    return potential


def conductance_pair(
    mesh: Mesh,
    potential: np.ndarray,
    sigma_field: np.ndarray,
    anode: np.ndarray,
    v_app: float,
    thickness: float = 1.0,
) -> float:
    """G = |I|/V_app com I a corrente líquida (reação nodal) no ânodo."""
    K = assemble_conduction(mesh, sigma_field, thickness)
    current = float(np.sum((K @ potential)[np.asarray(anode)]))
    return abs(current) / v_app


def resistance_and_norm(G: float, G0: float) -> Tuple[float, float]:
    """(R, σ/σ₀) = (1/G, G/G₀)."""
    if G <= 0.0 or G0 <= 0.0:
        raise DomainError("Conductance must be positive", {"G": G, "G0": G0})
    return 1.0 / G, G / G0


def eit_sweep(
    mesh: Mesh,
    F_field: np.ndarray,
    phi_field: np.ndarray,
    orientation: OrientationSpec,
    params: ElectricalParams,
    electrodes: ElectrodeSet,
    reference: Optional[ConductanceVector] = None,
    thickness: float = 1.0,
) -> ConductanceVector:
    """
    Condutâncias dos 28 pares injetores com uma única fatoração.

    O sistema é condensado (complemento de Schur) sobre os nós de todos os
    eletrodos; para cada par os eletrodos inativos ficam livres e sem fluxo
    líquido, de modo que o resultado coincide com a solução direta do par.
    """
    with metrics.timer(SimulationMetrics.EIT_DURATION):
        sigma = _gauss_conductivity(mesh, F_field, phi_field, orientation, params)
        scale = params.sigma_par0
        K = assemble_conduction(mesh, sigma / scale).tocsc()

        groups = [electrodes[k] for k in range(1, N_ELECTRODES + 1)]
        E_nodes = np.concatenate(groups)
        offsets = np.cumsum([0] + [g.size for g in groups])
        interior = np.setdiff1d(np.arange(mesh.n_nodes), E_nodes)

        K_NN = K[interior][:, interior].tocsc()
        K_NE = K[interior][:, E_nodes].toarray()
        K_EE = K[E_nodes][:, E_nodes].toarray()
        try:
            lu = splu(K_NN)
        except RuntimeError as e:
            raise SolverError("Electric system is singular", {"error": str(e)}) from e
        S = K_EE - K_NE.T @ lu.solve(K_NE)

        local = {k: np.arange(offsets[k - 1], offsets[k]) for k in range(1, N_ELECTRODES + 1)}
        values = np.empty(len(ELECTRODE_PAIRS))
        for p, (i, j) in enumerate(ELECTRODE_PAIRS):
            active = np.concatenate([local[i], local[j]])
            inactive = np.setdiff1d(np.arange(E_nodes.size), active)
            phi_a = np.concatenate([np.full(local[i].size, params.v_app), np.zeros(local[j].size)])
            phi_E = np.zeros(E_nodes.size)
            phi_E[active] = phi_a
            if inactive.size:
                phi_E[inactive] = np.linalg.solve(S[np.ix_(inactive, inactive)], -S[np.ix_(inactive, active)] @ phi_a)
            current = np.sum((S @ phi_E)[local[i]])
            values[p] = abs(current) * scale * thickness / params.v_app

    metrics.increment(SimulationMetrics.EIT_SOLVES)
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise SolverError("Non-positive conductance in EIT sweep", {"min": float(np.min(values))})

    ref = values.copy() if reference is None else reference.values
    return ConductanceVector(values=values, reference=ref)
