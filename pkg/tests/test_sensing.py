"""
Testes para Sensoriamento Piezoresistivo
CrackSense - Compósitos Autossensíveis
"""

import numpy as np
import pytest

from common.exceptions import DomainError, MeshError
from common.types import ELECTRODE_PAIRS
from core.mesh import rectangle_mesh
from core.microstructure import decompose_families, orientation_from_angles
from core.sensing import (
    assemble_conduction,
    build_electrodes,
    conductance_pair,
    conductivity_tensor,
    eit_sweep,
    electrode_centers,
    resistance_and_norm,
    solve_electric,
)
from domain.parameters import ElectricalParams


@pytest.fixture
def mesh():
    return rectangle_mesh(1.0, 1.0, 8, 8)


@pytest.fixture
def orientation():
    return decompose_families(orientation_from_angles([0.0, 0.5 * np.pi], [0.7, 0.3]), 0.3)


def _identity_field(mesh):
    return np.broadcast_to(np.eye(3), (mesh.n_elements, 4, 3, 3)).copy()


class TestConductivity:
    """Testes para o tensor de condutividade efetivo."""

    def test_undeformed_mixture(self, orientation):
        """Testa σ = σ_m I + v_f[σ∥ A + σ⊥(I − A)] sem deformação."""
        params = ElectricalParams()
        sigma = conductivity_tensor(np.eye(3), 0.0, orientation, params)
        A = orientation.A
        expected = params.sigma_m * np.eye(2) + 0.3 * (
            params.sigma_par0 * A + params.sigma_perp0 * (np.eye(2) - A)
        )
        np.testing.assert_allclose(sigma, (1.0 + params.k_e) * expected, rtol=1e-12, atol=1e-12)

    def test_fiber_strain_reduces_axial_conductivity(self):
        """Testa gauge factor longitudinal para fibras a 0°."""
        params = ElectricalParams(sigma_m=0.0, k_e=1e-6)
        spec = decompose_families(orientation_from_angles([0.0], [1.0]), 0.3)
        e = 0.01
        F = np.diag([1.0 + e, 1.0, 1.0])
        E11 = 0.5 * ((1.0 + e) ** 2 - 1.0)
        sigma = conductivity_tensor(F, 0.0, spec, params)
        expected = 0.3 * params.sigma_par0 * (1.0 - params.gf_par * E11) * (1.0 + params.k_e)
        assert sigma[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_full_damage_leaves_residual(self, orientation):
        """Testa σ_eff = k_e·σ̂₀ com φ = 1."""
        params = ElectricalParams()
        intact = conductivity_tensor(np.eye(3), 0.0, orientation, params)
        broken = conductivity_tensor(np.eye(3), 1.0, orientation, params)
        np.testing.assert_allclose(broken, intact * params.k_e / (1.0 + params.k_e), rtol=1e-12)

    def test_conductivity_floor(self):
        """Testa piso de condutividade sob deformação extrema."""
        params = ElectricalParams(sigma_m=0.0, gf_par=200.0)
        spec = decompose_families(orientation_from_angles([0.0], [1.0]), 1.0)
        sigma = conductivity_tensor(np.diag([1.2, 1.0, 1.0]), 0.0, spec, params)
        assert sigma[0, 0] > 0.0


class TestElectrodes:
    """Testes para o harness de oito eletrodos."""

    def test_centers_on_edge_quarters(self):
        """Testa centros nos quartos das arestas."""
        centers = electrode_centers(2.0, 4.0)
        assert centers[1] == ("bottom", 0.5, 0.0)
        assert centers[4] == ("right", 2.0, 3.0)
        assert centers[5] == ("top", 1.5, 4.0)
        assert centers[7] == ("left", 0.0, 1.0)

    def test_default_segments(self, mesh):
        """Testa um nó por eletrodo na malha 8×8."""
        electrodes = build_electrodes(mesh)
        assert sorted(electrodes.nodes) == list(range(1, 9))
        np.testing.assert_allclose(mesh.nodes[electrodes[1]], [[0.25, 0.0]])
        np.testing.assert_allclose(mesh.nodes[electrodes[6]], [[0.25, 1.0]])

    def test_overlap_rejected(self, mesh):
        """Testa segmentos sobrepostos."""
        with pytest.raises(MeshError):
            build_electrodes(mesh, half_width=0.3)

    def test_empty_segment_rejected(self):
        """Testa segmento sem nós."""
        with pytest.raises(MeshError):
            build_electrodes(rectangle_mesh(1.0, 1.0, 2, 2), half_width=0.01)


class TestElectricProblem:
    """Testes para o potencial estacionário e condutâncias."""

    def test_uniform_plate_analytic_conductance(self):
        """Testa G = s·H·t/W com eletrodos nas arestas laterais inteiras."""
        mesh = rectangle_mesh(2.0, 1.0, 6, 3)
        s = 3.0
        sigma = np.broadcast_to(s * np.eye(2), (mesh.n_elements, 4, 2, 2))
        left, right = mesh.tags["left"], mesh.tags["right"]
        potential = solve_electric(mesh, sigma, left, right, 1.0)
        np.testing.assert_allclose(potential, 1.0 - mesh.nodes[:, 0] / 2.0, atol=1e-12)
        G = conductance_pair(mesh, potential, sigma, left, 1.0, thickness=2.0)
        assert G == pytest.approx(s * 1.0 * 2.0 / 2.0, rel=1e-10)

    def test_current_conservation(self, mesh, orientation):
        """Testa corrente de entrada igual à de saída."""
        sigma = conductivity_tensor(_identity_field(mesh), 0.0, orientation, ElectricalParams())
        electrodes = build_electrodes(mesh)
        potential = solve_electric(mesh, sigma, electrodes[1], electrodes[5], 1.0)
        current = assemble_conduction(mesh, sigma) @ potential
        assert np.sum(current[electrodes[1]]) == pytest.approx(-np.sum(current[electrodes[5]]), rel=1e-9)

    def test_reciprocity(self, mesh, orientation):
        """Testa G(i, j) = G(j, i)."""
        sigma = conductivity_tensor(_identity_field(mesh), 0.0, orientation, ElectricalParams())
        electrodes = build_electrodes(mesh)
        forward = solve_electric(mesh, sigma, electrodes[3], electrodes[7], 1.0)
        backward = solve_electric(mesh, sigma, electrodes[7], electrodes[3], 1.0)
        G_fwd = conductance_pair(mesh, forward, sigma, electrodes[3], 1.0)
        G_bwd = conductance_pair(mesh, backward, sigma, electrodes[7], 1.0)
        assert G_fwd == pytest.approx(G_bwd, rel=1e-9)

    def test_overlapping_terminals(self, mesh):
        """Testa ânodo e cátodo com nós em comum."""
        sigma = np.broadcast_to(np.eye(2), (mesh.n_elements, 4, 2, 2))
        with pytest.raises(DomainError):
            solve_electric(mesh, sigma, np.array([0, 1]), np.array([1, 2]), 1.0)

    @pytest.mark.parametrize("G, G0", [(0.0, 1.0), (1.0, -1.0)])
    def test_resistance_requires_positive_conductance(self, G, G0):
        """Testa condutâncias não positivas."""
        with pytest.raises(DomainError):
            resistance_and_norm(G, G0)

    def test_resistance_and_norm(self):
        """Testa R = 1/G e σ/σ₀ = G/G₀."""
        assert resistance_and_norm(4.0, 2.0) == (0.25, 2.0)


class TestEitSweep:
    """Testes para a varredura dos 28 pares."""

    def test_matches_direct_pair_solutions(self, mesh, orientation):
        """Testa condensação contra solução direta de cada par."""
        params = ElectricalParams()
        F = _identity_field(mesh)
        phi = np.zeros(mesh.n_nodes)
        phi[mesh.nodes[:, 1] == 0.5] = 0.6
        electrodes = build_electrodes(mesh)
        sweep = eit_sweep(mesh, F, phi, orientation, params, electrodes)

        sigma = conductivity_tensor(F, mesh.interpolate(phi), orientation, params)
        for p in (ELECTRODE_PAIRS.index((1, 5)), ELECTRODE_PAIRS.index((3, 7)), 0):
            i, j = ELECTRODE_PAIRS[p]
            potential = solve_electric(mesh, sigma, electrodes[i], electrodes[j], params.v_app)
            direct = conductance_pair(mesh, potential, sigma, electrodes[i], params.v_app)
            assert sweep.values[p] == pytest.approx(direct, rel=1e-8)

    def test_reference_ratios(self, mesh, orientation):
        """Testa razões unitárias sem referência e queda com dano."""
        params = ElectricalParams()
        F = _identity_field(mesh)
        electrodes = build_electrodes(mesh)
        reference = eit_sweep(mesh, F, np.zeros(mesh.n_nodes), orientation, params, electrodes)
        np.testing.assert_allclose(reference.ratios, 1.0)
        assert len(reference.as_dict()) == 28

        phi = np.where(np.abs(mesh.nodes[:, 1] - 0.5) < 1e-9, 1.0, 0.0)
        damaged = eit_sweep(mesh, F, phi, orientation, params, electrodes, reference=reference)
        np.testing.assert_array_equal(damaged.reference, reference.values)
        crossing = ELECTRODE_PAIRS.index((1, 5))
        below = ELECTRODE_PAIRS.index((1, 2))
        assert damaged.ratios[crossing] < 1.0
        assert damaged.ratios[crossing] < damaged.ratios[below]

    def test_conductances_decrease_with_nested_damage(self, mesh, orientation):
        """Testa G não crescente em todos os pares para campos de dano aninhados."""
        params = ElectricalParams()
        F = _identity_field(mesh)
        electrodes = build_electrodes(mesh)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        band = np.abs(y - 0.5) < 1e-9
        fields = [np.zeros(mesh.n_nodes)]
        for length, level in [(0.25, 0.5), (0.25, 1.0), (0.5, 1.0), (0.75, 1.0)]:
            fields.append(np.maximum(fields[-1], np.where(band & (x <= length + 1e-9), level, 0.0)))

        stack = np.array([eit_sweep(mesh, F, phi, orientation, params, electrodes).values for phi in fields])
        assert np.all(np.diff(stack, axis=0) <= 1e-12 * stack[:-1])
        crossing = ELECTRODE_PAIRS.index((1, 5))
        assert stack[-1, crossing] < stack[0, crossing]
