"""
Testes para Fratura
CrackSense - Compósitos Autossensíveis
"""

import numpy as np
import pytest

from common.exceptions import DomainError
from common.types import DEFAULT_K_RES
from core.fracture import (
    crack_surface_length,
    crack_tip_x,
    degradation,
    normalized_crack_length,
)
from core.mesh import rectangle_mesh


class TestDegradation:
    """Testes para a função de degradação quadrática."""

    def test_intact_and_broken_values(self):
        """Testa g(0) = 1 + k e g(1) = k."""
        g, _, _ = degradation(np.array([0.0, 1.0]))
        np.testing.assert_allclose(g, [1.0 + DEFAULT_K_RES, DEFAULT_K_RES])

    def test_derivatives(self):
        """Testa g' = −2(1−φ) e g'' = 2."""
        _, g1, g2 = degradation(np.array([0.0, 0.25, 1.0]), k_res=0.0)
        np.testing.assert_allclose(g1, [-2.0, -1.5, 0.0])
        np.testing.assert_allclose(g2, [2.0, 2.0, 2.0])

    def test_monotone_decreasing(self):
        """Testa monotonicidade em [0, 1]."""
        g, _, _ = degradation(np.linspace(0.0, 1.0, 21))
        assert np.all(np.diff(g) < 0.0)

    def test_out_of_range_is_clamped(self):
        """Testa projeção de φ fora de [0, 1]."""
        g, _, _ = degradation(np.array([-0.2, 1.3]), k_res=1e-3)
        np.testing.assert_allclose(g, [1.0 + 1e-3, 1e-3])

    def test_scalar_input(self):
        """Testa entrada escalar."""
        g, _, _ = degradation(0.5, k_res=0.0)
        assert float(g) == pytest.approx(0.25)


# ============================================================================
# FUNCIONAL DE SUPERFÍCIE
# ============================================================================

def _band_profile(mesh, y0, l0):
    return np.exp(-np.abs(mesh.nodes[:, 1] - y0) / l0)


class TestCrackSurfaceLength:
    """Testes para o funcional de densidade de superfície."""

    def test_optimal_profile_recovers_crack_length(self):
        """Testa perfil exp(−|y−y0|/l0) atravessando a largura com h = l0/4."""
        l0 = 0.05
        mesh = rectangle_mesh(1.0, 1.0, 4, 80)
        phi = _band_profile(mesh, 0.5, l0)
        assert crack_surface_length(phi, mesh, l0) == pytest.approx(1.0, rel=0.02)

    def test_normalized_length(self):
        """Testa ã = ℓ/W para um corpo de largura 2."""
        l0 = 0.05
        mesh = rectangle_mesh(2.0, 1.0, 8, 80)
        phi = _band_profile(mesh, 0.5, l0)
        assert normalized_crack_length(phi, mesh, l0, 2.0) == pytest.approx(1.0, rel=0.02)

    def test_intact_field_has_zero_length(self):
        """Testa campo nulo."""
        mesh = rectangle_mesh(1.0, 1.0, 4, 4)
        assert crack_surface_length(np.zeros(mesh.n_nodes), mesh, 0.1) == 0.0

    def test_invalid_l0(self):
        """Testa l0 não positivo."""
        mesh = rectangle_mesh(1.0, 1.0, 2, 2)
        with pytest.raises(DomainError):
            crack_surface_length(np.zeros(mesh.n_nodes), mesh, 0.0)

    def test_invalid_width(self):
        """Testa largura não positiva."""
        mesh = rectangle_mesh(1.0, 1.0, 2, 2)
        with pytest.raises(DomainError):
            normalized_crack_length(np.zeros(mesh.n_nodes), mesh, 0.1, 0.0)


class TestCrackTip:
    """Testes para a posição da ponta da trinca."""

    def test_tip_from_cracked_nodes(self):
        """Testa maior x entre nós acima do limiar."""
        mesh = rectangle_mesh(1.0, 1.0, 10, 10)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        phi = np.where((np.abs(y - 0.5) < 1e-9) & (x <= 0.6 + 1e-9), 1.0, 0.0)
        assert crack_tip_x(phi, mesh, 0.95) == pytest.approx(0.6)

    def test_below_threshold_returns_notch_tip(self):
        """Testa campo abaixo do limiar."""
        mesh = rectangle_mesh(1.0, 1.0, 4, 4)
        assert crack_tip_x(np.full(mesh.n_nodes, 0.5), mesh, 0.95) == mesh.notch_length

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.1])
    def test_invalid_threshold(self, threshold):
        """Testa limiar fora de (0, 1)."""
        mesh = rectangle_mesh(1.0, 1.0, 2, 2)
        with pytest.raises(DomainError):
            crack_tip_x(np.zeros(mesh.n_nodes), mesh, threshold)
