"""
Testes para Malha SEN
CrackSense - Compósitos Autossensíveis
"""

import numpy as np
import pytest

from common.exceptions import MeshError
from core.mesh import Mesh, build_sen_mesh, graded_axis, rectangle_mesh


@pytest.fixture
def sen_mesh():
    """Malha SEN pequena: W = H = 1, entalhe 0.3, h = 0.05."""
    return build_sen_mesh(1.0, 1.0, 0.3, 0.05, 0.2, coarse_h=0.1)


class TestGradedAxis:
    """Testes para eixo graduado."""

    def test_segments_respect_spacing(self):
        """Testa espaçamento máximo por segmento."""
        xs = graded_axis([(0.0, 0.4, 0.1), (0.4, 0.5, 0.025)])
        assert xs[0] == 0.0 and xs[-1] == pytest.approx(0.5)
        assert np.all(np.diff(xs) > 0.0)
        assert np.max(np.diff(xs[xs >= 0.4 - 1e-12])) <= 0.025 + 1e-12

    def test_empty_segment_skipped(self):
        """Testa segmento de comprimento nulo."""
        xs = graded_axis([(0.0, 0.0, 0.1), (0.0, 1.0, 0.5)])
        np.testing.assert_allclose(xs, [0.0, 0.5, 1.0])


class TestSenMesh:
    """Testes para a malha com entalhe lateral."""

    def test_boundary_tags(self, sen_mesh):
        """Testa nós de contorno identificados."""
        x, y = sen_mesh.nodes[:, 0], sen_mesh.nodes[:, 1]
        assert np.allclose(y[sen_mesh.tags["bottom"]], 0.0)
        assert np.allclose(y[sen_mesh.tags["top"]], 1.0)
        assert np.allclose(x[sen_mesh.tags["left"]], 0.0)
        assert np.allclose(x[sen_mesh.tags["right"]], 1.0)

    def test_notch_nodes_duplicated(self, sen_mesh):
        """Testa cópias coincidentes dos nós da fenda."""
        lower, upper = sen_mesh.tags["notch_lower"], sen_mesh.tags["notch_upper"]
        assert lower.size == upper.size > 0
        np.testing.assert_allclose(sen_mesh.nodes[lower], sen_mesh.nodes[upper])
        assert np.all(sen_mesh.nodes[lower, 0] < 0.3)
        np.testing.assert_allclose(sen_mesh.nodes[lower, 1], 0.5)

    def test_faces_of_slit_are_disconnected(self, sen_mesh):
        """Testa que nenhum elemento usa as duas cópias da fenda."""
        lower = set(sen_mesh.tags["notch_lower"].tolist())
        upper = set(sen_mesh.tags["notch_upper"].tolist())
        for element in sen_mesh.elements:
            nodes = set(element.tolist())
            assert not (nodes & lower and nodes & upper)

    def test_total_area(self, sen_mesh):
        """Testa soma dos volumes de integração."""
        assert float(np.sum(sen_mesh.dV)) == pytest.approx(1.0, rel=1e-12)

    def test_refined_band_spacing(self, sen_mesh):
        """Testa h ≤ tamanho alvo na faixa refinada."""
        coords = sen_mesh.nodes[sen_mesh.elements]
        centroid_y = coords[:, :, 1].mean(axis=1)
        in_band = np.abs(centroid_y - 0.5) < 0.1
        dx = coords[in_band, 1, 0] - coords[in_band, 0, 0]
        dy = coords[in_band, 3, 1] - coords[in_band, 0, 1]
        assert np.all(dy <= 0.05 + 1e-12)
        right_of_fine = coords[in_band, 0, 0] >= 0.2 - 1e-12
        assert np.all(dx[right_of_fine] <= 0.05 + 1e-12)

    def test_without_notch(self):
        """Testa entalhe nulo sem duplicação."""
        mesh = build_sen_mesh(1.0, 1.0, 0.0, 0.1, 0.2)
        assert mesh.tags["notch_upper"].size == 0

    @pytest.mark.parametrize("args", [
        (0.0, 1.0, 0.3, 0.05, 0.2),
        (1.0, -1.0, 0.3, 0.05, 0.2),
        (1.0, 1.0, 1.0, 0.05, 0.2),
        (1.0, 1.0, -0.1, 0.05, 0.2),
        (1.0, 1.0, 0.3, 0.0, 0.2),
    ])
    def test_invalid_geometry(self, args):
        """Testa geometria inválida."""
        with pytest.raises(MeshError):
            build_sen_mesh(*args)


class TestFieldOperators:
    """Testes para interpolação e gradientes nos pontos de Gauss."""

    def test_linear_field_gradient_exact(self):
        """Testa gradiente de campo linear."""
        mesh = rectangle_mesh(2.0, 1.0, 4, 3)
        nodal = 2.0 * mesh.nodes[:, 0] + 3.0 * mesh.nodes[:, 1] + 1.0
        grad = mesh.gradient(nodal)
        np.testing.assert_allclose(grad[..., 0], 2.0, atol=1e-12)
        np.testing.assert_allclose(grad[..., 1], 3.0, atol=1e-12)

    def test_interpolation_matches_gauss_coordinates(self):
        """Testa interpolação de x nos pontos de Gauss."""
        mesh = rectangle_mesh(1.0, 1.0, 3, 3)
        np.testing.assert_allclose(mesh.interpolate(mesh.nodes[:, 0]), mesh.gauss_coordinates()[..., 0])

    def test_deformation_gradient_uniaxial(self):
        """Testa F para u = (0.01·x, 0) em estado plano de deformação."""
        mesh = rectangle_mesh(1.0, 1.0, 2, 2)
        u = np.zeros(2 * mesh.n_nodes)
        u[0::2] = 0.01 * mesh.nodes[:, 0]
        F = mesh.deformation_gradient(u)
        expected = np.diag([1.01, 1.0, 1.0])
        np.testing.assert_allclose(F, np.broadcast_to(expected, F.shape), atol=1e-12)

    def test_element_dofs_interleaved(self):
        """Testa graus de liberdade intercalados."""
        mesh = rectangle_mesh(1.0, 1.0, 1, 1)
        np.testing.assert_array_equal(mesh.element_dofs[0], [0, 1, 2, 3, 6, 7, 4, 5])

    def test_degenerate_element_rejected(self):
        """Testa elemento com orientação invertida."""
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(MeshError):
            Mesh(nodes=nodes, elements=np.array([[0, 3, 2, 1]]), tags={}, width=1.0, height=1.0, notch_length=0.0)
