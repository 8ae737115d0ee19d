import numpy as np
import pytest

from bgnflow.geometry import (
    averaged_normal,
    discrete_curvature,
    l2_norm,
    lumped_inner,
    lumped_weights,
    piecewise_normal,
)
from bgnflow.mesh import build_initial_mesh, circle_curve, polygon_mesh, regular_polygon, rotation_matrix
from bgnflow.reference import gauss_lobatto_rule
from bgnflow.solver import stiffness_matrix


def square_in_circle():
    return build_initial_mesh(circle_curve(), 4, 1)


def test_piecewise_normal_square_edge():
    mesh = square_in_circle()
    # element 3 runs from (0,-1) to (1,0)
    np.testing.assert_allclose(piecewise_normal(mesh, 3, 0.0), np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_piecewise_normal_horizontal():
    mesh = polygon_mesh([[0, 0], [1, 0], [1, 1], [0, 1]], k=2)
    for xi in (-1.0, -0.3, 0.0, 1.0):
        np.testing.assert_allclose(piecewise_normal(mesh, 0, xi), [0, -1], atol=1e-15)


def test_piecewise_normal_nearly_radial():
    mesh = build_initial_mesh(circle_curve(), 32, 3)
    for e in (0, 7, 20):
        n = piecewise_normal(mesh, e, 0.0)
        mid = mesh.points(mesh.ref.basis(0.0))[e, 0]
        assert np.linalg.norm(n - mid / np.linalg.norm(mid)) < 1e-4


def test_lumped_weights_square_and_hexagon():
    sq = polygon_mesh([[0, 0], [1, 0], [1, 1], [0, 1]])
    np.testing.assert_allclose(lumped_weights(sq), 1.0, rtol=1e-15)
    hexagon = regular_polygon(6, radius=2.5)
    np.testing.assert_allclose(lumped_weights(hexagon), 2.5, rtol=1e-14)  # side = radius


def test_lumped_weight_simpson_midpoint():
    L = 3.0
    mesh = polygon_mesh([[0, 0], [L, 0], [L, 2], [0, 2]], k=2)
    # node 1 is the midpoint of the first edge: Simpson weight 4/3 * L/2
    assert abs(lumped_weights(mesh)[1] - 2 * L / 3) < 1e-14


def test_lumped_total_is_lobatto_arclength(circle_mesh):
    m = lumped_weights(circle_mesh)
    _, w = gauss_lobatto_rule(circle_mesh.degree)
    assert np.all(m > 0)
    assert abs(m.sum() - np.sum(circle_mesh.node_jacobians @ w)) < 1e-13


def test_averaged_normal_square_vertex():
    mesh = square_in_circle()
    nb = averaged_normal(mesh)
    np.testing.assert_allclose(nb[0], [1 / np.sqrt(2), 0.0], atol=1e-15)


@pytest.mark.parametrize("n", [3, 5, 8, 17])
def test_averaged_normal_regular_polygon(n):
    mesh = regular_polygon(n, radius=1.7, phase=0.3)
    nb = averaged_normal(mesh)
    np.testing.assert_allclose(np.linalg.norm(nb, axis=1), np.cos(np.pi / n), atol=1e-12)
    radial = mesh.nodes / np.linalg.norm(mesh.nodes, axis=1)[:, None]
    np.testing.assert_allclose(nb / np.linalg.norm(nb, axis=1)[:, None], radial, atol=1e-12)


def test_interior_nodes_have_unit_normal():
    for k in (2, 3):
        mesh = build_initial_mesh(circle_curve(), 12, k)
        nb = averaged_normal(mesh)
        interior = np.arange(mesh.node_count) % k != 0
        np.testing.assert_allclose(np.linalg.norm(nb[interior], axis=1), 1.0, atol=1e-14)
        one_sided = np.array([piecewise_normal(mesh, j // k, mesh.ref.gl_nodes[j % k]) for j in np.flatnonzero(interior)])
        np.testing.assert_allclose(nb[interior], one_sided, atol=1e-14)


@pytest.mark.parametrize("J", [8, 16, 32])
def test_junction_normal_deficit_bounded_by_jump(degree, J):
    mesh = build_initial_mesh(circle_curve(), J, degree)
    nb = averaged_normal(mesh)
    k = degree
    for e in range(J):
        j = ((e + 1) * k) % mesh.node_count
        left = piecewise_normal(mesh, e, 1.0)
        right = piecewise_normal(mesh, (e + 1) % J, -1.0)
        size = np.linalg.norm(nb[j])
        assert size <= 1 + 1e-12
        assert 1 - size <= np.linalg.norm(left - right) ** 2 + 1e-15


def test_averaged_normal_rotation_equivariant(ellipse_mesh):
    R = rotation_matrix(0.7)
    nb = averaged_normal(ellipse_mesh)
    nb_rot = averaged_normal(ellipse_mesh.rotated(0.7))
    np.testing.assert_allclose(nb_rot, nb @ R.T, atol=1e-12)


def test_square_curvature_closed_form():
    mesh = square_in_circle()
    K = stiffness_matrix(mesh)
    m = lumped_weights(mesh)
    np.testing.assert_allclose(K @ mesh.nodes, [[np.sqrt(2), 0], [0, np.sqrt(2)], [-np.sqrt(2), 0], [0, -np.sqrt(2)]], atol=1e-15)
    np.testing.assert_allclose(m, np.sqrt(2), rtol=1e-15)
    kappa = discrete_curvature(mesh, K, m, averaged_normal(mesh, m))
    np.testing.assert_allclose(kappa, np.sqrt(2), atol=1e-12)


@pytest.mark.parametrize("radius,k,J,tol", [(1.0, 3, 32, 1e-3), (2.0, 2, 64, 1e-3)])
def test_circle_curvature(radius, k, J, tol):
    mesh = build_initial_mesh(circle_curve(radius), J, k)
    K = stiffness_matrix(mesh)
    m = lumped_weights(mesh)
    kappa = discrete_curvature(mesh, K, m, averaged_normal(mesh, m))
    np.testing.assert_allclose(kappa, 1 / radius, atol=tol)


def test_curvature_convergence_order(degree):
    errs = []
    Js = (16, 32, 64, 128)
    for J in Js:
        mesh = build_initial_mesh(circle_curve(), J, degree)
        K = stiffness_matrix(mesh)
        m = lumped_weights(mesh)
        errs.append(np.max(np.abs(discrete_curvature(mesh, K, m, averaged_normal(mesh, m)) - 1)))
    slope = -np.polyfit(np.log(Js), np.log(errs), 1)[0]
    assert slope >= degree - 0.5


def test_zero_normal_rejected():
    mesh = square_in_circle()
    K = stiffness_matrix(mesh)
    nb = averaged_normal(mesh)
    nb[2] = 0.0
    from bgnflow.errors import DegenerateNormalError

    with pytest.raises(DegenerateNormalError):
        discrete_curvature(mesh, K, lumped_weights(mesh), nb)


def test_lumped_norm_equivalence(rng):
    for k in (1, 2, 3):
        mesh = build_initial_mesh(circle_curve(), 12, k)
        m = lumped_weights(mesh)
        for _ in range(100):
            f = rng.normal(size=(mesh.node_count, 2))
            ratio = np.sqrt(lumped_inner(mesh, f, f, m)) / l2_norm(mesh, f)
            assert 0.25 <= ratio <= 4.0
