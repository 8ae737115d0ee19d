import numpy as np
import pytest

from bgnflow.errors import DegenerateNormalError, MeshDegenerationError, SingularSystemError
from bgnflow.flows import ELLIPSE_RADIAL, VelocityField
from bgnflow.geometry import averaged_normal, discrete_curvature, lumped_weights
from bgnflow.mesh import build_initial_mesh, circle_curve, ellipse_curve, mesh_ratio, polygon_mesh, regular_polygon, rotation_matrix
from bgnflow.solver import (
    assemble_bgn_system,
    bgn_step,
    constraint_residual,
    lagrangian_step,
    solve_linear,
    stabilization_rhs,
    stationary_multiplier,
    step_operators,
    stiffness_matrix,
)

ZERO = VelocityField("zero")


def test_stiffness_single_element_block():
    L = 2.5
    mesh = polygon_mesh([[0, 0], [L, 0], [L, 1.0], [0, 1.0]])
    K = stiffness_matrix(mesh).toarray()
    # edge 0 couples nodes 0, 1; edge 3 adds to node 0 as well
    assert abs(K[0, 1] + 1 / L) < 1e-14
    assert abs(K[0, 0] - (1 / L + 1 / 1.0)) < 1e-14


def test_stiffness_square_in_circle():
    K = stiffness_matrix(build_initial_mesh(circle_curve(), 4, 1)).toarray()
    np.testing.assert_allclose(np.diag(K), np.sqrt(2), rtol=1e-14)


def test_stiffness_invariants(ellipse_mesh):
    K = stiffness_matrix(ellipse_mesh).toarray()
    assert np.max(np.abs(K - K.T)) <= 1e-13 * np.max(np.abs(K))
    np.testing.assert_allclose(K @ np.ones(len(K)), 0.0, atol=1e-12)
    assert np.linalg.eigvalsh(K).min() > -1e-10 * np.max(np.abs(K))


def test_stiffness_matches_fine_quadrature(ellipse_mesh):
    """The default rule is saturated for the rational integrand."""
    from bgnflow.mesh import CurveMesh
    from bgnflow.reference import build_reference_element

    k = ellipse_mesh.degree
    fine = CurveMesh(k, ellipse_mesh.nodes, ellipse_mesh.ref_lengths, build_reference_element(k, 20))
    K, Kf = stiffness_matrix(ellipse_mesh).toarray(), stiffness_matrix(fine).toarray()
    assert np.max(np.abs(K - Kf)) / np.max(np.abs(Kf)) < 1e-6


def test_stabilization_vanishes_on_symmetric_polygon():
    mesh = regular_polygon(9)
    K, m, nb = step_operators(mesh)
    nb_unit = nb / np.linalg.norm(nb, axis=1)[:, None]
    np.testing.assert_allclose(stabilization_rhs(mesh, K, nb_unit), 0.0, atol=1e-13)


def test_stabilization_translation_and_zero_normal(ellipse_mesh):
    K, m, nb = step_operators(ellipse_mesh)
    s = stabilization_rhs(ellipse_mesh, K, nb)
    moved = ellipse_mesh.translated([3.0, -1.0])
    np.testing.assert_allclose(stabilization_rhs(moved, stiffness_matrix(moved), nb), s, atol=1e-11)
    np.testing.assert_allclose(stabilization_rhs(ellipse_mesh, K, np.zeros_like(nb)), K @ ellipse_mesh.nodes)


def test_system_shape_and_structure():
    mesh = build_initial_mesh(ellipse_curve, 16, 2)
    K, m, nb = step_operators(mesh)
    sysm = assemble_bgn_system(mesh, K, m, nb, np.zeros((32, 2)), 0.1)
    assert sysm.matrix.shape == (96, 96)
    A = sysm.matrix.tocsr()
    for j in range(32):
        row = A.getrow(3 * j + 2)
        assert row.nnz == 3
        np.testing.assert_allclose(row.toarray()[0, 3 * j : 3 * j + 3], [nb[j, 0], nb[j, 1], 0.0])
        col = A.getcol(3 * j + 2).tocoo()
        assert set(col.row) <= {3 * j, 3 * j + 1, 3 * j + 2}
    np.testing.assert_allclose(sysm.rhs[2::3], np.einsum("ij,ij->i", nb, mesh.nodes))
    d = np.abs(A.tocoo().col - A.tocoo().row)
    inner = d[d < 3 * 32 // 2]
    assert inner.max() <= 3 * (2 * 2 + 1) + 2


def test_exact_pair_residual_under_constant_field():
    mesh = build_initial_mesh(ellipse_curve, 16, 2)
    c = np.array([0.3, -0.1])
    tau = 0.05
    K, m, nb = step_operators(mesh)
    sysm = assemble_bgn_system(mesh, K, m, nb, np.tile(c, (mesh.node_count, 1)), tau)
    kappa = np.einsum("ij,ij->i", nb, K @ mesh.nodes) / m
    z = np.column_stack([mesh.nodes + tau * c, kappa]).ravel()
    assert np.max(np.abs(sysm.matrix @ z - sysm.rhs)) <= 1e-11


def test_degenerate_normal_rejected():
    mesh = build_initial_mesh(ellipse_curve, 8, 1)
    K, m, nb = step_operators(mesh)
    nb[3] = 0.0
    with pytest.raises(DegenerateNormalError):
        assemble_bgn_system(mesh, K, m, nb, np.zeros_like(nb), 0.1)
    with pytest.raises(ValueError):
        assemble_bgn_system(mesh, K, m, averaged_normal(mesh), np.zeros_like(nb), 0.0)


@pytest.mark.parametrize("method", ["banded", "dense"])
def test_zeroed_constraint_row_is_singular(method):
    mesh = build_initial_mesh(ellipse_curve, 16, 2)
    K, m, nb = step_operators(mesh)
    sysm = assemble_bgn_system(mesh, K, m, nb, np.zeros_like(nb), 0.1)
    A = sysm.matrix.tolil()
    A[3 * 5 + 2, :] = 0.0
    broken = type(sysm)(A.tocsr(), sysm.rhs, sysm.bandwidth, sysm.node_count)
    with pytest.raises(SingularSystemError):
        solve_linear(broken, method)


def test_banded_and_dense_routes_agree(ellipse_mesh):
    K, m, nb = step_operators(ellipse_mesh)
    u = ELLIPSE_RADIAL(ellipse_mesh.nodes)
    sysm = assemble_bgn_system(ellipse_mesh, K, m, nb, u, 0.05)
    Xb, kb = solve_linear(sysm, "banded")
    Xd, kd = solve_linear(sysm, "dense")
    np.testing.assert_allclose(Xb, Xd, atol=1e-10)
    np.testing.assert_allclose(kb, kd, atol=1e-8 * np.max(np.abs(kd)))


def test_zero_field_stationarity(ellipse_mesh):
    new, kappa = bgn_step(ellipse_mesh, ZERO, 0.0, 0.3)
    np.testing.assert_allclose(new.nodes, ellipse_mesh.nodes, atol=1e-10)
    np.testing.assert_allclose(kappa, stationary_multiplier(ellipse_mesh), atol=1e-10)


def test_stationary_multiplier_vs_curvature_diagnostic():
    """They agree at element-interior nodes and differ by |nbar|^2 at junctions."""
    mesh = build_initial_mesh(ellipse_curve, 16, 2)
    K, m, nb = step_operators(mesh)
    mult = stationary_multiplier(mesh)
    curv = discrete_curvature(mesh, K, m, nb)
    np.testing.assert_allclose(mult, curv * np.einsum("ij,ij->i", nb, nb), rtol=1e-12)
    np.testing.assert_allclose(mult[1::2], curv[1::2], rtol=1e-12)


def test_constant_field_translation(ellipse_mesh):
    c = (0.3, -0.1)
    tau = 0.2
    new, _ = bgn_step(ellipse_mesh, VelocityField("constant", c), 0.0, tau)
    np.testing.assert_allclose(new.nodes, ellipse_mesh.nodes + tau * np.array(c), atol=1e-10)
    lag = lagrangian_step(ellipse_mesh, VelocityField("constant", c), 0.0, tau)
    np.testing.assert_allclose(new.nodes, lag.nodes, atol=1e-10)


def test_constraint_after_step():
    mesh = build_initial_mesh(ellipse_curve, 16, 1)
    tau = 1 / 16
    u = ELLIPSE_RADIAL(mesh.nodes, 0.0)
    new, _ = bgn_step(mesh, ELLIPSE_RADIAL, 0.0, tau)
    assert constraint_residual(mesh, new, u, tau) <= 1e-10


def test_translation_equivariance(ellipse_mesh):
    c = np.array([0.4, -0.25])
    field = VelocityField("rotation", (0.8,))

    def shifted(x, t):
        return field(x - c, t)

    a, ka = bgn_step(ellipse_mesh, field, 0.0, 0.1)
    b, kb = bgn_step(ellipse_mesh.translated(c), shifted, 0.0, 0.1)
    np.testing.assert_allclose(b.nodes, a.nodes + c, atol=1e-10)
    np.testing.assert_allclose(kb, ka, atol=1e-8)


def test_rotation_equivariance(ellipse_mesh):
    R = rotation_matrix(1.1)

    def rotated_field(x, t):
        return ELLIPSE_RADIAL(x @ R, t) @ R.T

    a, ka = bgn_step(ellipse_mesh, ELLIPSE_RADIAL, 0.0, 0.1)
    b, kb = bgn_step(ellipse_mesh.rotated(1.1), rotated_field, 0.0, 0.1)
    np.testing.assert_allclose(b.nodes, a.nodes @ R.T, atol=1e-10)
    np.testing.assert_allclose(kb, ka, atol=1e-8)


def test_lagrangian_zero_field(ellipse_mesh):
    np.testing.assert_array_equal(lagrangian_step(ellipse_mesh, ZERO, 0.0, 0.5).nodes, ellipse_mesh.nodes)


def test_lagrangian_collapse_rejected():
    mesh = build_initial_mesh(circle_curve(), 8, 1)
    with pytest.raises(MeshDegenerationError):
        # contracts every node to the origin
        lagrangian_step(mesh, lambda x, t: -x, 0.0, 1.0)


def test_mesh_ratio_bgn_vs_lagrangian():
    J, Nt = 64, 64
    bgn = lag = build_initial_mesh(ellipse_curve, J, 1)
    tau = 1.0 / Nt
    for i in range(Nt):
        bgn, _ = bgn_step(bgn, ELLIPSE_RADIAL, i * tau, tau)
        lag = lagrangian_step(lag, ELLIPSE_RADIAL, i * tau, tau)
    assert mesh_ratio(lag) > mesh_ratio(bgn)
