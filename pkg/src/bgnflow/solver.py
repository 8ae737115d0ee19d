"""Assembly and solution of one transport BGN time step.

Unknowns are interleaved per node as ``(X_x, X_y, kappa)``.  For node j the
system has two momentum rows

    sum_l K_jl X_l - m_j kappa_j nbar_j = (I - nbar_j nbar_j^T) (K x)_j

and one normal-velocity constraint row

    nbar_j . X_j = nbar_j . (x_j + tau u_j),

the lumped normal-velocity condition divided by ``m_j``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateNormalError, SingularSystemError
from .geometry import averaged_normal, discrete_curvature, lumped_weights
from .linalg import relative_residual, solve_cyclic_banded, solve_dense

RESIDUAL_TOL = 1e-10


def stiffness_matrix(mesh):
    """Stiffness matrix ``int grad psi_j . grad psi_l`` on the current curve.

    Per element the integral is ``int psi_j' psi_l' / |dX/dxi| dxi`` with the
    Gauss-Legendre rule of ``mesh.ref``.  Returned as CSR, shape ``(N, N)``.
    """
    ref = mesh.ref
    dpsi = ref.basis_deriv_at_quad
    w = ref.quad_weights[None, :] / mesh.quad_jacobians
    local = np.einsum("eq,qi,qj->eij", w, dpsi, dpsi)
    en = mesh.element_nodes
    k1 = mesh.degree + 1
    rows = np.repeat(en, k1, axis=1).ravel()
    cols = np.tile(en, (1, k1)).ravel()
    N = mesh.node_count
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(N, N)).tocsr()


def stabilization_rhs(mesh, stiffness, nbar):
    """Nodal vector ``(I - nbar_j nbar_j^T) (K x)_j``, shape ``(N, 2)``."""
    k_id = stiffness @ mesh.nodes
    return k_id - nbar * np.einsum("ij,ij->i", nbar, k_id)[:, None]


@dataclass(frozen=True, eq=False)
class BgnSystem:
    """The ``3N x 3N`` step system and its band description."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    bandwidth: int
    node_count: int

    @property
    def size(self):
        return self.matrix.shape[0]


def assemble_bgn_system(mesh, stiffness, weights, nbar, u_nodal, tau):
    """Build the coupled position/curvature system for one step."""
    if tau <= 0:
        raise ValueError(f"time step must be positive, got {tau}")
    N = mesh.node_count
    nn = np.einsum("ij,ij->i", nbar, nbar)
    if np.any(nn <= 0.0):
        j = int(np.argmin(nn))
        raise DegenerateNormalError(f"averaged normal vanishes at node {j}")

    K = stiffness.tocoo()
    j = np.arange(N)
    rows = np.concatenate(
        [3 * K.row, 3 * K.row + 1, 3 * j, 3 * j + 1, 3 * j + 2, 3 * j + 2, 3 * j + 2]
    )
    cols = np.concatenate(
        [3 * K.col, 3 * K.col + 1, 3 * j + 2, 3 * j + 2, 3 * j, 3 * j + 1, 3 * j + 2]
    )
    vals = np.concatenate(
        [
            K.data,
            K.data,
            -weights * nbar[:, 0],
            -weights * nbar[:, 1],
            nbar[:, 0],
            nbar[:, 1],
            np.zeros(N),
        ]
    )
    A = sp.csr_matrix((vals, (rows, cols)), shape=(3 * N, 3 * N))

    s = stabilization_rhs(mesh, stiffness, nbar)
    rhs = np.empty((N, 3))
    rhs[:, :2] = s
    rhs[:, 2] = np.einsum("ij,ij->i", nbar, mesh.nodes + tau * np.asarray(u_nodal))
    return BgnSystem(A, rhs.ravel(), 3 * mesh.degree + 2, N)


def solve_linear(system, method="auto"):
    """Solve an assembled system; returns ``(X_new (N, 2), kappa (N,))``.

    ``method`` is ``"banded"``, ``"dense"`` or ``"auto"``; auto takes the
    banded-cyclic route except for tiny systems.  A relative residual above
    ``RESIDUAL_TOL`` is treated as a singular system.
    """
    A, b = system.matrix, system.rhs
    if method == "dense" or (method == "auto" and system.size < 24):
        z = solve_dense(A, b)
    elif method in ("auto", "banded"):
        z = solve_cyclic_banded(A, b, system.bandwidth)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = relative_residual(A, z, b)
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        raise SingularSystemError(f"relative residual {res:.3e} exceeds {RESIDUAL_TOL}")
    z = z.reshape(system.node_count, 3)
    return z[:, :2].copy(), z[:, 2].copy()


def step_operators(mesh):
    """Stiffness, lumped weights and averaged normal of a mesh."""
    K = stiffness_matrix(mesh)
    m = lumped_weights(mesh)
    return K, m, averaged_normal(mesh, m)


def bgn_step(mesh, field, t, tau, method="auto"):
    """Advance the curve by one transport BGN step.

    The velocity is sampled at the nodes at time ``t``.  Returns the new
    mesh and the nodal curvature multiplier.
    """
    K, m, nbar = step_operators(mesh)
    u = field(mesh.nodes, t)
    system = assemble_bgn_system(mesh, K, m, nbar, u, tau)
    X, kappa = solve_linear(system, method)
    return mesh.update_positions(X), kappa


def lagrangian_step(mesh, field, t, tau):
    """Forward Euler nodal advection, no tangential redistribution."""
    return mesh.update_positions(mesh.nodes + tau * field(mesh.nodes, t))


def stationary_multiplier(mesh):
    """The multiplier the scheme returns for a zero velocity field.

    With ``X = id`` the momentum rows reduce to
    ``m_j kappa_j nbar_j = nbar_j (nbar_j . (K x)_j)``, hence
    ``kappa_j = nbar_j . (K x)_j / m_j``.  It agrees with
    ``discrete_curvature`` wherever ``|nbar_j| = 1``.
    """
    K, m, nbar = step_operators(mesh)
    return np.einsum("ij,ij->i", nbar, K @ mesh.nodes) / m


def curvature_estimate(mesh):
    """``discrete_curvature`` evaluated with the mesh's own operators."""
    K, m, nbar = step_operators(mesh)
    return discrete_curvature(mesh, K, m, nbar)


def constraint_residual(old_mesh, new_mesh, u_nodal, tau):
    """Max over nodes of ``|nbar_j . (X_j - x_j - tau u_j)|`` on the old mesh."""
    nbar = averaged_normal(old_mesh)
    d = new_mesh.nodes - old_mesh.nodes - tau * np.asarray(u_nodal)
    return float(np.max(np.abs(np.einsum("ij,ij->i", nbar, d))))
