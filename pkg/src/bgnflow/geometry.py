"""Normals, lumped weights and discrete curvature on a ``CurveMesh``.

Orientation is counterclockwise and normals are tangents rotated by -90
degrees, i.e. outward.  The averaged normal is deliberately left
unnormalized: at junction nodes its length is below one.
"""

import numpy as np

from .errors import DegenerateNormalError, MeshDegenerationError


def _rotate_cw(v):
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def piecewise_normal(mesh, e, xi):
    """Unit normal of element ``e`` at reference coordinate ``xi`` in [-1, 1]."""
    dbasis = mesh.ref.basis_deriv(xi)
    tangent = dbasis @ mesh.element_coords()[e]
    norm = np.linalg.norm(tangent, axis=-1, keepdims=True)
    if np.any(norm <= 0.0):
        raise MeshDegenerationError(f"zero tangent on element {e}")
    n = _rotate_cw(tangent / norm)
    return n[0] if np.ndim(xi) == 0 else n


def _scatter(mesh, values):
    """Sum per-element nodal contributions ``(J, k+1, ...)`` into nodes."""
    idx = mesh.element_nodes.ravel()
    flat = values.reshape(idx.size, -1)
    out = np.stack(
        [np.bincount(idx, weights=flat[:, c], minlength=mesh.node_count) for c in range(flat.shape[1])],
        axis=-1,
    )
    return out.reshape((mesh.node_count,) + values.shape[2:])


def _lumped_contributions(mesh):
    return mesh.ref.gl_weights[None, :] * mesh.node_jacobians


def lumped_weights(mesh):
    """Diagonal of the Gauss-Lobatto lumped mass matrix, shape ``(N,)``.

    ``m_j`` sums ``w_q |dX/dxi|`` over the elements touching node ``j``;
    the total equals the Gauss-Lobatto arc length of the curve.
    """
    return _scatter(mesh, _lumped_contributions(mesh))


def nodal_normals(mesh):
    """One-sided unit normals at every element node, shape ``(J, k+1, 2)``."""
    t = mesh.tangents(mesh.ref.basis_deriv_at_nodes)
    return _rotate_cw(t / np.linalg.norm(t, axis=-1, keepdims=True))


def averaged_normal(mesh, weights=None):
    """Lumped L2 projection of the piecewise normal onto nodal fields.

    Interior nodes get the element normal; a junction gets the weighted
    mean of its two one-sided normals, so ``|nbar| <= 1`` there.
    """
    if weights is None:
        weights = lumped_weights(mesh)
    contrib = _lumped_contributions(mesh)[..., None] * nodal_normals(mesh)
    return _scatter(mesh, contrib) / weights[:, None]


def discrete_curvature(mesh, stiffness, weights, nbar):
    """Nodal curvature ``nbar . (K id) / (m |nbar|^2)``.

    This is the multiplier the scheme produces when the velocity vanishes;
    it is positive on convex counterclockwise curves.
    """
    nn = np.einsum("ij,ij->i", nbar, nbar)
    if np.any(nn <= 0.0):
        raise DegenerateNormalError("averaged normal vanishes at a node")
    k_id = stiffness @ mesh.nodes
    return np.einsum("ij,ij->i", nbar, k_id) / (weights * nn)


def lumped_inner(mesh, f, g, weights=None):
    """Lumped inner product of two nodal fields."""
    if weights is None:
        weights = lumped_weights(mesh)
    f = np.asarray(f, dtype=float).reshape(mesh.node_count, -1)
    g = np.asarray(g, dtype=float).reshape(mesh.node_count, -1)
    return float(np.sum(weights * np.sum(f * g, axis=1)))


def l2_norm(mesh, f):
    """Exact-quadrature L2 norm of a nodal finite element field."""
    f = np.asarray(f, dtype=float).reshape(mesh.node_count, -1)
    vals = np.einsum("qi,eic->eqc", mesh.ref.basis_at_quad, f[mesh.element_nodes])
    integrand = np.sum(vals**2, axis=-1) * mesh.quad_jacobians
    return float(np.sqrt(np.sum(integrand @ mesh.ref.quad_weights)))
