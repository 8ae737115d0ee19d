"""Closed piecewise-polynomial curves.

A ``CurveMesh`` stores ``J`` curved elements of degree ``k`` over frozen flat
reference segments.  Junction nodes are shared, so there are ``N = J*k``
nodes; element ``e`` owns nodes ``e*k, ..., e*k + k`` (mod N).  Nodal fields
are plain arrays of shape ``(N,)`` or ``(N, 2)``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGeometryError, MeshDegenerationError
from .reference import ReferenceElement, build_reference_element

DEGENERACY_TOL = 1e-12


def element_connectivity(J, k):
    """Node indices of every element, shape ``(J, k+1)``."""
    return (np.arange(J)[:, None] * k + np.arange(k + 1)[None, :]) % (J * k)


@dataclass(frozen=True, eq=False)
class CurveMesh:
    """Immutable snapshot of a discrete closed curve.

    Parameters
    ----------
    degree : int
    nodes : ndarray, shape (N, 2)
        Nodal positions, counterclockwise.
    ref_lengths : ndarray, shape (J,)
        Lengths of the flat reference segments, fixed at construction.
    ref : ReferenceElement
    """

    degree: int
    nodes: np.ndarray
    ref_lengths: np.ndarray
    ref: ReferenceElement

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        ref_lengths = np.array(self.ref_lengths, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise InvalidGeometryError("nodes must have shape (N, 2)")
        J = len(ref_lengths)
        if J < 2 or nodes.shape[0] != J * self.degree:
            raise InvalidGeometryError(
                f"{nodes.shape[0]} nodes do not match J={J}, k={self.degree}"
            )
        if np.any(ref_lengths <= 0):
            raise InvalidGeometryError("reference segment lengths must be positive")
        nodes.setflags(write=False)
        ref_lengths.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "ref_lengths", ref_lengths)
        self._check_jacobians()

    @property
    def element_count(self):
        return len(self.ref_lengths)

    @property
    def node_count(self):
        return self.nodes.shape[0]

    @cached_property
    def element_nodes(self):
        return element_connectivity(self.element_count, self.degree)

    def element_coords(self):
        """Nodal coordinates per element, shape ``(J, k+1, 2)``."""
        return self.nodes[self.element_nodes]

    def tangents(self, dbasis):
        """dX/dxi per element at points described by a basis-derivative table.

        ``dbasis`` has shape ``(P, k+1)``; the result has shape ``(J, P, 2)``.
        """
        return np.einsum("pi,eid->epd", dbasis, self.element_coords())

    def points(self, basis):
        return np.einsum("pi,eid->epd", basis, self.element_coords())

    @cached_property
    def quad_jacobians(self):
        """|dX/dxi| at the Gauss-Legendre points, shape ``(J, n_q)``."""
        return np.linalg.norm(self.tangents(self.ref.basis_deriv_at_quad), axis=-1)

    @cached_property
    def node_jacobians(self):
        """|dX/dxi| at the Gauss-Lobatto nodes of each element, ``(J, k+1)``."""
        return np.linalg.norm(self.tangents(self.ref.basis_deriv_at_nodes), axis=-1)

    def _check_jacobians(self):
        limit = DEGENERACY_TOL * self.ref_lengths[:, None]
        bad = np.any(self.quad_jacobians <= limit, axis=1) | np.any(
            self.node_jacobians <= limit, axis=1
        )
        if np.any(bad):
            e = int(np.flatnonzero(bad)[0])
            raise MeshDegenerationError(f"element {e} has a vanishing Jacobian")

    def update_positions(self, new_nodes):
        """New snapshot with the same connectivity and reference segments."""
        new_nodes = np.asarray(new_nodes, dtype=float)
        if new_nodes.shape != self.nodes.shape:
            raise InvalidGeometryError(
                f"expected positions of shape {self.nodes.shape}, got {new_nodes.shape}"
            )
        return CurveMesh(self.degree, new_nodes, self.ref_lengths, self.ref)

    def translated(self, shift):
        return self.update_positions(self.nodes + np.asarray(shift, dtype=float))

    def rotated(self, angle):
        return self.update_positions(self.nodes @ rotation_matrix(angle).T)


def rotation_matrix(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def build_initial_mesh(curve, J, k, n_q=None):
    """Interpolate a closed parametric curve by ``J`` elements of degree ``k``.

    Element ``e`` covers the parameter interval ``[e/J, (e+1)/J]``; its nodes
    are the curve evaluated at the images of the Gauss-Lobatto points, so
    every node lies exactly on the curve.

    Parameters
    ----------
    curve : callable
        Vectorized map from parameters in [0, 1] to points, shape ``(n, 2)``,
        with ``curve(0) == curve(1)``.
    """
    if J < 3:
        raise InvalidGeometryError(f"need at least 3 elements, got J={J}")
    ref = build_reference_element(k, n_q)
    local = (ref.gl_nodes[:-1] + 1.0) / 2.0
    params = (np.arange(J)[:, None] + local[None, :]).ravel() / J
    nodes = np.asarray(curve(params), dtype=float).reshape(J * k, 2)
    ends = nodes[::k]
    chords = np.linalg.norm(np.roll(ends, -1, axis=0) - ends, axis=1)
    if np.any(chords <= 0.0):
        raise InvalidGeometryError("curve has repeated element endpoints")
    return CurveMesh(k, nodes, chords, ref)


def element_arclength(mesh, e=None):
    """Gauss-Legendre arc length of element ``e`` (or of all elements)."""
    lengths = mesh.quad_jacobians @ mesh.ref.quad_weights
    return lengths if e is None else float(lengths[e])


def perimeter(mesh):
    return float(np.sum(element_arclength(mesh)))


def mesh_ratio(mesh):
    """h_max / h_min over element arc lengths."""
    lengths = element_arclength(mesh)
    return float(lengths.max() / lengths.min())


def circle_curve(radius=1.0, center=(0.0, 0.0)):
    def curve(s):
        s = np.asarray(s, dtype=float)
        return np.column_stack(
            [
                center[0] + radius * np.cos(2 * np.pi * s),
                center[1] + radius * np.sin(2 * np.pi * s),
            ]
        )

    return curve


def ellipse_curve(s):
    """The benchmark ellipse (cos 2 pi s, sin(2 pi s) / 3)."""
    s = np.asarray(s, dtype=float)
    return np.column_stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s) / 3.0])


def polygon_mesh(vertices, k=1):
    """Mesh whose elements are the straight edges of a closed polygon.

    Interior nodes of each edge sit at its Gauss-Lobatto points.
    """
    vertices = np.asarray(vertices, dtype=float)
    J = len(vertices)
    ref = build_reference_element(k)
    local = (ref.gl_nodes[:-1] + 1.0) / 2.0
    nxt = np.roll(vertices, -1, axis=0)
    nodes = vertices[:, None, :] + local[None, :, None] * (nxt - vertices)[:, None, :]
    chords = np.linalg.norm(nxt - vertices, axis=1)
    return CurveMesh(k, nodes.reshape(J * k, 2), chords, ref)


def regular_polygon(n, radius=1.0, k=1, phase=0.0):
    angles = phase + 2 * np.pi * np.arange(n) / n
    return polygon_mesh(radius * np.column_stack([np.cos(angles), np.sin(angles)]), k)
