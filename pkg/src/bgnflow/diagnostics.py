"""Projection errors, convergence orders and mesh-quality series."""

import math
from dataclasses import dataclass

import numpy as np

from .flows import ELLIPSE_FLOW, TUBE_RADIUS
from .mesh import CurveMesh, mesh_ratio
from .reference import build_reference_element


@dataclass(frozen=True)
class ErrorReport:
    t: float
    err_l2: float
    err_h1: float
    err_max: float
    mesh_ratio: float


def projection_error(mesh, flow=ELLIPSE_FLOW, t=0.0, n_q=None, tube=TUBE_RADIUS):
    """Error between the computed nodes and their projections onto the exact curve.

    Every node is projected onto ``flow`` at time ``t``; the projected nodes
    define an interpolated curve of the same degree, and the nodal gaps
    ``x_j - a(x_j)`` a finite element field on it.  The L2 norm and H1
    seminorm of that field are integrated on the interpolated curve with a
    Gauss-Legendre rule (``n_q`` points, default that of the mesh).
    """
    _, foot, dist = flow.project(t, mesh.nodes, tube)
    ref = mesh.ref if n_q is None else build_reference_element(mesh.degree, n_q)
    hat = CurveMesh(mesh.degree, foot, mesh.ref_lengths, ref)
    e = (mesh.nodes - foot)[hat.element_nodes]
    vals = np.einsum("qi,eic->eqc", ref.basis_at_quad, e)
    dvals = np.einsum("qi,eic->eqc", ref.basis_deriv_at_quad, e)
    jac = hat.quad_jacobians
    w = ref.quad_weights
    l2 = np.sum((np.sum(vals**2, axis=-1) * jac) @ w)
    h1 = np.sum((np.sum(dvals**2, axis=-1) / jac) @ w)
    return ErrorReport(float(t), math.sqrt(l2), math.sqrt(h1), float(dist.max()), mesh_ratio(mesh))


def convergence_order(errors, hs):
    """Observed orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})``.

    Pairs with a zero or negative error give ``nan``.
    """
    errors = [float(e) for e in errors]
    hs = [float(h) for h in hs]
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need two or more (error, h) pairs of equal length")
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("mesh sizes must be positive and strictly decreasing")
    orders = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if e0 <= 0 or e1 <= 0:
            orders.append(math.nan)
        else:
            orders.append(math.log(e0 / e1) / math.log(h0 / h1))
    return orders


def fitted_order(errors, hs):
    """Least-squares slope of log(error) against log(h)."""
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


def track_mesh_quality(snapshots):
    """``[(t, h_max/h_min), ...]`` for an iterable of ``(t, mesh)`` pairs."""
    return [(float(t), mesh_ratio(m)) for t, m in snapshots]
