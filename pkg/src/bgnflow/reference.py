"""Reference-element data on [-1, 1].

Gauss-Lobatto rules place the finite element nodes and give the lumped
(diagonal) mass; Gauss-Legendre rules integrate the curved-element stiffness
and the error norms.  Both are generated by Newton iteration on Legendre
polynomials and checked against the moment system before use.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDegreeError

_MOMENT_TOL = 1e-14


def _legendre(n, x):
    """Return P_n(x), P_{n-1}(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for m in range(2, n + 1):
        p_prev, p = p, ((2 * m - 1) * x * p - (m - 1) * p_prev) / m
    return p, p_prev


def exact_moments(degree):
    """Integrals of xi**j over [-1, 1] for j = 0..degree."""
    j = np.arange(degree + 1)
    return np.where(j % 2 == 0, 2.0 / (j + 1), 0.0)


def moment_residual(nodes, weights, degree):
    """Max abs error of a rule on the monomials xi**0 .. xi**degree."""
    vander = np.vander(nodes, degree + 1, increasing=True)
    return float(np.max(np.abs(weights @ vander - exact_moments(degree))))


def _check_rule(nodes, weights, degree, name):
    res = moment_residual(nodes, weights, degree)
    if res > _MOMENT_TOL:
        raise ArithmeticError(f"{name} rule fails moment check: {res:.3e}")


@lru_cache(maxsize=None)
def _gauss_lobatto(k):
    # Interior nodes are the roots of P_k'; Newton on (1 - x^2) P_k' written
    # through the recurrence, started from Chebyshev-Lobatto points.
    x = -np.cos(np.pi * np.arange(k + 1) / k)
    for _ in range(100):
        p, p_prev = _legendre(k, x)
        dx = (x * p - p_prev) / ((k + 1) * p)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    x[0], x[-1] = -1.0, 1.0
    p, _ = _legendre(k, x)
    w = 2.0 / (k * (k + 1) * p**2)
    return x, w


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    i = np.arange(1, n + 1)
    x = -np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, p_prev = _legendre(n, x)
        dp = n * (x * p - p_prev) / (x**2 - 1.0)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p, p_prev = _legendre(n, x)
    dp = n * (x * p - p_prev) / (x**2 - 1.0)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    return x, w


def gauss_lobatto_rule(k):
    """Gauss-Lobatto nodes and weights with ``k + 1`` points.

    The rule includes both endpoints and is exact for polynomials of degree
    ``2k - 1``.

    Parameters
    ----------
    k : int
        Polynomial degree of the element, ``k >= 1``.

    Returns
    -------
    nodes, weights : ndarray
        Ascending nodes in [-1, 1] and positive weights summing to 2.
    """
    if int(k) != k or k < 1:
        raise InvalidDegreeError(f"degree must be a positive integer, got {k!r}")
    x, w = _gauss_lobatto(int(k))
    _check_rule(x, w, 2 * k - 1, "Gauss-Lobatto")
    return x.copy(), w.copy()


def gauss_legendre_rule(n):
    """Gauss-Legendre rule with ``n`` interior points, exact to degree 2n-1."""
    if int(n) != n or n < 1:
        raise InvalidDegreeError(f"number of points must be >= 1, got {n!r}")
    x, w = _gauss_legendre(int(n))
    _check_rule(x, w, 2 * n - 1, "Gauss-Legendre")
    return x.copy(), w.copy()


def lagrange_basis(nodes, xi):
    """Values of the Lagrange basis on ``nodes`` at points ``xi``.

    Returns an array of shape ``(len(xi), len(nodes))``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = len(nodes)
    out = np.ones((len(xi), n))
    for i in range(n):
        for j in range(n):
            if j != i:
                out[:, i] *= (xi - nodes[j]) / (nodes[i] - nodes[j])
    return out


def lagrange_basis_deriv(nodes, xi):
    """First derivatives of the Lagrange basis, shape ``(len(xi), len(nodes))``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = len(nodes)
    out = np.zeros((len(xi), n))
    for i in range(n):
        denom = np.prod([nodes[i] - nodes[j] for j in range(n) if j != i])
        for m in range(n):
            if m == i:
                continue
            term = np.ones_like(xi)
            for j in range(n):
                if j != i and j != m:
                    term = term * (xi - nodes[j])
            out[:, i] += term
        out[:, i] /= denom
    return out


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """Degree-k nodal element on [-1, 1] with its quadrature tables.

    ``basis_at_quad[q, i]`` is psi_i at Gauss-Legendre point q and
    ``basis_deriv_at_quad`` its xi-derivative; ``basis_deriv_at_nodes`` holds
    the derivatives at the Gauss-Lobatto nodes themselves.
    """

    degree: int
    gl_nodes: np.ndarray
    gl_weights: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    basis_at_quad: np.ndarray
    basis_deriv_at_quad: np.ndarray
    basis_deriv_at_nodes: np.ndarray

    @property
    def n_quad(self):
        return len(self.quad_nodes)

    def basis(self, xi):
        return lagrange_basis(self.gl_nodes, xi)

    def basis_deriv(self, xi):
        return lagrange_basis_deriv(self.gl_nodes, xi)


@lru_cache(maxsize=None)
def build_reference_element(k, n_q=None):
    """Reference element of degree ``k`` with an ``n_q``-point Gauss-Legendre rule.

    ``n_q`` defaults to ``2k + 2``; the stiffness integrand has a rational
    factor ``1/|F'|`` and is not integrated exactly by any finite rule.
    """
    if int(k) != k or k < 1:
        raise InvalidDegreeError(f"degree must be a positive integer, got {k!r}")
    if n_q is None:
        n_q = 2 * k + 2
    if n_q < k + 1:
        raise InvalidDegreeError(f"n_q={n_q} too small for degree {k}")
    gx, gw = gauss_lobatto_rule(k)
    qx, qw = gauss_legendre_rule(n_q)
    arrays = [
        gx,
        gw,
        qx,
        qw,
        lagrange_basis(gx, qx),
        lagrange_basis_deriv(gx, qx),
        lagrange_basis_deriv(gx, gx),
    ]
    for a in arrays:
        a.setflags(write=False)
    return ReferenceElement(int(k), *arrays)
