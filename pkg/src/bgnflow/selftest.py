"""Quick invariant checks runnable without pytest (``bgnflow selftest``)."""

import numpy as np

from .flows import ELLIPSE_FLOW, ELLIPSE_RADIAL, VelocityField
from .geometry import averaged_normal, lumped_weights
from .linalg import solve_cyclic_banded, solve_dense
from .mesh import build_initial_mesh, circle_curve, ellipse_curve, regular_polygon
from .reference import gauss_legendre_rule, gauss_lobatto_rule, moment_residual
from .solver import bgn_step, constraint_residual, stationary_multiplier, curvature_estimate, stiffness_matrix


def _quadrature():
    worst = 0.0
    for k in (1, 2, 3, 4):
        x, w = gauss_lobatto_rule(k)
        worst = max(worst, moment_residual(x, w, 2 * k - 1))
    for n in range(1, 9):
        x, w = gauss_legendre_rule(n)
        worst = max(worst, moment_residual(x, w, 2 * n - 1))
    return worst <= 1e-14, f"max moment residual {worst:.2e}"


def _stationarity():
    mesh = build_initial_mesh(ellipse_curve, 16, 2)
    new, kappa = bgn_step(mesh, VelocityField("zero"), 0.0, 0.1)
    dx = np.max(np.abs(new.nodes - mesh.nodes))
    dk = np.max(np.abs(kappa - stationary_multiplier(mesh)))
    return max(dx, dk) <= 1e-10, f"|X - id| = {dx:.2e}, |kappa - nbar.Kx/m| = {dk:.2e}"


def _translation():
    mesh = build_initial_mesh(ellipse_curve, 16, 3)
    c = np.array([0.3, -0.1])
    new, _ = bgn_step(mesh, VelocityField("constant", tuple(c)), 0.0, 0.25)
    err = np.max(np.abs(new.nodes - mesh.nodes - 0.25 * c))
    return err <= 1e-10, f"translation error {err:.2e}"


def _constraint():
    mesh = build_initial_mesh(ellipse_curve, 16, 1)
    tau = 1.0 / 16
    new, _ = bgn_step(mesh, ELLIPSE_RADIAL, 0.0, tau)
    res = constraint_residual(mesh, new, ELLIPSE_RADIAL(mesh.nodes, 0.0), tau)
    return res <= 1e-10, f"normal constraint residual {res:.2e}"


def _stiffness():
    K = stiffness_matrix(build_initial_mesh(ellipse_curve, 12, 3)).toarray()
    sym = np.max(np.abs(K - K.T)) / np.max(np.abs(K))
    rows = np.max(np.abs(K.sum(axis=1)))
    return sym <= 1e-13 and rows <= 1e-12, f"asymmetry {sym:.2e}, row sum {rows:.2e}"


def _ngon():
    mesh = regular_polygon(7)
    nb = averaged_normal(mesh, lumped_weights(mesh))
    err = np.max(np.abs(np.linalg.norm(nb, axis=1) - np.cos(np.pi / 7)))
    return err <= 1e-12, f"|nbar| - cos(pi/7) = {err:.2e}"


def _circle_curvature():
    kappa = curvature_estimate(build_initial_mesh(circle_curve(), 32, 3))
    err = np.max(np.abs(kappa - 1.0))
    return err <= 1e-3, f"max |kappa - 1| = {err:.2e}"


def _solver():
    rng = np.random.default_rng(7)
    n, bw = 60, 4
    A = np.zeros((n, n))
    for i in range(n):
        for d in range(-bw, bw + 1):
            A[i, (i + d) % n] = rng.normal()
        A[i, i] += 10.0
    b = rng.normal(size=n)
    import scipy.sparse as sp

    err = np.max(np.abs(solve_cyclic_banded(sp.csr_matrix(A), b, bw) - solve_dense(A, b)))
    return err <= 1e-10, f"banded vs dense {err:.2e}"


def _exact_flow():
    theta = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    x = ELLIPSE_FLOW.point(0.0, theta)
    dt = 1e-3
    for i in range(1000):
        t = i * dt
        k1 = ELLIPSE_RADIAL(x, t)
        k2 = ELLIPSE_RADIAL(x + 0.5 * dt * k1, t)
        k3 = ELLIPSE_RADIAL(x + 0.5 * dt * k2, t)
        k4 = ELLIPSE_RADIAL(x + dt * k3, t)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    err = np.max(np.abs(x - ELLIPSE_FLOW.point(1.0, theta)))
    return err <= 1e-8, f"RK4 vs closed form {err:.2e}"


CHECKS = [
    ("quadrature moments", _quadrature),
    ("zero-field stationarity", _stationarity),
    ("constant-field translation", _translation),
    ("normal-velocity constraint", _constraint),
    ("stiffness symmetry / row sums", _stiffness),
    ("regular 7-gon averaged normal", _ngon),
    ("unit-circle curvature", _circle_curvature),
    ("banded-cyclic solver", _solver),
    ("exact flow vs RK4", _exact_flow),
]


def run_selftest(verbose=True):
    ok = True
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except Exception as exc:  # report and continue
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        ok &= passed
        if verbose:
            print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return ok
