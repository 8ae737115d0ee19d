"""Velocity fields and the exact flow of the ellipse benchmark.

The benchmark field moves every point radially with a speed that depends on
the polar angle only:

    v(x) = (1 - |x| / sqrt(x^2 + 9 y^2)) x / |x|.

Starting from the ellipse x^2 + 9 y^2 = 1 the exact curve at time t is the
polar curve r(t, theta) = (1 - t) r0(theta) + t with
r0(theta) = (cos^2 theta + 9 sin^2 theta)^(-1/2); at t = 1 it is the unit
circle.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FieldDomainError, NonconvergenceError, ProjectionDomainError

ORIGIN_TOL = 1e-8
TUBE_RADIUS = 0.2
SWEEP_SAMPLES = 512
NEWTON_TOL = 1e-12


@dataclass(frozen=True)
class VelocityField:
    """A prescribed velocity ``u(x, t)``, vectorized over points.

    ``kind`` is one of ``zero``, ``constant``, ``rotation`` or
    ``ellipse-radial``; ``params`` holds the constant vector or the angular
    speed.
    """

    kind: str
    params: tuple = dc_field(default=())

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "rotation", "ellipse-radial"):
            raise ValueError(f"unknown field kind {self.kind!r}")

    def __call__(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.params, dtype=float), x.shape).copy()
        if self.kind == "rotation":
            (omega,) = self.params
            return omega * np.stack([-x[..., 1], x[..., 0]], axis=-1)
        return _ellipse_radial(x)

    @property
    def token(self):
        if self.kind == "constant":
            return f"constant:{self.params[0]!r},{self.params[1]!r}"
        if self.kind == "rotation":
            return f"rotation:{self.params[0]!r}"
        return self.kind

    @property
    def has_exact_flow(self):
        return self.kind == "ellipse-radial"


def _ellipse_radial(x):
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    if np.any(r2 < ORIGIN_TOL**2):
        raise FieldDomainError("ellipse-radial field is undefined at the origin")
    speed = 1.0 - np.sqrt(r2 / (x[..., 0] ** 2 + 9.0 * x[..., 1] ** 2))
    return (speed / np.sqrt(r2))[..., None] * x


def parse_field(token):
    """Field from a token ``zero | constant:cx,cy | rotation:omega | ellipse-radial``."""
    name, _, arg = token.strip().partition(":")
    if name == "zero":
        return VelocityField("zero")
    if name == "ellipse-radial":
        return VelocityField("ellipse-radial")
    if name == "constant":
        cx, cy = (float(v) for v in arg.split(","))
        return VelocityField("constant", (cx, cy))
    if name == "rotation":
        return VelocityField("rotation", (float(arg),))
    raise ValueError(f"unknown field token {token!r}")


def eval_field(f, x, t=0.0):
    return f(x, t)


ELLIPSE_RADIAL = VelocityField("ellipse-radial")


def _r0_derivs(theta):
    # r0 = s^(-1/2) with s = 1 + 8 sin^2(theta)
    s = 1.0 + 8.0 * np.sin(theta) ** 2
    ds = 8.0 * np.sin(2.0 * theta)
    dds = 16.0 * np.cos(2.0 * theta)
    r0 = s**-0.5
    dr0 = -0.5 * s**-1.5 * ds
    ddr0 = 0.75 * s**-2.5 * ds**2 - 0.5 * s**-1.5 * dds
    return r0, dr0, ddr0


class EllipseRadialFlow:
    """Closed-form curve family ``gamma(t, theta)`` of the benchmark flow."""

    def radius(self, t, theta):
        r0, dr0, ddr0 = _r0_derivs(np.asarray(theta, dtype=float))
        return (1.0 - t) * r0 + t, (1.0 - t) * dr0, (1.0 - t) * ddr0

    def point(self, t, theta):
        theta = np.asarray(theta, dtype=float)
        r, _, _ = self.radius(t, theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def tangent(self, t, theta):
        theta = np.asarray(theta, dtype=float)
        r, dr, _ = self.radius(t, theta)
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    def _grad_hess(self, t, theta, p):
        """Derivative and second derivative of ``|gamma - p|^2 / 2`` in theta."""
        r, dr, ddr = self.radius(t, theta)
        c, s = np.cos(theta), np.sin(theta)
        gx, gy = r * c - p[..., 0], r * s - p[..., 1]
        tx, ty = dr * c - r * s, dr * s + r * c
        ax = (ddr - r) * c - 2.0 * dr * s
        ay = (ddr - r) * s + 2.0 * dr * c
        g = gx * tx + gy * ty
        h = tx * tx + ty * ty + gx * ax + gy * ay
        return g, h

    def _newton(self, t, theta, p, max_iter=50):
        theta = np.array(theta, dtype=float)
        step_cap = np.pi / 16
        for _ in range(max_iter):
            g, h = self._grad_hess(t, theta, p)
            done = np.abs(g) <= NEWTON_TOL
            if np.all(done):
                break
            safe_h = np.where(h > 0, h, np.inf)
            dtheta = np.where(done, 0.0, np.clip(-g / safe_h, -step_cap, step_cap))
            # h <= 0 means a non-convex region; nudge downhill instead
            dtheta = np.where((h <= 0) & ~done, -np.sign(g) * step_cap / 4, dtheta)
            theta = theta + dtheta
        g, h = self._grad_hess(t, theta, p)
        ok = (np.abs(g) <= NEWTON_TOL) & (h > 0)
        return theta, ok

    def _dist2(self, t, theta, p):
        q = self.point(t, theta)
        return np.sum((q - p) ** 2, axis=-1)

    def _bracketed(self, t, p, center, half_width):
        res = minimize_scalar(
            lambda th: float(self._dist2(t, th, p)),
            bounds=(center - half_width, center + half_width),
            method="bounded",
            options={"xatol": 1e-13},
        )
        theta, ok = self._newton(t, np.array([res.x]), p[None, :])
        if ok[0] and abs(theta[0] - res.x) < half_width:
            return theta[0], True
        return float(res.x), bool(res.success)

    def _sweep(self, t, p):
        theta = 2.0 * np.pi * np.arange(SWEEP_SAMPLES) / SWEEP_SAMPLES
        q = self.point(t, theta)
        d2 = (
            np.sum(p**2, axis=-1)[:, None]
            - 2.0 * p @ q.T
            + np.sum(q**2, axis=-1)[None, :]
        )
        best = np.argmin(d2, axis=1)
        return theta[best], d2[np.arange(len(p)), best]

    def project(self, t, points, tube=TUBE_RADIUS):
        """Closest points on ``gamma(t, .)`` for an array of points.

        Returns ``(theta, foot, dist)``.  Newton from the polar angle, a
        bounded scalar minimization as fallback, and a 512-sample global
        sweep that restarts any point whose sample beats the local result.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float))
        theta0 = np.arctan2(p[:, 1], p[:, 0])
        theta, ok = self._newton(t, theta0, p)
        for i in np.flatnonzero(~ok):
            theta[i], ok[i] = self._bracketed(t, p[i], theta0[i], np.pi / 16)

        sweep_theta, sweep_d2 = self._sweep(t, p)
        d2 = self._dist2(t, theta, p)
        worse = d2 > sweep_d2
        for i in np.flatnonzero(worse | ~ok):
            th, good = self._bracketed(t, p[i], sweep_theta[i], 2.0 * np.pi / SWEEP_SAMPLES)
            if self._dist2(t, th, p[i]) <= min(d2[i], sweep_d2[i]) or not ok[i]:
                theta[i], ok[i] = th, good
        if not np.all(ok):
            i = int(np.flatnonzero(~ok)[0])
            raise NonconvergenceError(f"closest-point search failed for point {p[i]}")

        foot = self.point(t, theta)
        dist = np.linalg.norm(p - foot, axis=1)
        if np.any(dist >= tube):
            i = int(np.argmax(dist))
            raise ProjectionDomainError(
                f"point {p[i]} is {dist[i]:.3g} from the exact curve (tube {tube})"
            )
        return np.mod(theta, 2.0 * np.pi), foot, dist


ELLIPSE_FLOW = EllipseRadialFlow()


def exact_curve_point(t, theta):
    return ELLIPSE_FLOW.point(t, theta)


def closest_point_exact(t, p, tube=TUBE_RADIUS):
    """Closest point on the exact curve at time ``t`` to a single point ``p``."""
    theta, foot, dist = ELLIPSE_FLOW.project(t, np.asarray(p, dtype=float)[None, :], tube)
    return float(theta[0]), foot[0], float(dist[0])
