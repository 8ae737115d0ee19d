"""Time loop and the benchmark studies.

``run_flow`` advances a curve with either the transport BGN step or plain
nodal advection and records diagnostics at every snapshot.  The study
functions build on it: spatial convergence with time steps coupled to the
mesh size, temporal convergence on a fixed fine mesh, and the mesh-ratio
comparison between the two steppers.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .diagnostics import ErrorReport, convergence_order, fitted_order, projection_error
from .errors import BGNFlowError, FlowAborted
from .flows import ELLIPSE_FLOW, parse_field
from .io import RecordAppender, write_loglog_svg, write_mesh_snapshot, write_records_csv, write_series_csv
from .mesh import build_initial_mesh, circle_curve, ellipse_curve, mesh_ratio
from .solver import bgn_step, lagrangian_step

CURVES = {"ellipse": ellipse_curve, "circle": circle_curve()}

SPATIAL_ELEMENTS = (16, 32, 64, 128)
SPATIAL_STEPS = {
    1: (16, 32, 64, 128),
    2: (16, 64, 256, 1024),
    3: (8, 64, 512, 4096),
}
TEMPORAL_STEPS = (2, 4, 8, 16, 32, 64)
TEMPORAL_ELEMENTS = 2**8
FULL_TEMPORAL_ELEMENTS = 2**10
REFERENCE_FACTOR = 16


@dataclass(frozen=True)
class FlowConfig:
    degree: int = 2
    elements: int = 64
    steps: int = 64
    t_max: float = 1.0
    field: str = "ellipse-radial"
    stepper: str = "bgn"
    snapshot_stride: int = 1
    curve: str = "ellipse"
    out_dir: str = None
    method: str = "auto"

    def __post_init__(self):
        if self.steps < 1 or self.t_max <= 0:
            raise ValueError("need steps >= 1 and t_max > 0")
        if self.elements < 3:
            raise ValueError("need at least 3 elements")
        if self.stepper not in ("bgn", "lagrangian"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot stride must be >= 1")
        if self.curve not in CURVES:
            raise ValueError(f"unknown initial curve {self.curve!r}")

    @property
    def tau(self):
        return self.t_max / self.steps


@dataclass(frozen=True)
class Snapshot:
    step: int
    t: float
    mesh_ratio: float
    report: ErrorReport = None


@dataclass
class FlowResult:
    config: FlowConfig
    initial_mesh: object
    final_mesh: object
    snapshots: list
    wall_ms: float

    def _max(self, name):
        vals = [getattr(s.report, name) for s in self.snapshots if s.report is not None]
        return max(vals) if vals else math.nan

    @property
    def err_l2(self):
        """max over recorded time levels of the projection-error L2 norm."""
        return self._max("err_l2")

    @property
    def err_h1(self):
        return self._max("err_h1")

    @property
    def err_max(self):
        return self._max("err_max")

    @property
    def final_report(self):
        return self.snapshots[-1].report

    @property
    def ratio_series(self):
        return [(s.t, s.mesh_ratio) for s in self.snapshots]


@dataclass(frozen=True)
class ExperimentRecord:
    experiment: str
    k: int
    J: int
    h: float
    Nt: int
    tau: float
    t_final: float
    err_l2: float
    err_h1: float
    err_max: float
    order_l2: float
    mesh_ratio_initial: float
    mesh_ratio_final: float
    wall_ms: float

    def as_dict(self):
        return asdict(self)


def _record(name, result, order=None):
    cfg = result.config
    return ExperimentRecord(
        experiment=name,
        k=cfg.degree,
        J=cfg.elements,
        h=1.0 / cfg.elements,
        Nt=cfg.steps,
        tau=cfg.tau,
        t_final=result.snapshots[-1].t,
        err_l2=result.err_l2,
        err_h1=result.err_h1,
        err_max=result.err_max,
        order_l2=order,
        mesh_ratio_initial=result.snapshots[0].mesh_ratio,
        mesh_ratio_final=result.snapshots[-1].mesh_ratio,
        wall_ms=result.wall_ms,
    )


def run_flow(cfg):
    """Advance the configured curve ``cfg.steps`` times.

    Diagnostics are recorded at t = 0, every ``snapshot_stride`` steps and at
    the final step; projection errors only for fields with an exact flow.
    Failures are re-raised as ``FlowAborted`` carrying the step index; with
    ``out_dir`` set, the last valid mesh is written there first.
    """
    field_ = parse_field(cfg.field)
    exact = field_.has_exact_flow and cfg.curve == "ellipse"
    step_fn = bgn_step if cfg.stepper == "bgn" else lagrangian_step
    tau = cfg.tau
    start = time.perf_counter()

    mesh = build_initial_mesh(CURVES[cfg.curve], cfg.elements, cfg.degree)
    initial = mesh

    def snap(step, t, m):
        report = projection_error(m, ELLIPSE_FLOW, t) if exact else None
        return Snapshot(step, t, mesh_ratio(m), report)

    snapshots = [snap(0, 0.0, mesh)]
    for m in range(cfg.steps):
        t = m * tau
        try:
            if cfg.stepper == "bgn":
                new, _ = step_fn(mesh, field_, t, tau, cfg.method)
            else:
                new = step_fn(mesh, field_, t, tau)
            if (m + 1) % cfg.snapshot_stride == 0 or m + 1 == cfg.steps:
                snapshots.append(snap(m + 1, (m + 1) * tau, new))
        except BGNFlowError as exc:
            if cfg.out_dir:
                write_mesh_snapshot(os.path.join(cfg.out_dir, "last_snapshot.mesh"), mesh, t)
            raise FlowAborted(m, exc) from exc
        mesh = new

    wall = (time.perf_counter() - start) * 1e3
    return FlowResult(cfg, initial, mesh, snapshots, wall)


def _run_cells(configs, workers):
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_flow, configs))
    return [run_flow(c) for c in configs]


def _series_records(name, results, sizes, appender=None):
    """Records with orders against the previous row; ``results`` may be lazy."""
    records, prev = [], None
    for res, size in zip(results, sizes):
        order = None
        if prev is not None:
            order = convergence_order([prev[0].err_l2, res.err_l2], [prev[1], size])[0]
        rec = _record(name, res, order)
        records.append(rec)
        if appender is not None:
            appender.append(rec)
        prev = (res, size)
    return records


def run_spatial_convergence(k, elements=SPATIAL_ELEMENTS, steps=None, out_dir=None, workers=1):
    """Error against h = 1/J with the time steps paired to each J.

    By default J = 16, 32, 64, 128 with Nt from ``SPATIAL_STEPS[k]``
    (tau shrinking like h^k).  Returns one ``ExperimentRecord`` per J.
    With ``out_dir`` the cells run sequentially and each row is written as
    soon as it completes.
    """
    if steps is None:
        if k not in SPATIAL_STEPS:
            raise ValueError(f"no default time steps for degree {k}")
        steps = SPATIAL_STEPS[k]
    configs = [FlowConfig(degree=k, elements=J, steps=Nt, out_dir=out_dir) for J, Nt in zip(elements, steps)]
    name = f"spatial-k{k}"
    hs = [1.0 / J for J in elements]
    if out_dir is None:
        return _series_records(name, _run_cells(configs, workers), hs)
    with RecordAppender(os.path.join(out_dir, f"{name}.csv")) as app:
        records = _series_records(name, map(run_flow, configs), hs, app)
    _emit_plot(out_dir, name, [r.h for r in records], [r.err_l2 for r in records], k, "h")
    return records


def run_temporal_convergence(k=2, J_fixed=TEMPORAL_ELEMENTS, steps=TEMPORAL_STEPS, reference_factor=REFERENCE_FACTOR, out_dir=None):
    """Error against tau on a fixed mesh, plus a fine-tau reference run.

    The last record (experiment ``temporal-reference``) uses
    ``reference_factor * max(steps)`` steps; its error serves as the spatial
    floor in ``temporal_order``.
    """
    configs = [FlowConfig(degree=k, elements=J_fixed, steps=Nt) for Nt in steps]
    ref_cfg = FlowConfig(degree=k, elements=J_fixed, steps=reference_factor * max(steps))
    name = f"temporal-k{k}"
    taus = [c.tau for c in configs]
    appender = RecordAppender(os.path.join(out_dir, f"{name}.csv")) if out_dir else None
    try:
        records = _series_records(name, map(run_flow, configs), taus, appender)
        ref = _record("temporal-reference", run_flow(ref_cfg))
        if appender is not None:
            appender.append(ref)
    finally:
        if appender is not None:
            appender.close()
    records.append(ref)
    if out_dir:
        _emit_plot(out_dir, name, taus, [r.err_l2 for r in records[:-1]], 1, "tau")
    return records


def temporal_order(records, last=3, subtract_floor=True):
    """Least-squares temporal order over the last ``last`` tau values.

    With ``subtract_floor`` the error of the ``temporal-reference`` record is
    removed first, isolating the O(tau) part from the spatial error.
    """
    series = [r for r in records if r.experiment != "temporal-reference"]
    floor = 0.0
    if subtract_floor:
        refs = [r for r in records if r.experiment == "temporal-reference"]
        if not refs:
            raise ValueError("no temporal-reference record to subtract")
        floor = refs[0].err_l2
    tail = series[-last:]
    errs = np.array([r.err_l2 - floor for r in tail])
    if np.any(errs <= 0):
        return math.nan
    return fitted_order(errs, [r.tau for r in tail])


def run_mesh_ratio_study(J=64, k=1, Nt=64, t_max=1.0, out_dir=None):
    """Mesh ratio histories of the BGN and the Lagrangian stepper.

    Returns ``(records, series)``; ``series`` rows are dicts with keys
    ``stepper, step, t, mesh_ratio`` sampled at every step.
    """
    records, series = [], []
    for stepper in ("bgn", "lagrangian"):
        cfg = FlowConfig(degree=k, elements=J, steps=Nt, t_max=t_max, stepper=stepper, out_dir=out_dir)
        res = run_flow(cfg)
        records.append(_record(f"meshratio-{stepper}", res))
        series += [
            {"stepper": stepper, "step": s.step, "t": s.t, "mesh_ratio": s.mesh_ratio}
            for s in res.snapshots
        ]
    if out_dir:
        emit_outputs(records, series, out_dir, "meshratio")
    return records, series


def _emit_plot(out_dir, name, xs, ys, slope, xlabel):
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    keep = ys > 0
    if np.count_nonzero(keep) >= 1:
        write_loglog_svg(
            os.path.join(out_dir, f"{name}.svg"),
            xs[keep],
            ys[keep],
            slope,
            xlabel=xlabel,
            ylabel="max_t L2 projection error",
            title=name,
        )


def emit_outputs(records, series, out_dir, name, slope=None, xlabel="h"):
    """Write ``<name>.csv``, ``<name>_series.csv`` and optionally ``<name>.svg``."""
    write_records_csv(os.path.join(out_dir, f"{name}.csv"), records)
    if series is not None:
        write_series_csv(os.path.join(out_dir, f"{name}_series.csv"), series)
    if slope is not None and records:
        xs = [r.h if xlabel == "h" else r.tau for r in records]
        _emit_plot(out_dir, name, xs, [r.err_l2 for r in records], slope, xlabel)


__all__ = [
    "FlowConfig",
    "FlowResult",
    "ExperimentRecord",
    "Snapshot",
    "run_flow",
    "run_spatial_convergence",
    "run_temporal_convergence",
    "temporal_order",
    "run_mesh_ratio_study",
    "emit_outputs",
]
