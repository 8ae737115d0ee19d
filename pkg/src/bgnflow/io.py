"""CSV, SVG and mesh-snapshot files.

All writers are deterministic for fixed inputs.  Floats in CSV files use 10
significant digits; mesh snapshots use 17 so that positions round-trip.
"""

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

RECORD_FIELDS = (
    "experiment",
    "k",
    "J",
    "h",
    "Nt",
    "tau",
    "t_final",
    "err_l2",
    "err_h1",
    "err_max",
    "order_l2",
    "mesh_ratio_initial",
    "mesh_ratio_final",
    "wall_ms",
)
SERIES_FIELDS = ("stepper", "step", "t", "mesh_ratio")
MESH_HEADER = "# bgnflow-mesh v1 k={k} J={J} t={t}"


def fmt(value):
    """Format a CSV cell: 10 significant digits for floats, blank for None/nan."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{float(value):.10g}"
    return str(value)


def _ensure_parent(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _write_text(path, text):
    try:
        _ensure_parent(path)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _csv_text(fields, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([fmt(row[f]) for f in fields])
    return buf.getvalue()


def records_csv(records):
    return _csv_text(RECORD_FIELDS, [r.as_dict() for r in records])


def write_records_csv(path, records):
    _write_text(path, records_csv(records))


def write_series_csv(path, series):
    """``series`` is a list of dicts with keys ``stepper, step, t, mesh_ratio``."""
    _write_text(path, _csv_text(SERIES_FIELDS, series))


class RecordAppender:
    """Append experiment rows to a CSV as they complete.

    The header is written on open and every row is flushed, so an aborted
    experiment leaves a parsable partial file.
    """

    def __init__(self, path):
        _ensure_parent(path)
        self.path = path
        self._fh = open(path, "w", newline="\n")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(RECORD_FIELDS)
        self._fh.flush()

    def append(self, record):
        row = record.as_dict()
        self._writer.writerow([fmt(row[f]) for f in RECORD_FIELDS])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass(frozen=True)
class MeshSnapshot:
    degree: int
    elements: int
    t: float
    nodes: np.ndarray

    def to_mesh(self, ref_lengths=None):
        """Rebuild a ``CurveMesh``; reference lengths default to current chords."""
        from .mesh import CurveMesh
        from .reference import build_reference_element

        if ref_lengths is None:
            ends = self.nodes[:: self.degree]
            ref_lengths = np.linalg.norm(np.roll(ends, -1, axis=0) - ends, axis=1)
        return CurveMesh(self.degree, self.nodes, ref_lengths, build_reference_element(self.degree))


def write_mesh_snapshot(path, mesh, t):
    lines = [MESH_HEADER.format(k=mesh.degree, J=mesh.element_count, t=repr(float(t)))]
    lines += [f"{i},{x:.17g},{y:.17g}" for i, (x, y) in enumerate(mesh.nodes)]
    _write_text(path, "\n".join(lines) + "\n")


def read_mesh_snapshot(path):
    with open(path) as fh:
        header = fh.readline().split()
        if header[:3] != ["#", "bgnflow-mesh", "v1"]:
            raise ValueError(f"{path}: not a bgnflow mesh snapshot")
        meta = dict(item.split("=", 1) for item in header[3:])
        k, J, t = int(meta["k"]), int(meta["J"]), float(meta["t"])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if len(rows) != J * k:
        raise ValueError(f"{path}: expected {J * k} nodes for k={k}, J={J}, found {len(rows)}")
    idx = [int(r[0]) for r in rows]
    if idx != list(range(J * k)):
        raise ValueError(f"{path}: node indices are not 0..{J * k - 1}")
    nodes = np.array([[float(r[1]), float(r[2])] for r in rows])
    return MeshSnapshot(k, J, t, nodes)


def loglog_svg(xs, ys, slope, xlabel="h", ylabel="error", title=""):
    """Standalone 800x600 log-log chart with a dashed slope reference line."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    W, H, pad = 800, 600, 80
    lx, ly = np.log10(xs), np.log10(ys)
    # guide through the last point with the given slope
    gx = np.array([lx.min(), lx.max()])
    gy = ly[-1] + slope * (gx - lx[-1]) if len(lx) else gx
    xmin, xmax = lx.min(), lx.max()
    ymin, ymax = min(ly.min(), gy.min()), max(ly.max(), gy.max())
    if xmax == xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    if ymax == ymin:
        ymin, ymax = ymin - 0.5, ymax + 0.5

    def px(v):
        return pad + (v - xmin) / (xmax - xmin) * (W - 2 * pad)

    def py(v):
        return H - pad - (v - ymin) / (ymax - ymin) * (H - 2 * pad)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{W - 2 * pad}" height="{H - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{W / 2:.0f}" y="{pad / 2:.0f}" text-anchor="middle" font-size="18">{title}</text>',
        f'<text x="{W / 2:.0f}" y="{H - pad / 3:.0f}" text-anchor="middle" font-size="16">log10 {xlabel}</text>',
        f'<text x="{pad / 3:.0f}" y="{H / 2:.0f}" text-anchor="middle" font-size="16" '
        f'transform="rotate(-90 {pad / 3:.0f} {H / 2:.0f})">log10 {ylabel}</text>',
        f'<polyline class="data" points="{pts}" fill="none" stroke="navy" stroke-width="2"/>',
    ]
    for a, b in zip(lx, ly):
        out.append(f'<circle class="marker" cx="{px(a):.2f}" cy="{py(b):.2f}" r="5" fill="navy"/>')
    out.append(
        f'<line class="guide" x1="{px(gx[0]):.2f}" y1="{py(gy[0]):.2f}" '
        f'x2="{px(gx[1]):.2f}" y2="{py(gy[1]):.2f}" stroke="gray" stroke-dasharray="8,6"/>'
    )
    out.append(
        f'<text x="{px(gx[0]) + 10:.2f}" y="{py(gy[0]) - 10:.2f}" font-size="14" fill="gray">slope {slope:g}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_loglog_svg(path, xs, ys, slope, **labels):
    _write_text(path, loglog_svg(xs, ys, slope, **labels))
