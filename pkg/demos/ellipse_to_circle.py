"""Evolve the 1 : 1/3 ellipse into the unit circle and watch the errors.

Run: python3 demos/ellipse_to_circle.py [out_dir]
"""

import sys

import numpy as np

from bgnflow import FlowConfig, run_flow
from bgnflow.io import write_mesh_snapshot

out = sys.argv[1] if len(sys.argv) > 1 else None

# Quadratic elements, 64 of them, 256 steps up to t = 1.
cfg = FlowConfig(degree=2, elements=64, steps=256, snapshot_stride=32)
res = run_flow(cfg)

print(f"{'t':>6} {'L2 error':>11} {'max error':>11} {'mesh ratio':>10}")
for s in res.snapshots:
    print(f"{s.t:6.3f} {s.report.err_l2:11.3e} {s.report.err_max:11.3e} {s.mesh_ratio:10.4f}")

radii = np.linalg.norm(res.final_mesh.nodes, axis=1)
print(f"\nfinal radii lie in [{radii.min():.6f}, {radii.max():.6f}]")
print(f"wall time {res.wall_ms / 1e3:.2f} s")

if out:
    write_mesh_snapshot(f"{out}/final.mesh", res.final_mesh, 1.0)
