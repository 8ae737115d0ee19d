"""Why tangential motion matters: BGN versus plain nodal advection.

Both steppers start from the same uniform-in-angle linear mesh.  Advection
lets nodes bunch up where the ellipse stretches; the BGN step moves them
along the curve and the ratio h_max/h_min improves instead.

Run: python3 demos/mesh_quality.py [out_dir]
"""

import sys

from bgnflow import run_mesh_ratio_study

out = sys.argv[1] if len(sys.argv) > 1 else None
records, series = run_mesh_ratio_study(out_dir=out)

bgn = {r["step"]: r["mesh_ratio"] for r in series if r["stepper"] == "bgn"}
lag = {r["step"]: r["mesh_ratio"] for r in series if r["stepper"] == "lagrangian"}
print(f"{'step':>4} {'bgn':>8} {'lagrangian':>10}")
for step in range(0, 65, 8):
    print(f"{step:4d} {bgn[step]:8.4f} {lag[step]:10.4f}")
if out:
    print(f"series written to {out}/meshratio_series.csv")
