"""Spatial and temporal convergence at desk scale.

The spatial study pairs J = 16..128 with time steps shrinking like h^k, so
the observed order should approach k.  The temporal study holds J = 256 fixed
and subtracts the error of a 16x finer time step before fitting.

Run: python3 demos/convergence_study.py [max_degree]
"""

import sys

from bgnflow import run_spatial_convergence, run_temporal_convergence, temporal_order

max_k = int(sys.argv[1]) if len(sys.argv) > 1 else 2

for k in range(1, max_k + 1):
    print(f"k = {k}")
    for r in run_spatial_convergence(k):
        order = "" if r.order_l2 is None else f"{r.order_l2:.3f}"
        print(f"  J={r.J:4d} Nt={r.Nt:5d} err_l2={r.err_l2:.4e} {order}")

records = run_temporal_convergence(k=2)
for r in records:
    print(f"{r.experiment:>20} Nt={r.Nt:5d} err_l2={r.err_l2:.4e}")
print(f"temporal order, floor removed: {temporal_order(records):.3f}")
print(f"temporal order, raw:           {temporal_order(records, subtract_floor=False):.3f}")
