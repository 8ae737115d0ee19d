"""Command line entry point ``bgnflow``.

Subcommands: ``run``, ``convergence``, ``meshratio`` and ``selftest``.  Any
subcommand accepts ``--config FILE`` with ``key = value`` lines whose keys
are the long option names; explicit options override the file.
"""

import argparse
import os
import sys

from .errors import BGNFlowError

# option name -> (type, default) for every subcommand that accepts it
_RUN_OPTS = {
    "degree": (int, 2),
    "elements": (int, 64),
    "steps": (int, 64),
    "tmax": (float, 1.0),
    "field": (str, "ellipse-radial"),
    "stepper": (str, "bgn"),
    "out": (str, "out"),
    "snapshot-stride": (int, 1),
    "curve": (str, "ellipse"),
}
_CONV_OPTS = {
    "mode": (str, "spatial"),
    "degree": (int, 2),
    "elements-fixed": (int, None),
    "out": (str, "out"),
    "full-scale": (bool, False),
}
_MESHRATIO_OPTS = {"out": (str, "out")}


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().lstrip("-")] = value.strip()
    return values


def _add_opts(parser, opts):
    for name, (typ, _) in opts.items():
        if typ is bool:
            parser.add_argument(f"--{name}", action="store_const", const=True, default=None)
        else:
            parser.add_argument(f"--{name}", type=typ, default=None)
    parser.add_argument("--config", default=None)


def _resolve(args, opts):
    from_file = read_config(args.config) if args.config else {}
    unknown = set(from_file) - set(opts)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for name, (typ, default) in opts.items():
        value = getattr(args, name.replace("-", "_"))
        if value is None and name in from_file:
            raw = from_file[name]
            value = raw.lower() in ("1", "true", "yes") if typ is bool else typ(raw)
        out[name] = default if value is None else value
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="bgnflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_opts(sub.add_parser("run", help="evolve one curve"), _RUN_OPTS)
    _add_opts(sub.add_parser("convergence", help="spatial or temporal convergence study"), _CONV_OPTS)
    _add_opts(sub.add_parser("meshratio", help="BGN vs Lagrangian mesh ratio"), _MESHRATIO_OPTS)
    sub.add_parser("selftest", help="run the invariant checks")
    return parser


def _cmd_run(o):
    from .experiments import FlowConfig, _record, emit_outputs, run_flow
    from .io import write_mesh_snapshot

    cfg = FlowConfig(
        degree=o["degree"],
        elements=o["elements"],
        steps=o["steps"],
        t_max=o["tmax"],
        field=o["field"],
        stepper=o["stepper"],
        snapshot_stride=o["snapshot-stride"],
        curve=o["curve"],
        out_dir=o["out"],
    )
    res = run_flow(cfg)
    series = [
        {"stepper": cfg.stepper, "step": s.step, "t": s.t, "mesh_ratio": s.mesh_ratio}
        for s in res.snapshots
    ]
    rec = _record("run", res)
    emit_outputs([rec], series, o["out"], "run")
    write_mesh_snapshot(os.path.join(o["out"], "final.mesh"), res.final_mesh, res.snapshots[-1].t)
    print(f"err_l2={rec.err_l2:.6g} err_max={rec.err_max:.6g} "
          f"ratio {rec.mesh_ratio_initial:.4g} -> {rec.mesh_ratio_final:.4g}")
    return 0


def _cmd_convergence(o):
    from .experiments import (
        FULL_TEMPORAL_ELEMENTS,
        TEMPORAL_ELEMENTS,
        run_spatial_convergence,
        run_temporal_convergence,
        temporal_order,
    )

    if o["mode"] == "spatial":
        records = run_spatial_convergence(o["degree"], out_dir=o["out"])
    elif o["mode"] == "temporal":
        J = o["elements-fixed"]
        if J is None:
            J = FULL_TEMPORAL_ELEMENTS if o["full-scale"] else TEMPORAL_ELEMENTS
        records = run_temporal_convergence(o["degree"], J, out_dir=o["out"])
        print(f"temporal order (floor subtracted): {temporal_order(records):.4f}")
    else:
        raise ValueError(f"unknown mode {o['mode']!r}")
    for r in records:
        order = "" if r.order_l2 is None else f"{r.order_l2:.3f}"
        print(f"{r.experiment} J={r.J} Nt={r.Nt} err_l2={r.err_l2:.4e} order={order}")
    return 0


def _cmd_meshratio(o):
    from .experiments import run_mesh_ratio_study

    records, _ = run_mesh_ratio_study(out_dir=o["out"])
    for r in records:
        print(f"{r.experiment}: {r.mesh_ratio_initial:.4f} -> {r.mesh_ratio_final:.4f}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            from .selftest import run_selftest

            return 0 if run_selftest() else 1
        opts = {"run": _RUN_OPTS, "convergence": _CONV_OPTS, "meshratio": _MESHRATIO_OPTS}[args.command]
        o = _resolve(args, opts)
        return {"run": _cmd_run, "convergence": _cmd_convergence, "meshratio": _cmd_meshratio}[args.command](o)
    except (BGNFlowError, ValueError, OSError) as exc:
        print(f"bgnflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
