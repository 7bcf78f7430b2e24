"""Command-line entry point: gen, fit, sweep, speed, eval.

Every command that writes files also writes `<first output stem>.manifest.json`
beside it, echoing the command and all of its flags.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (RHO_AB_GRID, GaussianSpec, SweepSpec, default_rho_a_grid, generate,
                    save_speed_table, speed_study, sweep)
from .core import DataError, load_csv, load_labels, save_csv, save_labels
from .icvi import KINDS
from .metrics import ari
from .preprocess import prepare
from .trainer import TrainerConfig, fit


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def write_manifest(out, command, args, extra=None):
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "command": command,
        "flags": flags,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        doc.update(extra)
    path = manifest_path(out)
    path.write_text(json.dumps(doc, indent=1, default=str))
    return path


def _add_model_flags(p):
    p.add_argument("--k", type=int, required=True, help="target number of clusters")
    p.add_argument("--icvi", type=str.lower, choices=KINDS, default="ni")
    p.add_argument("--beta-a", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--beta-ab", type=float, default=0.001)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--mode", choices=("incr", "batch"), default="incr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="data CSV has a header row")
    p.add_argument("--check", action="store_true", help="verify bookkeeping invariants during training")


def _config(args, rho_a=0.0, rho_ab=0.1):
    return TrainerConfig(
        k=args.k, icvi_kind=args.icvi, rho_a=rho_a, alpha_a=args.alpha, beta_a=args.beta_a,
        rho_ab=rho_ab, beta_ab=args.beta_ab, epsilon=args.eps, E=args.epochs, tol=args.tol,
        rng_seed=args.seed, mode=args.mode, check=args.check,
    )


def cmd_gen(args):
    spec = GaussianSpec(k=args.k, d=args.d, n_total=args.n, min_center_separation=args.sep,
                        covariance_scale=(args.sigma_min, args.sigma_max), rng_seed=args.seed)
    ds, y = generate(spec)
    save_csv(args.out_data, ds.X_raw)
    save_labels(args.out_labels, y)
    write_manifest(args.out_data, "gen", args)
    print(f"wrote {ds.N} samples to {args.out_data} and labels to {args.out_labels}")


def cmd_fit(args):
    cfg = _config(args, args.rho_a, args.rho_ab)
    prep = prepare(load_csv(args.data, has_header=args.header))
    truth = load_labels(args.truth) if args.truth else None
    res = fit(prep, cfg, truth=truth)
    save_labels(args.out_labels, res.labels)
    if args.out_trace:
        res.save_trace(args.out_trace)
    if args.out_json:
        res.save_json(args.out_json)
    write_manifest(args.out_labels, "fit", args, {
        "config": asdict(cfg), "epochs_run": res.epochs_run, "stop_reason": res.stop_reason,
        "k_final": res.k_final, "icvi": res.value, "ari": res.ari, "timings": res.timings,
    })
    msg = f"k_final={res.k_final} epochs={res.epochs_run} stop={res.stop_reason} icvi={res.value:.6g}"
    if res.ari is not None:
        msg += f" ari={res.ari:.4f}"
    print(msg)


def cmd_sweep(args):
    if args.select_by == "ari" and not args.truth:
        raise UsageError("--select-by ari requires --truth")
    prep = prepare(load_csv(args.data, has_header=args.header))
    truth = load_labels(args.truth) if args.truth else None
    spec = SweepSpec(
        rho_a_grid=tuple(args.rho_a_grid) if args.rho_a_grid else default_rho_a_grid(prep.d),
        rho_ab_grid=tuple(args.rho_ab_grid),
        select_by=args.select_by,
    )
    res = sweep(prep, truth, spec, _config(args))
    res.save_table(args.out_table)
    if args.out_labels:
        save_labels(args.out_labels, res.best.labels)
    b = res.best
    write_manifest(args.out_table, "sweep", args, {
        "rho_a_grid": spec.rho_a_grid, "rho_ab_grid": spec.rho_ab_grid,
        "selected": {"rho_a": b.rho_a, "rho_ab": b.rho_ab, "ari": b.ari if truth is not None else None,
                     "icvi": b.icvi, "k_final": b.k_final},
    })
    shown = f" ari={b.ari:.4f}" if truth is not None else ""
    print(f"selected rho_a={b.rho_a} rho_ab={b.rho_ab}{shown} icvi={b.icvi:.6g} ({len(res.rows)} runs)")


def cmd_speed(args):
    kinds = args.icvi or list(KINDS)
    base = TrainerConfig(k=2, rho_a=args.rho_a, rho_ab=args.rho_ab, E=args.epochs)
    rows = speed_study(d=args.d, k_range=range(args.k_min, args.k_max + 1), N=args.n, icvi_kinds=kinds,
                       base=base, rng_seed=args.seed,
                       progress=(lambda r: print(f"{r.icvi} k={r.k} {r.mode} {r.seconds:.3f}s", flush=True))
                       if args.verbose else None)
    save_speed_table(rows, args.out)
    write_manifest(args.out, "speed", args)
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_eval(args):
    print(repr(ari(load_labels(args.a), load_labels(args.b))))


class UsageError(Exception):
    pass


def build_parser():
    ap = argparse.ArgumentParser(prog="icvi-artmap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate Gaussian blobs")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="total number of samples")
    p.add_argument("--sep", type=float, default=6.0, help="minimum centre distance in largest-sigma units")
    p.add_argument("--sigma-min", type=float, default=0.5)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="train on a CSV file")
    p.add_argument("--data", required=True)
    _add_model_flags(p)
    p.add_argument("--rho-a", type=float, default=0.0)
    p.add_argument("--rho-ab", type=float, default=0.1)
    p.add_argument("--truth", help="ground-truth label file; reports ARI")
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-trace")
    p.add_argument("--out-json", help="full run result as JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="vigilance grid search")
    p.add_argument("--data", required=True)
    _add_model_flags(p)
    p.add_argument("--select-by", choices=("ari", "icvi"), default="icvi")
    p.add_argument("--truth")
    p.add_argument("--rho-a-grid", type=float, nargs=3, metavar=("LO", "HI", "STEP"),
                   help="default depends on the data dimension")
    p.add_argument("--rho-ab-grid", type=float, nargs=3, metavar=("LO", "HI", "STEP"), default=list(RHO_AB_GRID))
    p.add_argument("--out-table", required=True)
    p.add_argument("--out-labels", help="labels of the selected run")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("speed", help="incremental vs batch timing study")
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=40)
    p.add_argument("--icvi", type=str.lower, choices=KINDS, action="append",
                   help="repeat to select several; default all")
    p.add_argument("--rho-a", type=float, default=0.7)
    p.add_argument("--rho-ab", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("eval", help="ARI between two label files")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (DataError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
