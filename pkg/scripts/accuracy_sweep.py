#!/usr/bin/env python3
"""Vigilance grid sweep on generated Gaussian fixtures (or external fixture files).

For each fixture, runs the full grid once and reports the run selected by ARI
and the one selected by the validity index alone.

    python3 scripts/accuracy_sweep.py --icvi ni --ks 4 10 20 --ds 2 10 50
    python3 scripts/accuracy_sweep.py --fixture path/to/2d-4c-no0.dat
"""
import argparse
import time
from pathlib import Path

from icvi_artmap.bench import GaussianSpec, SweepSpec, default_rho_a_grid, generate, load_fixture, select, sweep
from icvi_artmap.preprocess import prepare
from icvi_artmap.trainer import TrainerConfig


def run(name, ds, y, kind, check, out_dir):
    prep = prepare(ds)
    k = int(len(set(y.tolist())))
    t0 = time.perf_counter()
    res = sweep(prep, y, SweepSpec(rho_a_grid=default_rho_a_grid(prep.d)), TrainerConfig(k=k, icvi_kind=kind, check=check))
    by_icvi = res.rows[select(res.rows, "icvi", kind)]
    print(f"{name:<14} N={prep.N:<5} runs={len(res.rows):<4} ari(sel ari)={res.best.ari:.4f} "
          f"ari(sel icvi)={by_icvi.ari:.4f} [{time.perf_counter() - t0:.1f}s]", flush=True)
    if out_dir:
        res.save_table(Path(out_dir) / f"sweep_{name}_{kind}.csv")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--icvi", default="ni")
    ap.add_argument("--ks", type=int, nargs="*", default=[4, 10, 20])
    ap.add_argument("--ds", type=int, nargs="*", default=[2, 10, 50])
    ap.add_argument("--n-per-cluster", type=int, default=30)
    ap.add_argument("--sep", type=float, default=6.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fixture", nargs="*", default=[], help="whitespace-separated files, label in last column")
    ap.add_argument("--check", action="store_true")
    ap.add_argument("--out-dir")
    args = ap.parse_args()

    if args.fixture:
        for path in args.fixture:
            ds, y = load_fixture(path)
            run(Path(path).stem, ds, y, args.icvi, args.check, args.out_dir)
        return
    for d in args.ds:
        for k in args.ks:
            spec = GaussianSpec(k=k, d=d, n_per_cluster=(args.n_per_cluster, args.n_per_cluster),
                                min_center_separation=args.sep, rng_seed=args.seed + 100 * k + d)
            ds, y = generate(spec)
            run(f"{d}d-{k}c", ds, y, args.icvi, args.check, args.out_dir)


if __name__ == "__main__":
    main()
