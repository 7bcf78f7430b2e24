#!/usr/bin/env python3
"""Incremental vs batch-recomputation training time over a range of cluster counts.

Writes the timing table (icvi,k,mode,seconds) and prints per-kind speedups.

    python3 scripts/speed_study.py --d 50 --n 2000 --k-max 40 --out speed.csv
"""
import argparse
from collections import defaultdict

import numpy as np

from icvi_artmap.bench import save_speed_table, speed_study, speedups
from icvi_artmap.icvi import KINDS
from icvi_artmap.trainer import TrainerConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k-min", type=int, default=2)
    ap.add_argument("--k-max", type=int, default=40)
    ap.add_argument("--k-step", type=int, default=1)
    ap.add_argument("--icvi", nargs="*", default=list(KINDS))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="speed.csv")
    args = ap.parse_args()

    base = TrainerConfig(k=2, rho_a=0.7, rho_ab=1.0, E=1)
    rows = speed_study(d=args.d, k_range=range(args.k_min, args.k_max + 1, args.k_step), N=args.n,
                       icvi_kinds=args.icvi, base=base, rng_seed=args.seed,
                       progress=lambda r: print(f"{r.icvi:>4} k={r.k:<3} {r.mode:<12} {r.seconds:8.3f}s", flush=True))
    save_speed_table(rows, args.out)

    per_kind = defaultdict(list)
    for (kind, k), s in sorted(speedups(rows).items(), key=lambda t: t[0][1]):
        per_kind[kind].append((k, s))
    print("\nspeedup (batch / incremental)")
    for kind, vals in per_kind.items():
        s = np.array([v for _, v in vals])
        print(f"{kind:>4}: mean {s.mean():6.1f}x  max {s.max():6.1f}x  at k={vals[int(s.argmax())][0]}")
    print(f"all : mean {np.mean([v for vals in per_kind.values() for _, v in vals]):6.1f}x")


if __name__ == "__main__":
    main()
