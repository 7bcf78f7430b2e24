"""Synthetic fixtures, vigilance grid sweeps and the incremental-vs-batch timing study."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import Dataset, DataError
from .icvi import KINDS, is_max_optimal, normalize_kind
from .kmeans import best_of
from .metrics import ari
from .preprocess import prepare
from .trainer import TrainerConfig, fit

WORKERS_ENV = "ICVI_ARTMAP_WORKERS"
SWEEP_HEADER = ("rho_a", "rho_ab", "ari", "icvi", "epochs", "seconds")
SPEED_HEADER = ("icvi", "k", "mode", "seconds")

# Vigilance grids used for the synthetic benchmarks: 2-d data and higher-dimensional data.
RHO_A_GRID_2D = (0.0, 0.95, 0.05)
RHO_A_GRID_HD = (0.0, 0.7, 0.05)
RHO_AB_GRID = (0.1, 1.0, 0.1)


# ---------------------------------------------------------------------------
# data generation


@dataclass(frozen=True)
class GaussianSpec:
    k: int = 4
    d: int = 2
    n_per_cluster: tuple = (50, 50)
    center_box: tuple | None = None  # None: sized from k, d and the separation
    covariance_scale: tuple = (0.5, 1.0)  # per-axis standard deviations
    min_center_separation: float = 6.0  # in units of the largest standard deviation
    rng_seed: int = 0
    n_total: int | None = None  # overrides n_per_cluster with an even split
    max_tries: int = 1000

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise ValueError("k and d must be positive")
        if self.min_center_separation <= 0:
            raise ValueError("min_center_separation must be positive")
        lo, hi = self.covariance_scale
        if not 0 < lo <= hi:
            raise ValueError("covariance_scale must satisfy 0 < lo <= hi")
        if self.n_total is not None and self.n_total < self.k:
            raise ValueError("n_total must be at least k")


def _sizes(spec: GaussianSpec, rng):
    if spec.n_total is not None:
        base, extra = divmod(spec.n_total, spec.k)
        return np.array([base + (i < extra) for i in range(spec.k)])
    lo, hi = spec.n_per_cluster
    if not 1 <= lo <= hi:
        raise ValueError("n_per_cluster must satisfy 1 <= lo <= hi")
    return rng.integers(lo, hi + 1, size=spec.k)


def generate(spec: GaussianSpec):
    """Axis-aligned Gaussian blobs whose centres are at least
    `min_center_separation` largest-sigmas apart. Returns (Dataset, labels)."""
    rng = np.random.default_rng(spec.rng_seed)
    sizes = _sizes(spec, rng)
    sigmas = rng.uniform(*spec.covariance_scale, size=(spec.k, spec.d))
    min_dist = spec.min_center_separation * sigmas.max()
    if spec.center_box is None:
        half = min_dist * max(1.0, spec.k ** (1.0 / spec.d))
        box = (-half, half)
    else:
        box = spec.center_box

    centers = []
    tries = 0
    while len(centers) < spec.k:
        c = rng.uniform(box[0], box[1], size=spec.d)
        if all(np.linalg.norm(c - o) >= min_dist for o in centers):
            centers.append(c)
            continue
        tries += 1
        if tries > spec.max_tries:
            raise ValueError(
                f"could not place {spec.k} centres {min_dist:.3g} apart in box {box} "
                f"after {spec.max_tries} tries; enlarge the box or lower the separation"
            )

    X = np.vstack([c + s * rng.standard_normal((n, spec.d)) for c, s, n in zip(centers, sigmas, sizes)])
    y = np.repeat(np.arange(spec.k), sizes)
    perm = rng.permutation(y.size)
    return Dataset(X[perm]), y[perm]


def load_fixture(path):
    """Whitespace-separated rows, ground-truth label in the final column."""
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            parts = line.split()
            if not parts:
                continue
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise DataError("cannot parse fixture row", row=i) from None
            if len(rows[-1]) != len(rows[0]):
                raise DataError("ragged fixture row", row=i)
    if not rows:
        raise DataError(f"{path}: no data rows")
    A = np.array(rows)
    if A.shape[1] < 2:
        raise DataError(f"{path}: need at least one feature column plus the label column")
    return Dataset(A[:, :-1]), A[:, -1].astype(np.int64)


# ---------------------------------------------------------------------------
# grid sweep


def grid(lo, hi, step):
    if step <= 0:
        raise ValueError("grid step must be positive")
    if hi < lo:
        raise ValueError("grid upper bound below lower bound")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(n)]


def default_rho_a_grid(d):
    return RHO_A_GRID_2D if d <= 2 else RHO_A_GRID_HD


@dataclass(frozen=True)
class SweepSpec:
    rho_a_grid: tuple = RHO_A_GRID_2D
    rho_ab_grid: tuple = RHO_AB_GRID
    select_by: str = "ari"

    def __post_init__(self):
        if self.select_by not in ("ari", "icvi"):
            raise ValueError("select_by must be 'ari' or 'icvi'")
        grid(*self.rho_a_grid)
        grid(*self.rho_ab_grid)

    def points(self):
        return [(a, b) for a in grid(*self.rho_a_grid) for b in grid(*self.rho_ab_grid)]


@dataclass
class SweepRow:
    rho_a: float
    rho_ab: float
    ari: float
    icvi: float
    epochs: int
    seconds: float
    k_final: int
    labels: np.ndarray


@dataclass
class SweepResult:
    rows: list
    selected: int
    select_by: str

    @property
    def best(self) -> SweepRow:
        return self.rows[self.selected]

    def save_table(self, path):
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(SWEEP_HEADER)
            for r in self.rows:
                w.writerow([r.rho_a, r.rho_ab, repr(r.ari), repr(r.icvi), r.epochs, f"{r.seconds:.6f}"])


def _run_point(args):
    prep, truth, cfg, centroids = args
    t0 = time.perf_counter()
    res = fit(prep, cfg, centroids=centroids)
    seconds = time.perf_counter() - t0
    score = ari(truth, res.labels) if truth is not None else float("nan")
    return SweepRow(cfg.rho_a, cfg.rho_ab, score, res.value, res.epochs_run, seconds, res.k_final, res.labels)


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def select(rows, select_by, kind):
    """Index of the best row; the earliest grid point wins ties."""
    if select_by == "ari":
        keys = [r.ari for r in rows]
        maximize = True
    else:
        keys = [r.icvi for r in rows]
        maximize = is_max_optimal(kind)
    best = 0
    for i, v in enumerate(keys):
        if math.isnan(v):
            continue
        b = keys[best]
        if math.isnan(b) or (v > b if maximize else v < b):
            best = i
    return best


def sweep(prep, truth, spec: SweepSpec, base: TrainerConfig, workers=None) -> SweepResult:
    """fit() over the vigilance grid. k-means runs once and is shared by all points."""
    if spec.select_by == "ari" and truth is None:
        raise ValueError("select_by='ari' requires ground-truth labels")
    km = best_of(prep.X_b, base.k, trials=base.kmeans_trials, rng_seed=np.random.default_rng(base.rng_seed))
    jobs = [(prep, truth, replace(base, rho_a=a, rho_ab=b), km.centroids) for a, b in spec.points()]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_run_point(j) for j in jobs]
    return SweepResult(rows, select(rows, spec.select_by, base.icvi_kind), spec.select_by)


# ---------------------------------------------------------------------------
# timing study


@dataclass
class SpeedRow:
    icvi: str
    k: int
    mode: str
    seconds: float


def speed_study(d=50, k_range=range(2, 41), N=2000, icvi_kinds=KINDS, base: TrainerConfig | None = None,
                rng_seed=0, progress=None):
    """Time incremental and batch-recomputation training on the same data.

    Both modes must reach the same final partition; a mismatch raises.
    """
    rows = []
    for k in k_range:
        ds, _ = generate(GaussianSpec(k=k, d=d, n_total=N, rng_seed=rng_seed + k))
        prep = prepare(ds)
        for kind in icvi_kinds:
            cfg = base if base is not None else TrainerConfig(k=k, rho_a=0.7, rho_ab=1.0, E=1)
            cfg = replace(cfg, k=k, icvi_kind=normalize_kind(kind), rng_seed=rng_seed)
            km = best_of(prep.X_b, k, trials=cfg.kmeans_trials, rng_seed=np.random.default_rng(rng_seed))
            labels = {}
            for mode in ("incremental", "batch_cvi"):
                res = fit(prep, replace(cfg, mode=mode), centroids=km.centroids)
                labels[mode] = res.labels
                rows.append(SpeedRow(cfg.icvi_kind, k, mode, res.timings["total"]))
                if progress:
                    progress(rows[-1])
            if not np.array_equal(labels["incremental"], labels["batch_cvi"]):
                raise AssertionError(f"modes disagree for {kind} at k={k}")
    return rows


def save_speed_table(rows, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SPEED_HEADER)
        for r in rows:
            w.writerow([r.icvi, r.k, "incr" if r.mode == "incremental" else "batch", f"{r.seconds:.6f}"])


def speedups(rows):
    """{(kind, k): batch_seconds / incremental_seconds}."""
    t = {(r.icvi, r.k, r.mode): r.seconds for r in rows}
    return {(kind, k): t[(kind, k, "batch_cvi")] / t[(kind, k, "incremental")]
            for kind, k, mode in t if mode == "incremental" and (kind, k, "batch_cvi") in t}
