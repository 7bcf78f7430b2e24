"""Training loop: validity-index-driven labels fed through ARTa and the map field.

Each presentation scores the sample against every cluster with the chosen
index, turns the best choice into a one-hot label, lets ARTa/map-field
resonance pick a category, and moves the sample to the cluster that category
predicts. After every epoch, clusters are greedily merged while that improves
the index and then split (one ARTa category at a time) until the requested
cluster count is restored or no multi-category cluster is left.

`mode="batch_cvi"` swaps the incremental statistics for full recomputation on
every hypothetical partition. Decisions are the same; only the cost differs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .artmap import ArtA, MapField, prune_category, search_and_resonate
from .core import delete_id_map, merge_id_map
from .icvi import IcviState, batch_value, is_max_optimal, normalize_kind, worst_value
from .kmeans import KMeansResult, best_of
from .metrics import ari
from .preprocess import PreparedData, centroid_to_category

MODES = ("incremental", "batch_cvi")
STOP_REASONS = ("max_epochs", "weights_stable", "icvi_converged")

# Scores closer than this (relative) are treated as ties, so both evaluation
# modes make the same choices despite last-bit rounding differences.
TIE_RTOL = 1e-9
TIE_ATOL = 1e-12


class InvariantError(AssertionError):
    pass


def normalize_mode(mode) -> str:
    m = str(mode).lower()
    aliases = {"incr": "incremental", "incremental": "incremental", "batch": "batch_cvi", "batch_cvi": "batch_cvi"}
    if m not in aliases:
        raise ValueError(f"unknown mode {mode!r}; valid modes: incr, batch")
    return aliases[m]


@dataclass
class TrainerConfig:
    k: int
    icvi_kind: str = "ni"
    rho_a: float = 0.0
    alpha_a: float = 0.001
    beta_a: float = 1.0
    rho_ab: float = 0.1
    beta_ab: float = 0.001
    epsilon: float = 0.01
    E: int = 20
    tol: float = 1e-6
    rng_seed: int = 0
    mode: str = "incremental"
    kmeans_trials: int = 10
    check: bool = False  # invariant checks after every epoch, merge and split
    check_every_step: bool = False  # also after every presentation (slow)

    def __post_init__(self):
        self.icvi_kind = normalize_kind(self.icvi_kind)
        self.mode = normalize_mode(self.mode)
        if not (0.0 <= self.rho_a <= 1.0 and 0.0 <= self.rho_ab <= 1.0):
            raise ValueError("vigilance parameters must lie in [0, 1]")
        if not (0.0 < self.beta_a <= 1.0 and 0.0 < self.beta_ab <= 1.0):
            raise ValueError("learning rates must lie in (0, 1]")
        if self.alpha_a <= 0:
            raise ValueError("alpha_a must be positive")
        if self.E < 1:
            raise ValueError("E must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        if self.k < 2:
            raise ValueError("k must be at least 2")


@dataclass
class RunResult:
    labels: np.ndarray
    icvi_trace: list
    epochs_run: int
    stop_reason: str
    timings: dict
    k_final: int
    value: float
    n_categories: int
    events: list = field(default_factory=list)
    ari: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["labels"] = self.labels.tolist()
        d["icvi_trace"] = [[int(i), _json_float(v)] for i, v in self.icvi_trace]
        d["value"] = _json_float(self.value)
        d["events"] = [{k: _json_float(v) if isinstance(v, float) else v for k, v in e.items()} for e in self.events]
        return d

    def save_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    def save_trace(self, path):
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write("iteration,icvi_value\n")
            for i, v in self.icvi_trace:
                fh.write(f"{int(i)},{float(v)!r}\n")


def _json_float(v):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else "-inf"


def same_score(a, b) -> bool:
    if a == b:
        return True
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= TIE_RTOL * max(abs(a), abs(b)) + TIE_ATOL


# ---------------------------------------------------------------------------
# Two interchangeable evaluators behind the same small interface.


class IncrementalEvaluator:
    def __init__(self, kind, X, labels):
        self.X = X
        self.state = IcviState.init_batch(kind, X, labels)

    @property
    def value(self):
        return self.state.value

    @property
    def k(self):
        return self.state.k

    def size(self, i):
        return int(round(self.state.n[i]))

    def sizes(self):
        return np.rint(self.state.n).astype(np.int64)

    def score_swap_all(self, t, src):
        return self.state.score_swap_all(self.X[t], src)

    def move(self, t, src, dst):
        self.state.update_move(self.X[t], src, dst)

    def absorb(self, t, src, dst):
        """Sample t, the last member of src, joins dst; src disappears."""
        self.state.update_add(dst, self.X[t])
        self.state.delete_cluster(src)

    def score_merge(self, i, j):
        return self.state.score_merge(i, j)

    def merge(self, i, j):
        return self.state.update_merge(i, j)

    def score_split(self, i, members):
        return self.state.score_split(i, self.X[members])

    def split(self, i, members):
        return self.state.update_split(i, self.X[members])


class BatchEvaluator:
    def __init__(self, kind, X, labels):
        self.kind = normalize_kind(kind)
        self.X = X
        self.labels = np.array(labels, dtype=np.int64)
        self.counts = np.bincount(self.labels)
        self.value = self._eval(self.labels)

    def _eval(self, labels):
        return batch_value(self.kind, self.X, labels)

    @property
    def k(self):
        return self.counts.size

    def size(self, i):
        return int(self.counts[i])

    def sizes(self):
        return self.counts.copy()

    def score_swap_all(self, t, src):
        scores = np.full(self.k, worst_value(self.kind))
        scores[src] = self.value
        if self.counts[src] < 2:
            return scores
        L = self.labels
        for c in range(self.k):
            if c != src:
                L[t] = c
                scores[c] = self._eval(L)
        L[t] = src
        return scores

    def move(self, t, src, dst):
        self.labels[t] = dst
        self.counts[src] -= 1
        self.counts[dst] += 1
        self.value = self._eval(self.labels)

    def absorb(self, t, src, dst):
        self.labels[t] = dst
        self.labels = delete_id_map(self.k, src)[self.labels]
        self.counts = np.bincount(self.labels)
        self.value = self._eval(self.labels)

    def score_merge(self, i, j):
        return self._eval(merge_id_map(self.k, i, j)[self.labels])

    def merge(self, i, j):
        self.labels = merge_id_map(self.k, i, j)[self.labels]
        self.counts = np.bincount(self.labels)
        self.value = self._eval(self.labels)
        return self.k - 1

    def score_split(self, i, members):
        L = self.labels.copy()
        L[members] = self.k
        return self._eval(L)

    def split(self, i, members):
        new = self.k
        self.labels[members] = new
        self.counts = np.bincount(self.labels)
        self.value = self._eval(self.labels)
        return new


def _activation_matrix(X_a, W, alpha):
    T = np.empty((X_a.shape[0], W.shape[0]))
    for j, w in enumerate(W):
        T[:, j] = np.minimum(X_a, w).sum(axis=1) / (alpha + w.sum())
    return T


# ---------------------------------------------------------------------------


class Trainer:
    """Owns all mutable state of one run."""

    def __init__(self, prep: PreparedData, cfg: TrainerConfig):
        self.prep = prep
        self.cfg = cfg
        self.maximize = is_max_optimal(cfg.icvi_kind)
        self.X_a = prep.X_a
        self.X_b = prep.X_b
        self.N = prep.N
        self.iteration = 0
        self.epoch = 0
        self.trace = []
        self.events = []

    # -- initialization ----------------------------------------------------

    def initialize(self, centroids=None, rng=None):
        cfg = self.cfg
        if cfg.k > self.N:
            raise ValueError(f"k={cfg.k} exceeds the number of samples ({self.N})")
        if centroids is None:
            centroids = best_of(self.X_b, cfg.k, trials=cfg.kmeans_trials, rng_seed=rng).centroids
        elif isinstance(centroids, KMeansResult):
            centroids = centroids.centroids
        centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
        if centroids.shape != (cfg.k, self.prep.d):
            raise ValueError(f"expected {cfg.k} x {self.prep.d} centroids, got {centroids.shape}")
        W_a = centroid_to_category(centroids, self.prep)
        labels = _activation_matrix(self.X_a, W_a, cfg.alpha_a).argmax(axis=1)
        labels = self._repair_empty(labels, cfg.k)

        self.cluster_of = labels.astype(np.int64)
        self.category_of = labels.astype(np.int64).copy()
        self.art = ArtA(W_a, rho=cfg.rho_a, alpha=cfg.alpha_a, beta=cfg.beta_a,
                        instance_count=np.bincount(labels, minlength=cfg.k))
        self.mf = MapField.ones(cfg.k, cfg.k, rho=cfg.rho_ab, beta=cfg.beta_ab, epsilon=cfg.epsilon)
        evaluator = IncrementalEvaluator if cfg.mode == "incremental" else BatchEvaluator
        self.ev = evaluator(cfg.icvi_kind, self.X_b, self.cluster_of)

    def _repair_empty(self, labels, k):
        labels = labels.copy()
        for _ in range(k):
            counts = np.bincount(labels, minlength=k)
            empty = np.flatnonzero(counts == 0)
            if empty.size == 0:
                break
            big = int(np.argmax(counts))
            members = np.flatnonzero(labels == big)
            d2 = ((self.X_b[members] - self.X_b[members].mean(axis=0)) ** 2).sum(axis=1)
            labels[members[int(np.argmax(d2))]] = empty[0]
        return labels

    # -- per-sample dynamics -----------------------------------------------

    def label_vector(self, scores, current):
        """One-hot label of the best-scoring cluster (incumbent wins ties);
        all ones when every score ties."""
        k = scores.size
        best = scores.max() if self.maximize else scores.min()
        tied = [c for c in range(k) if same_score(float(scores[c]), float(best))]
        if len(tied) == k:
            return np.ones(k)
        choice = current if current in tied else tied[0]
        y = np.zeros(k)
        y[choice] = 1.0
        return y

    def present_sample(self, t):
        self.iteration += 1
        ev, art, mf = self.ev, self.art, self.mf
        f = int(self.cluster_of[t])
        r = int(self.category_of[t])

        y = self.label_vector(ev.score_swap_all(t, f), f)
        J, _ = search_and_resonate(art, mf, self.X_a[t], y)
        l = mf.predict(J, prefer=f)

        if l != f:
            if ev.size(f) > 1:
                ev.move(t, f, l)
                self.cluster_of[t] = l
            elif ev.k > 2:
                # last member leaves: the cluster disappears
                ev.absorb(t, f, l)
                mf.delete_column(f)
                idmap = delete_id_map(mf.n_clusters + 1, f)
                self.cluster_of = idmap[self.cluster_of]
                self.cluster_of[t] = idmap[l]

        if J != r:
            self.category_of[t] = J
            art.instance_count[J] += 1
            art.instance_count[r] -= 1
            if art.instance_count[r] == 0:
                prune_category(art, mf, r)
                self.category_of[self.category_of > r] -= 1
            else:
                art.shrink(r, self.X_a[self.category_of == r])

        self.trace.append((self.iteration, ev.value))
        if self.cfg.check_every_step:
            self.check_invariants()

    # -- end-of-epoch heuristics --------------------------------------------

    def _better(self, a, b):
        if same_score(a, b):
            return False
        return a > b if self.maximize else a < b

    def _extreme(self, values):
        return max(values) if self.maximize else min(values)

    def merge_phase(self):
        ev, mf = self.ev, self.mf
        while ev.k > 2:
            k = ev.k
            pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
            scores = [ev.score_merge(i, j) for i, j in pairs]
            best = self._extreme(scores)
            before = ev.value
            if not self._better(best, before):
                break
            i, j = next(p for p, s in zip(pairs, scores) if same_score(s, best))
            ev.merge(i, j)
            mf.merge_columns(i, j)
            self.cluster_of = merge_id_map(k, i, j)[self.cluster_of]
            self.iteration += 1
            self.trace.append((self.iteration, ev.value))
            self.events.append({"event": "merge", "epoch": self.epoch, "i": i, "j": j,
                                "before": float(before), "after": float(ev.value)})
            if self.cfg.check:
                if not self._better(ev.value, before):
                    raise InvariantError(f"merge of {i},{j} did not improve the index ({before} -> {ev.value})")
                self.check_invariants()

    def split_candidates(self):
        """(cluster, category, member indices) for every category of a
        cluster that is predicted by two or more categories holding its samples."""
        W = self.mf.W
        pred = W.argmax(axis=1)
        C = W.shape[0]
        key = self.cluster_of * C + self.category_of
        uniq = np.unique(key)
        present = {}
        for u in uniq:
            i, q = divmod(int(u), C)
            if pred[q] == i:
                present.setdefault(i, []).append(q)
        out = []
        for i in sorted(present):
            cats = present[i]
            if len(cats) < 2:
                continue
            in_i = self.cluster_of == i
            for q in cats:
                out.append((i, q, np.flatnonzero(in_i & (self.category_of == q))))
        return out

    def _split_ratio(self, q):
        row = np.sort(self.mf.W[q])[::-1]
        if row[0] <= 0:
            return 0.0
        second = row[1] if row.size > 1 else 0.0
        return float((row[0] - second) / row[0])

    def split_phase(self):
        ev, mf = self.ev, self.mf
        while ev.k < self.cfg.k:
            cands = self.split_candidates()
            if not cands:
                break
            scores = [ev.score_split(i, m) for i, _, m in cands]
            best = self._extreme(scores)
            tied = [c for c, s in zip(cands, scores) if same_score(s, best)]
            i, q, members = min(tied, key=lambda c: self._split_ratio(c[1])) if len(tied) > 1 else tied[0]
            before = ev.value
            new = ev.split(i, members)
            col = mf.split_column(q)
            assert new == col
            self.cluster_of[members] = new
            self.iteration += 1
            self.trace.append((self.iteration, ev.value))
            self.events.append({"event": "split", "epoch": self.epoch, "i": i, "category": int(q),
                                "size": int(members.size), "before": float(before), "after": float(ev.value)})
            if self.cfg.check:
                self.check_invariants()

    # -- invariants -----------------------------------------------------------

    def check_invariants(self, against_batch=True):
        ev, art, mf = self.ev, self.art, self.mf
        k = ev.k
        if mf.W.shape[1] != k:
            raise InvariantError(f"map field has {mf.W.shape[1]} columns for {k} clusters")
        if art.W.shape[0] != mf.W.shape[0]:
            raise InvariantError("ARTa and map-field row counts differ")
        sizes = ev.sizes()
        if sizes.sum() != self.N:
            raise InvariantError(f"cluster sizes sum to {sizes.sum()}, expected {self.N}")
        counts = np.bincount(self.cluster_of, minlength=k)
        if counts.size != k or not np.array_equal(counts, sizes):
            raise InvariantError("partition labels disagree with cluster statistics")
        if not np.array_equal(np.bincount(self.category_of, minlength=art.n_categories), art.instance_count):
            raise InvariantError("category instance counts are stale")
        if against_batch:
            ref = batch_value(self.cfg.icvi_kind, self.X_b, self.cluster_of)
            v = ev.value
            if not (v == ref or abs(v - ref) <= 1e-6 * max(abs(ref), 1e-12)):
                raise InvariantError(f"incremental value {v} differs from batch value {ref}")

    # -- outer loop ---------------------------------------------------------------

    def run(self, centroids=None, truth=None) -> RunResult:
        cfg = self.cfg
        rng = np.random.default_rng(cfg.rng_seed)
        order = rng.permutation(self.N)
        timings = {"init": 0.0, "present": 0.0, "merge": 0.0, "split": 0.0}
        t0 = time.perf_counter()
        self.initialize(centroids, rng)
        timings["init"] = time.perf_counter() - t0

        prev_value = self.ev.value
        prev_W = self.art.W.copy()
        stop = "max_epochs"
        for self.epoch in range(1, cfg.E + 1):
            t1 = time.perf_counter()
            for t in order:
                self.present_sample(t)
            t2 = time.perf_counter()
            self.merge_phase()
            t3 = time.perf_counter()
            self.split_phase()
            t4 = time.perf_counter()
            timings["present"] += t2 - t1
            timings["merge"] += t3 - t2
            timings["split"] += t4 - t3
            if cfg.check:
                self.check_invariants()

            value = self.ev.value
            W = self.art.W
            if W.shape == prev_W.shape and np.array_equal(W, prev_W):
                stop = "weights_stable"
                break
            if value == prev_value or abs(value - prev_value) <= cfg.tol:
                stop = "icvi_converged"
                break
            prev_value = value
            prev_W = W.copy()
        timings["total"] = time.perf_counter() - t0

        labels = self.cluster_of.copy()
        return RunResult(
            labels=labels,
            icvi_trace=list(self.trace),
            epochs_run=self.epoch,
            stop_reason=stop,
            timings=timings,
            k_final=self.ev.k,
            value=float(self.ev.value),
            n_categories=self.art.n_categories,
            events=list(self.events),
            ari=None if truth is None else ari(truth, labels),
        )


def fit(prep: PreparedData, cfg: TrainerConfig, centroids=None, truth=None) -> RunResult:
    """Train on prepared data. `centroids` (standardized space, k x d, or a
    KMeansResult) skips the k-means initialization, e.g. across a parameter sweep."""
    return Trainer(prep, cfg).run(centroids=centroids, truth=truth)
