"""Sampling estimator for z_F and the counting / cluster-graph comparison at finite n."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .counting import count_forb, log2_int
from .extremal import ex_value
from .graphs import ForbiddenFamily, Graph
from .partitions import ENUMERATION_CAP, Equipartition, enumerate_equipartitions, quotient, target_sizes

MODES = ("exact-count", "cluster-max")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EstimatorConfig:
    q: int
    trials: int = 25
    seed: int = 0
    K: int = 3
    mode: str = "exact-count"
    eps: float = 0.05

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("sample size q must be at least 2")
        if self.trials < 1 or self.trials % 2 == 0:
            raise ValueError("trials must be a positive odd number")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class EstimateReport:
    per_trial: tuple[float, ...]
    median: float
    iqr: float
    config: EstimatorConfig
    elapsed: float = field(compare=False)
    trial_ms: tuple[float, ...] = field(default=(), compare=False)


def sample_vertices(n: int, q: int, seed: int) -> list[int]:
    """Uniform ``q``-subset from a seeded Fisher-Yates prefix, returned sorted."""
    if not 0 <= q <= n:
        raise ValueError(f"sample size {q} out of range for {n} vertices")
    rng = np.random.default_rng(seed & _MASK64)
    perm = list(range(n))
    for i in range(q):
        j = int(rng.integers(i, n))
        perm[i], perm[j] = perm[j], perm[i]
    return sorted(perm[:q])


def sample_induced(g: Graph, q: int, seed: int) -> Graph:
    return g.induced(sample_vertices(g.n, q, seed))


_count_cache: dict[tuple[Graph, ForbiddenFamily], int] = {}


def cached_count(g: Graph, fam: ForbiddenFamily) -> int:
    """``count_forb`` memoised on (graph, family); repeated samples are often identical."""
    key = (g, fam)
    if key not in _count_cache:
        _count_cache[key] = count_forb(g, fam).count
    return _count_cache[key]


def clear_cache() -> None:
    _count_cache.clear()


def _z_exact(g: Graph, fam: ForbiddenFamily) -> float:
    return log2_int(cached_count(g, fam)) / g.n ** 2


def max_ex_over_partitions(g: Graph, K: int, fam: ForbiddenFamily, exact: bool | None = None,
                           restarts: int = 8, seed: int = 0) -> tuple[float, Equipartition, bool]:
    """Maximum of ``ex(G/P, F)`` over equipartitions with at most ``K`` classes.

    Exhaustive up to ``ENUMERATION_CAP`` vertices; above it a seeded
    hill-climb over vertex swaps between classes, flagged inexact.  Returns
    the value, the first maximising partition in enumeration order, and
    whether the search was exhaustive.
    """
    if exact is None:
        exact = g.n <= ENUMERATION_CAP
    best_val, best_p = -1.0, None
    if exact:
        for k in range(1, min(K, g.n) + 1):
            for p in enumerate_equipartitions(g.n, k):
                val = ex_value(quotient(g, p), fam)[0]
                if val > best_val + 1e-15:
                    best_val, best_p = val, p
        return best_val, best_p, True
    rng = np.random.default_rng(seed)
    for k in range(1, min(K, g.n) + 1):
        for _ in range(restarts if k > 1 else 1):
            labels = np.repeat(np.arange(k), target_sizes(g.n, k))
            rng.shuffle(labels)
            val, p = _hill_climb(g, fam, labels, k)
            if val > best_val + 1e-15:
                best_val, best_p = val, p
    return best_val, best_p, False


def _hill_climb(g, fam, labels, k):
    p = Equipartition.from_labels(labels.tolist()) if k > 1 else Equipartition.contiguous(g.n, 1)
    cur = ex_value(quotient(g, p), fam)[0]
    improved = True
    while improved and k > 1:
        improved = False
        for u in range(g.n):
            for v in range(u + 1, g.n):
                if labels[u] == labels[v]:
                    continue
                labels[u], labels[v] = labels[v], labels[u]
                trial = Equipartition.from_labels(labels.tolist())
                val = ex_value(quotient(g, trial), fam)[0]
                if val > cur + 1e-15:
                    cur, p, improved = val, trial, True
                else:
                    labels[u], labels[v] = labels[v], labels[u]
    return cur, p


def trial_seed(seed: int, t: int) -> int:
    return (seed ^ t) & _MASK64


def estimate_z(g: Graph, fam: ForbiddenFamily, cfg: EstimatorConfig) -> EstimateReport:
    """Median over seeded trials of ``z`` on a random induced ``q``-vertex sample.

    Trial ``t`` samples with seed ``cfg.seed XOR t``.  Exact-count mode counts
    the sample's F-free spanning subgraphs; cluster-max mode takes the
    maximum ``ex`` over its equipartitions into at most ``K`` classes.
    """
    if cfg.q > g.n:
        raise ValueError(f"sample size {cfg.q} exceeds {g.n} vertices")
    start = time.perf_counter()
    values, times = [], []
    for t in range(cfg.trials):
        t0 = time.perf_counter()
        h = sample_induced(g, cfg.q, trial_seed(cfg.seed, t))
        if cfg.mode == "exact-count":
            values.append(_z_exact(h, fam))
        else:
            values.append(max_ex_over_partitions(h, cfg.K, fam)[0])
        times.append(1000.0 * (time.perf_counter() - t0))
    arr = np.array(values)
    median = float(np.sort(arr)[len(arr) // 2])
    q1, q3 = np.percentile(arr, [25, 75])
    return EstimateReport(tuple(values), median, float(q3 - q1), cfg,
                          time.perf_counter() - start, tuple(times))


def estimate_distance(g: Graph, fam: ForbiddenFamily, cfg: EstimatorConfig) -> float:
    """Experimental edit-distance estimate ``2 e(g)/n^2 - 2 z``."""
    rep = estimate_z(g, fam, cfg)
    return 2.0 * g.m / g.n ** 2 - 2.0 * rep.median


@dataclass(frozen=True)
class Theorem41Gap:
    z_exact: float
    max_ex: float
    gap: float
    bound_holds: bool
    partition: Equipartition


def theorem41_gap(g: Graph, fam: ForbiddenFamily, K: int) -> Theorem41Gap:
    """Exact ``z`` against the exact partition maximum of ``ex``.

    Also checks ``z >= ex(G/P) - k/n`` for every enumerated partition ``P``
    with ``k`` classes, the finite-n lower bound from the counting argument.
    """
    if g.n > 10 or K > 3:
        raise ValueError("both sides are exact only for n <= 10 and K <= 3")
    z = _z_exact(g, fam)
    holds, best_val, best_p = True, -1.0, None
    for k in range(1, min(K, g.n) + 1):
        for p in enumerate_equipartitions(g.n, k):
            val = ex_value(quotient(g, p), fam)[0]
            if z < val - k / g.n:
                holds = False
            if val > best_val + 1e-15:
                best_val, best_p = val, p
    return Theorem41Gap(z, best_val, z - best_val, holds, best_p)


# sample / ground cluster-graph comparison ------------------------------------

def _cluster_sets(g: Graph, K: int) -> dict[int, np.ndarray]:
    """Distinct cluster-graph matrices per class count, shape ``(count, k, k)``."""
    out = {}
    for k in range(1, min(K, g.n) + 1):
        mats = np.array([quotient(g, p).w for p in enumerate_equipartitions(g.n, k)])
        out[k] = np.unique(mats.reshape(len(mats), -1), axis=0).reshape(-1, k, k)
    return out


def _directed_deviation(A: np.ndarray, B: np.ndarray, chunk: int = 256) -> float:
    """``max_a min_{b, pi} l1(a, pi(b))`` over label bijections ``pi``."""
    k = A.shape[1]
    perms = [list(p) for p in permutations(range(k))]
    Bp = np.concatenate([B[:, p][:, :, p] for p in perms]).reshape(-1, k * k)
    Af = A.reshape(len(A), -1)
    worst = 0.0
    for i in range(0, len(Af), chunk):
        d = np.abs(Af[i:i + chunk, None, :] - Bp[None, :, :]).sum(axis=2) / k ** 2
        worst = max(worst, float(d.min(axis=1).max()))
    return worst


@dataclass(frozen=True)
class SimilarityReport:
    q: int
    K: int
    seed: int
    forward: tuple[float, ...]
    backward: tuple[float, ...]

    def summary(self) -> dict[str, float]:
        f, b = np.array(self.forward), np.array(self.backward)
        return {"forward_median": float(np.median(f)), "forward_max": float(f.max()),
                "backward_median": float(np.median(b)), "backward_max": float(b.max())}


def sample_cluster_similarity_experiment(g: Graph, q: int, K: int, trials: int, seed: int) -> SimilarityReport:
    """Compare the cluster graphs of ``g`` with those of random ``q``-samples.

    For every trial and every class count ``k <= K`` this records how far the
    worst ground cluster graph is from the nearest sample cluster graph
    (forward) and vice versa (backward).  Cluster graphs on different label
    sets are compared by the minimum L1 distance over label bijections.
    """
    if g.n > 12 or q > 10:
        raise ValueError("needs n <= 12 and q <= 10 so both partition sets are enumerable")
    ground = _cluster_sets(g, K)
    fwd, bwd = [], []
    for t in range(trials):
        sample = _cluster_sets(sample_induced(g, q, trial_seed(seed, t)), K)
        f = b = 0.0
        for k in sample:
            f = max(f, _directed_deviation(ground[k], sample[k]))
            b = max(b, _directed_deviation(sample[k], ground[k]))
        fwd.append(f)
        bwd.append(b)
    return SimilarityReport(q, K, seed, tuple(fwd), tuple(bwd))
