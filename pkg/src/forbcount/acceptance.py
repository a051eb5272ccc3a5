"""Acceptance checks shared by ``forbcount verify`` and the test suite.

Every check returns a :class:`CriterionResult` whose ``rows`` are the
deterministic data behind the verdict; timings live only in ``elapsed``.
Oracles here are written independently of the library's search code.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from itertools import combinations, permutations, product

import numpy as np

from . import estimator
from .counting import count_forb, entropy_binomial_bound_check, subgraph_copies, z_value
from .extremal import dist_forbhom, ex_value, max_support
from .generators import blowup_rounded, complete, erdos_renyi, support_blowup, turan
from .graphs import ForbiddenFamily, Graph, WeightedGraph, edit_distance, l1_distance
from .hom import hom_density
from .partitions import Equipartition, find_fk_partition, quotient, target_sizes
from .removal import blowup_inequality_check

BUILTINS = ("K2", "K3", "K4", "K5", "P3", "P4", "C4", "C5")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    rows: list[tuple] = field(default_factory=list)
    elapsed: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2}. {self.title}: {self.detail}"


# independent oracles -----------------------------------------------------------

def naive_copy_masks(g: Graph, f: Graph) -> list[int]:
    """Edge-index masks of all copies of ``f`` in ``g``, via every injective vertex tuple."""
    index = {e: i for i, e in enumerate(g.edges)}
    masks = set()
    for tup in permutations(range(g.n), f.n):
        mask = 0
        for u, v in f.edges:
            e = (min(tup[u], tup[v]), max(tup[u], tup[v]))
            if e not in index:
                break
            mask |= 1 << index[e]
        else:
            masks.add(mask)
    return sorted(masks)


def naive_count(g: Graph, fam: ForbiddenFamily) -> int:
    """Count edge subsets containing no copy by testing all ``2^m`` subsets."""
    copies = sorted({c for f in fam for c in naive_copy_masks(g, f)})
    subsets = np.arange(1 << g.m, dtype=np.int64)
    bad = np.zeros(len(subsets), dtype=bool)
    for c in copies:
        bad |= (subsets & c) == c
    return int((~bad).sum())


def _hom_free_table(k: int, f: Graph) -> np.ndarray:
    """For every subset of the ``k(k+1)/2`` pairs (loops included), is the support free of ``f``?"""
    pairs = [(i, j) for i in range(k) for j in range(i, k)]
    S = 1 << len(pairs)
    codes = np.arange(S, dtype=np.int64)
    A = np.zeros((S, k, k), dtype=bool)
    for b, (i, j) in enumerate(pairs):
        on = ((codes >> b) & 1).astype(bool)
        A[:, i, j] = on
        A[:, j, i] = on
    maps = np.array(list(product(range(k), repeat=f.n)), dtype=np.int64)
    found = np.zeros(S, dtype=bool)
    for start in range(0, len(maps), 256):
        block = maps[start:start + 256]
        ok = np.ones((S, len(block)), dtype=bool)
        for u, v in f.edges:
            ok &= A[:, block[:, u], block[:, v]]
        found |= ok.any(axis=1)
    return ~found


_TABLES: dict[tuple[int, Graph], np.ndarray] = {}


def brute_force_dist(r: WeightedGraph, fam: ForbiddenFamily) -> float:
    """Minimum L1 distance from ``r`` to a hom-free support, by trying every support."""
    k = r.n
    free = np.ones(1 << (k * (k + 1) // 2), dtype=bool)
    for f in fam:
        key = (k, f)
        if key not in _TABLES:
            _TABLES[key] = _hom_free_table(k, f)
        free &= _TABLES[key]
    contrib = np.array([r.w[i, j] * (1 if i == j else 2) for i in range(k) for j in range(i, k)])
    codes = np.flatnonzero(free)
    bits = ((codes[:, None] >> np.arange(len(contrib))) & 1).astype(float)
    kept = bits @ contrib
    return float((contrib.sum() - kept.max()) / k ** 2)


def _exact_t_by_maps(f: Graph, g: Graph) -> float:
    adj = g.adjacency
    maps = np.array(list(product(range(g.n), repeat=f.n)), dtype=np.int64)
    ok = np.ones(len(maps), dtype=bool)
    for u, v in f.edges:
        ok &= adj[maps[:, u], maps[:, v]]
    return ok.sum() / len(maps)


# criteria ----------------------------------------------------------------------

def _random_graph(rng, n, max_edges):
    pairs = list(combinations(range(n), 2))
    m = int(rng.integers(0, min(max_edges, len(pairs)) + 1))
    pick = rng.choice(len(pairs), size=m, replace=False)
    return Graph(n, [pairs[i] for i in sorted(pick)])


def criterion_1(seed: int = 1) -> CriterionResult:
    rows = []
    k4 = count_forb(complete(4), ForbiddenFamily.from_names("K3")).count
    rows.append(("K4", "{K3}", k4, 41))
    ok = k4 == 41
    rng = np.random.default_rng(seed)
    mismatches = 0
    for i in range(300):
        n = int(rng.integers(4, 9))
        g = _random_graph(rng, n, 18)
        size = int(rng.integers(1, 3))
        names = [BUILTINS[j] for j in sorted(rng.choice(len(BUILTINS), size=size, replace=False))]
        fam = ForbiddenFamily.from_names(names)
        got, want = count_forb(g, fam).count, naive_count(g, fam)
        mismatches += got != want
        rows.append((f"g{i}:n={n},m={g.m}", fam.label, got, want))
    ok = ok and mismatches == 0
    return CriterionResult(1, "exact count oracle", ok,
                           f"K4/{{K3}}={k4}, {mismatches} mismatches in 300 random graphs", rows)


def criterion_2() -> CriterionResult:
    fam = ForbiddenFamily.from_names("K3")
    rows, ok = [], True
    for n in (4, 6, 8, 10):
        res = count_forb(turan(2, n), fam)
        want = 2 ** (n * n // 4)
        ok &= res.count == want
        rows.append((n, res.count, want, repr(res.z)))
    return CriterionResult(2, "bipartite Turan closed form", ok,
                           "count = 2^floor(n^2/4) for n in 4,6,8,10" if ok else "count mismatch", rows)


def criterion_3() -> CriterionResult:
    fam = ForbiddenFamily.from_names("K3")
    zs, rows, above = [], [], True
    for n in range(5, 10):
        z = z_value(complete(n), fam)
        floor_bound = (n * n // 4) / n ** 2
        above &= z >= floor_bound
        zs.append(z)
        rows.append((n, repr(z), repr(floor_bound)))
    rises = [n for n, (a, b) in enumerate(zip(zs, zs[1:]), start=6) if b >= a]
    ok = above and not rises
    shown = ", ".join(f"{z:.5f}" for z in zs)
    detail = (f"z(K5..K9) = {shown}; floor bound {'holds' if above else 'violated'}; "
              + ("strictly decreasing" if not rises else f"not decreasing at n = {rises}"))
    return CriterionResult(3, "complete-graph trend", ok, detail, rows)


def criterion_4() -> CriterionResult:
    fam = ForbiddenFamily.from_names("K3")
    rows, ok = [], True
    for k in (4, 6, 8):
        d = dist_forbhom(WeightedGraph.constant(k, 0.5), fam, exact=True)
        ok &= abs(d - 0.25) <= 1e-12
        rows.append((k, "branch-and-bound", repr(d)))
    brute = brute_force_dist(WeightedGraph.constant(4, 0.5), fam)
    ok &= abs(brute - 0.25) <= 1e-12
    rows.append((4, "all-supports", repr(brute)))
    shown = ", ".join(f"k={row[0]}: {row[2]}" for row in rows[:3])
    return CriterionResult(4, "constant-1/2 distance", ok,
                           f"{shown}; all-supports brute force k=4: {brute!r}", rows)


def _random_weighted(rng, k):
    w = rng.random((k, k))
    w = np.triu(w) + np.triu(w, 1).T
    w[rng.random((k, k)) < 0.3] = 0.0
    w = np.minimum(w, w.T)
    return WeightedGraph(w)


def criterion_5(seed: int = 5) -> CriterionResult:
    fams = [ForbiddenFamily.from_names(x) for x in ("K3", "K4", "P3")]
    rng = np.random.default_rng(seed)
    rows, worst = [], 0.0
    for i in range(200):
        k = int(rng.integers(1, 6))
        r = _random_weighted(rng, k)
        fam = fams[int(rng.integers(len(fams)))]
        d = dist_forbhom(r, fam, exact=True)
        ex, _ = ex_value(r, fam, exact=True)
        dual = 2.0 * (r.edge_weight() / k ** 2 - ex)
        brute = brute_force_dist(r, fam)
        err = max(abs(d - dual), abs(d - brute))
        worst = max(worst, err)
        rows.append((i, k, fam.label, repr(d), repr(brute)))
    ok = worst <= 1e-12
    return CriterionResult(5, "ex / distance duality", ok,
                           f"max deviation {worst:.3g} over 200 instances (also vs all-supports brute force)", rows)


def _random_equipartition(rng, n, k):
    labels = np.repeat(np.arange(k), target_sizes(n, k))
    rng.shuffle(labels)
    return Equipartition.from_labels(labels.tolist())


def criterion_6(seed: int = 6) -> CriterionResult:
    rng = np.random.default_rng(seed)
    violations, worst_ratio = 0, 0.0
    for _ in range(1000):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(max(10, 2 * k + 1), 41))
        g1 = erdos_renyi(n, float(rng.random()), int(rng.integers(2 ** 32)))
        flips = rng.random(n * (n - 1) // 2) < float(rng.random()) * 0.5
        iu, ju = np.triu_indices(n, 1)
        adj = g1.adjacency.copy()
        adj[iu[flips], ju[flips]] ^= True
        adj[ju[flips], iu[flips]] ^= True
        g2 = Graph.from_adjacency(adj)
        p = _random_equipartition(rng, n, k)
        lhs = l1_distance(quotient(g1, p), quotient(g2, p))
        rhs = edit_distance(g1, g2) * (1 + 2 * k / (n - 2 * k))
        if lhs > rhs + 1e-12:
            violations += 1
        if rhs > 0:
            worst_ratio = max(worst_ratio, lhs / rhs)
    return CriterionResult(6, "quotient distance inequality", violations == 0,
                           f"{violations} violations in 1000 triples, max lhs/rhs {worst_ratio:.4f}",
                           [("violations", violations), ("max_ratio", f"{worst_ratio:.12f}")])


def criterion_7(seed: int = 7) -> CriterionResult:
    gamma = 0.05
    k3 = complete(3)
    rng = np.random.default_rng(seed)
    rows, violations, worst = [], 0, 0.0
    for i in range(50):
        n = int(rng.integers(12, 23))
        if i % 2 == 0:
            g = erdos_renyi(n, float(rng.uniform(0.2, 0.8)), int(rng.integers(2 ** 32)))
        else:
            k = int(rng.integers(2, 4))
            w = rng.random((k, k))
            w = np.triu(w) + np.triu(w, 1).T
            g = blowup_rounded(WeightedGraph(w), n // k, int(rng.integers(2 ** 32)))
        fk = find_fk_partition(g, gamma, 2, mode="exact")
        if not fk.certified or fk.cut_value > gamma:
            violations += 1
            continue
        diff = abs(hom_density(k3, g) - hom_density(k3, quotient(g, fk.partition)))
        worst = max(worst, diff)
        violations += diff > 4 * k3.m * gamma
        rows.append((i, g.n, g.m, fk.partition.k, repr(fk.cut_value), repr(diff)))
    return CriterionResult(7, "counting lemma on FK-regular partitions", violations == 0,
                           f"{violations} violations over 50 certified partitions, max |dt| {worst:.4f} <= 0.6",
                           rows)


def _random_merge(rng, f: Graph):
    """Random partition of V(f) into independent sets, built vertex by vertex."""
    labels = []
    for v in range(f.n):
        options = [c for c in range(max(labels, default=-1) + 1)
                   if not any(labels[u] == c and f.has_edge(u, v) for u in range(v))]
        options.append(max(labels, default=-1) + 1)
        labels.append(options[int(rng.integers(len(options)))])
    size = max(labels) + 1
    fhat = Graph(size, {tuple(sorted((labels[u], labels[v]))) for u, v in f.edges})
    return fhat, tuple(labels)


def criterion_8(seed: int = 8) -> CriterionResult:
    rng = np.random.default_rng(seed)
    violations, rows = 0, []
    for i in range(500):
        n = int(rng.integers(2, 6))
        f = _random_graph(rng, n, n * (n - 1) // 2)
        if f.m == 0:
            f = Graph(n, [(0, 1)])
        fhat, zeta = _random_merge(rng, f)
        h = erdos_renyi(7, 0.5, int(rng.integers(2 ** 32)))
        res = blowup_inequality_check(fhat, f, zeta, h)
        t_f = _exact_t_by_maps(f, h)
        violations += (not res.holds) or t_f != res.t_f
        rows.append((i, f.n, f.m, fhat.n, res.ell, repr(res.t_f), repr(res.t_fhat)))
    return CriterionResult(8, "blow-up density inequality", violations == 0,
                           f"{violations} violations in 500 instances", rows)


def _random_free_support(rng, k, fam):
    """Hom-free support from a random weighting (its optimal support)."""
    w = rng.random((k, k))
    w = np.triu(w) + np.triu(w, 1).T
    return max_support(WeightedGraph(w), fam, exact=True)


def criterion_9(seed: int = 9) -> CriterionResult:
    fams = [ForbiddenFamily.from_names(x) for x in ("K3", "K4", "K3,C5")]
    rng = np.random.default_rng(seed)
    violations, rows = 0, []
    for i in range(200):
        k = int(rng.integers(1, 6))
        fam = fams[int(rng.integers(len(fams)))]
        sel = _random_free_support(rng, k, fam)
        g = support_blowup(k, sel.kept, 5)
        found = any(subgraph_copies(g, f) for f in fam)
        violations += found
        rows.append((i, k, fam.label, len(sel.kept), g.m, int(found)))
    return CriterionResult(9, "blow-ups of hom-free supports", violations == 0,
                           f"{violations} blow-ups with a forbidden copy out of 200", rows)


def criterion_10() -> CriterionResult:
    checked, failures = 0, []
    for n in range(2, 31):
        for k in range(1, n):
            if 2 * k >= n:
                break
            checked += 1
            if not entropy_binomial_bound_check(n, k):
                failures.append((n, k))
    return CriterionResult(10, "entropy bound on binomial sums", not failures,
                           f"{checked} pairs (n <= 30, k < n/2), {len(failures)} failures",
                           [("checked", checked), ("failures", len(failures))])


def criterion_11() -> CriterionResult:
    graphs = [(f"K{n}", complete(n)) for n in range(5, 10)]
    graphs += [("T2(6)", turan(2, 6)), ("T2(8)", turan(2, 8))]
    graphs += [(f"G(8,1/2)#{s}", erdos_renyi(8, 0.5, s)) for s in range(1, 6)]
    rows, violations = [], 0
    for name, g in graphs:
        for K in (2, 3):
            for fam_name in ("K3", "P3"):
                fam = ForbiddenFamily.from_names(fam_name)
                gap = estimator.theorem41_gap(g, fam, K)
                ok = gap.bound_holds and gap.z_exact >= gap.max_ex - K / g.n
                violations += not ok
                rows.append((name, K, fam.label, repr(gap.z_exact), repr(gap.max_ex), repr(gap.gap)))
    return CriterionResult(11, "finite-n lower bound z >= max ex - K/n", violations == 0,
                           f"{violations} violations over {len(rows)} cases", rows)


def criterion_12() -> CriterionResult:
    fam = ForbiddenFamily.from_names("K3")
    cfg1 = estimator.EstimatorConfig(q=10, trials=99, seed=1, mode="exact-count")
    r1 = estimator.estimate_z(turan(2, 40), fam, cfg1)
    cfg2 = estimator.EstimatorConfig(q=9, trials=25, seed=1, mode="exact-count")
    r2 = estimator.estimate_z(complete(60), fam, cfg2)
    z9 = z_value(complete(9), fam)
    ok1 = abs(r1.median - 0.25) <= 0.05
    ok2 = abs(r2.median - z9) <= 0.06
    rows = [("T2(40)", 10, 99, repr(r1.median), repr(r1.iqr), "0.25"),
            ("K60", 9, 25, repr(r2.median), repr(r2.iqr), repr(z9))]
    return CriterionResult(12, "sampling estimator end to end", ok1 and ok2,
                           f"T2(40) median {r1.median:.4f} (target 0.25 +- 0.05); "
                           f"K60 median {r2.median:.4f} (z(K9)={z9:.4f} +- 0.06)", rows)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number]()
    res.elapsed = time.perf_counter() - start
    return res


def csv_body(results) -> str:
    """CSV of all rows; identical inputs give identical text (no timings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["criterion", "passed", "fields"])
    for res in results:
        writer.writerow([res.number, int(res.passed), res.detail])
        for row in res.rows:
            writer.writerow([res.number, "", *row])
    return buf.getvalue()


def run_suite(numbers=None) -> list[CriterionResult]:
    """Run criteria from a cold count cache."""
    estimator.clear_cache()
    return [run_criterion(i) for i in (numbers or sorted(CRITERIA))]


def determinism_check(first: list[CriterionResult], numbers=None) -> CriterionResult:
    """Re-run the criteria behind ``first`` and compare CSV bodies byte for byte."""
    start = time.perf_counter()
    a = csv_body(first)
    b = csv_body(run_suite(numbers))
    same = a == b
    res = CriterionResult(13, "determinism of CSV bodies", same,
                          f"two runs of criteria {first[0].number}-{first[-1].number} "
                          f"{'identical' if same else 'differ'} ({len(a)} bytes)",
                          [("bytes", len(a)), ("identical", int(same))])
    res.elapsed = time.perf_counter() - start
    return res


def run_all() -> list[CriterionResult]:
    results = run_suite()
    return results + [determinism_check(results)]


def table(results) -> str:
    lines = [r.line() + f" ({r.elapsed:.1f}s)" for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
