"""Exact counts of F-free spanning subgraphs and the parameter z_F.

The count is a depth-first search over the host's edges (include / exclude).
Every minimal forbidden copy in the host is precomputed as a bitmask over
edge indices.  An include that completes a copy is cut immediately, and an
edge lying in no still-possible copy doubles the weight instead of branching.
The top ``split_depth`` levels run in Python with arbitrary-precision weights;
each residual subproblem (copies not yet broken, shifted to the remaining
edges) is handed to a compiled kernel with 64-bit counts, which is exact
because a subtree over at most 62 edges has at most 2^62 leaves.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .graphs import ForbiddenFamily, Graph
from .hom import components, search_plan

DEFAULT_NODE_BUDGET = 10 ** 9
_KERNEL_EDGES = 62


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, nodes: int):
        super().__init__(message)
        self.nodes = nodes


@dataclass(frozen=True)
class CountResult:
    count: int
    n: int
    m: int
    nodes: int
    elapsed: float

    @property
    def z(self) -> float:
        return log2_int(self.count) / self.n ** 2 if self.n else 0.0


def log2_int(x: int) -> float:
    """``log2`` of a positive integer of any size, correctly rounded for powers of two."""
    if x <= 0:
        raise ValueError("log2 of a non-positive count")
    shift = max(x.bit_length() - 64, 0)
    return math.log2(x >> shift) + shift


# copy enumeration ---------------------------------------------------------

def subgraph_copies(g: Graph, f: Graph) -> set[frozenset[tuple[int, int]]]:
    """Edge sets of all subgraphs of ``g`` isomorphic to ``f``."""
    if f.n > g.n:
        return set()
    comps = [c for c in components(f) if len(c) > 1]
    n_isolated = f.n - sum(len(c) for c in comps)
    plans = [search_plan(f, c) for c in comps]
    order = [v for o, _ in plans for v in o]
    back: list[list[int]] = []
    offset = 0
    for o, b in plans:
        back.extend([[offset + q for q in bq] for bq in b])
        offset += len(o)
    pattern_edges = [(order.index(u), order.index(v)) for u, v in f.edges]
    a = len(order)
    masks = g.masks
    full = (1 << g.n) - 1
    assign = [0] * a
    copies: set[frozenset[tuple[int, int]]] = set()

    def rec(p: int, used: int):
        if p == a:
            if g.n - a < n_isolated:
                return
            copies.add(frozenset((min(assign[x], assign[y]), max(assign[x], assign[y])) for x, y in pattern_edges))
            return
        cand = full & ~used
        for q in back[p]:
            cand &= masks[assign[q]]
        while cand:
            low = cand & -cand
            assign[p] = low.bit_length() - 1
            rec(p + 1, used | low)
            cand ^= low

    rec(0, 0)
    return copies


def minimal_copies(g: Graph, fam: ForbiddenFamily) -> list[tuple[int, ...]]:
    """Forbidden copies as sorted edge-index tuples, with supersets removed.

    A copy containing another copy can never be the first one completed, so
    dropping it leaves the set of free subgraphs unchanged.
    """
    index = {e: i for i, e in enumerate(g.edges)}
    masks = set()
    for f in fam:
        for c in subgraph_copies(g, f):
            m = 0
            for e in c:
                m |= 1 << index[e]
            masks.add(m)
    ordered = sorted(masks, key=lambda m: (m.bit_count(), m))
    kept: list[int] = []
    for m in ordered:
        if not any(k & m == k for k in kept):
            kept.append(m)
    return [tuple(i for i in range(g.m) if (m >> i) & 1) for m in kept]


# search state -------------------------------------------------------------

class _Problem:
    """Core edges in search order, with every minimal copy as a bitmask over them."""

    def __init__(self, g: Graph, fam: ForbiddenFamily):
        copies = minimal_copies(g, fam)
        through = [0] * g.m
        for c in copies:
            for e in c:
                through[e] += 1
        core = [e for e in range(g.m) if through[e] > 0]
        self.n_free = g.m - len(core)
        core.sort(key=lambda e: (-through[e], g.edges[e]))
        pos = {e: i for i, e in enumerate(core)}
        self.m = len(core)
        self.copies = []
        for c in copies:
            mask = 0
            for e in c:
                mask |= 1 << pos[e]
            self.copies.append(mask)
        self.through: list[list[int]] = [[] for _ in range(self.m)]
        for mask in self.copies:
            rest = mask
            while rest:
                low = rest & -rest
                self.through[low.bit_length() - 1].append(mask)
                rest ^= low

    def residual(self, d: int, inc: int, exc: int):
        """Kernel arrays for the subproblem on edges ``d..m-1``.

        Copies already broken by an excluded edge are dropped; the rest are
        shifted down to the remaining edges (their decided edges are all
        included, so only the undecided part matters).
        """
        width = self.m - d
        res = sorted({(c >> d) for c in self.copies if not c & exc})
        through: list[list[int]] = [[] for _ in range(width)]
        for i, c in enumerate(res):
            rest = c
            while rest:
                low = rest & -rest
                through[low.bit_length() - 1].append(i)
                rest ^= low
        ptr = np.zeros(width + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(t) for t in through])
        idx = np.array([i for t in through for i in t], dtype=np.int64)
        masks = np.array(res, dtype=np.uint64)
        return width, ptr, idx, masks


@njit(cache=True)
def _count_kernel(m, ec_ptr, ec_idx, cmask, budget):
    """Count free edge subsets of ``0..m-1``; returns (count, nodes, exceeded).

    Iterative DFS with included/excluded bitmasks per depth.  ``stage[d]``:
    0 = fresh, 1 = include child done, 2 = exclude child done or forced.
    An edge whose copies are all broken is free: the weight doubles and the
    search descends without branching.
    """
    inc = np.zeros(m + 1, dtype=np.uint64)
    exc = np.zeros(m + 1, dtype=np.uint64)
    weight = np.zeros(m + 1, dtype=np.int64)
    stage = np.zeros(m + 1, dtype=np.int8)
    one = np.uint64(1)
    total = 0
    nodes = 0
    d = 0
    weight[0] = 1
    while d >= 0:
        s = stage[d]
        if s == 0:
            nodes += 1
            if nodes > budget:
                return total, nodes, True
            if d == m:
                total += weight[d]
                d -= 1
                continue
            bit = one << np.uint64(d)
            with_d = inc[d] | bit
            free = True
            conflict = False
            for t in range(ec_ptr[d], ec_ptr[d + 1]):
                c = cmask[ec_idx[t]]
                if c & exc[d] == 0:
                    free = False
                    if c & with_d == c:
                        conflict = True
                        break
            weight[d + 1] = weight[d] * 2 if free else weight[d]
            exc[d + 1] = exc[d]
            if free:
                stage[d] = 2
                inc[d + 1] = inc[d]
            elif conflict:
                stage[d] = 2
                inc[d + 1] = inc[d]
                exc[d + 1] = exc[d] | bit
            else:
                stage[d] = 1
                inc[d + 1] = with_d
            d += 1
            stage[d] = 0
        elif s == 1:
            stage[d] = 2
            inc[d + 1] = inc[d]
            exc[d + 1] = exc[d] | (one << np.uint64(d))
            weight[d + 1] = weight[d]
            d += 1
            stage[d] = 0
        else:
            d -= 1
    return total, nodes, False


@njit(cache=True)
def _probe_kernel(m, ec_ptr, ec_idx, cmask, probes, seed):
    """Knuth's random-probe estimate of the DFS node count.

    Each probe walks one root-to-leaf path, choosing uniformly among the
    feasible children, and adds up the running product of branching factors.
    """
    np.random.seed(seed)
    one = np.uint64(1)
    acc = 0.0
    for _ in range(probes):
        inc = np.uint64(0)
        exc = np.uint64(0)
        scale = 1.0
        est = 1.0
        for d in range(m):
            bit = one << np.uint64(d)
            with_d = inc | bit
            free = True
            conflict = False
            for t in range(ec_ptr[d], ec_ptr[d + 1]):
                c = cmask[ec_idx[t]]
                if c & exc == 0:
                    free = False
                    if c & with_d == c:
                        conflict = True
                        break
            if free:
                pass
            elif conflict:
                exc |= bit
            else:
                scale *= 2.0
                if np.random.random() < 0.5:
                    inc = with_d
                else:
                    exc |= bit
            est += scale
        acc += est
    return acc / probes


def predict_nodes(g: Graph, fam: ForbiddenFamily, probes: int = 2000, seed: int = 0) -> float:
    """Estimated number of search nodes ``count_forb`` will visit."""
    prob = _Problem(g, fam)
    return _predict(prob, probes, seed)


def _predict(prob: _Problem, probes: int, seed: int) -> float:
    if prob.m == 0:
        return 1.0
    if prob.m > _KERNEL_EDGES:
        # only the residual below the Python levels fits the kernel; probe that
        # part from the all-excluded-free root of the suffix
        width, ptr, idx, masks = prob.residual(prob.m - _KERNEL_EDGES, 0, 0)
        sub = _probe_kernel(width, ptr, idx, masks, probes, seed)
        return float(sub) * 2.0 ** (prob.m - _KERNEL_EDGES)
    width, ptr, idx, masks = prob.residual(0, 0, 0)
    return float(_probe_kernel(width, ptr, idx, masks, probes, seed))


def count_forb(
    g: Graph,
    fam: ForbiddenFamily,
    node_budget: int = DEFAULT_NODE_BUDGET,
    split_depth: int = 2,
    predict: bool = True,
) -> CountResult:
    """Number of edge subsets of ``g`` containing no copy of any member of ``fam``.

    Raises :class:`BudgetExceeded` up front when the probe estimate of the
    search size exceeds ``node_budget``, and during the search once the
    budget is actually spent.
    """
    t0 = time.perf_counter()
    prob = _Problem(g, fam)
    free_factor = 1 << prob.n_free
    if prob.m == 0:
        return CountResult(free_factor, g.n, g.m, 1, time.perf_counter() - t0)
    if predict:
        est = _predict(prob, 2000, 0)
        if est > node_budget:
            raise BudgetExceeded(f"predicted {est:.3g} search nodes exceeds the budget of {node_budget}", 0)
    split = min(max(split_depth, prob.m - _KERNEL_EDGES), prob.m)
    nodes = 0

    def spend(used: int):
        nonlocal nodes
        nodes += used
        if nodes > node_budget:
            raise BudgetExceeded(f"node budget {node_budget} exhausted after {nodes} nodes", nodes)

    def rec(d: int, inc: int, exc: int) -> int:
        if d >= split:
            width, ptr, idx, masks = prob.residual(d, inc, exc)
            cnt, used, over = _count_kernel(width, ptr, idx, masks, node_budget - nodes)
            spend(int(used))
            if over:
                raise BudgetExceeded(f"node budget {node_budget} exhausted after {nodes} nodes", nodes)
            return int(cnt)
        spend(1)
        bit = 1 << d
        alive = [c for c in prob.through[d] if not c & exc]
        if not alive:
            return 2 * rec(d + 1, inc, exc)
        total = 0
        if not any(c & (inc | bit) == c for c in alive):
            total += rec(d + 1, inc | bit, exc)
        total += rec(d + 1, inc, exc | bit)
        return total

    count = free_factor * rec(0, 0, 0)
    return CountResult(count, g.n, g.m, nodes, time.perf_counter() - t0)


def z_value(g: Graph, fam: ForbiddenFamily, **kwargs) -> float:
    """``z_F(g) = log2 |Forb(g, F)| / n^2``."""
    if g.n == 0:
        return 0.0
    return count_forb(g, fam, **kwargs).z


# entropy utilities --------------------------------------------------------

def binary_entropy(x: float) -> float:
    if not 0.0 < x < 1.0:
        raise ValueError(f"binary entropy is defined on (0, 1), got {x}")
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def entropy_binomial_bound_check(n: int, k: int) -> bool:
    """Does ``sum_{i<=k} C(n, i) <= 2^{H(k/n) n}`` hold?

    The left side is an exact integer.  With ``x = k/n`` the right side equals
    ``n^n / (k^k (n-k)^(n-k))``, so the test is the exact integer comparison
    ``lhs * k^k * (n-k)^(n-k) <= n^n``.
    """
    if k < 1 or Fraction(k, n) >= Fraction(1, 2):
        raise ValueError(f"need k >= 1 and k/n < 1/2, got n={n}, k={k}")
    lhs = sum(math.comb(n, i) for i in range(k + 1))
    return lhs * k ** k * (n - k) ** (n - k) <= n ** n
