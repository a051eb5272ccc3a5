"""Extremal values of weighted graphs and recovering partitions.

``ex(R, F)`` maximises ``e(S) / k^2`` over ``S <= R`` with ``t(F, S) = 0`` for
all ``F``.  Homomorphism-freeness depends only on the support of ``S``, and
lowering a kept weight never helps, so an optimum keeps ``R`` in full on a
hom-free support and zero elsewhere.  The problem is therefore a maximum
weight support selection, solved here by branch and bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counting import subgraph_copies
from .graphs import ForbiddenFamily, Graph, WeightedGraph
from .partitions import Equipartition, find_fk_partition, FKRegularityError, quotient, target_sizes

EX_EXACT_CAP = 12
COLOR_EXACT_CAP = 12


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SupportSelection:
    """Hom-free positive support kept from ``R``; ``value`` is the ordered-pair weight sum."""

    k: int
    kept: tuple[tuple[int, int], ...]
    value: float
    exact: bool = True

    def masks(self) -> tuple[int, ...]:
        return _masks_from_pairs(self.k, self.kept)

    def as_weighted(self, r: WeightedGraph) -> WeightedGraph:
        keep = np.zeros((self.k, self.k), dtype=bool)
        for i, j in self.kept:
            keep[i, j] = keep[j, i] = True
        return WeightedGraph(np.where(keep, r.w, 0.0))


def _masks_from_pairs(k, pairs):
    masks = [0] * k
    for i, j in pairs:
        masks[i] |= 1 << j
        masks[j] |= 1 << i
    return tuple(masks)


class _PinnedPlans:
    """Search orders for every family member, one per oriented pattern edge.

    Each plan places the pinned edge's endpoints first, so a check for maps
    that use a specific new support pair starts from a fixed image.
    """

    def __init__(self, fam: ForbiddenFamily):
        self.plans = []
        for f in fam:
            for u, v in f.edges:
                for x, y in ((u, v), (v, u)):
                    self.plans.append(_pinned_plan(f, x, y))

    def creates_hom(self, masks, a: int, b: int) -> bool:
        """Would adding pair ``(a, b)`` to a hom-free support admit some member?

        Any new homomorphism must use the new pair, so only maps sending a
        pattern edge onto it are searched.
        """
        trial = list(masks)
        trial[a] |= 1 << b
        trial[b] |= 1 << a
        full = (1 << len(trial)) - 1
        for back, others in self.plans:
            if _extend(back, others, trial, full, [a, b]):
                return True
        return False


def _pinned_plan(f: Graph, x: int, y: int):
    order = [x, y]
    placed = (1 << x) | (1 << y)
    rest = set(range(f.n)) - {x, y}
    while rest:
        nxt = max(rest, key=lambda v: ((f.masks[v] & placed).bit_count(), f.degree(v), -v))
        order.append(nxt)
        placed |= 1 << nxt
        rest.remove(nxt)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[u] for u in order[:i] if f.has_edge(u, v)] for i, v in enumerate(order)]
    return back, len(order)


def _extend(back, size, masks, full, assign) -> bool:
    p = len(assign)
    if p == size:
        return True
    cand = full
    for q in back[p]:
        cand &= masks[assign[q]]
    while cand:
        low = cand & -cand
        assign.append(low.bit_length() - 1)
        if _extend(back, size, masks, full, assign):
            return True
        assign.pop()
        cand ^= low
    return False


def creates_hom(fam: ForbiddenFamily, masks, a: int, b: int) -> bool:
    return _PinnedPlans(fam).creates_hom(masks, a, b)


def _pair_list(r: WeightedGraph):
    """Positive pairs ``i <= j`` with their ordered-pair contribution, heaviest first."""
    pairs = []
    for i in range(r.n):
        for j in range(i, r.n):
            w = float(r.w[i, j])
            if w > 0:
                pairs.append(((i, j), w if i == j else 2.0 * w))
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs


def _branch_and_bound(r: WeightedGraph, fam: ForbiddenFamily) -> SupportSelection:
    k = r.n
    plans = _PinnedPlans(fam)
    pairs = [(p, c) for p, c in _pair_list(r) if not plans.creates_hom((0,) * k, *p)]
    contrib = [c for _, c in pairs]
    suffix = [0.0] * (len(pairs) + 1)
    for i in range(len(pairs) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + contrib[i]
    tol = 1e-12 * max(suffix[0], 1.0)
    start = _local_search(r, plans)
    best_val = start.value
    best = list(start.kept)
    kept: list[tuple[int, int]] = []

    def rec(idx: int, masks: tuple[int, ...], val: float):
        nonlocal best_val, best
        if val > best_val + tol:
            best_val, best = val, list(kept)
        if idx == len(pairs) or val + suffix[idx] <= best_val + tol:
            return
        (a, b), c = pairs[idx]
        if not plans.creates_hom(masks, a, b):
            new = list(masks)
            new[a] |= 1 << b
            new[b] |= 1 << a
            kept.append((a, b))
            rec(idx + 1, tuple(new), val + c)
            kept.pop()
        rec(idx + 1, masks, val)

    rec(0, (0,) * k, 0.0)
    value = sum(2.0 * float(r.w[i, j]) if i != j else float(r.w[i, i]) for i, j in best)
    return SupportSelection(k, tuple(sorted(best)), value, True)


def _greedy(k, pairs, plans):
    masks = [0] * k
    chosen = []
    for (a, b), c in pairs:
        if not plans.creates_hom(masks, a, b):
            masks[a] |= 1 << b
            masks[b] |= 1 << a
            chosen.append(((a, b), c))
    return chosen


def _local_search(r: WeightedGraph, plans: _PinnedPlans, rounds: int = 50) -> SupportSelection:
    """Greedy selection improved by drop-one / greedy-refill moves (inexact)."""
    k = r.n
    pairs = [(p, c) for p, c in _pair_list(r) if not plans.creates_hom((0,) * k, *p)]
    current = _greedy(k, pairs, plans)
    cur_val = sum(c for _, c in current)
    for _ in range(rounds):
        improved = False
        for drop in range(len(current)):
            base = current[:drop] + current[drop + 1:]
            masks = list(_masks_from_pairs(k, [p for p, _ in base]))
            chosen = set(p for p, _ in base)
            cand = list(base)
            for (a, b), c in pairs:
                if (a, b) in chosen or (a, b) == current[drop][0]:
                    continue
                if not plans.creates_hom(masks, a, b):
                    masks[a] |= 1 << b
                    masks[b] |= 1 << a
                    cand.append(((a, b), c))
            val = sum(c for _, c in cand)
            if val > cur_val + 1e-12:
                current, cur_val, improved = cand, val, True
                break
        if not improved:
            break
    kept = tuple(sorted(p for p, _ in current))
    value = sum(2.0 * float(r.w[i, j]) if i != j else float(r.w[i, i]) for i, j in kept)
    return SupportSelection(k, kept, value, False)


def max_support(r: WeightedGraph, fam: ForbiddenFamily, exact: bool | None = None,
                cap: int = EX_EXACT_CAP) -> SupportSelection:
    """Maximum-weight hom-free support of ``r``.

    ``exact=None`` picks branch and bound up to ``cap`` vertices and the
    labelled-inexact local search above it; ``exact=True`` above the cap raises.
    """
    if exact is None:
        exact = r.n <= cap
    if exact:
        if r.n > cap:
            raise CapExceeded(f"exact ex is capped at k={cap}, got k={r.n}")
        return _branch_and_bound(r, fam)
    return _local_search(r, _PinnedPlans(fam))


def ex_value(r: WeightedGraph, fam: ForbiddenFamily, exact: bool | None = None,
             cap: int = EX_EXACT_CAP) -> tuple[float, SupportSelection]:
    """``ex(R, F) = max e(S) / k^2`` over hom-free ``S <= R``, with the optimal support."""
    if r.n == 0:
        return 0.0, SupportSelection(0, (), 0.0)
    sel = max_support(r, fam, exact, cap)
    return 0.5 * sel.value / r.n ** 2, sel


def dist_forbhom(r: WeightedGraph, fam: ForbiddenFamily, exact: bool | None = None,
                 cap: int = EX_EXACT_CAP) -> float:
    """L1 distance from ``r`` to the hom-free class: ``2 (e(r)/k^2 - ex(r))``.

    An optimum zeroes the removed pairs and leaves kept pairs untouched.  In
    inexact mode the result is an upper bound.
    """
    if r.n == 0:
        return 0.0
    ex, _ = ex_value(r, fam, exact, cap)
    return max(2.0 * (r.edge_weight() / r.n ** 2 - ex), 0.0)


def contains_forbidden(g: Graph, fam: ForbiddenFamily) -> bool:
    return any(subgraph_copies(g, f) for f in fam)


def is_recovering(g: Graph, p: Equipartition, fam: ForbiddenFamily, eps: float) -> bool:
    """``dist(G/P, Forb*_hom(F)) <= eps``.

    Above the exact cap the local-search distance is an upper bound, so a True
    verdict is still sound; a False verdict there may be pessimistic.
    """
    return dist_forbhom(quotient(g, p), fam) <= eps


@dataclass(frozen=True)
class Recovery:
    partition: Equipartition
    eps: float
    achieved_dist: float
    gamma_used: float
    retries: int
    exact: bool


class RecoveryFailed(RuntimeError):
    def __init__(self, message: str, best_dist: float, best: Equipartition | None):
        super().__init__(message)
        self.best_dist = best_dist
        self.best = best


def find_recovering_partition(
    g: Graph,
    fam: ForbiddenFamily,
    eps: float,
    gamma: float,
    k0: int,
    max_retries: int = 4,
    check_free: bool = True,
) -> Recovery:
    """Search for an eps-recovering equipartition through weak-regular ones.

    Each attempt builds a gamma-FK-regular partition and checks the recovering
    distance directly; on failure gamma is halved and k0 doubled.
    """
    if check_free and contains_forbidden(g, fam):
        raise ValueError("the input graph contains a forbidden copy")
    best_dist, best = math.inf, None
    for attempt in range(max_retries + 1):
        k_start = min(k0 * 2 ** attempt, g.n)
        gam = gamma / 2 ** attempt
        try:
            p = find_fk_partition(g, gam, k_start).partition
        except FKRegularityError as err:
            p = err.partition
        cg = quotient(g, p)
        exact = cg.n <= EX_EXACT_CAP
        d = dist_forbhom(cg, fam)
        if d < best_dist:
            best_dist, best = d, p
        if d <= eps:
            return Recovery(p, eps, d, gam, attempt, exact)
    raise RecoveryFailed(f"no {eps}-recovering partition after {max_retries} retries "
                         f"(best distance {best_dist:.6g})", best_dist, best)


# r-colourability -------------------------------------------------------------

def _mono_mass(w: np.ndarray, coloring) -> float:
    c = np.asarray(coloring)
    return float(w[c[:, None] == c[None, :]].sum())


def colorability_distance(r: WeightedGraph, colors: int, exact: bool | None = None,
                          cap: int = COLOR_EXACT_CAP, initial=None) -> float:
    """Minimum monochromatic ordered-pair mass over colourings ``[k] -> [colors]``, over ``k^2``.

    Loops are always monochromatic.  The exact search assigns colours in
    first-use order (so colour permutations are visited once) and prunes on
    the running mass; above ``cap`` a single-vertex recolouring descent is
    used, which gives an upper bound.
    """
    if colors < 1:
        raise ValueError("need at least one colour")
    k = r.n
    if k == 0:
        return 0.0
    w = r.w
    if colors >= k:
        return float(np.trace(w)) / k ** 2
    if exact is None:
        exact = k <= cap
    if exact and k > cap:
        raise CapExceeded(f"exact colourability distance is capped at k={cap}, got k={k}")
    start = list(initial) if initial is not None else _greedy_coloring(w, colors)
    best_mass = _mono_mass(w, start)
    if not exact:
        return _recolor_descent(w, colors, start) / k ** 2
    best_mass = min(best_mass, _recolor_descent(w, colors, start))
    tol = 1e-12 * max(float(w.sum()), 1.0)
    assign = [0] * k

    def rec(v: int, used: int, mass: float):
        nonlocal best_mass
        if mass >= best_mass - tol:
            return
        if v == k:
            best_mass = mass
            return
        for c in range(min(used + 1, colors)):
            add = w[v, v]
            for u in range(v):
                if assign[u] == c:
                    add += 2.0 * w[u, v]
            assign[v] = c
            rec(v + 1, max(used, c + 1), mass + add)

    rec(0, 0, 0.0)
    return best_mass / k ** 2


def _greedy_coloring(w, colors):
    k = w.shape[0]
    col = [0] * k
    for v in range(k):
        cost = [sum(w[u, v] for u in range(v) if col[u] == c) for c in range(colors)]
        col[v] = int(np.argmin(cost))
    return col


def _recolor_descent(w, colors, coloring) -> float:
    col = list(coloring)
    k = len(col)
    improved = True
    while improved:
        improved = False
        for v in range(k):
            cost = [sum(w[u, v] for u in range(k) if u != v and col[u] == c) for c in range(colors)]
            c_best = int(np.argmin(cost))
            if cost[c_best] < cost[col[v]] - 1e-15:
                col[v] = c_best
                improved = True
    return _mono_mass(w, col)


@dataclass(frozen=True)
class ColorRecovery:
    partition: Equipartition
    k: int
    distance: float
    pure_classes: int


def colorable_recovering_partition(g: Graph, coloring, eps: float) -> ColorRecovery:
    """Equipartition into ``ceil(r / eps)`` classes, most of them inside one colour class.

    Pure classes are carved out of each colour class (largest target size that
    still fits first); the leftovers of all colours, fewer than one class
    worth per colour, fill the remaining classes in ascending label order.
    The cluster graph's colourability distance is checked against ``eps``.
    """
    coloring = [int(c) for c in coloring]
    if len(coloring) != g.n:
        raise ValueError("colouring must assign every vertex")
    for u, v in g.edges:
        if coloring[u] == coloring[v]:
            raise ValueError(f"colouring is not proper on edge ({u}, {v})")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    r = max(coloring) + 1 if coloring else 1
    k = min(math.ceil(r / eps), g.n)
    slots = target_sizes(g.n, k)
    free_slots = list(range(k))
    classes: list[tuple[int, ...] | None] = [None] * k
    leftovers: list[int] = []
    pure = 0
    for c in range(r):
        members = [v for v in range(g.n) if coloring[v] == c]
        while True:
            fitting = [s for s in free_slots if slots[s] <= len(members)]
            if not fitting:
                break
            s = min(fitting, key=lambda i: (-slots[i], i))
            classes[s] = tuple(members[:slots[s]])
            members = members[slots[s]:]
            free_slots.remove(s)
            pure += 1
        leftovers.extend(members)
    leftovers.sort()
    for s in free_slots:
        classes[s] = tuple(leftovers[:slots[s]])
        leftovers = leftovers[slots[s]:]
    p = Equipartition(g.n, tuple(classes))
    cg = quotient(g, p)
    seed = _class_coloring(p, coloring, cg.w, r)
    dist = colorability_distance(cg, r, initial=seed)
    if dist > eps + 1e-12:
        raise AssertionError(f"colourability distance {dist} exceeds eps={eps}")
    return ColorRecovery(p, k, dist, pure)


def _class_coloring(p: Equipartition, coloring, w, r):
    """Pure classes keep their colour; mixed ones take the cheapest colour."""
    col = [-1] * p.k
    for i, c in enumerate(p.classes):
        colours = {coloring[v] for v in c}
        if len(colours) == 1:
            col[i] = colours.pop()
    for i in range(p.k):
        if col[i] < 0:
            cost = [sum(w[i, j] for j in range(p.k) if j != i and col[j] == c) for c in range(r)]
            col[i] = int(np.argmin(cost))
    return col
