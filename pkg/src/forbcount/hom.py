"""Homomorphism densities and existence by backtracking over partial maps."""
from __future__ import annotations

import numpy as np

from .graphs import Graph, WeightedGraph


def components(f: Graph) -> list[list[int]]:
    seen = [False] * f.n
    comps = []
    for s in range(f.n):
        if seen[s]:
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            nb = f.masks[u]
            while nb:
                low = nb & -nb
                v = low.bit_length() - 1
                nb ^= low
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def search_plan(f: Graph, comp: list[int]) -> tuple[list[int], list[list[int]]]:
    """Order ``comp`` so each vertex after the first has an earlier neighbour.

    Returns the order and, per position, the earlier positions adjacent to it.
    Ties go to the vertex with the most already-placed neighbours, then the
    highest degree, then the lowest label.
    """
    first = max(comp, key=lambda v: (f.degree(v), -v))
    order = [first]
    placed = 1 << first
    members = set(comp) - {first}
    while members:
        nxt = max(members, key=lambda v: ((f.masks[v] & placed).bit_count(), f.degree(v), -v))
        order.append(nxt)
        placed |= 1 << nxt
        members.remove(nxt)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[u] for u in order[:i] if f.has_edge(u, v)] for i, v in enumerate(order)]
    return order, back


def _hom_total(back: list[list[int]], W: np.ndarray):
    """Sum of hom weights over all maps of one connected pattern.

    Partial maps whose running product hits zero are never extended; the last
    vertex is summed as a vector.  Summation order is fixed (depth-first,
    ascending target label) so the result is reproducible bit for bit.
    """
    a = len(back)
    assign = [0] * a
    n = W.shape[0]
    ones = np.ones(n, dtype=W.dtype)

    def rec(p: int, weight):
        vec = ones * weight
        for q in back[p]:
            vec = vec * W[assign[q]]
        if p == a - 1:
            return vec.sum()
        total = 0
        for idx in np.flatnonzero(vec).tolist():
            assign[p] = idx
            total = total + rec(p + 1, vec[idx])
        return total

    return rec(0, W.dtype.type(1))


def hom_count(f: Graph, g: Graph) -> int:
    """Exact number of homomorphisms ``f -> g`` for a simple target."""
    W = g.adjacency.astype(np.int64)
    total = 1
    for comp in components(f):
        if len(comp) == 1:
            total *= g.n
            continue
        _, back = search_plan(f, comp)
        total *= int(_hom_total(back, W))
        if total == 0:
            return 0
    return total


def hom_density(f: Graph, r: Graph | WeightedGraph) -> float:
    """``t(F, R)``: mean over all maps ``V(F) -> V(R)`` of the product of edge weights.

    Simple targets are counted exactly in integers before the final division.
    """
    if f.n < 1:
        raise ValueError("pattern must have at least one vertex")
    if r.n == 0:
        raise ValueError("target must have at least one vertex")
    if isinstance(r, Graph):
        return hom_count(f, r) / r.n ** f.n
    density = 1.0
    for comp in components(f):
        if len(comp) == 1:
            continue
        _, back = search_plan(f, comp)
        density *= float(_hom_total(back, r.w)) / r.n ** len(comp)
        if density == 0.0:
            return 0.0
    return density


def _support_masks(support) -> tuple[int, ...]:
    if isinstance(support, Graph):
        return support.masks
    if isinstance(support, WeightedGraph):
        return support.support_masks()
    return tuple(support)


def hom_exists(f: Graph, support, pinned: tuple[int, int, int, int] | None = None) -> bool:
    """Is there a map sending every edge of ``f`` into the positive support?

    ``support`` is a Graph, a WeightedGraph (loops count), or a sequence of
    neighbourhood bitmasks.  ``pinned = (u, v, a, b)`` restricts the search
    to maps with ``u -> a`` and ``v -> b``.
    """
    masks = _support_masks(support)
    k = len(masks)
    if k == 0:
        return False
    full = (1 << k) - 1
    for comp in components(f):
        if len(comp) == 1 and pinned is None:
            continue
        if pinned is not None and pinned[0] in comp:
            if not _component_hom(f, comp, masks, full, pinned):
                return False
        elif len(comp) > 1 and not _component_hom(f, comp, masks, full, None):
            return False
    return True


def _component_hom(f, comp, masks, full, pinned) -> bool:
    order, back = search_plan(f, comp)
    fixed = {}
    if pinned is not None:
        u, v, a, b = pinned
        if not (masks[a] >> b) & 1:
            return False
        fixed = {order.index(u): a, order.index(v): b}
    a_len = len(order)
    assign = [0] * a_len

    def rec(p: int) -> bool:
        if p == a_len:
            return True
        cand = full
        for q in back[p]:
            cand &= masks[assign[q]]
        if p in fixed:
            cand &= 1 << fixed[p]
        while cand:
            low = cand & -cand
            assign[p] = low.bit_length() - 1
            if rec(p + 1):
                return True
            cand ^= low
        return False

    return rec(0)
