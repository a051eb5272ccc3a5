"""Seeded graph generators used by the experiments and the CLI."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .counting import subgraph_copies
from .graphs import ForbiddenFamily, Graph, WeightedGraph, complete_graph
from .partitions import target_sizes


def complete(n: int) -> Graph:
    return complete_graph(n)


def turan(r: int, n: int) -> Graph:
    """Complete ``r``-partite graph with near-equal consecutive parts (larger parts first)."""
    if r < 1 or n < 0:
        raise ValueError("need r >= 1 and n >= 0")
    part = np.repeat(np.arange(r), target_sizes(n, r)) if n >= r else np.arange(n)
    return Graph(n, [(u, v) for u, v in combinations(range(n), 2) if part[u] != part[v]])


def complete_bipartite(a: int, b: int) -> Graph:
    if a < 0 or b < 0:
        raise ValueError("part sizes must be non-negative")
    return Graph(a + b, [(u, a + v) for u in range(a) for v in range(b)])


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with one coin per pair, pairs in lexicographic order."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def blowup_rounded(r: WeightedGraph, class_size: int, seed: int) -> Graph:
    """Random graph on ``k * class_size`` vertices; each pair is an edge with its block's weight.

    Vertex ``v`` lies in class ``v // class_size``.
    """
    if class_size < 1:
        raise ValueError("class_size must be positive")
    n = r.n * class_size
    cls = np.arange(n) // class_size
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < r.w[cls[iu], cls[ju]]
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def support_blowup(k: int, kept, class_size: int) -> Graph:
    """Join classes ``i != j`` completely for each kept pair; a kept loop makes its class a clique."""
    n = k * class_size
    members = [range(i * class_size, (i + 1) * class_size) for i in range(k)]
    edges = set()
    for i, j in kept:
        if i == j:
            edges.update(combinations(members[i], 2))
        else:
            edges.update((min(u, v), max(u, v)) for u in members[i] for v in members[j])
    return Graph(n, edges)


def planted_free(n: int, p: float, fam: ForbiddenFamily, seed: int) -> Graph:
    """G(n, p) followed by removing a random edge of some forbidden copy until none is left."""
    g = erdos_renyi(n, p, seed)
    rng = np.random.default_rng(seed + 1)
    edges = set(g.edges)
    while True:
        h = Graph(n, edges)
        copies = sorted(sorted(c) for f in fam for c in subgraph_copies(h, f))
        if not copies:
            return h
        copy = copies[int(rng.integers(len(copies)))]
        edges.discard(copy[int(rng.integers(len(copy)))])


def generate(kind: str, seed: int = 0, **params) -> Graph:
    """Dispatch by name: complete, turan, er, bipartite, blowup, planted."""
    kind = kind.lower()
    if kind == "complete":
        return complete(int(params["n"]))
    if kind == "turan":
        return turan(int(params["r"]), int(params["n"]))
    if kind == "er":
        return erdos_renyi(int(params["n"]), float(params["p"]), seed)
    if kind == "bipartite":
        return complete_bipartite(int(params["a"]), int(params["b"]))
    if kind == "blowup":
        return blowup_rounded(params["r"], int(params["class_size"]), seed)
    if kind == "planted":
        return planted_free(int(params["n"]), float(params["p"]), params["fam"], seed)
    raise ValueError(f"unknown generator {kind!r}")
