"""Simple graphs, weighted graphs and forbidden families.

A :class:`Graph` is loop-free with 0/1 adjacency.  A :class:`WeightedGraph`
is a symmetric ``[0, 1]``-valued matrix on ordered pairs with loops allowed.
Both are immutable once built.
"""
from __future__ import annotations

import json
import re
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np


class Graph:
    """Undirected loop-free graph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "_adj", "_masks")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}; simple graphs are loop-free")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        adj = np.zeros((n, n), dtype=bool)
        for u, v in self.edges:
            adj[u, v] = adj[v, u] = True
        adj.flags.writeable = False
        self._adj = adj
        masks = [0] * n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        self._masks = tuple(masks)

    @classmethod
    def from_adjacency(cls, adj) -> Graph:
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        a = a.astype(bool)
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if a.diagonal().any():
            raise ValueError("adjacency must have a false diagonal")
        iu, ju = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], zip(iu.tolist(), ju.tolist()))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    @property
    def masks(self) -> tuple[int, ...]:
        """Neighbourhood bitmask per vertex."""
        return self._masks

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def degree(self, v: int) -> int:
        return self._masks[v].bit_count()

    def induced(self, vertices: Sequence[int]) -> Graph:
        """Induced subgraph, relabelled ``0..len-1`` in the given order."""
        pos = {v: i for i, v in enumerate(vertices)}
        if len(pos) != len(vertices):
            raise ValueError("induced: repeated vertex")
        sub = [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        return Graph(len(vertices), sub)

    def spanning(self, edges: Iterable[Sequence[int]]) -> Graph:
        """Spanning subgraph with the given edges (must be edges of self)."""
        h = Graph(self.n, edges)
        for u, v in h.edges:
            if not self._adj[u, v]:
                raise ValueError(f"({u}, {v}) is not an edge of the host graph")
        return h

    def as_weighted(self) -> WeightedGraph:
        return WeightedGraph(self._adj.astype(float))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class WeightedGraph:
    """Symmetric weight function on ``[n] x [n]`` with values in ``[0, 1]``."""

    __slots__ = ("n", "w")

    def __init__(self, w):
        a = np.array(w, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("weights must form a square matrix")
        if not np.array_equal(a, a.T):
            raise ValueError("weights must be exactly symmetric")
        if a.size and (np.isnan(a).any() or a.min() < 0.0 or a.max() > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        a.flags.writeable = False
        self.n = a.shape[0]
        self.w = a

    @classmethod
    def constant(cls, n: int, value: float, loops: bool = True) -> WeightedGraph:
        a = np.full((n, n), float(value))
        if not loops:
            np.fill_diagonal(a, 0.0)
        return cls(a)

    def edge_weight(self) -> float:
        """``e(R)``: half the ordered-pair sum, loops included."""
        return 0.5 * float(self.w.sum())

    def support(self) -> np.ndarray:
        return self.w > 0

    def support_masks(self) -> tuple[int, ...]:
        masks = []
        for row in self.support():
            m = 0
            for j in np.flatnonzero(row).tolist():
                m |= 1 << j
            masks.append(m)
        return tuple(masks)

    def __le__(self, other: WeightedGraph) -> bool:
        return self.n == other.n and bool(np.all(self.w <= other.w))

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash((self.n, self.w.tobytes()))

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, e={self.edge_weight():.6g})"


# builtin pattern graphs ---------------------------------------------------

def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def path_graph(n: int) -> Graph:
    """Path on ``n`` vertices (``P3`` has two edges)."""
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


_PATTERN = re.compile(r"^([KPC])(\d+)$")


def builtin_graph(name: str) -> Graph:
    """Parse ``K<n>``, ``P<n>`` or ``C<n>``."""
    match = _PATTERN.match(name.strip().upper())
    if not match:
        raise ValueError(f"unknown builtin graph {name!r} (expected K<n>, P<n> or C<n>)")
    kind, size = match.group(1), int(match.group(2))
    return {"K": complete_graph, "P": path_graph, "C": cycle_graph}[kind](size)


class ForbiddenFamily:
    """Finite nonempty list of forbidden graphs, each with at least one edge."""

    __slots__ = ("members", "names")

    def __init__(self, members: Iterable[Graph], names: Iterable[str] | None = None):
        self.members: tuple[Graph, ...] = tuple(members)
        if not self.members:
            raise ValueError("a forbidden family needs at least one member")
        for f in self.members:
            if f.m == 0:
                raise ValueError("every forbidden graph must have at least one edge")
        if names is None:
            names = [f"F{i}" for i in range(len(self.members))]
        self.names: tuple[str, ...] = tuple(names)
        if len(self.names) != len(self.members):
            raise ValueError("names and members differ in length")

    @classmethod
    def from_names(cls, names: Iterable[str] | str) -> ForbiddenFamily:
        if isinstance(names, str):
            names = [s for s in re.split(r"[,\s]+", names) if s]
        names = [s.upper() for s in names]
        return cls([builtin_graph(s) for s in names], names)

    @property
    def label(self) -> str:
        return "{" + ",".join(self.names) + "}"

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return isinstance(other, ForbiddenFamily) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"ForbiddenFamily({self.label})"


# distances ----------------------------------------------------------------

def _same_size(a, b):
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")


def edit_distance(g1: Graph, g2: Graph) -> float:
    """Normalised edit distance ``2 |E1 ^ E2| / n^2``."""
    _same_size(g1, g2)
    if g1.n == 0:
        return 0.0
    diff = len(set(g1.edges).symmetric_difference(g2.edges))
    return 2.0 * diff / g1.n ** 2


def l1_distance(r1: WeightedGraph, r2: WeightedGraph) -> float:
    """Mean absolute difference over all ordered pairs, diagonal included."""
    _same_size(r1, r2)
    if r1.n == 0:
        return 0.0
    return float(np.abs(r1.w - r2.w).sum()) / r1.n ** 2


def as_weighted(x) -> WeightedGraph:
    return x.as_weighted() if isinstance(x, Graph) else x


# I/O ----------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty graph document")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        edges = [(int(a), int(b)) for a, b in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed graph document: {exc}") from None
    if len(edges) != m:
        raise ValueError(f"header declares {m} edges, found {len(edges)}")
    return Graph(n, edges)


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())


def write_graph(g: Graph, path) -> None:
    Path(path).write_text(format_graph(g))


def parse_weighted(text: str) -> WeightedGraph:
    try:
        doc = json.loads(text)
        n, rows = int(doc["n"]), doc["w"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed weighted graph document: {exc!r}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"weight matrix must be {n}x{n}")
    return WeightedGraph(rows)


def format_weighted(r: WeightedGraph) -> str:
    return json.dumps({"n": r.n, "w": r.w.tolist()}, indent=1) + "\n"


def read_weighted(path) -> WeightedGraph:
    return parse_weighted(Path(path).read_text())


def write_weighted(r: WeightedGraph, path) -> None:
    Path(path).write_text(format_weighted(r))
