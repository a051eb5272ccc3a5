"""Equipartitions, cluster graphs, blow-ups and weak (Frieze-Kannan) regularity."""
from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .cut import EXACT_CUT_CAP, CutResult, cut_distance
from .graphs import Graph, WeightedGraph

ENUMERATION_CAP = 12


@dataclass(frozen=True)
class Equipartition:
    """Partition of ``range(n)`` into classes whose sizes differ by at most one.

    Classes are stored sorted, ordered by their minimum element.
    """

    n: int
    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        classes = tuple(sorted((tuple(sorted(int(v) for v in c)) for c in self.classes), key=lambda c: c[0] if c else -1))
        if any(len(c) == 0 for c in classes):
            raise ValueError("equipartition classes must be nonempty")
        flat = [v for c in classes for v in c]
        if sorted(flat) != list(range(self.n)):
            raise ValueError(f"classes do not partition range({self.n})")
        sizes = [len(c) for c in classes]
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValueError(f"class sizes {sizes} differ by more than one")
        object.__setattr__(self, "classes", classes)

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def labels(self) -> np.ndarray:
        lab = np.empty(self.n, dtype=np.int64)
        for i, c in enumerate(self.classes):
            lab[list(c)] = i
        return lab

    def indicator(self) -> np.ndarray:
        P = np.zeros((self.n, self.k))
        P[np.arange(self.n), self.labels()] = 1.0
        return P

    @classmethod
    def contiguous(cls, n: int, k: int) -> Equipartition:
        """Consecutive blocks, the larger blocks first."""
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        sizes = target_sizes(n, k)
        classes, start = [], 0
        for s in sizes:
            classes.append(tuple(range(start, start + s)))
            start += s
        return cls(n, tuple(classes))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> Equipartition:
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(labels):
            groups.setdefault(int(c), []).append(v)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))


def target_sizes(n: int, k: int) -> list[int]:
    q, r = divmod(n, k)
    return [q + 1] * r + [q] * (k - r)


class ClusterGraph(WeightedGraph):
    """Weighted graph of pairwise edge densities between partition classes."""

    __slots__ = ("sizes",)

    def __init__(self, w, sizes: Sequence[int]):
        super().__init__(w)
        self.sizes = tuple(sizes)


def _check_ground(g: Graph, p: Equipartition):
    if p.n != g.n:
        raise ValueError(f"partition is over {p.n} vertices, graph has {g.n}")


def quotient(g: Graph, p: Equipartition) -> ClusterGraph:
    """``G/P(i, j) = e_G(V_i, V_j) / (|V_i| |V_j|)`` with ordered-pair counts.

    The diagonal entry is ``2 e(V_i) / |V_i|^2``.
    """
    _check_ground(g, p)
    P = p.indicator()
    counts = P.T @ g.adjacency.astype(float) @ P
    sizes = np.array(p.sizes, dtype=float)
    w = counts / np.outer(sizes, sizes)
    w = np.minimum(w, w.T)  # exact symmetry
    return ClusterGraph(w, p.sizes)


def blowup(g: Graph, p: Equipartition) -> WeightedGraph:
    """Block-constant weighted graph on ``V(g)`` carrying the cluster densities."""
    lab = quotient(g, p).w
    idx = p.labels()
    return WeightedGraph(lab[np.ix_(idx, idx)])


def enumerate_equipartitions(n: int, k: int, cap: int = ENUMERATION_CAP) -> Iterator[Equipartition]:
    """Every unordered equipartition of ``range(n)`` into exactly ``k`` classes, once each.

    The smallest unassigned vertex always opens the next class, which makes
    the emitted class order canonical without any deduplication pass.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n > cap:
        raise ValueError(f"refusing to enumerate equipartitions for n={n} > cap {cap}")
    q, r = divmod(n, k)
    n_big, n_small = r, k - r
    classes: list[tuple[int, ...]] = []

    def rec(remaining: tuple[int, ...], big: int, small: int):
        if not remaining:
            yield Equipartition(n, tuple(classes))
            return
        head, rest = remaining[0], remaining[1:]
        for size, nb, ns in ((q + 1, big - 1, small), (q, big, small - 1)):
            if nb < 0 or ns < 0 or size == 0:
                continue
            for others in combinations(rest, size - 1):
                classes.append((head,) + others)
                chosen = set(others)
                yield from rec(tuple(v for v in rest if v not in chosen), nb, ns)
                classes.pop()

    yield from rec(tuple(range(n)), n_big, n_small)


def count_equipartitions(n: int, k: int) -> int:
    q, r = divmod(n, k)
    sizes = [q + 1] * r + [q] * (k - r)
    total = math.factorial(n)
    for s in sizes:
        total //= math.factorial(s)
    return total // (math.factorial(r) * math.factorial(k - r))


def equipartitions_upto(n: int, K: int, cap: int = ENUMERATION_CAP) -> Iterator[Equipartition]:
    for k in range(1, min(K, n) + 1):
        yield from enumerate_equipartitions(n, k, cap)


@dataclass(frozen=True)
class FKCheck:
    regular: bool
    cut: CutResult

    def __bool__(self):
        return self.regular

    @property
    def witness(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        return None if self.regular else (self.cut.S, self.cut.T)


def is_fk_regular(g: Graph, p: Equipartition, gamma: float, mode: str = "auto") -> FKCheck:
    """Whether ``d_cut(g, blowup(g, p)) <= gamma``; carries a violating (S, T) otherwise.

    In heuristic mode a True verdict only means no violation was found.
    """
    _check_ground(g, p)
    res = cut_distance(g.as_weighted(), blowup(g, p), mode=mode)
    return FKCheck(res.value <= gamma, res)


class FKRegularityError(RuntimeError):
    def __init__(self, message: str, partition: Equipartition, value: float):
        super().__init__(message)
        self.partition = partition
        self.value = value


@dataclass(frozen=True)
class FKPartition:
    partition: Equipartition
    cut_value: float
    certified: bool
    iterations: int
    history: tuple[float, ...] = field(default=())


def refine(p: Equipartition, S: Sequence[int], T: Sequence[int]) -> list[list[int]]:
    """Split every class by membership in ``S`` and ``T`` (empty pieces dropped)."""
    S_set, T_set = set(S), set(T)
    parts = []
    for c in p.classes:
        pieces: dict[tuple[bool, bool], list[int]] = {}
        for v in c:
            pieces.setdefault((v in S_set, v in T_set), []).append(v)
        parts.extend(pieces[key] for key in sorted(pieces, reverse=True))
    return parts


def equalize(n: int, parts: list[list[int]]) -> Equipartition:
    """Rebuild ``parts`` into an equipartition with the same number of classes.

    Largest parts receive the larger target sizes; each oversized part gives
    up its lowest-labelled vertices, and the pooled vertices fill deficits in
    ascending label order.
    """
    k = len(parts)
    order = sorted(range(k), key=lambda i: (-len(parts[i]), min(parts[i])))
    targets = target_sizes(n, k)
    kept: list[list[int]] = [[] for _ in range(k)]
    pool: list[int] = []
    for slot, i in enumerate(order):
        members = sorted(parts[i])
        surplus = len(members) - targets[slot]
        if surplus > 0:
            pool.extend(members[:surplus])
            members = members[surplus:]
        kept[slot] = members
    pool.sort()
    for slot in range(k):
        need = targets[slot] - len(kept[slot])
        if need > 0:
            kept[slot].extend(pool[:need])
            del pool[:need]
    return Equipartition(n, tuple(tuple(c) for c in kept))


def find_fk_partition(
    g: Graph,
    gamma: float,
    k0: int,
    mode: str = "auto",
    max_classes: int | None = None,
) -> FKPartition:
    """Refine an initial ``k0``-class equipartition until it is gamma-FK-regular.

    Each round finds a violating pair (S, T), splits every class by S and T,
    and re-equalises.  Rounds are capped at ``ceil(1 / gamma^2)``.  With the
    exact cut search (n <= 22) the returned partition carries a certificate;
    otherwise the heuristic's best violation for the final partition is
    attached and ``certified`` is False.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not 1 <= k0 <= g.n:
        raise ValueError(f"need 1 <= k0 <= n, got k0={k0}, n={g.n}")
    if mode == "auto":
        mode = "exact" if g.n <= EXACT_CUT_CAP else "heuristic"
    cap_iter = math.ceil(1.0 / gamma ** 2)
    cap_classes = g.n if max_classes is None else min(max_classes, g.n)
    p = Equipartition.contiguous(g.n, k0)
    history = []
    for it in range(cap_iter + 1):
        check = is_fk_regular(g, p, gamma, mode=mode)
        history.append(check.cut.value)
        if check.regular:
            return FKPartition(p, check.cut.value, check.cut.exact, it, tuple(history))
        if it == cap_iter:
            break
        parts = refine(p, check.cut.S, check.cut.T)
        if len(parts) > cap_classes:
            raise FKRegularityError(
                f"refinement needs {len(parts)} classes, above the cap {cap_classes}", p, check.cut.value
            )
        p = equalize(g.n, parts)
    raise FKRegularityError(
        f"no gamma={gamma} certificate after {cap_iter} refinement rounds", p, history[-1]
    )


def parse_partition(text: str, n: int | None = None) -> Equipartition:
    classes = [tuple(int(x) for x in ln.split()) for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    total = sum(len(c) for c in classes)
    if n is not None and total != n:
        raise ValueError(f"partition covers {total} vertices, expected {n}")
    return Equipartition(total, tuple(classes))


def format_partition(p: Equipartition) -> str:
    return "".join(" ".join(map(str, c)) + "\n" for c in p.classes)


def read_partition(path, n: int | None = None) -> Equipartition:
    return parse_partition(Path(path).read_text(), n)


def write_partition(p: Equipartition, path) -> None:
    Path(path).write_text(format_partition(p))
