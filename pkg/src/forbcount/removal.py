"""Homomorphic images, the blow-up density inequality, and the weighted removal pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .extremal import dist_forbhom
from .graphs import ForbiddenFamily, Graph, WeightedGraph
from .hom import hom_count, hom_density

IMAGE_VERTEX_CAP = 8


@dataclass(frozen=True)
class HomImage:
    """Quotient of ``f`` by a partition into independent sets.

    ``quotient_map[v]`` is the image vertex of ``v``; ``image`` is in
    canonical labelling, so isomorphic images compare equal.
    """

    image: Graph
    quotient_map: tuple[int, ...]


def _set_partitions(n: int):
    """Restricted growth strings of length ``n``."""
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(labels)
            return
        for c in range(used + 1):
            labels[i] = c
            yield from rec(i + 1, max(used, c + 1))

    if n == 0:
        yield ()
        return
    yield from rec(1, 1)


def canonical_form(g: Graph) -> tuple[Graph, tuple[int, ...]]:
    """Canonical relabelling of ``g`` and the map old label -> new label.

    Vertices are grouped by descending degree and only permutations inside a
    degree group are tried; the lexicographically largest sorted edge list wins.
    """
    groups: dict[int, list[int]] = {}
    for v in range(g.n):
        groups.setdefault(g.degree(v), []).append(v)
    blocks = [groups[d] for d in sorted(groups, reverse=True)]
    best_key, best_map = None, None
    for choice in product(*(permutations(b) for b in blocks)):
        order = [v for block in choice for v in block]
        relabel = [0] * g.n
        for new, old in enumerate(order):
            relabel[old] = new
        key = tuple(sorted(tuple(sorted((relabel[u], relabel[v]))) for u, v in g.edges))
        if best_key is None or key > best_key:
            best_key, best_map = key, tuple(relabel)
    return Graph(g.n, best_key), best_map


def homomorphic_images(f: Graph, cap: int = IMAGE_VERTEX_CAP) -> list[HomImage]:
    """All homomorphic images of ``f`` up to isomorphism, ``f`` itself included.

    Sorted by (vertex count, edge count, edges) for a stable order.
    """
    if f.n > cap:
        raise ValueError(f"image enumeration is capped at {cap} vertices, got {f.n}")
    seen: dict[Graph, HomImage] = {}
    for labels in _set_partitions(f.n):
        if any(labels[u] == labels[v] for u, v in f.edges):
            continue
        size = max(labels) + 1 if labels else 0
        q = Graph(size, {tuple(sorted((labels[u], labels[v]))) for u, v in f.edges})
        canon, relabel = canonical_form(q)
        if canon not in seen:
            seen[canon] = HomImage(canon, tuple(relabel[c] for c in labels))
    return sorted(seen.values(), key=lambda h: (h.image.n, h.image.m, h.image.edges))


def check_quotient_map(f: Graph, fhat: Graph, zeta) -> None:
    """Raise unless ``zeta`` is a surjective homomorphism ``f -> fhat``."""
    zeta = tuple(int(x) for x in zeta)
    if len(zeta) != f.n:
        raise ValueError(f"map has {len(zeta)} entries for {f.n} vertices")
    if set(zeta) != set(range(fhat.n)):
        raise ValueError("map is not onto the image's vertex set")
    for u, v in f.edges:
        if zeta[u] == zeta[v] or not fhat.has_edge(zeta[u], zeta[v]):
            raise ValueError(f"edge ({u}, {v}) is not mapped onto an edge")


@dataclass(frozen=True)
class BlowupCheck:
    holds: bool
    t_f: float
    t_fhat: float
    ell: int


def blowup_inequality_check(fhat: Graph, f: Graph, zeta, h: Graph) -> BlowupCheck:
    """Check ``t(f, h) >= t(fhat, h)^ell`` with ``ell = (|V(f)| + 1)^|V(fhat)|``.

    The comparison uses exact integer homomorphism counts in the log domain,
    since ``t(fhat, h)^ell`` underflows for modest ``ell``.
    """
    check_quotient_map(f, fhat, zeta)
    ell = (f.n + 1) ** fhat.n
    hf, hhat = hom_count(f, h), hom_count(fhat, h)
    t_f, t_hat = hf / h.n ** f.n, hhat / h.n ** fhat.n
    if hhat == 0:
        holds = True
    elif hf == 0:
        holds = False
    else:
        lhs = math.log2(hf) - f.n * math.log2(h.n)
        rhs = ell * (math.log2(hhat) - fhat.n * math.log2(h.n))
        holds = lhs >= rhs - 1e-9 * max(1.0, abs(rhs))
    return BlowupCheck(holds, t_f, t_hat, ell)


class ThresholdGraph(Graph):
    """Loop-free graph of pairs with weight at least ``theta``.

    ``dropped_loop_mass`` is the total weight of the loops at or above the
    threshold, which the loop-free graph cannot carry.
    """

    __slots__ = ("theta", "dropped_loop_mass")

    def __init__(self, n, edges, theta: float, dropped_loop_mass: float):
        super().__init__(n, edges)
        self.theta = theta
        self.dropped_loop_mass = dropped_loop_mass


def threshold_graph(r: WeightedGraph, theta: float) -> ThresholdGraph:
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    keep = r.w >= theta
    diag = np.diag(r.w)
    loops = float(diag[np.diag(keep)].sum())
    iu, ju = np.nonzero(np.triu(keep, 1))
    return ThresholdGraph(r.n, zip(iu.tolist(), ju.tolist()), theta, loops)


@dataclass(frozen=True)
class Witness:
    member: Graph
    name: str
    density: float


def removal_witness(r: WeightedGraph, fam: ForbiddenFamily) -> Witness | None:
    """First member, by ascending vertex count, with positive density in ``r``."""
    order = sorted(range(len(fam)), key=lambda i: (fam.members[i].n, i))
    for i in order:
        t = hom_density(fam.members[i], r)
        if t > 0:
            return Witness(fam.members[i], fam.names[i], t)
    return None


@dataclass(frozen=True)
class RemovalReport:
    dist: float
    eps: float
    witness: Witness | None
    threshold: ThresholdGraph


def removal_report(r: WeightedGraph, fam: ForbiddenFamily, eps: float) -> RemovalReport:
    """Distance to the hom-free class, a density witness and the ``eps/2`` threshold graph."""
    if not 0 < eps <= 2:
        raise ValueError("eps must lie in (0, 2]")
    return RemovalReport(dist_forbhom(r, fam), eps, removal_witness(r, fam), threshold_graph(r, eps / 2))
