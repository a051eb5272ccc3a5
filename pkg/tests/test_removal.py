from itertools import combinations, permutations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forbcount.extremal import dist_forbhom
from forbcount.generators import erdos_renyi
from forbcount.graphs import ForbiddenFamily, Graph, WeightedGraph, builtin_graph, complete_graph, path_graph
from forbcount.hom import hom_density
from forbcount.removal import (
    blowup_inequality_check,
    canonical_form,
    check_quotient_map,
    homomorphic_images,
    removal_report,
    removal_witness,
    threshold_graph,
)

K3 = ForbiddenFamily.from_names("K3")


def isomorphic(a, b):
    if a.n != b.n or a.m != b.m:
        return False
    target = set(b.edges)
    return any(all(tuple(sorted((p[u], p[v]))) in target for u, v in a.edges) for p in permutations(range(a.n)))


def random_weighted(rng, k, loops=True, zero_frac=0.3):
    w = rng.random((k, k))
    w = np.triu(w) + np.triu(w, 1).T
    w[rng.random((k, k)) < zero_frac] = 0
    w = np.minimum(w, w.T)
    if not loops:
        np.fill_diagonal(w, 0)
    return WeightedGraph(w)


# homomorphic images ----------------------------------------------------------

def test_images_examples():
    k3 = homomorphic_images(complete_graph(3))
    assert [h.image for h in k3] == [complete_graph(3)]
    p3 = homomorphic_images(path_graph(3))
    assert len(p3) == 2
    assert isomorphic(p3[0].image, complete_graph(2)) and isomorphic(p3[1].image, path_graph(3))
    edgeless = homomorphic_images(Graph(3))
    assert [h.image.n for h in edgeless] == [1, 2, 3]


def test_images_guard():
    with pytest.raises(ValueError):
        homomorphic_images(Graph(9, [(0, 1)]))


@pytest.mark.parametrize("name", ["P4", "C4", "C5", "K4", "P3"])
def test_images_are_pairwise_non_isomorphic(name):
    images = [h.image for h in homomorphic_images(builtin_graph(name))]
    for a, b in combinations(images, 2):
        assert not isomorphic(a, b)


def test_c5_images():
    images = homomorphic_images(builtin_graph("C5"))
    assert sorted((h.image.n, h.image.m) for h in images) == [(3, 3), (4, 4), (5, 5)]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.permutations(range(n)))), st.data())
def test_canonical_form_is_invariant(np_, data):
    n, perm = np_
    pairs = list(combinations(range(n), 2))
    keep = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = Graph(n, [p for p, k in zip(pairs, keep) if k])
    h = Graph(n, [tuple(sorted((perm[u], perm[v]))) for u, v in g.edges])
    assert canonical_form(g)[0] == canonical_form(h)[0]


def test_quotient_map_composes_to_homomorphism():
    rng = np.random.default_rng(4)
    for name in ("P4", "C4", "C5", "K3"):
        f = builtin_graph(name)
        for img in homomorphic_images(f):
            check_quotient_map(f, img.image, img.quotient_map)
            h = erdos_renyi(6, 0.6, int(rng.integers(1000)))
            for psi in product(range(h.n), repeat=img.image.n):
                if all(h.has_edge(psi[a], psi[b]) for a, b in img.image.edges):
                    phi = [psi[img.quotient_map[v]] for v in range(f.n)]
                    assert all(h.has_edge(phi[u], phi[v]) for u, v in f.edges)
                    break


def test_invalid_quotient_map():
    with pytest.raises(ValueError):
        check_quotient_map(path_graph(3), complete_graph(2), (0, 0, 1))
    with pytest.raises(ValueError):
        check_quotient_map(path_graph(3), complete_graph(3), (0, 1, 0))


# blow-up inequality ------------------------------------------------------------

def test_blowup_identity():
    f = builtin_graph("C4")
    res = blowup_inequality_check(f, f, tuple(range(4)), erdos_renyi(6, 0.5, 1))
    assert res.holds and res.t_f == res.t_fhat


def test_blowup_p3_k4():
    res = blowup_inequality_check(complete_graph(2), path_graph(3), (0, 1, 0), complete_graph(4))
    assert res.ell == 16
    assert res.t_f == pytest.approx(36 / 64) and res.t_fhat == pytest.approx(12 / 16)
    assert res.holds


def test_blowup_sweep():
    rng = np.random.default_rng(0)
    for _ in range(100):
        name = ["P3", "P4", "C4", "C5", "K3"][int(rng.integers(5))]
        f = builtin_graph(name)
        images = homomorphic_images(f)
        img = images[int(rng.integers(len(images)))]
        h = erdos_renyi(7, 0.5, int(rng.integers(2 ** 31)))
        assert blowup_inequality_check(img.image, f, img.quotient_map, h).holds


# threshold graph and witness -----------------------------------------------------

def test_threshold_examples():
    r = WeightedGraph.constant(5, 0.5)
    full = threshold_graph(r, 0.5)
    assert full == complete_graph(5) and full.dropped_loop_mass == 2.5
    assert threshold_graph(r, 0.6).m == 0
    mixed = WeightedGraph([[0.9, 0.3, 0.7], [0.3, 0.1, 0.5], [0.7, 0.5, 0.0]])
    t = threshold_graph(mixed, 0.5)
    assert t.edges == ((0, 2), (1, 2)) and t.dropped_loop_mass == 0.9


def test_witness_examples():
    sides = WeightedGraph([[0, 1], [1, 0]])
    assert removal_witness(sides, K3) is None
    w = removal_witness(WeightedGraph.constant(4, 0.5), K3)
    assert w.name == "K3" and w.density == pytest.approx(1 / 8)


def test_witness_scans_by_size():
    fam = ForbiddenFamily.from_names("C5,K3")
    w = removal_witness(WeightedGraph.constant(3, 1.0, loops=False), fam)
    assert w.name == "K3"


def test_witness_sweep():
    rng = np.random.default_rng(12)
    found = 0
    while found < 200:
        r = random_weighted(rng, int(rng.integers(2, 7)))
        if dist_forbhom(r, K3) < 0.1:
            continue
        w = removal_witness(r, K3)
        assert w is not None and w.density > 0
        found += 1


def forb_image_distance(h, fam):
    """Brute-force edit distance from ``h`` to graphs on ``h.n`` vertices with no image of a member."""
    k = h.n
    pairs = list(combinations(range(k), 2))
    index = {p: i for i, p in enumerate(pairs)}
    copy_masks = set()
    for f in fam:
        for img in homomorphic_images(f):
            if img.image.n > min(5, k):
                continue
            for tup in permutations(range(k), img.image.n):
                mask = 0
                for a, b in img.image.edges:
                    mask |= 1 << index[tuple(sorted((tup[a], tup[b])))]
                copy_masks.add(mask)
    codes = np.arange(1 << len(pairs), dtype=np.int64)
    free = np.ones(len(codes), dtype=bool)
    for c in copy_masks:
        free &= (codes & c) != c
    hmask = sum(1 << index[e] for e in h.edges)
    diff = np.array([bin(x).count("1") for x in (codes[free] ^ hmask)])
    return 2 * diff.min() / k ** 2


@pytest.mark.parametrize("seed,fam_name,loops", [(0, "K3", False), (1, "K3", True), (2, "C5", False), (3, "K3,C4", True)])
def test_threshold_distance_consistency(seed, fam_name, loops):
    fam = ForbiddenFamily.from_names(fam_name)
    rng = np.random.default_rng(seed)
    for _ in range(15):
        k = int(rng.integers(3, 7))
        r = random_weighted(rng, k, loops=loops)
        eps = dist_forbhom(r, fam)
        if eps <= 0:
            continue
        h = threshold_graph(r, eps / 2)
        d = forb_image_distance(h, fam)
        assert d >= eps / 2 - h.dropped_loop_mass / k ** 2 - 1e-12


def test_removal_report():
    rep = removal_report(WeightedGraph.constant(4, 0.5), K3, 0.2)
    assert rep.dist == pytest.approx(0.25)
    assert rep.witness.name == "K3"
    assert rep.threshold.theta == 0.1 and rep.threshold.dropped_loop_mass == 2.0
    assert hom_density(complete_graph(3), WeightedGraph.constant(4, 0.5)) == rep.witness.density
