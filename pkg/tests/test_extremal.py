import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forbcount.acceptance import brute_force_dist
from forbcount.counting import subgraph_copies
from forbcount.extremal import (
    CapExceeded,
    colorability_distance,
    colorable_recovering_partition,
    contains_forbidden,
    dist_forbhom,
    ex_value,
    find_recovering_partition,
    is_recovering,
    max_support,
)
from forbcount.generators import complete_bipartite, erdos_renyi, planted_free, support_blowup, turan
from forbcount.graphs import ForbiddenFamily, Graph, WeightedGraph, complete_graph
from forbcount.hom import hom_density
from forbcount.partitions import Equipartition, quotient

K3 = ForbiddenFamily.from_names("K3")
FAMS = [ForbiddenFamily.from_names(x) for x in ("K3", "K4", "P3")]


@st.composite
def weighted(draw, max_k=5):
    k = draw(st.integers(1, max_k))
    vals = draw(st.lists(st.sampled_from([0.0, 0.1, 0.3, 0.5, 0.8, 1.0]), min_size=k * k, max_size=k * k))
    w = np.array(vals).reshape(k, k)
    return WeightedGraph(np.triu(w) + np.triu(w, 1).T)


def sides_quotient():
    return quotient(complete_bipartite(2, 2), Equipartition(4, ((0, 1), (2, 3))))


def test_ex_examples():
    ex, sel = ex_value(sides_quotient(), K3)
    assert ex == 0.25 and sel.kept == ((0, 1),)
    ex, sel = ex_value(WeightedGraph.constant(4, 0.5), K3)
    assert ex == 0.125
    assert all(i != j for i, j in sel.kept)
    s = sel.as_weighted(WeightedGraph.constant(4, 0.5))
    assert hom_density(complete_graph(3), s) == 0


def test_optimal_support_avoids_loops():
    rng = np.random.default_rng(0)
    for _ in range(30):
        w = rng.random((4, 4))
        w = np.triu(w) + np.triu(w, 1).T
        _, sel = ex_value(WeightedGraph(w), K3)
        assert all(i != j for i, j in sel.kept)


def test_dist_examples():
    assert dist_forbhom(sides_quotient(), K3) == 0
    assert dist_forbhom(WeightedGraph.constant(4, 0.5), K3) == pytest.approx(0.25, abs=1e-12)
    assert brute_force_dist(WeightedGraph.constant(4, 0.5), K3) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("k", [4, 6, 8])
def test_constant_half_distance(k):
    assert dist_forbhom(WeightedGraph.constant(k, 0.5), K3) == pytest.approx(0.25, abs=1e-12)


def test_cap_and_inexact_fallback():
    r = WeightedGraph.constant(13, 0.5)
    with pytest.raises(CapExceeded):
        ex_value(r, K3, exact=True)
    ex, sel = ex_value(r, K3)
    assert not sel.exact and 0 < ex <= 0.125


@settings(max_examples=80, deadline=None)
@given(weighted(), st.sampled_from(FAMS))
def test_duality_against_all_supports(r, fam):
    d = dist_forbhom(r, fam)
    ex, _ = ex_value(r, fam)
    assert d == pytest.approx(2 * (r.edge_weight() / r.n ** 2 - ex), abs=1e-12)
    assert d == pytest.approx(brute_force_dist(r, fam), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(weighted(), st.sampled_from(FAMS), st.floats(0.0, 1.0))
def test_ex_monotone(r, fam, scale):
    smaller = WeightedGraph(r.w * scale)
    assert ex_value(smaller, fam)[0] <= ex_value(r, fam)[0] + 1e-15


@settings(max_examples=60, deadline=None)
@given(weighted(), st.floats(0.05, 1.0))
def test_argmax_scale_invariant(r, lam):
    a = max_support(r, K3)
    b = max_support(WeightedGraph(r.w * lam), K3)
    assert a.value * lam == pytest.approx(b.value, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(weighted())
def test_single_edge_family_gives_zero(r):
    assert ex_value(r, ForbiddenFamily.from_names("K2"))[0] == 0


@settings(max_examples=40, deadline=None)
@given(weighted(), st.sampled_from([ForbiddenFamily.from_names(x) for x in ("K3", "K4", "K3,C5")]))
def test_support_blowups_are_free(r, fam):
    sel = max_support(r, fam)
    g = support_blowup(r.n, sel.kept, 5)
    assert not any(subgraph_copies(g, f) for f in fam)


# recovering partitions -------------------------------------------------------

def test_is_recovering_examples():
    g = complete_bipartite(2, 2)
    assert is_recovering(g, Equipartition(4, ((0, 1), (2, 3))), K3, 0.0)
    assert is_recovering(Graph(6), Equipartition.contiguous(6, 3), K3, 0.0)
    t2 = turan(2, 8)
    mixed = Equipartition(8, ((0, 4), (1, 5), (2, 6), (3, 7)))
    q = quotient(t2, mixed)
    assert np.allclose(q.w, 0.5)
    assert dist_forbhom(q, K3) == pytest.approx(0.25, abs=1e-12)
    assert not is_recovering(t2, mixed, K3, 0.1)


def test_recover_examples():
    rec = find_recovering_partition(complete_bipartite(4, 4), K3, 0.0, 0.05, 2)
    assert rec.achieved_dist == 0
    empty = find_recovering_partition(Graph(10), K3, 0.0, 0.1, 3)
    assert empty.partition == Equipartition.contiguous(10, 3) and empty.retries == 0


def test_recover_planted_triangle_free_g24():
    g = planted_free(24, 0.1, K3, 5)
    assert not contains_forbidden(g, K3)
    rec = find_recovering_partition(g, K3, 0.2, 0.1, 2)
    assert rec.achieved_dist <= 0.2
    assert is_recovering(g, rec.partition, K3, 0.2)


def test_recover_rejects_non_free_input():
    with pytest.raises(ValueError):
        find_recovering_partition(complete_graph(5), K3, 0.1, 0.1, 2)


# r-colourability -------------------------------------------------------------

def brute_colorability(r, colors):
    k = r.n
    best = np.inf
    for code in range(colors ** k):
        c = np.array([(code // colors ** i) % colors for i in range(k)])
        best = min(best, r.w[c[:, None] == c[None, :]].sum())
    return best / k ** 2


def test_colorability_examples():
    assert colorability_distance(sides_quotient(), 2) == 0
    k3 = WeightedGraph.constant(3, 1.0, loops=False)
    assert colorability_distance(k3, 2) == pytest.approx(2 / 9)
    rng = np.random.default_rng(2)
    w = rng.random((4, 4))
    w = np.triu(w, 1) + np.triu(w, 1).T
    assert colorability_distance(WeightedGraph(w), 4) == 0


@settings(max_examples=40, deadline=None)
@given(weighted(max_k=6), st.integers(1, 3))
def test_colorability_matches_brute_force(r, colors):
    assert colorability_distance(r, colors) == pytest.approx(brute_colorability(r, colors), abs=1e-12)


def test_colorable_partition_bipartite():
    g = complete_bipartite(6, 6)
    res = colorable_recovering_partition(g, [0] * 6 + [1] * 6, 0.5)
    assert res.k == 4 and res.distance <= 0.5


def test_colorable_partition_edgeless():
    res = colorable_recovering_partition(Graph(9), [v % 3 for v in range(9)], 0.5)
    assert res.distance == 0


def test_colorable_partition_three_colour_seed11():
    rng = np.random.default_rng(11)
    n = 36
    colour = rng.integers(0, 3, size=n)
    base = erdos_renyi(n, 0.4, 11)
    g = Graph(n, [(u, v) for u, v in base.edges if colour[u] != colour[v]])
    res = colorable_recovering_partition(g, colour.tolist(), 0.25)
    assert res.k == 12 and res.distance <= 0.25


def test_colorable_partition_rejects_improper():
    with pytest.raises(ValueError):
        colorable_recovering_partition(complete_graph(3), [0, 0, 1], 0.5)
