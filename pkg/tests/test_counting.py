import math
from itertools import combinations

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from forbcount.acceptance import naive_count
from forbcount.counting import (
    BudgetExceeded,
    binary_entropy,
    count_forb,
    entropy_binomial_bound_check,
    log2_int,
    minimal_copies,
    subgraph_copies,
    z_value,
)
from forbcount.generators import turan
from forbcount.graphs import ForbiddenFamily, Graph, builtin_graph, complete_graph

K3 = ForbiddenFamily.from_names("K3")

# Triangle-free labelled graphs on n vertices, from the vertex-extension
# oracle below (run to n = 9 once and frozen).
TRIANGLE_FREE = {3: 7, 4: 41, 5: 388, 6: 5789, 7: 133501, 8: 4682270, 9: 246348115}


def triangle_free_by_extension(n):
    """Add vertices one at a time; each new vertex joins an independent set of earlier vertices."""
    def independent_subsets(adj, avail):
        if not avail:
            yield 0
            return
        v = avail.bit_length() - 1
        rest = avail & ~(1 << v)
        yield from independent_subsets(adj, rest)
        for s in independent_subsets(adj, rest & ~adj[v]):
            yield s | (1 << v)

    def build(adj, k):
        if k == n:
            return 1
        total = 0
        for S in list(independent_subsets(adj, (1 << k) - 1)):
            new = [a | ((S >> u & 1) << k) for u, a in enumerate(adj)] + [S]
            total += build(new, k + 1)
        return total

    return build([], 0)


@st.composite
def small_graphs(draw, max_n=7, max_m=14):
    n = draw(st.integers(2, max_n))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(max_m, len(pairs))))
    return Graph(n, chosen)


families = st.lists(st.sampled_from(["K2", "K3", "K4", "P3", "P4", "C4", "C5"]),
                    min_size=1, max_size=2, unique=True).map(ForbiddenFamily.from_names)


def test_oracle_reproduces_frozen_values():
    for n in range(3, 8):
        assert triangle_free_by_extension(n) == TRIANGLE_FREE[n]


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_complete_graph_counts(n):
    assert count_forb(complete_graph(n), K3).count == TRIANGLE_FREE[n]


@pytest.mark.slow
def test_k9_count():
    assert count_forb(complete_graph(9), K3).count == TRIANGLE_FREE[9]


def test_count_examples():
    assert count_forb(complete_graph(3), K3).count == 7
    assert count_forb(complete_graph(4), K3).count == 64 - (32 - 12 + 4 - 1)
    assert count_forb(complete_graph(5), ForbiddenFamily.from_names("K2,K3")).count == 1
    for n in (4, 6, 8, 10):
        assert count_forb(turan(2, n), K3).count == 2 ** (n * n // 4)


def test_z_examples():
    assert z_value(complete_graph(3), K3) == pytest.approx(math.log2(7) / 9)
    assert round(z_value(complete_graph(3), K3), 4) == 0.3119
    assert z_value(turan(2, 8), K3) == 0.25
    assert z_value(Graph(6), K3) == 0.0


def test_count_result_fields():
    res = count_forb(complete_graph(5), K3)
    assert res.n == 5 and res.m == 10 and res.nodes > 0 and res.elapsed >= 0
    assert res.z == pytest.approx(math.log2(388) / 25)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        count_forb(complete_graph(10), K3)
    with pytest.raises(BudgetExceeded) as info:
        count_forb(complete_graph(7), K3, node_budget=1000, predict=False)
    assert info.value.nodes > 1000


def test_log2_int_large():
    assert log2_int(2 ** 200) == 200.0
    assert log2_int(3 * 2 ** 300) == pytest.approx(300 + math.log2(3))


def test_copies():
    assert len(subgraph_copies(complete_graph(4), complete_graph(3))) == 4
    assert len(subgraph_copies(complete_graph(4), builtin_graph("C4"))) == 3
    # a K3 copy contains every P3 inside it, so only the P3 copies survive minimality
    fam = ForbiddenFamily.from_names("P3,K3")
    assert all(len(c) == 2 for c in minimal_copies(complete_graph(4), fam))


@settings(max_examples=120, deadline=None)
@given(small_graphs(), families)
def test_matches_full_enumeration(g, fam):
    assert count_forb(g, fam).count == naive_count(g, fam)


@settings(max_examples=60, deadline=None)
@given(small_graphs(), families, st.data())
def test_monotone_in_host(g, fam, data):
    keep = data.draw(st.lists(st.booleans(), min_size=g.m, max_size=g.m))
    sub = g.spanning([e for e, k in zip(g.edges, keep) if k])
    assert count_forb(sub, fam).count <= count_forb(g, fam).count


@settings(max_examples=60, deadline=None)
@given(small_graphs(), families, families)
def test_monotone_in_family(g, fam, extra):
    bigger = ForbiddenFamily(fam.members + extra.members)
    assert count_forb(g, bigger).count <= count_forb(g, fam).count


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.data())
def test_lower_bound_from_free_subgraph(g, data):
    keep = data.draw(st.lists(st.booleans(), min_size=g.m, max_size=g.m))
    h = g.spanning([e for e, k in zip(g.edges, keep) if k])
    if subgraph_copies(h, complete_graph(3)):
        return
    assert count_forb(g, K3).count >= 2 ** h.m


def test_split_depth_does_not_change_count():
    g = complete_graph(7)
    counts = {count_forb(g, K3, split_depth=d).count for d in (0, 1, 2, 5, 21)}
    assert counts == {TRIANGLE_FREE[7]}


# entropy --------------------------------------------------------------------

def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    mpmath.mp.dps = 40
    x = mpmath.mpf(1) / 4
    ref = -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)
    assert binary_entropy(0.25) == pytest.approx(float(ref), abs=1e-15)
    assert binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)
    with pytest.raises(ValueError):
        binary_entropy(0.0)


@settings(max_examples=100)
@given(st.floats(1e-6, 0.125))
def test_entropy_small_x_bound(x):
    assert binary_entropy(x) <= -2 * x * math.log2(x) + 1e-15


@settings(max_examples=100)
@given(st.floats(1e-6, 1 - 1e-6))
def test_entropy_symmetric(x):
    assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-12)


def test_entropy_bound_examples():
    assert entropy_binomial_bound_check(10, 2)
    assert 56 <= 2 ** (binary_entropy(0.2) * 10)
    assert entropy_binomial_bound_check(4, 1)
    with pytest.raises(ValueError):
        entropy_binomial_bound_check(4, 2)


def test_entropy_bound_sweep():
    for n in range(3, 31):
        for k in range(1, (n + 1) // 2):
            if 2 * k < n:
                assert entropy_binomial_bound_check(n, k), (n, k)
