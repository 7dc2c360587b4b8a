import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memesim.errors import PreconditionError
from memesim.generate import (SccpParams, _pair_from_index, er_baseline, generate_er,
                              generate_sccp, median_degree_ratio, preferential_select,
                              split_edges)


def test_node_count_formula():
    lg = generate_sccp(SccpParams(k=3, s=4, t=1, f=0.7, r1=2, r2=3))
    assert lg.graph.node_count == 15


def test_cliques_only_gives_disjoint_triangles():
    lg = generate_sccp(SccpParams(k=2, s=3, t=0, f=0.6, r1=1, r2=5))
    g = lg.graph
    assert g.edge_count == 6
    assert list(lg.coreness) == [2] * 6
    assert set(zip(g.src.tolist(), g.dst.tolist())) == {
        (0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}


def test_per_community_growth_counts():
    lg = generate_sccp(SccpParams(k=3, s=3, t=(0, 2, 5), f=0.7, r1=1, r2=2))
    assert lg.graph.node_count == 16
    assert list(np.bincount(lg.seed_community)) == [3, 5, 8]


@pytest.mark.parametrize("kw", [
    dict(k=1, s=1, t=0, f=0.7, r1=1, r2=2),
    dict(k=2, s=1, t=0, f=0.7, r1=1, r2=2),
    dict(k=2, s=3, t=0, f=0.4, r1=1, r2=2),
    dict(k=2, s=3, t=0, f=0.7, r1=3, r2=2),
    dict(k=2, s=3, t=0, f=0.7, r1=0, r2=2),
    dict(k=2, s=3, t=(1,), f=0.7, r1=1, r2=2),
    dict(k=2, s=3, t=-1, f=0.7, r1=1, r2=2),
])
def test_invalid_params(kw):
    with pytest.raises(PreconditionError):
        SccpParams(**kw)


def test_m_is_capped_not_an_error():
    # a single tiny community has no inter-community targets at all
    lg = generate_sccp(SccpParams(k=1, s=2, t=3, f=0.5, r1=4, r2=4))
    assert lg.capped == 3
    assert lg.growth_inter == 0


@pytest.mark.parametrize("m,f,want", [(5, 0.7, (4, 1)), (4, 0.7, (3, 1)), (10, 0.7, (7, 3)),
                                      (2, 0.5, (1, 1)), (3, 1.0, (3, 0))])
def test_split_edges(m, f, want):
    assert split_edges(m, f) == want


def test_growth_edges_respect_split_and_targets():
    p = SccpParams(k=4, s=5, t=30, f=0.7, r1=2, r2=6, rng_seed=3)
    lg = generate_sccp(p)
    g = lg.graph
    base = p.k * p.s
    arrivals = np.arange(base, g.node_count)
    # every growth edge joins an arrival to an earlier node
    growth = g.dst >= base
    assert np.all(g.src[growth] < g.dst[growth])
    counts = np.bincount(g.dst[growth], minlength=g.node_count)[arrivals]
    assert counts.tolist() == lg.m_drawn
    assert lg.growth_intra + lg.growth_inter == sum(lg.m_drawn)
    assert lg.growth_intra == sum(split_edges(m, p.f)[0] for m in lg.m_drawn)


def test_core_relabelled_as_extra_community():
    lg = generate_sccp(SccpParams(k=4, s=5, t=30, f=0.7, r1=2, r2=6, rng_seed=3))
    assert lg.n_communities == 5
    assert np.all(lg.community[lg.core] == 4)
    assert np.all(lg.community[~lg.core] == lg.seed_community[~lg.core])
    assert lg.core.sum() == int(np.ceil(0.1 * lg.graph.node_count))
    assert lg.partition.n_communities == 5


def test_generation_is_deterministic():
    p = SccpParams(k=3, s=4, t=20, f=0.8, r1=1, r2=5, rng_seed=9)
    a, b = generate_sccp(p), generate_sccp(p)
    assert np.array_equal(a.graph.src, b.graph.src) and np.array_equal(a.graph.dst, b.graph.dst)
    assert np.array_equal(a.core, b.core)
    c = generate_sccp(SccpParams(k=3, s=4, t=20, f=0.8, r1=1, r2=5, rng_seed=10))
    assert not np.array_equal(a.graph.src, c.graph.src) or not np.array_equal(
        a.graph.dst, c.graph.dst)


def test_preferential_forced_choices():
    rng = np.random.default_rng(0)
    assert list(preferential_select([7], np.zeros(8), 1, rng)) == [7]
    assert sorted(preferential_select([0, 1], np.zeros(2), 2, rng)) == [0, 1]


def test_preferential_frequency_matches_degree_plus_one():
    rng = np.random.default_rng(2024)
    deg = np.array([9, 0])
    hits = sum(int(preferential_select([0, 1], deg, 1, rng)[0] == 0) for _ in range(100_000))
    assert abs(hits / 100_000 - 10 / 11) < 0.02


def test_preferential_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(PreconditionError):
        preferential_select([0, 1], np.zeros(2), 3, rng)
    assert preferential_select([0, 1], np.zeros(2), 0, rng).size == 0


def test_preferential_excludes_arriving_node():
    rng = np.random.default_rng(0)
    out = preferential_select([0, 1, 2], np.zeros(3), 2, rng, arriving=1)
    assert sorted(out) == [0, 2]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.data())
def test_preferential_returns_distinct_candidates(size, data):
    count = data.draw(st.integers(0, size))
    seed = data.draw(st.integers(0, 2**32 - 1))
    cand = np.arange(100, 100 + size)
    deg = np.zeros(200)
    deg[cand] = data.draw(st.lists(st.integers(0, 50), min_size=size, max_size=size))
    out = preferential_select(cand, deg, count, np.random.default_rng(seed))
    assert len(set(out.tolist())) == count
    assert set(out.tolist()) <= set(cand.tolist())


def test_er_examples():
    tri = generate_er(3, 3, rng_seed=5)
    assert set(zip(tri.src.tolist(), tri.dst.tolist())) == {(0, 1), (0, 2), (1, 2)}
    empty = generate_er(5, 0)
    assert empty.node_count == 5 and empty.edge_count == 0
    big = generate_er(4000, 34650, rng_seed=1)
    assert big.edge_count == 34650 and big.node_count == 4000


def test_er_rejects_too_many_edges():
    with pytest.raises(PreconditionError):
        generate_er(4, 7)


def test_pair_index_enumeration_is_exact():
    for n in (2, 3, 7, 50):
        want = list(itertools.combinations(range(n), 2))
        i, j = _pair_from_index(np.arange(len(want)), n)
        assert list(zip(i.tolist(), j.tolist())) == want
    n = 100_000
    total = n * (n - 1) // 2
    i, j = _pair_from_index(np.array([0, total - 1, n - 2, n - 1]), n)
    assert list(zip(i.tolist(), j.tolist())) == [(0, 1), (n - 2, n - 1), (0, n - 1), (1, 2)]


def test_er_baseline_matches_size():
    lg = generate_sccp(SccpParams(k=3, s=4, t=20, f=0.7, r1=1, r2=5))
    er = er_baseline(lg.graph, rng_seed=2)
    assert (er.node_count, er.edge_count) == (lg.graph.node_count, lg.graph.edge_count)
    assert median_degree_ratio(er) > 0
