import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chtnr.ch import CHParams, build_hierarchy
from chtnr.dijkstra import all_pairs, dijkstra
from chtnr.generators import diamond, p4, random_digraph, random_road_graph
from chtnr.graph import INFINITY, Graph
from chtnr.query import filter_internal
from chtnr.tnr import (
    EMPTY_INTERVAL,
    NO_REGION,
    build_tnr,
    compute_voronoi,
    find_access_raw,
    load_tnr,
    post_search_stall,
    renumber,
    save_tnr,
    select_transit_nodes,
    tnr_from_bytes,
    tnr_to_bytes,
)
from oracles import minimal_access

P4_ORDER = (0, 1, 2, 3)


@pytest.fixture
def p4_ch():
    return build_hierarchy(p4(), forced_order=P4_ORDER)


def test_select_transit(p4_ch):
    assert set(select_transit_nodes(p4_ch, 2)) == {2, 3}
    assert select_transit_nodes(p4_ch, 1) == [3]
    assert sorted(select_transit_nodes(p4_ch, 4)) == [0, 1, 2, 3]
    for k in (0, 5):
        with pytest.raises(ValueError):
            select_transit_nodes(p4_ch, k)


def test_access_raw_p4(p4_ch):
    t = {2, 3}
    assert find_access_raw(p4_ch, t, 0, "forward") == ([(2, 2)], [0, 1])
    assert find_access_raw(p4_ch, t, 1, "backward") == ([(2, 1)], [1])
    assert find_access_raw(p4_ch, t, 3, "forward") == ([(3, 0)], [])


def test_post_search_stall_examples():
    table = {(2, 3): 1, (3, 2): 1}.__getitem__

    def dt(a, b):
        return 0 if a == b else table((a, b))

    assert post_search_stall([(2, 2)], dt) == [(2, 2)]
    assert post_search_stall([(2, 2), (3, 2)], dt) == [(2, 2), (3, 2)]
    assert post_search_stall([(2, 2), (3, 2)], dt, strict=False) == [(2, 2), (3, 2)]
    # equal-cost detour: dropped only by the non-strict rule
    assert post_search_stall([(2, 2), (3, 3)], dt, strict=False) == [(2, 2)]
    assert post_search_stall([(2, 2), (3, 3)], dt) == [(2, 2), (3, 3)]
    assert post_search_stall([(2, 2), (3, 4)], dt) == [(2, 2)]


def test_post_search_stall_ignores_unreachable_pairs():
    assert post_search_stall([(0, 1), (1, 5)], lambda a, b: INFINITY) == [(0, 1), (1, 5)]


def test_voronoi_examples():
    g = p4()
    assert compute_voronoi(g, [2, 3]) == [2, 2, 2, 3]
    assert compute_voronoi(g, range(4)) == [0, 1, 2, 3]
    h = Graph.from_arcs(3, [(0, 1, 1), (1, 0, 1), (0, 2, 1)])
    # node 2 cannot reach the transit node 0
    assert compute_voronoi(h, [0]) == [0, 0, NO_REGION]
    with pytest.raises(ValueError):
        compute_voronoi(g, [])


def test_voronoi_tie_goes_to_lower_id():
    assert compute_voronoi(p4(), [0, 2]) == [0, 0, 2, 2]


def test_voronoi_definition():
    g = random_road_graph(90, seed=4)
    transit = random.Random(1).sample(range(90), 9)
    rep = compute_voronoi(g, transit)
    to = {t: dijkstra(g, t, reverse=True).dist for t in transit}
    for u in range(90):
        assert to[rep[u]][u] == min(to[t][u] for t in transit)
        assert rep[u] == min(t for t in transit if to[t][u] == to[rep[u]][u])
    assert all(rep[t] == t for t in transit)


def test_renumber_p4(p4_ch):
    perm = renumber(p4_ch, [3, 2])
    assert perm[3] == 0 and perm[2] == 1
    assert sorted(perm[:2]) == [2, 3]
    assert perm == [3, 2, 1, 0]


def test_renumber_all_transit_reverses_rank(p4_ch):
    assert renumber(p4_ch, select_transit_nodes(p4_ch, 4)) == [3, 2, 1, 0]


def test_renumber_single_node():
    ch = build_hierarchy(Graph.from_arcs(1, []))
    assert renumber(ch, [0]) == [0]


def test_renumber_unknown_strategy(p4_ch):
    with pytest.raises(ValueError):
        renumber(p4_ch, [3], other_strategy="bfs")
    with pytest.raises(ValueError):
        renumber(p4_ch, [3], transit_strategy="dfs-increasing")


@pytest.mark.parametrize("strategy", ["dfs-increasing", "dfs-decreasing", "input-level"])
def test_renumber_is_permutation(strategy):
    g = random_road_graph(70, seed=2)
    ch = build_hierarchy(g)
    transit = select_transit_nodes(ch, 10)
    perm = renumber(ch, transit, other_strategy=strategy)
    assert sorted(perm) == list(range(70))
    assert {perm[t] for t in transit} == set(range(10))


def test_p4_golden(p4_index):
    idx = p4_index
    assert idx.transit_nodes() == [3, 2]
    assert idx.forward_access(0) == [(2, 2)]
    assert idx.backward_access(3) == [(3, 0)]
    assert [[idx.table_distance(a, b) for b in (2, 3)] for a in (2, 3)] == [[0, 1], [1, 0]]
    assert idx.regions(0) == [2]
    assert idx.interval(3) == EMPTY_INTERVAL


def test_all_transit_index():
    g = diamond()
    idx = build_tnr(g, k=5)
    for v in range(5):
        assert idx.forward_access(v) == [(v, 0)]
        assert idx.backward_access(v) == [(v, 0)]
        assert idx.regions(v) == []
        assert idx.interval(v) == EMPTY_INTERVAL


def test_diamond_filter_false_pairs_use_exact_table():
    g = diamond()
    idx = build_tnr(g, k=2)
    truth = all_pairs(g)
    from chtnr.query import locality_filter, table_query

    for s in range(5):
        for t in range(5):
            if not locality_filter(idx, s, t):
                assert table_query(idx, s, t) == truth[s][t]


def test_k_out_of_range():
    with pytest.raises(ValueError):
        build_tnr(p4(), k=0)
    with pytest.raises(ValueError):
        build_tnr(p4(), k=5)


@pytest.fixture(scope="module")
def road_index():
    g = random_road_graph(100, seed=21)
    return g, build_tnr(g, k=12, debug=True)


def test_layout_invariants(road_index):
    g, idx = road_index
    n, k = idx.node_count, idx.k
    ai, ri = idx.access_index, idx.region_index
    assert len(ai) == 2 * n + 1 and ai[-1] == len(idx.access_node)
    assert len(ri) == n + 1 and ri[-1] == len(idx.region_ids)
    assert all(a <= b for a, b in zip(ai, ai[1:]))
    for j in range(2 * n):
        ids = idx.access_node[ai[j] : ai[j + 1]]
        assert ids == sorted(ids) and all(a < k for a in ids)
    for v in range(n):
        regs = idx.region_ids[ri[v] : ri[v + 1]]
        assert regs == sorted(set(regs))
    assert {idx.perm[t] for t in idx.transit_nodes()} == set(range(k))


def test_access_distances_exact(road_index):
    g, idx = road_index
    truth = all_pairs(g)
    for v in range(g.node_count):
        assert all(truth[v][a] == d for a, d in idx.forward_access(v))
        assert all(truth[a][v] == d for a, d in idx.backward_access(v))


def test_search_space_membership(road_index):
    g, idx = road_index
    for v in range(g.node_count):
        for direction in ("forward", "backward"):
            space = idx.search_space(v, direction)
            assert (v in space) != idx.is_transit(v)
            assert not any(idx.is_transit(u) for u in space)


def test_search_space_requires_debug():
    idx = build_tnr(diamond(), k=2)
    with pytest.raises(RuntimeError):
        idx.search_space(0)


@pytest.mark.parametrize("seed", range(3))
def test_access_superset_and_minimal(seed):
    # tie-preserving contraction keeps every shortest path representable
    g = random_road_graph(70, seed=60 + seed)
    idx = build_tnr(g, CHParams(strict_witness=True), k=8)
    transit = set(idx.transit_nodes())
    ich, perm, inv = idx.ch, idx.perm, idx.inv
    tset = range(idx.k)
    for v in range(g.node_count):
        for direction, backward, stored in (
            ("forward", False, idx.forward_access(v)),
            ("backward", True, idx.backward_access(v)),
        ):
            oracle = minimal_access(g, transit, v, backward)
            raw, _ = find_access_raw(ich, tset, perm[v], direction, idx.stall_hops)
            raw = {(inv[a], d) for a, d in raw}
            assert oracle <= raw
            assert set(stored) == oracle


def test_default_access_sets_cover_some_shortest_path(road_index):
    # without tie preservation every stored set still reaches each target optimally
    g, idx = road_index
    truth = all_pairs(g)
    for v in range(0, g.node_count, 7):
        acc = idx.forward_access(v)
        for a in idx.transit_nodes():
            assert min(d + truth[b][a] for b, d in acc) == truth[v][a]


def test_serialization(tmp_path, road_index):
    _, idx = road_index
    blob = tnr_to_bytes(idx)
    back = tnr_from_bytes(blob)
    assert tnr_to_bytes(back) == blob
    save_tnr(idx, tmp_path / "idx.bin")
    again = load_tnr(tmp_path / "idx.bin")
    assert again.perm == idx.perm and again.table == idx.table
    assert again.region_ids == idx.region_ids


def test_build_is_deterministic():
    g = random_road_graph(60, seed=8)
    assert tnr_to_bytes(build_tnr(g, k=6)) == tnr_to_bytes(build_tnr(g, k=6))


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 30), st.integers(0, 10**6), st.integers(0, 2))
def test_interval_disjoint_implies_spaces_disjoint(n, seed, stall):
    g = random_digraph(n, 3 * n, seed=seed)
    idx = build_tnr(g, k=max(1, n // 5), stall_hops=stall, debug=True)
    lo, hi = idx.interval_lo, idx.interval_hi
    inv = idx.inv
    for s in range(n):
        for t in range(n):
            if max(lo[s], lo[t]) > min(hi[s], hi[t]):
                assert filter_internal(idx, s, t) == (False, True)
                a = set(idx.search_space(inv[s]))
                b = set(idx.search_space(inv[t]))
                assert not a & b


def test_coverage_shrinks_with_k(grid_indexes):
    _, indexes = grid_indexes
    fractions = []
    for k in (16, 64, 256):
        idx = indexes[k]
        n = idx.node_count
        hits = sum(filter_internal(idx, s, t)[0] for s in range(n) for t in range(n))
        fractions.append(hits / (n * n))
    assert fractions[0] >= fractions[1] >= fractions[2]
