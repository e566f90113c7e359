import random

import pytest

from chtnr.dijkstra import dijkstra
from chtnr.generators import random_digraph, random_road_graph
from chtnr.graph import INFINITY, Graph
from chtnr.target import (
    build_target_array,
    build_target_oracle,
    covering_backward_search,
    one_to_target,
    oracle_from_bytes,
    oracle_to_bytes,
)
from chtnr.tnr import build_tnr
from oracles import uncovered_nodes


def test_p4_target_array(p4_index):
    oracle = build_target_oracle(p4_index, 0)
    got = {p4_index.inv[a]: d for a, d in enumerate(oracle.transit_dist)}
    assert got == {2: 2, 3: 3}


def test_transit_target_array(p4_index):
    p = p4_index.perm[2]
    assert build_target_array(p4_index, p)[p] == 0


def test_p4_local_map(p4_index):
    oracle = build_target_oracle(p4_index, 0)
    inv = p4_index.inv
    assert {inv[v]: d for v, d in oracle.local_entries().items()} == {0: 0, 1: 1}


def test_transit_target_has_empty_map(p4_index):
    assert build_target_oracle(p4_index, 3).local_entries() == {}


def test_all_transit_empty_map():
    g = random_road_graph(20, seed=1)
    idx = build_tnr(g, k=20)
    assert covering_backward_search(idx, 5) == [INFINITY] * 20


def test_p4_one_to_target(p4_index):
    oracle = build_target_oracle(p4_index, 0)
    assert [one_to_target(oracle, p4_index, s) for s in range(4)] == [0, 1, 2, 3]
    one_to_target(oracle, p4_index, 3)
    assert oracle.probes == 1 and oracle.lookups == 1


def test_unreachable_target_array():
    g = Graph.from_arcs(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1), (0, 2, 5)])
    idx = build_tnr(g, k=1)
    t = 0 if idx.is_transit(2) else 2
    oracle = build_target_oracle(idx, t)
    for s in range(4):
        assert one_to_target(oracle, idx, s) == dijkstra(g, t, reverse=True).dist[s]


@pytest.mark.parametrize("seed", range(3))
def test_matches_reverse_dijkstra(seed):
    g = random_road_graph(120, seed=seed + 40)
    idx = build_tnr(g, k=12)
    rng = random.Random(seed)
    for t in rng.sample(range(120), 5):
        oracle = build_target_oracle(idx, t)
        truth = dijkstra(g, t, reverse=True).dist
        for s in range(120):
            assert one_to_target(oracle, idx, s) == truth[s]
            assert oracle.lookups == len(idx.forward_access(s))
            assert oracle.lookups + oracle.probes <= len(idx.forward_access(s)) + 1


@pytest.mark.parametrize("seed", range(6))
def test_coverage_soundness(seed):
    g = random_digraph(40, 120, seed=seed)
    idx = build_tnr(g, k=6)
    transit = set(idx.transit_nodes())
    for t in range(40):
        oracle = build_target_oracle(idx, t)
        local = {idx.inv[v]: d for v, d in oracle.local_entries().items()}
        expected = uncovered_nodes(g, transit, t)
        assert expected.items() <= local.items()
        truth = dijkstra(g, t, reverse=True).dist
        assert all(truth[v] == d for v, d in local.items())


def test_serialization(p4_index):
    oracle = build_target_oracle(p4_index, 1)
    back = oracle_from_bytes(oracle_to_bytes(oracle))
    assert back.target == oracle.target
    assert back.transit_dist == oracle.transit_dist
    assert back.local_dist == oracle.local_dist
    with pytest.raises(ValueError):
        oracle_from_bytes(b"NOPE" + bytes(20))
