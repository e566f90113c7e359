"""Plain Dijkstra, used as the exactness oracle and for Dijkstra ranks.

Ties in the queue are broken by lower node id, so the settle order is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Iterable

from .graph import INFINITY, Graph


@dataclass
class DijkstraResult:
    dist: list[int]
    settle_order: list[int] = field(default_factory=list)
    parent: list[int] | None = None

    def rank_of(self, v: int) -> int | None:
        """1-based settle position of ``v``, or None if it was not settled."""
        try:
            return self.settle_order.index(v) + 1
        except ValueError:
            return None


def dijkstra(
    g: Graph,
    s: int,
    targets: Iterable[int] | None = None,
    rank_limit: int | None = None,
    reverse: bool = False,
) -> DijkstraResult:
    """Single-source distances from ``s`` (to ``s`` when ``reverse``).

    Stops once every node in ``targets`` is settled or ``rank_limit`` nodes
    have been settled. Unreached entries stay ``INFINITY``.
    """
    g.check_node(s)
    n = g.node_count
    if reverse:
        first, nbr, wgt = g.first_in, g.tail, g.rev_weight
    else:
        first, nbr, wgt = g.first_out, g.head, g.weight
    dist = [INFINITY] * n
    parent = [-1] * n
    done = bytearray(n)
    order: list[int] = []
    remaining = None
    if targets is not None:
        remaining = set(targets)
        for t in remaining:
            g.check_node(t)
    dist[s] = 0
    heap = [(0, s)]
    while heap:
        d, u = heappop(heap)
        if done[u]:
            continue
        done[u] = 1
        order.append(u)
        if remaining is not None:
            remaining.discard(u)
            if not remaining:
                break
        if rank_limit is not None and len(order) >= rank_limit:
            break
        for i in range(first[u], first[u + 1]):
            v = nbr[i]
            nd = d + wgt[i]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heappush(heap, (nd, v))
    if heap:
        # stopped early: tentative labels are not exact
        for v in range(n):
            if not done[v]:
                dist[v] = INFINITY
                parent[v] = -1
    return DijkstraResult(dist, order, parent)


def distances(g: Graph, s: int, reverse: bool = False) -> list[int]:
    return dijkstra(g, s, reverse=reverse).dist


def all_pairs(g: Graph) -> list[list[int]]:
    return [dijkstra(g, s).dist for s in range(g.node_count)]
