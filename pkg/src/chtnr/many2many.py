"""Distance tables via the two-phase bucket algorithm over a hierarchy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ch import CHIndex, upward_search
from .graph import INFINITY


@dataclass
class DistanceTable:
    sources: list[int]
    targets: list[int]
    rows: list[list[int]]

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self.rows[i][j]

    def entry(self, s: int, t: int) -> int:
        """Distance by node id (first occurrence of each id)."""
        return self.rows[self.sources.index(s)][self.targets.index(t)]

    def flat(self) -> list[int]:
        return [d for row in self.rows for d in row]


def fill_buckets(ch: CHIndex, targets: Sequence[int]) -> list[list[tuple[int, int]]]:
    """Per-node lists of (target column, distance node -> target)."""
    buckets: list[list[tuple[int, int]]] = [[] for _ in range(ch.node_count)]
    for j, t in enumerate(targets):
        search = upward_search(ch, t, "backward")
        dist = search.dist
        for u in search.settled:
            buckets[u].append((j, dist[u]))
    return buckets


def build_distance_table(
    ch: CHIndex, sources: Sequence[int], targets: Sequence[int]
) -> DistanceTable:
    for v in list(sources) + list(targets):
        ch.check_node(v)
    sources, targets = list(sources), list(targets)
    rows = [[INFINITY] * len(targets) for _ in sources]
    if not sources or not targets:
        return DistanceTable(sources, targets, rows)
    buckets = fill_buckets(ch, targets)
    for i, s in enumerate(sources):
        row = rows[i]
        search = upward_search(ch, s, "forward")
        dist = search.dist
        for u in search.settled:
            du = dist[u]
            for j, dt in buckets[u]:
                d = du + dt
                if d < row[j]:
                    row[j] = d
    return DistanceTable(sources, targets, rows)
