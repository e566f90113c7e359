"""Small synthetic graphs: hand fixtures, road-like random graphs and grids."""

from __future__ import annotations

import random

from .graph import Graph


def bidirected(n: int, edges) -> Graph:
    arcs = []
    for u, v, w in edges:
        arcs.append((u, v, w))
        arcs.append((v, u, w))
    return Graph.from_arcs(n, arcs)


def path_graph(n: int, weight: int = 1) -> Graph:
    return bidirected(n, [(i, i + 1, weight) for i in range(n - 1)])


def p4() -> Graph:
    """Undirected path 0-1-2-3 with unit weights."""
    return path_graph(4)


def diamond() -> Graph:
    return bidirected(5, [(0, 1, 2), (1, 2, 2), (0, 3, 1), (3, 2, 4), (2, 4, 1)])


def triangle() -> Graph:
    return bidirected(3, [(0, 1, 1), (1, 2, 1), (0, 2, 2)])


def star(leaves: int, weight: int = 1) -> Graph:
    return bidirected(leaves + 1, [(0, i, weight) for i in range(1, leaves + 1)])


def grid(rows: int, cols: int, weight: int = 1) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, weight))
            if r + 1 < rows:
                edges.append((v, v + cols, weight))
    return bidirected(rows * cols, edges)


def random_road_graph(
    n: int,
    seed: int,
    neighbours: int = 3,
    max_weight: int = 1000,
    one_way_fraction: float = 0.1,
) -> Graph:
    """Strongly connected, road-like random graph.

    Nodes are random points in the unit square joined to their nearest
    neighbours in both directions (independent weights per direction), with a
    few extra one-way arcs. Components are stitched together by their
    closest node pairs.
    """
    rng = random.Random(seed)
    pts = [(rng.random(), rng.random()) for _ in range(n)]

    def d2(a: int, b: int) -> float:
        return (pts[a][0] - pts[b][0]) ** 2 + (pts[a][1] - pts[b][1]) ** 2

    pairs: set[tuple[int, int]] = set()
    for v in range(n):
        near = sorted((d2(v, u), u) for u in range(n) if u != v)[:neighbours]
        for _, u in near:
            pairs.add((min(u, v), max(u, v)))

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    while True:
        roots = {find(v) for v in range(n)}
        if len(roots) <= 1:
            break
        comp0 = [v for v in range(n) if find(v) == find(0)]
        rest = [v for v in range(n) if find(v) != find(0)]
        _, a, b = min((d2(a, b), a, b) for a in comp0 for b in rest)
        pairs.add((min(a, b), max(a, b)))
        parent[find(a)] = find(b)

    arcs = []
    for a, b in sorted(pairs):
        arcs.append((a, b, rng.randint(1, max_weight)))
        arcs.append((b, a, rng.randint(1, max_weight)))
    extra = int(one_way_fraction * len(pairs))
    for _ in range(extra):
        v = rng.randrange(n)
        near = sorted((d2(v, u), u) for u in range(n) if u != v)[: 2 * neighbours]
        u = rng.choice(near)[1]
        arcs.append((v, u, rng.randint(1, max_weight)))
    return Graph.from_arcs(n, arcs)


def random_digraph(n: int, m: int, seed: int, max_weight: int = 1000) -> Graph:
    """Uniform random arcs; usually not strongly connected."""
    rng = random.Random(seed)
    arcs = []
    for _ in range(m):
        u, v = rng.randrange(n), rng.randrange(n)
        arcs.append((u, v, rng.randint(1, max_weight)))
    return Graph.from_arcs(n, arcs)
