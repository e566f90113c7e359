"""Transit node routing preprocessing on top of a contraction hierarchy.

After renumbering, transit nodes carry the ids ``0 .. k-1``, so ``v < k``
is the transit test everywhere below. All arrays of a ``TNRIndex`` use these
internal ids; ``perm`` maps input ids to internal ids.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Callable, Container, Sequence

from .ch import (
    CHIndex,
    CHParams,
    build_hierarchy,
    ch_from_bytes,
    ch_to_bytes,
    permute_hierarchy,
    upward_search,
)
from .graph import (
    INFINITY,
    Graph,
    GraphError,
    apply_permutation,
    graph_from_bytes,
    graph_to_bytes,
    invert_permutation,
    pack_u32,
    unpack_u32,
)
from .many2many import build_distance_table

log = logging.getLogger(__name__)

NO_REGION = INFINITY
EMPTY_INTERVAL = (INFINITY, 0)

TRANSIT_STRATEGIES = ("input-level",)
OTHER_STRATEGIES = ("dfs-increasing", "dfs-decreasing", "input-level")

TNR_MAGIC = b"TNRX"
TNR_VERSION = 1


def select_transit_nodes(ch: CHIndex, k: int) -> list[int]:
    """The ``k`` highest-ranked nodes, most important first."""
    n = ch.node_count
    if not 1 <= k <= n:
        raise ValueError(f"transit set size {k} outside [1, {n}]")
    return ch.order[n - k :][::-1]


def find_access_raw(
    ch: CHIndex,
    transit: Container[int],
    v: int,
    direction: str = "forward",
    stall_hops: int = 1,
) -> tuple[list[tuple[int, int]], list[int]]:
    """Candidate access nodes and the sub-transit search space of ``v``.

    Runs a half search that does not relax arcs out of transit nodes.
    Returns ``(candidates, space)``: settled transit nodes with their
    tentative distances, and the settled non-transit nodes, both sorted by
    id. Stalled nodes appear in neither.
    """
    search = upward_search(ch, v, direction, stall_hops, prune=transit)
    dist = search.dist
    candidates = []
    space = []
    for u in search.settled:
        if u in transit:
            candidates.append((u, dist[u]))
        else:
            space.append(u)
    candidates.sort()
    space.sort()
    return candidates, space


def post_search_stall(
    candidates: Sequence[tuple[int, int]],
    table: Callable[[int, int], int],
    strict: bool = True,
) -> list[tuple[int, int]]:
    """Drop candidates that another candidate reaches more cheaply.

    ``table(a, b)`` is the transit distance in the direction of travel away
    from the node (for backward access sets pass the transposed table).

    With ``strict`` a candidate goes only if the detour is strictly shorter,
    which keeps every transit node that is first on *some* shortest path.
    ``strict=False`` also drops equal-cost detours; candidates are then
    scanned by (distance, id) and the one scanned first survives a tie.
    Output is sorted by id.
    """
    kept: list[tuple[int, int]] = []
    for a, d in sorted(candidates, key=lambda c: (c[1], c[0])):
        dominated = False
        for b, db in kept:
            via = table(b, a)
            if via == INFINITY:
                continue
            if db + via < d or (not strict and db + via == d):
                dominated = True
                break
        if not dominated:
            kept.append((a, d))
    kept.sort()
    return kept


def compute_voronoi(g: Graph, transit: Sequence[int]) -> list[int]:
    """Closest transit node (by distance *to* it) for every node.

    Multi-source Dijkstra on the reversed graph; ties go to the lower
    transit id. Unreached nodes get ``NO_REGION``.
    """
    if not transit:
        raise ValueError("empty transit set")
    n = g.node_count
    first, nbr, wgt = g.first_in, g.tail, g.rev_weight
    rep = [NO_REGION] * n
    best: dict[int, tuple[int, int]] = {}
    heap = []
    for t in sorted(set(transit)):
        best[t] = (0, t)
        heap.append((0, t, t))
    heap.sort()
    while heap:
        d, r, u = heappop(heap)
        if rep[u] != NO_REGION or best[u] != (d, r):
            continue
        rep[u] = r
        for i in range(first[u], first[u + 1]):
            x = nbr[i]
            if rep[x] != NO_REGION:
                continue
            label = (d + wgt[i], r)
            old = best.get(x)
            if old is None or label < old:
                best[x] = label
                heappush(heap, (label[0], r, x))
    return rep


def hierarchy_levels(ch: CHIndex) -> list[int]:
    """0 for nodes without lower neighbours, else 1 + max level below."""
    level = [0] * ch.node_count
    for v in ch.order:
        lv = level[v] + 1
        for i in range(ch.up_first[v], ch.up_first[v + 1]):
            w = ch.up_head[i]
            if level[w] < lv:
                level[w] = lv
        for i in range(ch.down_first[v], ch.down_first[v + 1]):
            u = ch.down_tail[i]
            if level[u] < lv:
                level[u] = lv
    return level


def renumber(
    ch: CHIndex,
    transit: Sequence[int],
    transit_strategy: str = "input-level",
    other_strategy: str = "dfs-increasing",
) -> list[int]:
    """Permutation (input id -> new id) putting the transit nodes at [0, k)."""
    if transit_strategy not in TRANSIT_STRATEGIES:
        raise ValueError(f"unknown transit renumbering strategy {transit_strategy!r}")
    if other_strategy not in OTHER_STRATEGIES:
        raise ValueError(f"unknown renumbering strategy {other_strategy!r}")
    n = ch.node_count
    k = len(transit)
    is_transit = bytearray(n)
    for t in transit:
        is_transit[t] = 1
    level = hierarchy_levels(ch)
    perm = [-1] * n
    for new, v in enumerate(sorted(transit, key=lambda v: (-level[v], v))):
        perm[v] = new
    others = [v for v in range(n) if not is_transit[v]]
    if other_strategy == "input-level":
        for new, v in enumerate(sorted(others, key=lambda v: (-level[v], v)), k):
            perm[v] = new
        return perm

    def upward(v: int) -> list[int]:
        nb = set(ch.up_head[ch.up_first[v] : ch.up_first[v + 1]])
        nb.update(ch.down_tail[ch.down_first[v] : ch.down_first[v + 1]])
        return sorted(x for x in nb if not is_transit[x])

    post_order: list[int] = []
    done = bytearray(n)
    for start in others:
        if done[start]:
            continue
        # the upward graph is acyclic, so "not yet numbered" is a sufficient visit test
        stack = [(start, iter(upward(start)))]
        while stack:
            v, it = stack[-1]
            for x in it:
                if not done[x]:
                    stack.append((x, iter(upward(x))))
                    break
            else:
                stack.pop()
                if not done[v]:
                    done[v] = 1
                    post_order.append(v)
    if other_strategy == "dfs-increasing":
        for i, v in enumerate(post_order):
            perm[v] = k + i
    else:
        for i, v in enumerate(post_order):
            perm[v] = n - 1 - i
    return perm


@dataclass(eq=False)
class TNRIndex:
    node_count: int
    k: int
    stall_hops: int
    transit_strategy: str
    other_strategy: str
    perm: list[int]  # input id -> internal id
    table: list[int]  # k*k row-major, internal transit ids
    access_index: list[int]  # 2n+1: per node forward start, backward start; terminator
    access_node: list[int]
    access_dist: list[int]
    region_index: list[int]  # n+1
    region_ids: list[int]
    interval_lo: list[int]
    interval_hi: list[int]
    ch: CHIndex  # internal ids
    graph: Graph  # internal ids
    inv: list[int] = field(default_factory=list)
    # debug only: raw sub-transit search spaces per internal node id
    raw_forward_space: list[list[int]] | None = None
    raw_backward_space: list[list[int]] | None = None

    def __post_init__(self):
        if not self.inv:
            self.inv = invert_permutation(self.perm)

    # --- accessors in input ids -------------------------------------------

    def check_node(self, v: int) -> None:
        self.graph.check_node(v)

    def is_transit(self, v: int) -> bool:
        return self.perm[v] < self.k

    def transit_nodes(self) -> list[int]:
        """Transit nodes in input ids, ordered by internal id."""
        return [self.inv[i] for i in range(self.k)]

    def table_distance(self, a: int, b: int) -> int:
        pa, pb = self.perm[a], self.perm[b]
        if pa >= self.k or pb >= self.k:
            raise ValueError("table distances exist only between transit nodes")
        return self.table[pa * self.k + pb]

    def _slice(self, lo: int, hi: int) -> list[tuple[int, int]]:
        inv = self.inv
        return sorted(
            (inv[self.access_node[i]], self.access_dist[i]) for i in range(lo, hi)
        )

    def forward_access(self, v: int) -> list[tuple[int, int]]:
        """(access node, distance v -> access node), input ids."""
        p = self.perm[v]
        return self._slice(self.access_index[2 * p], self.access_index[2 * p + 1])

    def backward_access(self, v: int) -> list[tuple[int, int]]:
        """(access node, distance access node -> v), input ids."""
        p = self.perm[v]
        return self._slice(self.access_index[2 * p + 1], self.access_index[2 * p + 2])

    def regions(self, v: int) -> list[int]:
        """Voronoi representatives of the merged search space of ``v``, input ids."""
        p = self.perm[v]
        ids = self.region_ids[self.region_index[p] : self.region_index[p + 1]]
        return sorted(self.inv[r] if r != NO_REGION else NO_REGION for r in ids)

    def interval(self, v: int) -> tuple[int, int]:
        p = self.perm[v]
        return self.interval_lo[p], self.interval_hi[p]

    def search_space(self, v: int, direction: str = "merged") -> list[int]:
        """Raw sub-transit search space of ``v`` (needs ``debug=True`` builds)."""
        if self.raw_forward_space is None or self.raw_backward_space is None:
            raise RuntimeError("raw search spaces are only kept in debug builds")
        p = self.perm[v]
        if direction == "forward":
            ids = self.raw_forward_space[p]
        elif direction == "backward":
            ids = self.raw_backward_space[p]
        else:
            ids = set(self.raw_forward_space[p]) | set(self.raw_backward_space[p])
        return sorted(self.inv[x] for x in ids)

    # --- accounting -------------------------------------------------------

    def memory_bytes(self) -> dict[str, int]:
        """Bytes per component, counting 4 bytes per stored integer."""
        return {
            "ch": self.ch.size_bytes(),
            "table": 4 * len(self.table),
            "access": 4 * (len(self.access_index) + len(self.access_node) + len(self.access_dist)),
            "locality": 4
            * (len(self.region_index) + len(self.region_ids) + len(self.interval_lo) + len(self.interval_hi)),
        }


def build_tnr(
    g: Graph,
    params: CHParams | None = None,
    k: int = 16,
    stall_hops: int = 1,
    forced_order: Sequence[int] | None = None,
    transit_strategy: str = "input-level",
    other_strategy: str = "dfs-increasing",
    ch: CHIndex | None = None,
    debug: bool = False,
) -> TNRIndex:
    """Full preprocessing. An existing hierarchy ``ch`` (input ids) may be reused."""
    n = g.node_count
    if not 1 <= k <= n:
        raise ValueError(f"transit set size {k} outside [1, {n}]")
    if ch is None:
        ch = build_hierarchy(g, params, forced_order)
    transit = select_transit_nodes(ch, k)
    perm = renumber(ch, transit, transit_strategy, other_strategy)
    ich = permute_hierarchy(ch, perm)
    ig = apply_permutation(g, perm)
    tset = range(k)

    dt = build_distance_table(ich, tset, tset)
    table = dt.flat()

    def fwd_table(a: int, b: int) -> int:
        return table[a * k + b]

    def bwd_table(a: int, b: int) -> int:
        return table[b * k + a]

    rep = compute_voronoi(ig, tset)

    access_index = [0] * (2 * n + 1)
    access_node: list[int] = []
    access_dist: list[int] = []
    region_index = [0] * (n + 1)
    region_ids: list[int] = []
    lo = [EMPTY_INTERVAL[0]] * n
    hi = [EMPTY_INTERVAL[1]] * n
    raw_f: list[list[int]] | None = [] if debug else None
    raw_b: list[list[int]] | None = [] if debug else None
    for v in range(n):
        cf, sf = find_access_raw(ich, tset, v, "forward", stall_hops)
        cb, sb = find_access_raw(ich, tset, v, "backward", stall_hops)
        access_index[2 * v] = len(access_node)
        for a, d in post_search_stall(cf, fwd_table):
            access_node.append(a)
            access_dist.append(d)
        access_index[2 * v + 1] = len(access_node)
        for a, d in post_search_stall(cb, bwd_table):
            access_node.append(a)
            access_dist.append(d)
        merged = set(sf)
        merged.update(sb)
        if merged:
            lo[v] = min(merged)
            hi[v] = max(merged)
        region_index[v] = len(region_ids)
        region_ids.extend(sorted({rep[u] for u in merged}))
        if debug:
            raw_f.append(sf)
            raw_b.append(sb)
    access_index[2 * n] = len(access_node)
    region_index[n] = len(region_ids)
    log.debug(
        "tnr: n=%d k=%d access entries=%d region entries=%d",
        n, k, len(access_node), len(region_ids),
    )
    return TNRIndex(
        node_count=n,
        k=k,
        stall_hops=stall_hops,
        transit_strategy=transit_strategy,
        other_strategy=other_strategy,
        perm=perm,
        table=table,
        access_index=access_index,
        access_node=access_node,
        access_dist=access_dist,
        region_index=region_index,
        region_ids=region_ids,
        interval_lo=lo,
        interval_hi=hi,
        ch=ich,
        graph=ig,
        raw_forward_space=raw_f,
        raw_backward_space=raw_b,
    )


# --- binary dump -------------------------------------------------------------


def tnr_to_bytes(idx: TNRIndex) -> bytes:
    header = TNR_MAGIC + struct.pack(
        "<IIIIII",
        TNR_VERSION,
        idx.node_count,
        idx.k,
        idx.stall_hops,
        TRANSIT_STRATEGIES.index(idx.transit_strategy),
        OTHER_STRATEGIES.index(idx.other_strategy),
    )
    parts = [
        header,
        pack_u32(idx.perm),
        pack_u32(idx.table),
        pack_u32(idx.access_index),
        pack_u32(idx.access_node),
        pack_u32(idx.access_dist),
        pack_u32(idx.region_index),
        pack_u32(idx.region_ids),
        pack_u32(idx.interval_lo),
        pack_u32(idx.interval_hi),
        graph_to_bytes(idx.graph),
        ch_to_bytes(idx.ch),
    ]
    return b"".join(parts)


def tnr_from_bytes(buf: bytes) -> TNRIndex:
    if buf[:4] != TNR_MAGIC:
        raise GraphError("not a TNR index dump (bad magic)")
    version, n, k, stall_hops, ts, os_ = struct.unpack_from("<IIIIII", buf, 4)
    if version != TNR_VERSION:
        raise GraphError(f"unsupported TNR dump version {version}")
    pos = 28
    perm, pos = unpack_u32(buf, pos, n)
    table, pos = unpack_u32(buf, pos, k * k)
    access_index, pos = unpack_u32(buf, pos, 2 * n + 1)
    access_node, pos = unpack_u32(buf, pos, access_index[-1])
    access_dist, pos = unpack_u32(buf, pos, access_index[-1])
    region_index, pos = unpack_u32(buf, pos, n + 1)
    region_ids, pos = unpack_u32(buf, pos, region_index[-1])
    lo, pos = unpack_u32(buf, pos, n)
    hi, pos = unpack_u32(buf, pos, n)
    graph, pos = graph_from_bytes(buf, pos)
    ch, pos = ch_from_bytes(buf, pos)
    return TNRIndex(
        node_count=n,
        k=k,
        stall_hops=stall_hops,
        transit_strategy=TRANSIT_STRATEGIES[ts],
        other_strategy=OTHER_STRATEGIES[os_],
        perm=perm,
        table=table,
        access_index=access_index,
        access_node=access_node,
        access_dist=access_dist,
        region_index=region_index,
        region_ids=region_ids,
        interval_lo=lo,
        interval_hi=hi,
        ch=ch,
        graph=graph,
    )


def save_tnr(idx: TNRIndex, path) -> None:
    with open(path, "wb") as f:
        f.write(tnr_to_bytes(idx))


def load_tnr(path) -> TNRIndex:
    with open(path, "rb") as f:
        return tnr_from_bytes(f.read())
