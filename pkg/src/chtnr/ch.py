"""Contraction hierarchies: node ordering, contraction and queries."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from heapq import heapify, heappop, heappush
from typing import Container, Sequence

from .graph import (
    INFINITY,
    Graph,
    GraphError,
    NodeRangeError,
    check_permutation,
    pack_u32,
    unpack_u32,
)

NO_MIDDLE = -1
CH_MAGIC = b"CHIX"
CH_VERSION = 1


@dataclass(frozen=True)
class CHParams:
    witness_hops: int = 5
    witness_settled: int = 1000
    contract_hops: int = 7
    contract_settled: int = 2000
    edge_quotient_coeff: float = 2.0
    original_edge_quotient_coeff: float = 4.0
    depth_coeff: float = 1.0
    strict_witness: bool = False

    def __post_init__(self):
        for name in ("witness_hops", "witness_settled", "contract_hops", "contract_settled"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("edge_quotient_coeff", "original_edge_quotient_coeff", "depth_coeff"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class Shortcut:
    tail: int
    head: int
    weight: int
    middle: int
    original_arcs: int


class ContractionState:
    """The remaining (uncontracted) graph during hierarchy construction.

    ``out[v]`` maps head -> (weight, middle, original arc count) and ``inn[v]``
    mirrors it by tail. Arcs touching contracted nodes are removed.
    """

    def __init__(self, g: Graph):
        n = g.node_count
        self.node_count = n
        self.out: list[dict[int, tuple[int, int, int]]] = [{} for _ in range(n)]
        self.inn: list[dict[int, tuple[int, int, int]]] = [{} for _ in range(n)]
        for u, v, w in g.arcs():
            self.out[u][v] = (w, NO_MIDDLE, 1)
            self.inn[v][u] = (w, NO_MIDDLE, 1)
        self.contracted = bytearray(n)
        self.depth = [0] * n
        # arcs recorded at contraction time: up = v -> higher, down = higher -> v
        self.up: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        self.down: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]


def _witness_distances(
    state: ContractionState,
    source: int,
    excluded: int,
    targets: set[int],
    bound: int,
    hop_limit: int,
    settled_limit: int,
) -> dict[int, int]:
    """Tentative distances from ``source`` avoiding ``excluded``.

    Every returned value is the length of a real path with at most
    ``hop_limit`` arcs; missing or large values only mean no witness was
    found within the limits.
    """
    out = state.out
    dist = {source: 0}
    hops = {source: 0}
    heap = [(0, source)]
    remaining = len(targets)
    settled = 0
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        if d > bound:
            break
        settled += 1
        if u in targets:
            remaining -= 1
            if remaining == 0:
                break
        if settled >= settled_limit:
            break
        h = hops[u]
        if h >= hop_limit:
            continue
        for v, (w, _, _) in out[u].items():
            if v == excluded:
                continue
            nd = d + w
            if nd <= bound and nd < dist.get(v, INFINITY):
                dist[v] = nd
                hops[v] = h + 1
                heappush(heap, (nd, v))
    return dist


def witness_search(
    state: ContractionState,
    u: int,
    v_excluded: int,
    w: int,
    bound: int,
    hop_limit: int,
    settled_limit: int,
) -> bool:
    """True if a u -> w path of length <= bound avoiding ``v_excluded`` is found."""
    if hop_limit <= 0:
        return False
    dist = _witness_distances(state, u, v_excluded, {w}, bound, hop_limit, settled_limit)
    return dist.get(w, INFINITY) <= bound


def _needed_shortcuts(
    state: ContractionState, v: int, hop_limit: int, settled_limit: int, strict: bool = False
) -> list[Shortcut]:
    ins = state.inn[v]
    outs = state.out[v]
    if not ins or not outs:
        return []
    max_out = max(w for w, _, _ in outs.values())
    result = []
    for u in sorted(ins):
        cuv, _, ouv = ins[u]
        targets = {w for w in outs if w != u}
        if not targets:
            continue
        bound = cuv + max_out
        if hop_limit > 0:
            wd = _witness_distances(state, u, v, targets, bound, hop_limit, settled_limit)
        else:
            wd = {}
        for w in sorted(targets):
            cvw, _, ovw = outs[w]
            need = cuv + cvw
            found = wd.get(w, INFINITY)
            if found < need or (found == need and not strict):
                continue
            result.append(Shortcut(u, w, need, v, ouv + ovw))
    return result


def node_priority(state: ContractionState, v: int, params: CHParams) -> float:
    """Weighted sum of edge quotient, original-edge quotient and node depth.

    The quotients compare the shortcuts a simulated contraction of ``v``
    would add against the arcs it would remove (both counted as directed
    arcs, the second weighted by how many input arcs each arc stands for).
    A node without incident arcs scores only its depth.
    """
    removed = len(state.inn[v]) + len(state.out[v])
    removed_orig = sum(o for _, _, o in state.inn[v].values()) + sum(
        o for _, _, o in state.out[v].values()
    )
    shortcuts = _needed_shortcuts(
        state, v, params.witness_hops, params.witness_settled, params.strict_witness
    )
    eq = len(shortcuts) / removed if removed else 0.0
    oeq = sum(s.original_arcs for s in shortcuts) / removed_orig if removed_orig else 0.0
    return (
        params.edge_quotient_coeff * eq
        + params.original_edge_quotient_coeff * oeq
        + params.depth_coeff * state.depth[v]
    )


def contract_node(
    state: ContractionState,
    v: int,
    hop_limit: int = 7,
    settled_limit: int = 2000,
    strict: bool = False,
) -> list[Shortcut]:
    """Remove ``v`` from the remaining graph, inserting the needed shortcuts.

    A witness of equal length suppresses a shortcut unless ``strict``; strict
    contraction keeps every shortest path representable as an up-down path.
    """
    if state.contracted[v]:
        raise ValueError(f"node {v} is already contracted")
    out, inn = state.out, state.inn
    state.up[v] = sorted((w, c, m) for w, (c, m, _) in out[v].items())
    state.down[v] = sorted((u, c, m) for u, (c, m, _) in inn[v].items())
    shortcuts = _needed_shortcuts(state, v, hop_limit, settled_limit, strict)
    for sc in shortcuts:
        old = out[sc.tail].get(sc.head)
        if old is None or sc.weight < old[0]:
            entry = (sc.weight, v, sc.original_arcs)
            out[sc.tail][sc.head] = entry
            inn[sc.head][sc.tail] = entry
    dv = state.depth[v] + 1
    for w in out[v]:
        del inn[w][v]
        if state.depth[w] < dv:
            state.depth[w] = dv
    for u in inn[v]:
        del out[u][v]
        if state.depth[u] < dv:
            state.depth[u] = dv
    out[v] = {}
    inn[v] = {}
    state.contracted[v] = 1
    return shortcuts


@dataclass(frozen=True, eq=False)
class CHIndex:
    """A finished hierarchy.

    ``up_*`` holds arcs ``v -> w`` with ``rank[w] > rank[v]`` grouped by ``v``.
    ``down_*`` holds arcs ``u -> v`` with ``rank[u] > rank[v]`` grouped by
    ``v`` (reversed, for backward search). Middle is ``NO_MIDDLE`` for input
    arcs.
    """

    node_count: int
    rank: list[int]
    up_first: list[int]
    up_head: list[int]
    up_weight: list[int]
    up_middle: list[int]
    down_first: list[int]
    down_tail: list[int]
    down_weight: list[int]
    down_middle: list[int]

    @property
    def order(self) -> list[int]:
        order = [0] * self.node_count
        for v, r in enumerate(self.rank):
            order[r] = v
        return order

    @property
    def shortcut_count(self) -> int:
        return sum(1 for m in self.up_middle if m != NO_MIDDLE) + sum(
            1 for m in self.down_middle if m != NO_MIDDLE
        )

    def up_arcs(self, v: int) -> list[tuple[int, int, int]]:
        lo, hi = self.up_first[v], self.up_first[v + 1]
        return list(zip(self.up_head[lo:hi], self.up_weight[lo:hi], self.up_middle[lo:hi]))

    def down_arcs(self, v: int) -> list[tuple[int, int, int]]:
        lo, hi = self.down_first[v], self.down_first[v + 1]
        return list(zip(self.down_tail[lo:hi], self.down_weight[lo:hi], self.down_middle[lo:hi]))

    def check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise NodeRangeError(f"node {v} outside [0, {self.node_count})")

    def size_bytes(self) -> int:
        n = self.node_count
        return 4 * (n + 2 * (n + 1) + 3 * len(self.up_head) + 3 * len(self.down_tail))

    def search_adjacency(self, direction: str):
        """(first, neighbour, weight) of the search graph and of its stall graph."""
        up = (self.up_first, self.up_head, self.up_weight)
        down = (self.down_first, self.down_tail, self.down_weight)
        if direction == "forward":
            return up, down
        if direction == "backward":
            return down, up
        raise ValueError(f"unknown direction {direction!r}")


def _flatten(n: int, lists: list[list[tuple[int, int, int]]]):
    first = [0] * (n + 1)
    nbr: list[int] = []
    wgt: list[int] = []
    mid: list[int] = []
    for v in range(n):
        for x, c, m in lists[v]:
            nbr.append(x)
            wgt.append(c)
            mid.append(m)
        first[v + 1] = len(nbr)
    return first, nbr, wgt, mid


def _index_from_lists(n, rank, up, down) -> CHIndex:
    uf, uh, uw, um = _flatten(n, up)
    df, dt, dw, dm = _flatten(n, down)
    return CHIndex(n, rank, uf, uh, uw, um, df, dt, dw, dm)


def build_hierarchy(
    g: Graph,
    params: CHParams | None = None,
    forced_order: Sequence[int] | None = None,
) -> CHIndex:
    """Contract every node of ``g``; rank = contraction position.

    Without ``forced_order`` the next node is the one of minimum priority,
    re-evaluated lazily before contraction; ties go to the smaller id.
    """
    params = params or CHParams()
    n = g.node_count
    state = ContractionState(g)
    rank = [0] * n
    ch_hops, ch_settled = params.contract_hops, params.contract_settled
    if forced_order is not None:
        try:
            check_permutation(forced_order, n)
        except GraphError as exc:
            raise GraphError(f"forced order is not a permutation: {exc}") from None
        for r, v in enumerate(forced_order):
            contract_node(state, v, ch_hops, ch_settled, params.strict_witness)
            rank[v] = r
    else:
        current = [node_priority(state, v, params) for v in range(n)]
        heap = [(p, v) for v, p in enumerate(current)]
        heapify(heap)
        r = 0
        while heap:
            p, v = heappop(heap)
            if state.contracted[v] or p != current[v]:
                continue
            fresh = node_priority(state, v, params)
            if fresh != p:
                current[v] = fresh
                if heap and (fresh, v) > heap[0]:
                    heappush(heap, (fresh, v))
                    continue
            neighbours = set(state.out[v]) | set(state.inn[v])
            contract_node(state, v, ch_hops, ch_settled, params.strict_witness)
            rank[v] = r
            r += 1
            for x in sorted(neighbours):
                px = node_priority(state, x, params)
                if px != current[x]:
                    current[x] = px
                    heappush(heap, (px, x))
    return _index_from_lists(n, rank, state.up, state.down)


def permute_hierarchy(ch: CHIndex, perm: Sequence[int]) -> CHIndex:
    """Relabel node ``v`` as ``perm[v]`` throughout the index."""
    n = ch.node_count
    check_permutation(perm, n)
    rank = [0] * n
    up: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    down: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for v in range(n):
        pv = perm[v]
        rank[pv] = ch.rank[v]
        up[pv] = sorted(
            (perm[w], c, perm[m] if m != NO_MIDDLE else NO_MIDDLE) for w, c, m in ch.up_arcs(v)
        )
        down[pv] = sorted(
            (perm[u], c, perm[m] if m != NO_MIDDLE else NO_MIDDLE) for u, c, m in ch.down_arcs(v)
        )
    return _index_from_lists(n, rank, up, down)


# --- queries -----------------------------------------------------------------


def _is_stalled(v, d, dist, first, nbr, wgt, hops) -> bool:
    """True if some reached node reaches ``v`` more cheaply within ``hops`` arcs."""
    if hops <= 0:
        return False
    get = dist.get
    if hops == 1:
        for i in range(first[v], first[v + 1]):
            dx = get(nbr[i])
            if dx is not None and dx + wgt[i] < d:
                return True
        return False
    stack = [(v, 0, 0)]
    while stack:
        x, acc, depth = stack.pop()
        for i in range(first[x], first[x + 1]):
            y = nbr[i]
            a = acc + wgt[i]
            if a >= d:
                continue
            dy = get(y)
            if dy is not None and dy + a < d:
                return True
            if depth + 1 < hops:
                stack.append((y, a, depth + 1))
    return False


@dataclass
class HalfSearch:
    dist: dict[int, int]
    settled: list[int]  # settle order, stalled nodes excluded
    stalled: set[int]


def upward_search(
    ch: CHIndex,
    source: int,
    direction: str = "forward",
    stall_hops: int = 0,
    prune: Container[int] | None = None,
) -> HalfSearch:
    """Exhaustive one-directional search in the upward (or downward) graph.

    Arcs leaving nodes in ``prune`` are not relaxed. Stalled nodes are
    neither relaxed nor reported as settled.
    """
    (first, nbr, wgt), (sfirst, snbr, swgt) = ch.search_adjacency(direction)
    dist = {source: 0}
    heap = [(0, source)]
    settled: list[int] = []
    stalled: set[int] = set()
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        if stall_hops and _is_stalled(u, d, dist, sfirst, snbr, swgt, stall_hops):
            stalled.add(u)
            continue
        settled.append(u)
        if prune is not None and u in prune:
            continue
        for i in range(first[u], first[u + 1]):
            v = nbr[i]
            nd = d + wgt[i]
            od = dist.get(v)
            if od is None or nd < od:
                dist[v] = nd
                heappush(heap, (nd, v))
    return HalfSearch(dist, settled, stalled)


def ch_query(ch: CHIndex, s: int, t: int, stall_hops: int = 1) -> tuple[int, int | None]:
    """Exact distance and meeting node of a bidirectional CH query."""
    ch.check_node(s)
    ch.check_node(t)
    if s == t:
        return 0, s
    uf, uh, uw = ch.up_first, ch.up_head, ch.up_weight
    df_, dt, dw = ch.down_first, ch.down_tail, ch.down_weight
    dist_f = {s: 0}
    dist_b = {t: 0}
    heap_f = [(0, s)]
    heap_b = [(0, t)]
    best = INFINITY
    meet = None
    while heap_f or heap_b:
        if heap_f and (not heap_b or heap_f[0][0] <= heap_b[0][0]):
            heap, dist, other = heap_f, dist_f, dist_b
            first, nbr, wgt = uf, uh, uw
            sfirst, snbr, swgt = df_, dt, dw
        else:
            heap, dist, other = heap_b, dist_b, dist_f
            first, nbr, wgt = df_, dt, dw
            sfirst, snbr, swgt = uf, uh, uw
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        if d >= best:
            heap.clear()
            continue
        od = other.get(u)
        if od is not None and d + od < best:
            best = d + od
            meet = u
        if stall_hops and _is_stalled(u, d, dist, sfirst, snbr, swgt, stall_hops):
            continue
        for i in range(first[u], first[u + 1]):
            v = nbr[i]
            nd = d + wgt[i]
            ov = dist.get(v)
            if ov is None or nd < ov:
                dist[v] = nd
                heappush(heap, (nd, v))
    return best, meet


# --- shortcut unpacking (testing aid) -----------------------------------------


def _arc_between(ch: CHIndex, u: int, w: int) -> tuple[int, int]:
    """(weight, middle) of the hierarchy arc u -> w."""
    if ch.rank[w] > ch.rank[u]:
        for x, c, m in ch.up_arcs(u):
            if x == w:
                return c, m
    else:
        for x, c, m in ch.down_arcs(w):
            if x == u:
                return c, m
    raise KeyError(f"no hierarchy arc {u} -> {w}")


def unpack_arc(ch: CHIndex, u: int, w: int) -> list[int]:
    """Original-graph node sequence represented by hierarchy arc u -> w."""
    path = [u]
    stack = [(u, w)]
    while stack:
        a, b = stack.pop()
        _, m = _arc_between(ch, a, b)
        if m == NO_MIDDLE:
            path.append(b)
        else:
            stack.append((m, b))
            stack.append((a, m))
    return path


# --- binary dump -------------------------------------------------------------


def _signed(values: Sequence[int]) -> list[int]:
    return [INFINITY if m == NO_MIDDLE else m for m in values]


def _unsigned(values: Sequence[int]) -> list[int]:
    return [NO_MIDDLE if m == INFINITY else m for m in values]


def ch_to_bytes(ch: CHIndex) -> bytes:
    parts = [
        CH_MAGIC,
        struct.pack("<IIII", CH_VERSION, ch.node_count, len(ch.up_head), len(ch.down_tail)),
        pack_u32(ch.rank),
        pack_u32(ch.up_first),
        pack_u32(ch.up_head),
        pack_u32(ch.up_weight),
        pack_u32(_signed(ch.up_middle)),
        pack_u32(ch.down_first),
        pack_u32(ch.down_tail),
        pack_u32(ch.down_weight),
        pack_u32(_signed(ch.down_middle)),
    ]
    return b"".join(parts)


def ch_from_bytes(buf: bytes, offset: int = 0) -> tuple[CHIndex, int]:
    if buf[offset : offset + 4] != CH_MAGIC:
        raise GraphError("not a CH index dump (bad magic)")
    version, n, mu, md = struct.unpack_from("<IIII", buf, offset + 4)
    if version != CH_VERSION:
        raise GraphError(f"unsupported CH dump version {version}")
    pos = offset + 20
    rank, pos = unpack_u32(buf, pos, n)
    uf, pos = unpack_u32(buf, pos, n + 1)
    uh, pos = unpack_u32(buf, pos, mu)
    uw, pos = unpack_u32(buf, pos, mu)
    um, pos = unpack_u32(buf, pos, mu)
    df, pos = unpack_u32(buf, pos, n + 1)
    dt, pos = unpack_u32(buf, pos, md)
    dw, pos = unpack_u32(buf, pos, md)
    dm, pos = unpack_u32(buf, pos, md)
    return CHIndex(n, rank, uf, uh, uw, _unsigned(um), df, dt, dw, _unsigned(dm)), pos


def save_hierarchy(ch: CHIndex, path) -> None:
    with open(path, "wb") as f:
        f.write(ch_to_bytes(ch))


def load_hierarchy(path) -> CHIndex:
    with open(path, "rb") as f:
        ch, _ = ch_from_bytes(f.read())
    return ch
