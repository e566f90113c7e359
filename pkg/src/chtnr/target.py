"""Many-to-one distances for a fixed target.

For a target ``t`` we precompute the distance from every transit node to
``t`` and, with one backward search that stops once all of its frontier
runs through transit nodes, the exact distance of every node whose
shortest path to ``t`` avoids the transit set. A query then scans only the
forward access nodes of the source.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from heapq import heappop, heappush

from .graph import INFINITY, GraphError, pack_u32, unpack_u32
from .tnr import TNRIndex

TARGET_MAGIC = b"TNRT"
TARGET_VERSION = 1


@dataclass
class TargetOracle:
    target: int  # internal id
    transit_dist: list[int]  # length k, internal transit ids
    local_dist: list[int]  # length n, INFINITY where unset
    lookups: int = 0  # transit_dist reads by the last query
    probes: int = 0  # local_dist reads by the last query

    def local_entries(self) -> dict[int, int]:
        return {v: d for v, d in enumerate(self.local_dist) if d != INFINITY}


def build_target_array(idx: TNRIndex, t: int) -> list[int]:
    """Distance from every transit node to internal node ``t``."""
    k, table = idx.k, idx.table
    an, ad, ai = idx.access_node, idx.access_dist, idx.access_index
    out = [INFINITY] * k
    for j in range(ai[2 * t + 1], ai[2 * t + 2]):
        at, dt = an[j], ad[j]
        for a in range(k):
            mid = table[a * k + at]
            if mid == INFINITY:
                continue
            d = mid + dt
            if d < out[a]:
                out[a] = d
    return out


def covering_backward_search(idx: TNRIndex, t: int) -> list[int]:
    """Exact distance to ``t`` for nodes with a transit-free shortest path.

    Labels are (distance, covered) and the uncovered label wins ties, so a
    node stays uncovered whenever some shortest path from it avoids the
    transit set. The search stops when no uncovered label is queued.
    """
    g, k = idx.graph, idx.k
    first, nbr, wgt = g.first_in, g.tail, g.rev_weight
    n = g.node_count
    local = [INFINITY] * n
    best: dict[int, tuple[int, int]] = {}
    done = bytearray(n)
    cov_t = 1 if t < k else 0
    best[t] = (0, cov_t)
    heap = [(0, cov_t, t)]
    uncovered_queued = 1 - cov_t
    while heap and uncovered_queued > 0:
        d, cov, u = heappop(heap)
        if not cov:
            uncovered_queued -= 1
        if done[u] or best[u] != (d, cov):
            continue
        done[u] = 1
        if not cov:
            local[u] = d
        for i in range(first[u], first[u + 1]):
            x = nbr[i]
            if done[x]:
                continue
            label = (d + wgt[i], 1 if (cov or x < k) else 0)
            old = best.get(x)
            if old is None or label < old:
                best[x] = label
                heappush(heap, (label[0], label[1], x))
                if not label[1]:
                    uncovered_queued += 1
    return local


def build_target_oracle(idx: TNRIndex, t: int) -> TargetOracle:
    """Oracle for input-id target ``t``."""
    idx.check_node(t)
    p = idx.perm[t]
    return TargetOracle(p, build_target_array(idx, p), covering_backward_search(idx, p))


def one_to_target_internal(oracle: TargetOracle, idx: TNRIndex, s: int) -> int:
    tarr = oracle.transit_dist
    an, ad, ai = idx.access_node, idx.access_dist, idx.access_index
    best = oracle.local_dist[s]
    lo, hi = ai[2 * s], ai[2 * s + 1]
    for i in range(lo, hi):
        x = tarr[an[i]]
        if x == INFINITY:
            continue
        d = ad[i] + x
        if d < best:
            best = d
    oracle.probes = 1
    oracle.lookups = hi - lo
    return best


def one_to_target(oracle: TargetOracle, idx: TNRIndex, s: int) -> int:
    """Distance from input-id source ``s`` to the oracle's target."""
    idx.check_node(s)
    return one_to_target_internal(oracle, idx, idx.perm[s])


def oracle_to_bytes(oracle: TargetOracle) -> bytes:
    entries = oracle.local_entries()
    flat = [x for v in sorted(entries) for x in (v, entries[v])]
    return (
        TARGET_MAGIC
        + struct.pack(
            "<IIIII",
            TARGET_VERSION,
            oracle.target,
            len(oracle.transit_dist),
            len(oracle.local_dist),
            len(entries),
        )
        + pack_u32(oracle.transit_dist)
        + pack_u32(flat)
    )


def oracle_from_bytes(buf: bytes) -> TargetOracle:
    if buf[:4] != TARGET_MAGIC:
        raise GraphError("not a target oracle dump (bad magic)")
    version, t, k, n, m = struct.unpack_from("<IIIII", buf, 4)
    if version != TARGET_VERSION:
        raise GraphError(f"unsupported target oracle version {version}")
    tarr, pos = unpack_u32(buf, 24, k)
    flat, _ = unpack_u32(buf, pos, 2 * m)
    local = [INFINITY] * n
    for i in range(0, len(flat), 2):
        local[flat[i]] = flat[i + 1]
    return TargetOracle(t, tarr, local)
