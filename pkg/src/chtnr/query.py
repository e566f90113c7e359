"""Point-to-point queries on a TNR index.

Public functions take input node ids; the ``*_internal`` variants work on
the renumbered ids used inside the index.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ch import ch_query
from .graph import INFINITY
from .tnr import TNRIndex

TABLE = "table"
LOCAL = "local-fallback"


@dataclass
class QueryResult:
    distance: int
    kind: str
    filter_evaluations: int = 0
    interval_short_circuits: int = 0
    table_lookups: int = 0

    @property
    def is_local(self) -> bool:
        return self.kind == LOCAL


def filter_internal(idx: TNRIndex, s: int, t: int) -> tuple[bool, bool]:
    """(filter value, decided by the interval check)."""
    lo, hi = idx.interval_lo, idx.interval_hi
    if max(lo[s], lo[t]) > min(hi[s], hi[t]):
        return False, True
    ids, first = idx.region_ids, idx.region_index
    i, iend = first[s], first[s + 1]
    j, jend = first[t], first[t + 1]
    while i < iend and j < jend:
        a, b = ids[i], ids[j]
        if a == b:
            return True, False
        if a < b:
            i += 1
        else:
            j += 1
    return False, False


def table_query_internal(idx: TNRIndex, s: int, t: int) -> tuple[int, int]:
    """(minimum over access-node pairs, number of table lookups)."""
    k = idx.k
    table = idx.table
    an, ad, ai = idx.access_node, idx.access_dist, idx.access_index
    blo, bhi = ai[2 * t + 1], ai[2 * t + 2]
    best = INFINITY
    lookups = 0
    for i in range(ai[2 * s], ai[2 * s + 1]):
        ds = ad[i]
        base = an[i] * k
        for j in range(blo, bhi):
            lookups += 1
            mid = table[base + an[j]]
            if mid == INFINITY:
                continue
            d = ds + mid + ad[j]
            if d < best:
                best = d
    return best, lookups


def query_internal(idx: TNRIndex, s: int, t: int) -> QueryResult:
    local, by_interval = filter_internal(idx, s, t)
    if s == t:
        return QueryResult(0, LOCAL if local else TABLE, 1, int(by_interval), 0)
    if local:
        d, _ = ch_query(idx.ch, s, t, 1)
        return QueryResult(d, LOCAL, 1, 0, 0)
    d, lookups = table_query_internal(idx, s, t)
    return QueryResult(d, TABLE, 1, int(by_interval), lookups)


def locality_filter(idx: TNRIndex, s: int, t: int) -> bool:
    """True if the pair may need the local fallback (false positives allowed)."""
    idx.check_node(s)
    idx.check_node(t)
    return filter_internal(idx, idx.perm[s], idx.perm[t])[0]


def table_query(idx: TNRIndex, s: int, t: int) -> int:
    """Best distance over forward access of ``s`` x backward access of ``t``."""
    idx.check_node(s)
    idx.check_node(t)
    return table_query_internal(idx, idx.perm[s], idx.perm[t])[0]


def query(idx: TNRIndex, s: int, t: int) -> QueryResult:
    idx.check_node(s)
    idx.check_node(t)
    return query_internal(idx, idx.perm[s], idx.perm[t])
