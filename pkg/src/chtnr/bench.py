"""Query workloads, benchmark loop and statistics output."""

from __future__ import annotations

import csv
import logging
import math
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .dijkstra import dijkstra
from .graph import INFINITY, Graph, apply_permutation
from .query import LOCAL, TABLE, filter_internal, query_internal, table_query_internal
from .target import build_target_oracle, one_to_target_internal
from .tnr import TNRIndex

log = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1


class VerificationError(AssertionError):
    def __init__(self, s: int, t: int, expected: int, got: int):
        super().__init__(f"query ({s}, {t}): expected {expected}, got {got}")
        self.s, self.t, self.expected, self.got = s, t, expected, got


@dataclass
class RankSpec:
    source: int
    exponent: int
    target: int


@dataclass
class QueryStats:
    total: int = 0
    counts: dict[str, int] = field(default_factory=lambda: {TABLE: 0, LOCAL: 0})
    unreachable: int = 0
    false_positives: int = 0
    interval_short_circuits: int = 0
    table_lookups: int = 0
    timings_ns: dict[str, list[int]] = field(default_factory=lambda: {TABLE: [], LOCAL: []})
    # rank bucket -> [local, total]
    rank_buckets: dict[int, list[int]] = field(default_factory=dict)
    access_hist: Counter = field(default_factory=Counter)
    region_hist: Counter = field(default_factory=Counter)
    bytes_per_node: dict[str, float] = field(default_factory=dict)

    @property
    def local_fraction(self) -> float:
        return self.counts[LOCAL] / self.total if self.total else 0.0

    @property
    def false_positive_fraction(self) -> float:
        local = self.counts[LOCAL]
        return self.false_positives / local if local else 0.0

    def rank_local_fraction(self, bucket: int) -> float:
        local, total = self.rank_buckets.get(bucket, (0, 0))
        return local / total if total else float("nan")

    def timing_summary(self, kind: str) -> dict[str, float]:
        xs = sorted(self.timings_ns[kind])
        if not xs:
            return {"count": 0, "mean_ns": 0.0, "p50_ns": 0.0, "p99_ns": 0.0}
        return {
            "count": len(xs),
            "mean_ns": sum(xs) / len(xs),
            "p50_ns": float(xs[len(xs) // 2]),
            "p99_ns": float(xs[min(len(xs) - 1, int(0.99 * len(xs)))]),
        }

    def merge(self, other: "QueryStats") -> None:
        self.total += other.total
        for key in self.counts:
            self.counts[key] += other.counts[key]
            self.timings_ns[key].extend(other.timings_ns[key])
        self.unreachable += other.unreachable
        self.false_positives += other.false_positives
        self.interval_short_circuits += other.interval_short_circuits
        self.table_lookups += other.table_lookups
        for j, (loc, tot) in other.rank_buckets.items():
            cur = self.rank_buckets.setdefault(j, [0, 0])
            cur[0] += loc
            cur[1] += tot


def gen_random_queries(n_queries: int, seed: int, node_count: int) -> list[tuple[int, int]]:
    """Uniform random (s, t) pairs; identical for identical arguments."""
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    rng = random.Random(seed)
    return [(rng.randrange(node_count), rng.randrange(node_count)) for _ in range(n_queries)]


def rank_targets(g: Graph, s: int, exponents: Iterable[int]) -> list[RankSpec]:
    """Node settled at position ``2**j`` (1-based) of a Dijkstra from ``s``."""
    exponents = list(exponents)
    if not exponents:
        return []
    order = dijkstra(g, s, rank_limit=2 ** max(exponents)).settle_order
    out = []
    for j in exponents:
        pos = 2**j
        if pos > len(order):
            log.warning("source %d reaches only %d nodes; skipping rank 2^%d", s, len(order), j)
            continue
        out.append(RankSpec(s, j, order[pos - 1]))
    return out


def input_graph(idx: TNRIndex) -> Graph:
    """The indexed graph in input ids."""
    return apply_permutation(idx.graph, idx.inv)


def _structure_stats(idx: TNRIndex, stats: QueryStats) -> None:
    ai, ri = idx.access_index, idx.region_index
    for v in range(idx.node_count):
        stats.access_hist[ai[2 * v + 1] - ai[2 * v]] += 1
        stats.access_hist[ai[2 * v + 2] - ai[2 * v + 1]] += 1
        stats.region_hist[ri[v + 1] - ri[v]] += 1
    n = max(1, idx.node_count)
    stats.bytes_per_node = {key: b / n for key, b in idx.memory_bytes().items()}


def _run_shard(idx: TNRIndex, queries: Sequence[tuple[int, int]], verify: bool) -> QueryStats:
    stats = QueryStats()
    perm = idx.perm
    truth: dict[int, list[int]] = {}
    clock = time.perf_counter_ns
    for s, t in queries:
        ps, pt = perm[s], perm[t]
        t0 = clock()
        res = query_internal(idx, ps, pt)
        elapsed = clock() - t0
        stats.total += 1
        stats.counts[res.kind] += 1
        stats.interval_short_circuits += res.interval_short_circuits
        stats.table_lookups += res.table_lookups
        if res.distance == INFINITY:
            stats.unreachable += 1
        else:
            stats.timings_ns[res.kind].append(elapsed)
        if res.kind == LOCAL and table_query_internal(idx, ps, pt)[0] == res.distance:
            stats.false_positives += 1
        if verify:
            if ps not in truth:
                truth[ps] = dijkstra(idx.graph, ps).dist
            expected = truth[ps][pt]
            if expected != res.distance:
                raise VerificationError(s, t, expected, res.distance)
    return stats


def run_benchmark(
    idx: TNRIndex,
    queries: Sequence[tuple[int, int]],
    verify: bool = False,
    warmup: int = 0,
    workers: int = 1,
) -> QueryStats:
    """Run all queries and classify them; ``verify`` checks each against Dijkstra.

    A local query counts as a false positive when the table lookup alone
    would have produced the exact distance anyway.
    """
    for s, t in queries[:warmup]:
        query_internal(idx, idx.perm[s], idx.perm[t])
    if workers <= 1 or len(queries) < 2:
        stats = _run_shard(idx, queries, verify)
    else:
        size = math.ceil(len(queries) / workers)
        shards = [queries[i : i + size] for i in range(0, len(queries), size)]
        stats = QueryStats()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(lambda q: _run_shard(idx, q, verify), shards):
                stats.merge(part)
    _structure_stats(idx, stats)
    return stats


def run_rank_benchmark(
    idx: TNRIndex,
    sources: Sequence[int],
    exponents: Iterable[int] | None = None,
    verify: bool = False,
    graph: Graph | None = None,
) -> QueryStats:
    """Local-query fraction per Dijkstra-rank bucket ``j`` (target rank ``2**j``)."""
    g = graph if graph is not None else input_graph(idx)
    if exponents is None:
        exponents = range(int(math.log2(max(1, g.node_count))) + 1)
    exponents = list(exponents)
    specs = [spec for s in sources for spec in rank_targets(g, s, exponents)]
    stats = _run_shard(idx, [(sp.source, sp.target) for sp in specs], verify)
    perm = idx.perm
    buckets: dict[int, list[int]] = {}
    for sp in specs:
        local, _ = filter_internal(idx, perm[sp.source], perm[sp.target])
        b = buckets.setdefault(sp.exponent, [0, 0])
        b[0] += local
        b[1] += 1
    stats.rank_buckets = dict(sorted(buckets.items()))
    _structure_stats(idx, stats)
    return stats


def run_target_benchmark(
    idx: TNRIndex, t: int, sources: Sequence[int] | None = None, verify: bool = False
) -> dict[str, float]:
    """Build the many-to-one oracle for ``t`` and answer every source."""
    t0 = time.perf_counter_ns()
    oracle = build_target_oracle(idx, t)
    build_ns = time.perf_counter_ns() - t0
    if sources is None:
        sources = range(idx.node_count)
    truth = dijkstra(idx.graph, idx.perm[t], reverse=True).dist if verify else None
    lookups = 0
    t0 = time.perf_counter_ns()
    count = 0
    for s in sources:
        ps = idx.perm[s]
        d = one_to_target_internal(oracle, idx, ps)
        lookups += oracle.lookups + oracle.probes
        count += 1
        if truth is not None and truth[ps] != d:
            raise VerificationError(s, t, truth[ps], d)
    query_ns = time.perf_counter_ns() - t0
    return {
        "target": t,
        "queries": count,
        "build_ms": build_ns / 1e6,
        "mean_query_ns": query_ns / count if count else 0.0,
        "mean_lookups": lookups / count if count else 0.0,
        "local_entries": len(oracle.local_entries()),
    }


# --- output ------------------------------------------------------------------


def summary_rows(stats: QueryStats) -> list[tuple[str, float]]:
    rows: list[tuple[str, float]] = [
        ("queries", stats.total),
        ("table", stats.counts[TABLE]),
        ("local", stats.counts[LOCAL]),
        ("unreachable", stats.unreachable),
        ("local_fraction", stats.local_fraction),
        ("false_positives", stats.false_positives),
        ("false_positive_fraction", stats.false_positive_fraction),
        ("interval_short_circuits", stats.interval_short_circuits),
        ("table_lookups", stats.table_lookups),
    ]
    for kind in (TABLE, LOCAL):
        for key, value in stats.timing_summary(kind).items():
            rows.append((f"{kind}_{key}", value))
    for key, value in sorted(stats.bytes_per_node.items()):
        rows.append((f"bytes_per_node_{key}", value))
    return rows


def write_summary_csv(stats: QueryStats, stream: IO[str]) -> None:
    w = csv.writer(stream)
    w.writerow(["schema_version", "metric", "value"])
    for key, value in summary_rows(stats):
        w.writerow([CSV_SCHEMA_VERSION, key, value])


def write_rank_csv(stats: QueryStats, stream: IO[str]) -> None:
    w = csv.writer(stream)
    w.writerow(["schema_version", "rank_exponent", "queries", "local", "local_fraction"])
    for j, (loc, tot) in sorted(stats.rank_buckets.items()):
        w.writerow([CSV_SCHEMA_VERSION, j, tot, loc, loc / tot if tot else ""])


def write_histogram_csv(stats: QueryStats, stream: IO[str]) -> None:
    w = csv.writer(stream)
    w.writerow(["schema_version", "histogram", "size", "count"])
    for name, hist in (("access_nodes", stats.access_hist), ("regions", stats.region_hist)):
        for size, count in sorted(hist.items()):
            w.writerow([CSV_SCHEMA_VERSION, name, size, count])


def format_table(stats: QueryStats) -> str:
    lines = []
    for key, value in summary_rows(stats):
        if isinstance(value, float) and not value.is_integer():
            lines.append(f"{key:<28} {value:>14.4f}")
        else:
            lines.append(f"{key:<28} {int(value):>14d}")
    if stats.rank_buckets:
        lines.append("")
        lines.append(f"{'rank':>6} {'queries':>8} {'local %':>8}")
        for j, (loc, tot) in sorted(stats.rank_buckets.items()):
            pct = 100.0 * loc / tot if tot else float("nan")
            lines.append(f"{'2^' + str(j):>6} {tot:>8d} {pct:>8.1f}")
    return "\n".join(lines)
