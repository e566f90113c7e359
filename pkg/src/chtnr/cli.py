"""Command line front end: ``chtnr <subcommand> ...``.

Node ids on the command line are 0-based input ids (DIMACS id minus one).
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time

from .bench import (
    VerificationError,
    format_table,
    gen_random_queries,
    input_graph,
    run_benchmark,
    run_rank_benchmark,
    run_target_benchmark,
    write_histogram_csv,
    write_rank_csv,
    write_summary_csv,
)
from .ch import CHParams, build_hierarchy, load_hierarchy, save_hierarchy
from .generators import grid, random_road_graph
from .graph import (
    INFINITY,
    Graph,
    GraphError,
    load_graph,
    parse_dimacs,
    save_graph,
    strongly_connected_components,
    write_dimacs,
)
from .query import query
from .tnr import OTHER_STRATEGIES, build_tnr, load_tnr, save_tnr

log = logging.getLogger("chtnr")


def read_graph(path: str) -> Graph:
    if path.endswith(".gr") or path.endswith(".gr.txt"):
        with open(path) as f:
            return parse_dimacs(f)
    return load_graph(path)


def _fmt(d: int) -> str:
    return "inf" if d == INFINITY else str(d)


def cmd_convert(args) -> int:
    g = read_graph(args.input)
    comps = strongly_connected_components(g)
    save_graph(g, args.output)
    print(f"{g.node_count} nodes, {g.arc_count} arcs, {len(set(comps))} strongly connected components")
    return 0


def cmd_generate(args) -> int:
    if args.kind == "grid":
        g = grid(args.rows, args.cols)
    else:
        g = random_road_graph(args.nodes, args.seed)
    with open(args.output, "w") as f:
        write_dimacs(g, f, comment=f"generated by chtnr ({args.kind})")
    print(f"wrote {g.node_count} nodes, {g.arc_count} arcs to {args.output}")
    return 0


def _params(args) -> CHParams:
    return CHParams(strict_witness=args.strict_witness)


def cmd_ch_build(args) -> int:
    g = read_graph(args.graph)
    t0 = time.perf_counter()
    ch = build_hierarchy(g, _params(args))
    elapsed = time.perf_counter() - t0
    save_hierarchy(ch, args.output)
    print(f"hierarchy: {ch.shortcut_count} shortcuts, {elapsed:.2f}s")
    return 0


def cmd_tnr_build(args) -> int:
    g = read_graph(args.graph)
    ch = load_hierarchy(args.ch) if args.ch else None
    t0 = time.perf_counter()
    idx = build_tnr(
        g,
        _params(args),
        k=args.k,
        stall_hops=args.stall_hops,
        other_strategy=args.renumber,
        ch=ch,
    )
    elapsed = time.perf_counter() - t0
    save_tnr(idx, args.output)
    mem = idx.memory_bytes()
    per_node = ", ".join(f"{k}={v / max(1, idx.node_count):.1f}" for k, v in mem.items())
    print(f"tnr index: k={idx.k}, {elapsed:.2f}s, bytes/node: {per_node}")
    return 0


def cmd_query(args) -> int:
    idx = load_tnr(args.index)
    res = query(idx, args.s, args.t)
    print(json.dumps({"s": args.s, "t": args.t, "distance": _fmt(res.distance), "kind": res.kind}))
    return 0


def _write_csv(path: str | None, writer, stats) -> None:
    if path:
        with open(path, "w", newline="") as f:
            writer(stats, f)


def cmd_bench(args) -> int:
    idx = load_tnr(args.index)
    queries = gen_random_queries(args.queries, args.seed, idx.node_count)
    try:
        stats = run_benchmark(idx, queries, verify=args.verify, warmup=args.warmup, workers=args.workers)
    except VerificationError as exc:
        print(f"verification failed: s={exc.s} t={exc.t} expected={_fmt(exc.expected)} got={_fmt(exc.got)}", file=sys.stderr)
        return 1
    print(format_table(stats))
    _write_csv(args.csv, write_summary_csv, stats)
    _write_csv(args.hist_csv, write_histogram_csv, stats)
    return 0


def cmd_rank_bench(args) -> int:
    idx = load_tnr(args.index)
    rng = random.Random(args.seed)
    sources = [rng.randrange(idx.node_count) for _ in range(args.sources)]
    try:
        stats = run_rank_benchmark(idx, sources, verify=args.verify, graph=input_graph(idx))
    except VerificationError as exc:
        print(f"verification failed: s={exc.s} t={exc.t} expected={_fmt(exc.expected)} got={_fmt(exc.got)}", file=sys.stderr)
        return 1
    print(format_table(stats))
    _write_csv(args.csv, write_rank_csv, stats)
    return 0


def cmd_target_bench(args) -> int:
    idx = load_tnr(args.index)
    try:
        report = run_target_benchmark(idx, args.t, verify=args.verify)
    except VerificationError as exc:
        print(f"verification failed: s={exc.s} t={exc.t} expected={_fmt(exc.expected)} got={_fmt(exc.got)}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chtnr", description="CH-based transit node routing toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convert", help="DIMACS .gr -> binary graph")
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_convert)

    c = sub.add_parser("generate", help="write a synthetic DIMACS graph")
    c.add_argument("kind", choices=["grid", "random"])
    c.add_argument("output")
    c.add_argument("--rows", type=int, default=30)
    c.add_argument("--cols", type=int, default=30)
    c.add_argument("--nodes", type=int, default=300)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_generate)

    c = sub.add_parser("ch-build", help="build a contraction hierarchy")
    c.add_argument("graph")
    c.add_argument("output")
    c.add_argument("--strict-witness", action="store_true", help="keep equal-length shortest paths")
    c.set_defaults(func=cmd_ch_build)

    c = sub.add_parser("tnr-build", help="build a transit node routing index")
    c.add_argument("graph")
    c.add_argument("output")
    c.add_argument("--k", type=int, default=64)
    c.add_argument("--stall-hops", type=int, default=1, choices=range(0, 4))
    c.add_argument("--renumber", choices=OTHER_STRATEGIES, default="dfs-increasing")
    c.add_argument("--ch", help="reuse a hierarchy built by ch-build")
    c.add_argument("--strict-witness", action="store_true")
    c.set_defaults(func=cmd_tnr_build)

    c = sub.add_parser("query", help="one distance query")
    c.add_argument("index")
    c.add_argument("s", type=int)
    c.add_argument("t", type=int)
    c.set_defaults(func=cmd_query)

    c = sub.add_parser("bench", help="random query benchmark")
    c.add_argument("index")
    c.add_argument("--queries", type=int, default=10000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--verify", action="store_true")
    c.add_argument("--warmup", type=int, default=100)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--csv", help="summary CSV output path")
    c.add_argument("--hist-csv", help="access-node/region histogram CSV output path")
    c.set_defaults(func=cmd_bench)

    c = sub.add_parser("rank-bench", help="local-query fraction by Dijkstra rank")
    c.add_argument("index")
    c.add_argument("--sources", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--verify", action="store_true")
    c.add_argument("--csv", help="rank CSV output path")
    c.set_defaults(func=cmd_rank_bench)

    c = sub.add_parser("target-bench", help="many-to-one oracle for a fixed target")
    c.add_argument("index")
    c.add_argument("t", type=int)
    c.add_argument("--verify", action="store_true")
    c.set_defaults(func=cmd_target_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
