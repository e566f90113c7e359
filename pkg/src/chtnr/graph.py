"""Directed weighted graphs in forward/reverse adjacency-array form.

Arc weights are unsigned 32-bit integers. ``INFINITY`` is the largest
representable value and is reserved as the "unreachable" sentinel, so the
sum of all arc weights of a graph must stay strictly below it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

INFINITY = 0xFFFFFFFF
MAX_WEIGHT = INFINITY - 1

GRAPH_MAGIC = b"CHGR"
GRAPH_VERSION = 1


class GraphError(ValueError):
    """Base class for malformed graph input."""


class ParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class NodeRangeError(GraphError, IndexError):
    pass


class WeightError(GraphError):
    pass


class PermutationError(GraphError):
    pass


def add_dist(a: int, b: int) -> int:
    """Saturating addition on distances; INFINITY absorbs."""
    if a >= INFINITY or b >= INFINITY:
        return INFINITY
    s = a + b
    return s if s < INFINITY else INFINITY


def _csr(n: int, arcs: Sequence[tuple[int, int, int]], key: int):
    # arcs sorted by (key node, other node)
    first = [0] * (n + 1)
    for arc in arcs:
        first[arc[key] + 1] += 1
    for v in range(n):
        first[v + 1] += first[v]
    other = 1 - key
    nbr = [arc[other] for arc in arcs]
    wgt = [arc[2] for arc in arcs]
    return first, nbr, wgt


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph.

    ``first_out[v]:first_out[v+1]`` indexes the outgoing arcs of ``v`` in
    ``head``/``weight``; ``first_in``/``tail``/``rev_weight`` hold the same
    arcs grouped by head. Within each slice neighbours are sorted by id.
    """

    node_count: int
    first_out: list[int]
    head: list[int]
    weight: list[int]
    first_in: list[int]
    tail: list[int]
    rev_weight: list[int]

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int, int]]) -> "Graph":
        """Build a graph from ``(tail, head, weight)`` triples.

        Self-loops are dropped and parallel arcs collapse to their minimum
        weight.
        """
        if n < 0:
            raise GraphError("negative node count")
        best: dict[tuple[int, int], int] = {}
        total = 0
        for u, v, w in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise NodeRangeError(f"arc ({u}, {v}) outside [0, {n})")
            if w < 0 or w > MAX_WEIGHT:
                raise WeightError(f"weight {w} of arc ({u}, {v}) outside [0, {MAX_WEIGHT}]")
            if u == v:
                continue
            old = best.get((u, v))
            if old is None or w < old:
                best[(u, v)] = w
        for w in best.values():
            total += w
        if total >= INFINITY:
            raise WeightError("sum of arc weights does not fit below INFINITY")
        fwd = sorted((u, v, w) for (u, v), w in best.items())
        first_out, head, weight = _csr(n, fwd, 0)
        bwd = sorted(fwd, key=lambda a: (a[1], a[0]))
        first_in, tail, rev_weight = _csr(n, bwd, 1)
        return cls(n, first_out, head, weight, first_in, tail, rev_weight)

    @property
    def arc_count(self) -> int:
        return len(self.head)

    def arcs(self) -> list[tuple[int, int, int]]:
        out = []
        fo, hd, wt = self.first_out, self.head, self.weight
        for u in range(self.node_count):
            for i in range(fo[u], fo[u + 1]):
                out.append((u, hd[i], wt[i]))
        return out

    def out_arcs(self, v: int) -> list[tuple[int, int]]:
        lo, hi = self.first_out[v], self.first_out[v + 1]
        return list(zip(self.head[lo:hi], self.weight[lo:hi]))

    def in_arcs(self, v: int) -> list[tuple[int, int]]:
        lo, hi = self.first_in[v], self.first_in[v + 1]
        return list(zip(self.tail[lo:hi], self.rev_weight[lo:hi]))

    def reverse(self) -> "Graph":
        return Graph(
            self.node_count,
            self.first_in,
            self.tail,
            self.rev_weight,
            self.first_out,
            self.head,
            self.weight,
        )

    def check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise NodeRangeError(f"node {v} outside [0, {self.node_count})")


def parse_dimacs(stream: IO[str] | Iterable[str]) -> Graph:
    """Read a DIMACS ``.gr`` shortest-path graph (1-based ids)."""
    n = m = None
    arcs: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise ParseError(lineno, "duplicate problem line")
            if len(parts) != 4 or parts[1] != "sp":
                raise ParseError(lineno, f"expected 'p sp <n> <m>', got {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"non-integer size in {line!r}") from None
            if n < 0 or m < 0:
                raise ParseError(lineno, "negative size")
        elif tag == "a":
            if n is None:
                raise ParseError(lineno, "arc line before problem line")
            if len(parts) != 4:
                raise ParseError(lineno, f"expected 'a <u> <v> <w>', got {line!r}")
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"non-integer field in {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise NodeRangeError(f"line {lineno}: node id outside [1, {n}]")
            if w < 0:
                raise WeightError(f"line {lineno}: negative weight {w}")
            if w > MAX_WEIGHT:
                raise WeightError(f"line {lineno}: weight {w} exceeds 32-bit range")
            arcs.append((u - 1, v - 1, w))
        else:
            raise ParseError(lineno, f"unknown line type {tag!r}")
    if n is None:
        raise ParseError(0, "missing problem line")
    if len(arcs) != m:
        raise ParseError(0, f"header announces {m} arcs, found {len(arcs)}")
    return Graph.from_arcs(n, arcs)


def write_dimacs(g: Graph, stream: IO[str], comment: str | None = None) -> None:
    if comment:
        for line in comment.splitlines():
            stream.write(f"c {line}\n")
    stream.write(f"p sp {g.node_count} {g.arc_count}\n")
    for u, v, w in g.arcs():
        stream.write(f"a {u + 1} {v + 1} {w}\n")


def check_permutation(perm: Sequence[int], n: int) -> None:
    if len(perm) != n:
        raise PermutationError(f"permutation has length {len(perm)}, expected {n}")
    seen = bytearray(n)
    for x in perm:
        if not (0 <= x < n) or seen[x]:
            raise PermutationError("mapping is not a bijection on [0, n)")
        seen[x] = 1


def invert_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for old, new in enumerate(perm):
        inv[new] = old
    return inv


def apply_permutation(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel node ``v`` as ``perm[v]``."""
    check_permutation(perm, g.node_count)
    return Graph.from_arcs(g.node_count, ((perm[u], perm[v], w) for u, v, w in g.arcs()))


def strongly_connected_components(g: Graph) -> list[int]:
    """Component id per node (iterative Tarjan); ids follow discovery order."""
    n = g.node_count
    fo, hd = g.first_out, g.head
    index = [-1] * n
    low = [0] * n
    on_stack = bytearray(n)
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, fo[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = 1
        while work:
            v, i = work[-1]
            if i < fo[v + 1]:
                work[-1] = (v, i + 1)
                w = hd[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = 1
                    work.append((w, fo[w]))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    # renumber components by smallest member for stable output
    remap: dict[int, int] = {}
    for v in range(n):
        c = comp[v]
        if c not in remap:
            remap[c] = len(remap)
        comp[v] = remap[c]
    return comp


def check_strong_connectivity(g: Graph) -> list[int]:
    return strongly_connected_components(g)


def is_strongly_connected(g: Graph) -> bool:
    comp = strongly_connected_components(g)
    return len(set(comp)) <= 1


# --- binary dump -----------------------------------------------------------


def pack_u32(values: Sequence[int]) -> bytes:
    return struct.pack(f"<{len(values)}I", *values)


def unpack_u32(buf: bytes, offset: int, count: int) -> tuple[list[int], int]:
    end = offset + 4 * count
    if end > len(buf):
        raise GraphError("truncated binary data")
    return list(struct.unpack_from(f"<{count}I", buf, offset)), end


def graph_to_bytes(g: Graph) -> bytes:
    header = GRAPH_MAGIC + struct.pack("<III", GRAPH_VERSION, g.node_count, g.arc_count)
    return header + pack_u32(g.first_out) + pack_u32(g.head) + pack_u32(g.weight)


def graph_from_bytes(buf: bytes, offset: int = 0) -> tuple[Graph, int]:
    if buf[offset : offset + 4] != GRAPH_MAGIC:
        raise GraphError("not a binary graph dump (bad magic)")
    version, n, m = struct.unpack_from("<III", buf, offset + 4)
    if version != GRAPH_VERSION:
        raise GraphError(f"unsupported graph dump version {version}")
    pos = offset + 16
    first_out, pos = unpack_u32(buf, pos, n + 1)
    head, pos = unpack_u32(buf, pos, m)
    weight, pos = unpack_u32(buf, pos, m)
    arcs = []
    for u in range(n):
        for i in range(first_out[u], first_out[u + 1]):
            arcs.append((u, head[i], weight[i]))
    return Graph.from_arcs(n, arcs), pos


def save_graph(g: Graph, path) -> None:
    with open(path, "wb") as f:
        f.write(graph_to_bytes(g))


def load_graph(path) -> Graph:
    with open(path, "rb") as f:
        buf = f.read()
    g, _ = graph_from_bytes(buf)
    return g
