"""Reader and writer for the ``netgraph v1`` text format.

::

    # netgraph v1
    n <N> m <M> model <tag>
    node <id> t=<step> seed=<0|1> colors=<c1[,c2]>
    ...
    edge <u> <v> kind=<kind> t=<step>
    ...

Nodes come first in id order, then edges in creation order.  Lines end in
LF.  Output is a pure function of the graph, so equal graphs give equal
bytes.
"""
from __future__ import annotations

import io
import os
import re

import numpy as np

from .errors import FormatError
from .graph import KIND_CODE, EDGE_KINDS, NO_COLOR, Graph

MAGIC = "# netgraph v1"

_HEADER = re.compile(r"n (\d+) m (\d+) model (\S+)")
_NODE = re.compile(r"node (\d+) t=(\d+) seed=([01]) colors=(\d+)(?:,(\d+))?")
_EDGE = re.compile(r"edge (\d+) (\d+) kind=(\S+) t=(\d+)")


def dumps(g: Graph) -> str:
    out = [MAGIC, f"n {g.n} m {g.m} model {g.model_tag}"]
    times, seeds, c1, c2 = g.node_time.tolist(), g.node_seed.tolist(), g.color1.tolist(), g.color2.tolist()
    for v in range(g.n):
        colors = str(c1[v]) if c2[v] == NO_COLOR else f"{c1[v]},{c2[v]}"
        out.append(f"node {v} t={times[v]} seed={int(seeds[v])} colors={colors}")
    kinds = [EDGE_KINDS[k] for k in g.edge_kind.tolist()]
    for u, v, kind, t in zip(g.edge_u.tolist(), g.edge_v.tolist(), kinds, g.edge_time.tolist()):
        out.append(f"edge {u} {v} kind={kind} t={t}")
    return "\n".join(out) + "\n"


def write_graph(g: Graph, sink) -> None:
    """Write ``g`` to a path or a text stream."""
    text = dumps(g)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def loads(text: str) -> Graph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise FormatError(1, f"expected {MAGIC!r}")
    if len(lines) < 2:
        raise FormatError(2, "missing size header")
    head = _HEADER.fullmatch(lines[1])
    if head is None:
        raise FormatError(2, "malformed header, expected 'n <N> m <M> model <tag>'")
    n, m, tag = int(head.group(1)), int(head.group(2)), head.group(3)
    if len(lines) != 2 + n + m:
        raise FormatError(len(lines), f"expected {n} node lines and {m} edge lines, found {len(lines) - 2} lines")

    node_time = np.empty(n, np.int64)
    node_seed = np.empty(n, bool)
    c1 = np.empty(n, np.int64)
    c2 = np.full(n, NO_COLOR, np.int64)
    for v in range(n):
        lineno = 3 + v
        mt = _NODE.fullmatch(lines[lineno - 1])
        if mt is None:
            raise FormatError(lineno, "malformed node line")
        if int(mt.group(1)) != v:
            raise FormatError(lineno, f"expected node id {v}, got {mt.group(1)}")
        node_time[v] = int(mt.group(2))
        node_seed[v] = mt.group(3) == "1"
        c1[v] = int(mt.group(4))
        if mt.group(5) is not None:
            c2[v] = int(mt.group(5))

    eu = np.empty(m, np.int64)
    ev = np.empty(m, np.int64)
    ek = np.empty(m, np.int8)
    et = np.empty(m, np.int64)
    for i in range(m):
        lineno = 3 + n + i
        mt = _EDGE.fullmatch(lines[lineno - 1])
        if mt is None:
            raise FormatError(lineno, "malformed edge line")
        u, v, kind = int(mt.group(1)), int(mt.group(2)), mt.group(3)
        if u >= n or v >= n:
            raise FormatError(lineno, f"edge references unknown node (n={n})")
        if u == v:
            raise FormatError(lineno, "self-loop")
        if u < v:
            raise FormatError(lineno, "later-created endpoint must come first")
        if kind not in KIND_CODE:
            raise FormatError(lineno, f"unknown edge kind {kind!r}")
        eu[i], ev[i], ek[i], et[i] = u, v, KIND_CODE[kind], int(mt.group(4))
    try:
        return Graph(node_time, node_seed, c1, c2, eu, ev, ek, et, tag)
    except ValueError as exc:
        raise FormatError(2, str(exc)) from exc


def read_graph(source) -> Graph:
    """Read a graph from a path or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="ascii", newline="") as fh:
            text = fh.read()
    elif isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError("source must be a path or a readable text stream")
    if "\r" in text:
        raise FormatError(1, "line endings must be LF")
    return loads(text)
