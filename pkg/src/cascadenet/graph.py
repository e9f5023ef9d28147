"""Immutable multigraph with node metadata and edge provenance.

Node ids are dense, 0-based and follow creation order.  Every edge is stored
with its later-created endpoint first, so the time direction used by the
structural analyses is recoverable as ``u -> v`` ("v is older").  Storage is
columnar (numpy arrays); :class:`NodeMeta` and :class:`EdgeRecord` are views
materialised on demand.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError

EDGE_KINDS = ("er", "pa", "seed_pref", "seed_rand", "intra", "over_cross")
KIND_CODE = {name: code for code, name in enumerate(EDGE_KINDS)}
COLORED_MODELS = frozenset({"security", "overlap"})

NO_COLOR = -1


@dataclass(frozen=True)
class NodeMeta:
    creation_time: int
    is_seed: bool
    colors: tuple[int, ...]


@dataclass(frozen=True)
class EdgeRecord:
    u: int
    v: int
    kind: str
    creation_time: int

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class Graph:
    """Columnar multigraph; read-only once constructed.

    Parameters are parallel arrays: per node ``node_time``, ``node_seed``,
    ``color1``, ``color2`` (``-1`` when the node has a single colour) and per
    edge ``edge_u`` (later endpoint), ``edge_v``, ``edge_kind`` (codes into
    :data:`EDGE_KINDS`) and ``edge_time``.
    """

    def __init__(self, node_time, node_seed, color1, color2, edge_u, edge_v, edge_kind, edge_time,
                 model_tag: str = "custom"):
        self.node_time = _frozen(node_time, np.int64)
        self.n = int(self.node_time.shape[0])
        self.node_seed = _frozen(node_seed, bool)
        self.color1 = _frozen(color1, np.int64)
        self.color2 = _frozen(color2, np.int64)
        self.edge_u = _frozen(edge_u, np.int64)
        self.edge_v = _frozen(edge_v, np.int64)
        self.edge_kind = _frozen(edge_kind, np.int8)
        self.edge_time = _frozen(edge_time, np.int64)
        self.m = int(self.edge_u.shape[0])
        if not model_tag or any(ch.isspace() for ch in model_tag):
            raise ValueError(f"model tag must be a non-empty token without whitespace: {model_tag!r}")
        self.model_tag = model_tag
        self._check()
        self._build_adjacency()
        self._nodes_cache = None

    @classmethod
    def from_records(cls, nodes: Sequence[NodeMeta], edges: Sequence[EdgeRecord], model_tag="custom") -> "Graph":
        c1 = [nm.colors[0] for nm in nodes]
        c2 = [nm.colors[1] if len(nm.colors) > 1 else NO_COLOR for nm in nodes]
        return cls(
            [nm.creation_time for nm in nodes], [nm.is_seed for nm in nodes], c1, c2,
            [e.u for e in edges], [e.v for e in edges], [KIND_CODE[e.kind] for e in edges],
            [e.creation_time for e in edges], model_tag,
        )

    @classmethod
    def from_edge_list(cls, n: int, pairs: Iterable[tuple[int, int]], kind="er", model_tag="custom") -> "Graph":
        """Build a plain graph where every node is its own seed and colour."""
        us, vs = [], []
        for a, b in pairs:
            us.append(max(a, b))
            vs.append(min(a, b))
        ids = np.arange(n)
        return cls(ids + 1, np.ones(n, bool), ids, np.full(n, NO_COLOR), us, vs,
                   np.full(len(us), KIND_CODE[kind]), np.asarray(us, dtype=np.int64) + 1, model_tag)

    def _check(self):
        n, m = self.n, self.m
        for name in ("node_seed", "color1", "color2"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have length n={n}")
        for name in ("edge_v", "edge_kind", "edge_time"):
            if getattr(self, name).shape != (m,):
                raise ValueError(f"{name} must have length m={m}")
        if m:
            if self.edge_u.min() < 0 or self.edge_u.max() >= n or self.edge_v.min() < 0 or self.edge_v.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(self.edge_u == self.edge_v):
                raise ValueError("self-loops are not allowed")
            if np.any(self.edge_u < self.edge_v):
                raise ValueError("edges must list the later-created endpoint first")
            if self.edge_kind.min() < 0 or self.edge_kind.max() >= len(EDGE_KINDS):
                raise ValueError("unknown edge kind code")
        if n and self.color1.min() < 0:
            raise ValueError("every node needs at least one colour")

    def _build_adjacency(self):
        n = self.n
        ends = np.concatenate([self.edge_u, self.edge_v])
        others = np.concatenate([self.edge_v, self.edge_u])
        eids = np.concatenate([np.arange(self.m), np.arange(self.m)])
        order = np.argsort(ends, kind="stable")
        self.degree = _frozen(np.bincount(ends, minlength=n), np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.degree, out=indptr[1:])
        self.indptr = _frozen(indptr, np.int64)
        self.indices = _frozen(others[order], np.int64)
        self.inc_edge = _frozen(eids[order], np.int64)

    # -- views -------------------------------------------------------------
    @property
    def model(self) -> str:
        return self.model_tag.split(":", 1)[0]

    @property
    def is_colored(self) -> bool:
        return self.model in COLORED_MODELS

    def colors(self, v: int) -> tuple[int, ...]:
        c2 = int(self.color2[v])
        return (int(self.color1[v]),) if c2 == NO_COLOR else (int(self.color1[v]), c2)

    def node(self, v: int) -> NodeMeta:
        return NodeMeta(int(self.node_time[v]), bool(self.node_seed[v]), self.colors(v))

    @property
    def nodes(self) -> list[NodeMeta]:
        if self._nodes_cache is None:
            self._nodes_cache = [self.node(v) for v in range(self.n)]
        return self._nodes_cache

    def edge(self, i: int) -> EdgeRecord:
        return EdgeRecord(int(self.edge_u[i]), int(self.edge_v[i]), EDGE_KINDS[self.edge_kind[i]],
                          int(self.edge_time[i]))

    @property
    def edges(self) -> list[EdgeRecord]:
        return [self.edge(i) for i in range(self.m)]

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbours of ``v`` with multiplicity, in edge-creation order."""
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def incident_edges(self, v: int) -> np.ndarray:
        return self.inc_edge[self.indptr[v]:self.indptr[v + 1]]

    def kind_count(self, kind: str) -> int:
        return int(np.count_nonzero(self.edge_kind == KIND_CODE[kind]))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        fields = ("node_time", "node_seed", "color1", "color2", "edge_u", "edge_v", "edge_kind", "edge_time")
        return (self.model_tag == other.model_tag and self.n == other.n and self.m == other.m
                and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in fields))

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, model_tag={self.model_tag!r})"


def node_mask(g: Graph, s) -> np.ndarray:
    """Boolean membership vector for a node set given as ids or a mask."""
    if isinstance(s, np.ndarray) and s.dtype == bool:
        if s.shape != (g.n,):
            raise ValueError("mask length must equal n")
        return s
    ids = np.fromiter((int(x) for x in s), dtype=np.int64) if not isinstance(s, np.ndarray) else s.astype(np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= g.n):
        raise ValueError("node id out of range")
    mask = np.zeros(g.n, dtype=bool)
    mask[ids] = True
    return mask


def cut_and_volume(g: Graph, mask: np.ndarray) -> tuple[int, int]:
    """Boundary edge count and volume (sum of degrees) of the set ``mask``."""
    cut = int(np.count_nonzero(mask[g.edge_u] != mask[g.edge_v]))
    vol = int(g.degree[mask].sum())
    return cut, vol


def conductance(g: Graph, s) -> Fraction:
    """cut(S, V-S) / min(vol(S), vol(V-S)), multiplicity counted."""
    mask = node_mask(g, s)
    size = int(mask.sum())
    if size == 0 or size == g.n:
        raise DomainError("conductance is undefined for the empty set and for V")
    cut, vol = cut_and_volume(g, mask)
    denom = min(vol, 2 * g.m - vol)
    if denom == 0:
        raise DomainError("conductance is undefined when one side has zero volume")
    return Fraction(cut, denom)


def component_labels(g: Graph, removed_mask: np.ndarray) -> np.ndarray:
    """Component label per node of ``G - removed``; removed nodes get -1."""
    keep = ~removed_mask
    labels = np.full(g.n, -1, dtype=np.int64)
    kept = np.flatnonzero(keep)
    if kept.size == 0:
        return labels
    local = np.full(g.n, -1, dtype=np.int64)
    local[kept] = np.arange(kept.size)
    live = keep[g.edge_u] & keep[g.edge_v]
    rows, cols = local[g.edge_u[live]], local[g.edge_v[live]]
    adj = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(kept.size, kept.size)).tocsr()
    _, lab = connected_components(adj, directed=False)
    labels[kept] = lab
    return labels


def largest_component_mask(g: Graph, removed_mask: np.ndarray) -> np.ndarray:
    """Mask of the largest component of ``G - removed``.

    Ties on size go to the component holding the smallest node id.
    """
    labels = component_labels(g, removed_mask)
    kept = np.flatnonzero(labels >= 0)
    out = np.zeros(g.n, dtype=bool)
    if kept.size == 0:
        return out
    lab = labels[kept]
    sizes = np.bincount(lab)
    # kept is ascending, so the first occurrence of a label is its min id
    _, first = np.unique(lab, return_index=True)
    best = min(range(sizes.size), key=lambda c: (-sizes[c], kept[first[c]]))
    out[kept[lab == best]] = True
    return out


def largest_component_excluding(g: Graph, removed) -> frozenset[int]:
    mask = largest_component_mask(g, node_mask(g, removed))
    return frozenset(np.flatnonzero(mask).tolist())
