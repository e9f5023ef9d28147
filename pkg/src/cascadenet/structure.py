"""Structural analyses of coloured (security / overlapping) graphs.

Colour ids coincide with the id of the colour's seed node, so a colour's
creation time is the creation time of its seed.  A community is the set of
nodes carrying a colour; in overlapping graphs a seed carries two colours and
belongs to two communities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .cascade import CascadeResult, ThresholdAssignment
from .errors import DomainError, NoPathError
from .graph import KIND_CODE, NO_COLOR, Graph
from .rng import RngStream

INTRA, OVER_CROSS = KIND_CODE["intra"], KIND_CODE["over_cross"]
SEED_PREF, SEED_RAND = KIND_CODE["seed_pref"], KIND_CODE["seed_rand"]


def _require_colored(g: Graph):
    if not g.is_colored:
        raise DomainError(f"graph model {g.model!r} carries no community colours")


def tag_params(g: Graph) -> dict[str, str]:
    """Parameters recorded in the model tag, e.g. ``{'n': '1000', 'd': '10'}``."""
    _, _, rest = g.model_tag.partition(":")
    out = {}
    for part in rest.split(","):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k] = v
    return out


def _membership(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """(node, colour) pairs for every colour a node carries."""
    two = np.flatnonzero(g.color2 != NO_COLOR)
    nodes = np.concatenate([np.arange(g.n), two])
    colors = np.concatenate([g.color1, g.color2[two]])
    return nodes, colors


def _carries(g: Graph, nodes: np.ndarray, colors: np.ndarray) -> np.ndarray:
    return (g.color1[nodes] == colors) | (g.color2[nodes] == colors)


# -- communities -------------------------------------------------------------

@dataclass(frozen=True)
class CommunityView:
    color: int
    members: frozenset
    seed: int
    creation_time: int
    internal_edges: int
    external_edges: int

    @property
    def size(self) -> int:
        return len(self.members)


def _edge_color_counts(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Per colour: edges with both ends carrying it, and boundary edges."""
    internal = np.zeros(g.n, dtype=np.int64)
    external = np.zeros(g.n, dtype=np.int64)
    u, v = g.edge_u, g.edge_v
    cu = (g.color1[u], g.color2[u])
    cv = (g.color1[v], g.color2[v])
    for side, other in ((cu, cv), (cv, cu)):
        for c in side:
            valid = c != NO_COLOR
            shared = valid & ((c == other[0]) | (c == other[1]))
            if side is cu:
                internal += np.bincount(c[shared], minlength=g.n)
            external += np.bincount(c[valid & ~shared], minlength=g.n)
    return internal, external


def communities(g: Graph) -> list[CommunityView]:
    """One view per colour, in colour creation order."""
    _require_colored(g)
    nodes, colors = _membership(g)
    order = np.lexsort((nodes, colors))
    nodes, colors = nodes[order], colors[order]
    bounds = np.flatnonzero(np.diff(colors)) + 1
    internal, external = _edge_color_counts(g)
    out = []
    for chunk_nodes, c in zip(np.split(nodes, bounds), colors[np.r_[0, bounds]] if colors.size else []):
        c = int(c)
        seeds = [int(x) for x in chunk_nodes if g.node_seed[x] and g.color1[x] == c]
        if len(seeds) != 1:
            raise DomainError(f"colour {c} has {len(seeds)} seeds")
        out.append(CommunityView(c, frozenset(chunk_nodes.tolist()), seeds[0], int(g.node_time[seeds[0]]),
                                 int(internal[c]), int(external[c])))
    out.sort(key=lambda cv: (cv.creation_time, cv.color))
    return out


# -- degree priority -----------------------------------------------------------

@dataclass(frozen=True)
class DegreePriority:
    node: int
    dp: tuple[int, ...]
    colors: tuple[int, ...]
    first_color_is_own: bool

    @property
    def length(self) -> int:
        return len(self.dp)


def _attributed_color(g: Graph, v: int, u: int, eid: int) -> int:
    c1, c2 = int(g.color1[u]), int(g.color2[u])
    if c2 != NO_COLOR and g.edge_kind[eid] in (INTRA, OVER_CROSS):
        own = g.colors(v)
        if c1 in own:
            return c1
        if c2 in own:
            return c2
    return c1


def degree_priority(g: Graph, v: int) -> DegreePriority:
    """Sizes of ``v``'s neighbour groups by colour, largest first.

    Ties go to the colour created earlier.  Two-coloured neighbours count
    toward the colour they share with ``v`` when joined by an ``intra`` or
    ``over_cross`` edge, otherwise toward their first colour.
    """
    _require_colored(g)
    counts: dict[int, int] = {}
    for u, eid in zip(g.neighbors(v).tolist(), g.incident_edges(v).tolist()):
        c = _attributed_color(g, v, u, eid)
        counts[c] = counts.get(c, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], int(g.node_time[kv[0]]), kv[0]))
    dp = tuple(cnt for _, cnt in ranked)
    cols = tuple(c for c, _ in ranked)
    return DegreePriority(v, dp, cols, bool(cols) and cols[0] == int(g.color1[v]))


@dataclass
class PriorityTable:
    """Bulk degree-priority summary; arrays are indexed by node id."""

    length: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    own: np.ndarray
    first_color_is_own: np.ndarray


def degree_priority_table(g: Graph) -> PriorityTable:
    """:func:`degree_priority` for every node at once (first two entries only)."""
    _require_colored(g)
    n = g.n
    src = np.repeat(np.arange(n), g.degree)
    nbr, eid = g.indices, g.inc_edge
    attr = g.color1[nbr].copy()
    c2 = g.color2[nbr]
    two = (c2 != NO_COLOR) & np.isin(g.edge_kind[eid], (INTRA, OVER_CROSS))
    first_shared = _carries(g, src, attr)
    second_shared = _carries(g, src, c2)
    pick2 = two & ~first_shared & second_shared
    attr[pick2] = c2[pick2]

    keys, cnt = np.unique(src * n + attr, return_counts=True)
    node, color = keys // n, keys % n
    order = np.lexsort((color, g.node_time[color], -cnt, node))
    node, color, cnt = node[order], color[order], cnt[order]
    length = np.bincount(node, minlength=n)
    start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(length, out=start[1:])
    has1 = length >= 1
    has2 = length >= 2
    d1 = np.zeros(n, dtype=np.int64)
    d2 = np.zeros(n, dtype=np.int64)
    d1[has1] = cnt[start[:-1][has1]]
    d2[has2] = cnt[start[:-1][has2] + 1]
    own_hit = color == g.color1[node]
    own = np.bincount(node[own_hit], weights=cnt[own_hit], minlength=n).astype(np.int64)
    first_own = np.zeros(n, dtype=bool)
    first_own[has1] = color[start[:-1][has1]] == g.color1[np.flatnonzero(has1)]
    return PriorityTable(length, d1, d2, own, first_own)


# -- power law -----------------------------------------------------------------

def s_k(d: int, k: int) -> Fraction:
    """Limiting fraction of degree-k nodes in PA with d edges per step (k >= d)."""
    if k < d:
        raise ValueError("k must be >= d")
    return Fraction(2 * d * (d + 1), k * (k + 1) * (k + 2))


@dataclass
class PowerLawReport:
    d: int
    histogram: np.ndarray          # histogram[k] = number of nodes of degree k
    exponent: Optional[float]
    fit_error: Optional[str]
    s_table: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.histogram.sum())

    def ccdf(self) -> np.ndarray:
        """P(degree >= k) for k = 0..max degree."""
        tail = np.cumsum(self.histogram[::-1])[::-1]
        return tail / max(self.n, 1)


def fit_powerlaw_exponent(histogram: np.ndarray, k_min: int, min_count: int = 10) -> float:
    """Exponent of p(k) ~ k^-gamma from a least-squares line on the log-log CCDF.

    Only degrees ``>= k_min`` whose histogram count is at least ``min_count``
    enter the fit.  The CCDF slope is ``1 - gamma``.
    """
    histogram = np.asarray(histogram, dtype=float)
    tail = np.cumsum(histogram[::-1])[::-1]
    ks = np.arange(histogram.size)
    use = (ks >= max(k_min, 1)) & (histogram >= min_count)
    if np.count_nonzero(use) < 2:
        raise DomainError("need at least two degrees with enough samples to fit")
    x = np.log(ks[use])
    y = np.log(tail[use] / tail.max())
    if np.ptp(x) == 0:
        raise DomainError("degenerate histogram")
    slope, _ = np.polyfit(x, y, 1)
    return 1.0 - slope


def power_law_report(g: Graph, k_max: int, d: Optional[int] = None) -> PowerLawReport:
    if d is None:
        d = int(tag_params(g).get("d", g.degree.min() if g.n else 1))
    hist = np.bincount(g.degree, minlength=max(k_max, 0) + 1)
    try:
        exponent, err = fit_powerlaw_exponent(hist, d), None
    except ValueError as exc:
        exponent, err = None, str(exc)
    table = {k: s_k(d, k) for k in range(d, k_max + 1)}
    return PowerLawReport(d, hist, exponent, err, table)


# -- infection priority tree ----------------------------------------------------

@dataclass(frozen=True)
class InfectionPriorityTree:
    communities: tuple[int, ...]
    parent: dict
    root: int
    depth: dict
    height: int
    creation_time: dict

    def edges(self) -> list[tuple[int, int]]:
        return [(p, c) for c, p in self.parent.items() if p is not None]


def _birth_edges(g: Graph, s: int) -> np.ndarray:
    eids = g.incident_edges(s)
    return eids[g.edge_u[eids] == s]


def build_ipt(g: Graph) -> InfectionPriorityTree:
    """Contract each colour class; link a community to the community of its
    seed's preferential-attachment target.

    The second initial seed has no such edge and hangs off the root through
    the initial edge.
    """
    _require_colored(g)
    seeds = np.flatnonzero(g.node_seed & (g.color1 == np.arange(g.n)))
    seeds = seeds[np.argsort(g.node_time[seeds], kind="stable")]
    root = int(g.color1[seeds[0]])
    parent, depth, ctime = {root: None}, {root: 0}, {root: int(g.node_time[seeds[0]])}
    for s in seeds[1:].tolist():
        births = _birth_edges(g, s)
        pref = births[g.edge_kind[births] == SEED_PREF]
        target_edge = pref[0] if pref.size else births[0]
        p = int(g.color1[g.edge_v[target_edge]])
        c = int(g.color1[s])
        parent[c] = p
        depth[c] = depth[p] + 1
        ctime[c] = int(g.node_time[s])
    comms = tuple(int(g.color1[s]) for s in seeds)
    return InfectionPriorityTree(comms, parent, root, depth, max(depth.values()), ctime)


# -- strong communities ---------------------------------------------------------

@dataclass
class StrongReport:
    strong: dict
    vulnerable: int
    external: dict
    need: dict


def classify_strong(g: Graph, thr: ThresholdAssignment, strict: bool = False) -> StrongReport:
    """A community is strong when its seed cannot trigger from outside alone:
    ``external incidences(seed) < need(seed)``.

    With ``strict=True`` every member must satisfy the same inequality.
    """
    views = communities(g)
    strong, ext_of, need_of = {}, {}, {}
    for cv in views:
        nodes = [cv.seed] if not strict else sorted(cv.members)
        ok = True
        for x in nodes:
            nb = g.neighbors(x)
            ext = int(np.count_nonzero(~_carries(g, nb, np.full(nb.size, cv.color))))
            if x == cv.seed:
                ext_of[cv.color] = ext
                need_of[cv.color] = int(thr.need[x])
            if ext >= thr.need[x]:
                ok = False
                break
        strong[cv.color] = ok
    return StrongReport(strong, sum(1 for v in strong.values() if not v), ext_of, need_of)


# -- navigation ------------------------------------------------------------------

def _climb_to_seed(g: Graph, x: int) -> list[int]:
    """Walk to the colour's seed through earliest-created same-colour neighbours."""
    walk = [x]
    c = int(g.color1[x])
    while not g.node_seed[x]:
        nb = g.neighbors(x)
        same = nb[g.color1[nb] == c]
        if same.size == 0 or same.min() >= x:
            raise NoPathError(f"node {x} has no older neighbour of its colour")
        x = int(same.min())
        walk.append(x)
    return walk


def _seed_step(g: Graph, s: int) -> list[int]:
    """Nodes from seed ``s`` (exclusive) to its parent in the seed tree (inclusive)."""
    births = _birth_edges(g, s)
    kinds = g.edge_kind[births]
    rand = births[kinds == SEED_RAND]
    if rand.size:
        return [int(g.edge_v[rand[0]])]
    pref = births[kinds == SEED_PREF]
    if pref.size:
        return _climb_to_seed(g, int(g.edge_v[pref[0]]))
    return []


def _seed_chain(g: Graph, s: int) -> list[int]:
    walk = [s]
    while True:
        step = _seed_step(g, walk[-1])
        if not step:
            return walk
        walk.extend(step)


def _community_path(g: Graph, u: int, v: int) -> Optional[list[int]]:
    c = int(g.color1[u])
    prev = {u: u}
    frontier = [u]
    while frontier and v not in prev:
        nxt = []
        for x in frontier:
            for y in g.neighbors(x).tolist():
                if y not in prev and g.color1[y] == c:
                    prev[y] = x
                    nxt.append(y)
        frontier = nxt
    if v not in prev:
        return None
    path = [v]
    while path[-1] != u:
        path.append(prev[path[-1]])
    return path[::-1]


def _drop_loops(path: list[int]) -> list[int]:
    out, pos = [], {}
    for x in path:
        if x in pos:
            cut = pos[x]
            for y in out[cut + 1:]:
                del pos[y]
            del out[cut + 1:]
        else:
            pos[x] = len(out)
            out.append(x)
    return out


def navigate(g: Graph, u: int, v: int) -> list[int]:
    """Short u-v walk using only local information.

    Same-colour endpoints: BFS inside the community.  Otherwise climb from
    each endpoint to its seed, then climb the seed tree (parent = first
    random seed edge, else the seed of the preferential target's colour)
    until the two chains meet, and splice the halves.
    """
    _require_colored(g)
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ValueError("node id out of range")
    if u == v:
        return [u]
    if g.color1[u] == g.color1[v]:
        path = _community_path(g, u, v)
        if path is not None:
            return path
    up_u = _climb_to_seed(g, u)
    up_v = _climb_to_seed(g, v)
    chain_u = _seed_chain(g, up_u[-1])
    chain_v = _seed_chain(g, up_v[-1])
    index_u = {x: i for i, x in enumerate(chain_u)}
    meet = next((j for j, x in enumerate(chain_v) if x in index_u), None)
    if meet is None:
        raise NoPathError(f"seed chains of {u} and {v} never meet")
    i = index_u[chain_v[meet]]
    path = up_u[:-1] + chain_u[:i + 1] + chain_v[:meet][::-1] + up_v[:-1][::-1]
    return _drop_loops(path)


# -- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class CommunityStats:
    color: int
    size: int
    seed_id: int
    creation_time: int
    internal_edges: int
    external_edges: int
    conductance: Fraction
    diameter: int


@dataclass
class StructureReport:
    communities: list
    mean_distance: Optional[float]
    sampled_pairs: int

    def max_diameter(self) -> int:
        return max(c.diameter for c in self.communities)


def _induced_diameter(g: Graph, members: np.ndarray) -> int:
    if members.size <= 1:
        return 0
    local = np.full(g.n, -1, dtype=np.int64)
    local[members] = np.arange(members.size)
    inside = (local[g.edge_u] >= 0) & (local[g.edge_v] >= 0)
    rows, cols = local[g.edge_u[inside]], local[g.edge_v[inside]]
    adj = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(members.size,) * 2).tocsr()
    dist = shortest_path(adj, directed=False, unweighted=True)
    if np.isinf(dist).any():
        return -1
    return int(dist.max())


def sampled_mean_distance(g: Graph, pairs: int, rng: RngStream, batch: int = 32) -> float:
    """Mean BFS distance over ``pairs`` uniformly sampled ordered pairs u != v."""
    src = rng.np.integers(0, g.n, size=pairs)
    dst = (src + rng.np.integers(1, g.n, size=pairs)) % g.n
    adj = coo_matrix((np.ones(g.m), (g.edge_u, g.edge_v)), shape=(g.n, g.n)).tocsr()
    total = 0.0
    for lo in range(0, pairs, batch):
        s, t = src[lo:lo + batch], dst[lo:lo + batch]
        dist = shortest_path(adj, directed=False, unweighted=True, indices=s)
        d = dist[np.arange(s.size), t]
        if np.isinf(d).any():
            raise NoPathError("sampled pair is disconnected")
        total += d.sum()
    return total / pairs


def structure_report(g: Graph, sample_pairs: int = 0, rng: Optional[RngStream] = None,
                     diameters: bool = True) -> StructureReport:
    views = communities(g)
    vol_total = 2 * g.m
    rows = []
    for cv in views:
        members = np.fromiter(sorted(cv.members), dtype=np.int64)
        vol = int(g.degree[members].sum())
        denom = min(vol, vol_total - vol)
        phi = Fraction(cv.external_edges, denom) if denom else Fraction(0)
        diam = _induced_diameter(g, members) if diameters else -1
        rows.append(CommunityStats(cv.color, cv.size, cv.seed, cv.creation_time, cv.internal_edges,
                                   cv.external_edges, phi, diam))
    mean = None
    if sample_pairs:
        mean = sampled_mean_distance(g, sample_pairs, rng or RngStream(0, 0))
    return StructureReport(rows, mean, sample_pairs)


# -- infection-inclusion audit ----------------------------------------------------

@dataclass(frozen=True)
class Violation:
    node: int
    neighbor: int
    edge_kind: str
    reason: str


def infection_inclusion_audit(g: Graph, result: CascadeResult) -> list[Violation]:
    """Check each infected node's already-infected neighbours against the
    channels allowed for the security model.

    Non-seed ``y`` may only be pushed by same-colour neighbours over
    ``intra`` edges, or by a later seed over that seed's ``seed_pref`` edge.
    A seed may be pushed over ``intra`` (own colour), ``seed_pref`` or
    ``seed_rand`` edges.
    """
    from .graph import EDGE_KINDS

    rounds = result.rounds
    triggered = rounds > 0
    src = np.repeat(np.arange(g.n), g.degree)
    sel = triggered[src]
    src, nbr, eid = src[sel], g.indices[sel], g.inc_edge[sel]
    prior = (rounds[nbr] >= 0) & (rounds[nbr] < rounds[src])
    src, nbr, eid = src[prior], nbr[prior], eid[prior]
    kind = g.edge_kind[eid]
    same = _carries(g, nbr, g.color1[src]) | ((g.color2[src] != NO_COLOR) & _carries(g, nbr, g.color2[src]))
    intra_ok = (kind == INTRA) & same
    later_seed_pref = (kind == SEED_PREF) & g.node_seed[nbr] & (g.edge_u[eid] == nbr)
    is_seed = g.node_seed[src]
    ok = np.where(is_seed, intra_ok | (kind == SEED_PREF) | (kind == SEED_RAND), intra_ok | later_seed_pref)
    out = []
    for y, x, k in zip(src[~ok].tolist(), nbr[~ok].tolist(), kind[~ok].tolist()):
        role = "seed" if g.node_seed[y] else "non-seed"
        out.append(Violation(y, x, EDGE_KINDS[k], f"{role} infected through a disallowed {EDGE_KINDS[k]} edge"))
    return out
