"""Seed-reproducible network generators: ER, PA, security and overlapping.

All generators draw from a single :class:`~cascadenet.rng.RngStream` and
emit nodes and edges in creation order, so identical parameters give
identical graphs.  Degree-proportional picks sample uniformly from an
endpoint list in which every node appears once per incident edge; this is
exact weighted sampling over the current degrees.  Pools are only updated
after a node has made all of its picks, so every pick at step ``t`` sees the
degrees of ``G_{t-1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ParameterError
from .graph import KIND_CODE, NO_COLOR, Graph
from .rng import RngStream, graph_stream

MODELS = ("er", "pa", "security", "overlap")
LOG_BASES = ("natural", "two")

PA, ER = KIND_CODE["pa"], KIND_CODE["er"]
SEED_PREF, SEED_RAND = KIND_CODE["seed_pref"], KIND_CODE["seed_rand"]
INTRA, OVER_CROSS = KIND_CODE["intra"], KIND_CODE["over_cross"]


@dataclass(frozen=True)
class GenParams:
    model: str
    n: int
    p: Optional[float] = None
    d: Optional[int] = None
    a: Optional[float] = None
    d1: Optional[int] = None
    d2: Optional[int] = None
    log_base: str = "natural"
    allow_parallel: bool = False
    master_seed: int = 0

    def __post_init__(self):
        if self.model == "overlap" and self.d is None and self.d1 is not None and self.d2 is not None:
            object.__setattr__(self, "d", self.d1 + self.d2)

    def validate(self) -> "GenParams":
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ParameterError(f"n must be a non-negative integer, got {self.n!r}")
        if self.log_base not in LOG_BASES:
            raise ParameterError(f"log_base must be 'natural' or 'two', got {self.log_base!r}")
        if self.model == "er":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ParameterError(f"er requires p in [0, 1], got {self.p!r}")
            return self
        if self.model == "overlap":
            if self.d1 is None or self.d2 is None or self.d1 < 2 or self.d2 < 2:
                raise ParameterError("overlap requires d1 >= 2 and d2 >= 2")
            if self.d != self.d1 + self.d2:
                raise ParameterError(f"overlap requires d = d1 + d2, got d={self.d}")
        if self.d is None or self.d < 1:
            raise ParameterError(f"{self.model} requires d >= 1, got {self.d!r}")
        if self.model == "pa":
            if self.n <= self.d + 1:
                raise ParameterError(f"pa requires n > d + 1, got n={self.n}, d={self.d}")
            return self
        if self.a is None or self.a <= 0:
            raise ParameterError(f"{self.model} requires a > 0, got {self.a!r}")
        if self.n < 3:
            raise ParameterError(f"{self.model} requires n >= 3, got {self.n}")
        # log t is increasing, so p_t <= 1 for all t >= 3 iff it holds at t = 3
        if self.new_color_probability(3) > 1.0:
            raise ParameterError("p_i = (log i)^-a exceeds 1")
        return self

    def new_color_probability(self, t: int) -> float:
        log = math.log(t) if self.log_base == "natural" else math.log2(t)
        return log ** (-self.a)

    def tag(self) -> str:
        parts = [f"n={self.n}"]
        if self.model == "er":
            parts.append(f"p={self.p!r}")
        else:
            parts.append(f"d={self.d}")
        if self.model in ("security", "overlap"):
            parts.append(f"a={self.a!r}")
        if self.model == "overlap":
            parts += [f"d1={self.d1}", f"d2={self.d2}"]
        if self.model != "er":
            parts += [f"log_base={self.log_base}", f"allow_parallel={int(self.allow_parallel)}"]
        parts.append(f"seed={self.master_seed}")
        return f"{self.model}:" + ",".join(parts)

    def with_seed(self, master_seed: int) -> "GenParams":
        return replace(self, master_seed=master_seed)


class _Builder:
    """Accumulates columnar node/edge data during generation."""

    def __init__(self):
        self.node_time, self.node_seed, self.color1, self.color2 = [], [], [], []
        self.eu, self.ev, self.ek, self.et = [], [], [], []

    def add_node(self, seed, c1, c2=NO_COLOR):
        v = len(self.node_time)
        self.node_time.append(v + 1)
        self.node_seed.append(seed)
        self.color1.append(c1)
        self.color2.append(c2)
        return v

    def add_edge(self, u, v, kind):
        self.eu.append(u)
        self.ev.append(v)
        self.ek.append(kind)
        self.et.append(u + 1)

    def build(self, tag):
        return Graph(self.node_time, self.node_seed, self.color1, self.color2,
                     self.eu, self.ev, self.ek, self.et, tag)


def _below_fn(rng: RngStream):
    """Exact uniform integer in [0, m) using rejection on getrandbits."""
    bits = rng.py.getrandbits

    def below(m):
        k = m.bit_length()
        r = bits(k)
        while r >= m:
            r = bits(k)
        return r

    return below


def gen_er(params: GenParams, rng: Optional[RngStream] = None) -> Graph:
    """G(n, p): each pair present independently with probability p.

    Node ``i`` draws Binomial(i, p) older neighbours uniformly without
    replacement, which is equivalent to independent coin flips per pair.
    """
    params.validate()
    if params.model != "er":
        raise ParameterError("gen_er needs model='er'")
    rng = rng or graph_stream(params.master_seed, 0)
    b = _Builder()
    for v in range(params.n):
        b.add_node(True, v)
    gen, p = rng.np, params.p
    for i in range(1, params.n):
        k = int(gen.binomial(i, p))
        if k == 0:
            continue
        if k == i:
            olds = range(i)
        else:
            olds = np.sort(gen.choice(i, size=k, replace=False)).tolist()
        for j in olds:
            b.add_edge(i, j, ER)
    return b.build(params.tag())


def gen_pa(params: GenParams, rng: Optional[RngStream] = None) -> Graph:
    """Preferential attachment seeded with the complete graph on d+1 nodes."""
    params.validate()
    if params.model != "pa":
        raise ParameterError("gen_pa needs model='pa'")
    rng = rng or graph_stream(params.master_seed, 0)
    below = _below_fn(rng)
    n, d = params.n, params.d
    b = _Builder()
    pool = []
    for i in range(d + 1):
        b.add_node(True, i)
        for j in range(i):
            b.add_edge(i, j, PA)
        pool.extend([i] * d)
    for i in range(d + 1, n):
        b.add_node(True, i)
        L = len(pool)
        if params.allow_parallel:
            targets = [pool[below(L)] for _ in range(d)]
        else:
            targets, seen = [], set()
            while len(targets) < d:
                t = pool[below(L)]
                if t not in seen:
                    seen.add(t)
                    targets.append(t)
        for t in targets:
            b.add_edge(i, t, PA)
        pool.extend(targets)
        pool.extend([i] * d)
    return b.build(params.tag())


def _gen_colored(params: GenParams, rng: Optional[RngStream], overlap: bool) -> Graph:
    params.validate()
    rng = rng or graph_stream(params.master_seed, 0)
    below = _below_fn(rng)
    uniform = rng.py.random
    n, d, parallel = params.n, params.d, params.allow_parallel
    rand_edges = (params.d1 if overlap else d) - 1

    b = _Builder()
    node_colors = []            # per node: tuple of colours it carries
    pool = []                   # endpoint list over the whole graph
    color_pool = {}             # colour -> endpoint list over its carriers
    members = {}                # colour -> carriers in join order
    seeds = []                  # seed ids; colour id == seed id

    for v in range(2):
        b.add_node(True, v)
        node_colors.append((v,))
        seeds.append(v)
        members[v] = [v]
    b.add_edge(1, 0, SEED_RAND)
    pool += [1, 0]
    color_pool[0] = [0]
    color_pool[1] = [1]

    def class_picks(c, count, exclude):
        """Degree-proportional picks in colour class ``c``, duplicates collapsed."""
        cands = members[c]
        if parallel:
            cp = color_pool[c]
            return [cp[below(len(cp))] for _ in range(count)]
        if len(cands) < count:
            return [x for x in cands if x not in exclude]
        cp = color_pool[c]
        L = len(cp)
        out = []
        for _ in range(count):
            x = cp[below(L)]
            if x not in exclude:
                exclude.add(x)
                out.append(x)
        return out

    for i in range(2, n):
        t = i + 1
        if uniform() < params.new_color_probability(t):
            # seed of a fresh colour
            u = pool[below(len(pool))]
            taken = set() if parallel else {u}
            avail = len(seeds) - (1 if (not parallel and node_colors[u][0] == u) else 0)
            k = min(rand_edges, avail)
            rand_targets = []
            while len(rand_targets) < k:
                s = seeds[below(len(seeds))]
                if s not in taken and s not in rand_targets:
                    if not parallel:
                        taken.add(s)
                    rand_targets.append(s)
            cross_targets = []
            if overlap:
                c2 = seeds[below(len(seeds))]
                cross_targets = class_picks(c2, params.d2, taken if not parallel else set())
                b.add_node(True, i, c2)
                colors = (i, c2)
            else:
                b.add_node(True, i)
                colors = (i,)
            b.add_edge(i, u, SEED_PREF)
            for s in rand_targets:
                b.add_edge(i, s, SEED_RAND)
            for w in cross_targets:
                b.add_edge(i, w, OVER_CROSS)
            targets = [u] + rand_targets + cross_targets
            seeds.append(i)
            members[i] = [i]
            color_pool[i] = []
            if overlap:
                members[c2].append(i)
        else:
            c = seeds[below(len(seeds))]
            targets = class_picks(c, d, set())
            b.add_node(False, c)
            colors = (c,)
            for w in targets:
                b.add_edge(i, w, INTRA)
            members[c].append(i)
        node_colors.append(colors)
        for w in targets:
            pool.append(w)
            for cw in node_colors[w]:
                color_pool[cw].append(w)
        deg = len(targets)
        pool.extend([i] * deg)
        for c in colors:
            color_pool[c].extend([i] * deg)
    return b.build(params.tag())


def gen_security(params: GenParams, rng: Optional[RngStream] = None) -> Graph:
    """Security model: new colours with probability (log t)^-a, else homophilous PA."""
    if params.model != "security":
        raise ParameterError("gen_security needs model='security'")
    return _gen_colored(params, rng, overlap=False)


def gen_overlapping(params: GenParams, rng: Optional[RngStream] = None) -> Graph:
    """Security model whose seeds also join a uniformly chosen older colour."""
    if params.model != "overlap":
        raise ParameterError("gen_overlapping needs model='overlap'")
    return _gen_colored(params, rng, overlap=True)


GENERATORS = {"er": gen_er, "pa": gen_pa, "security": gen_security, "overlap": gen_overlapping}


def generate(params: GenParams, rng: Optional[RngStream] = None) -> Graph:
    params.validate()
    return GENERATORS[params.model](params, rng)
