"""Threshold cascades, physical attacks and Monte Carlo attack curves.

A node ``x`` outside the targeted set becomes infected once

    (infected incident edge endpoints of x) / deg(x) >= phi(x)

with parallel edges counted in both numerator and degree.  Internally each
threshold is held as the integer requirement ``need(x) = ceil(phi(x) deg(x))``
so the propagation never compares floats.  Isolated nodes get ``phi = 1`` and
can only be infected by being targeted.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import ParameterError
from .graph import Graph, largest_component_mask, node_mask
from .rng import RngStream, attack_stream, trial_stream

STRATEGIES = ("top_degree", "random_uniform")
_STRATEGY_ALIASES = {"topdeg": "top_degree", "top_degree": "top_degree",
                     "random": "random_uniform", "random_uniform": "random_uniform"}

CSV_HEADER = ("k,strategy,threshold_mode,phi,trials,agg,infection_count,infection_fraction,"
              "injury_count,injury_fraction")


def as_fraction(phi) -> Fraction:
    """Exact rational for a threshold given as Fraction, int, str or float.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10``.
    """
    if isinstance(phi, Fraction):
        return phi
    if isinstance(phi, float):
        return Fraction(repr(phi))
    return Fraction(phi)


@dataclass(frozen=True)
class ThresholdSpec:
    """Either ``uniform`` with a fixed ``phi`` or ``random``."""

    mode: str
    phi: Optional[Fraction] = None

    @classmethod
    def parse(cls, text: str) -> "ThresholdSpec":
        text = text.strip()
        if text == "random":
            return cls("random")
        if text.startswith("uniform:"):
            return cls.uniform(text.split(":", 1)[1])
        raise ParameterError(f"threshold must be 'random' or 'uniform:PHI', got {text!r}")

    @classmethod
    def uniform(cls, phi) -> "ThresholdSpec":
        try:
            phi = as_fraction(phi)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"bad threshold value {phi!r}") from exc
        if not 0 < phi <= 1:
            raise ParameterError(f"uniform threshold must lie in (0, 1], got {phi}")
        return cls("uniform", phi)

    def __str__(self):
        return "random" if self.mode == "random" else f"uniform:{_fmt_phi(self.phi)}"


def _fmt_phi(phi: Optional[Fraction]) -> str:
    if phi is None:
        return ""
    if phi.denominator == 1 or 10 ** 12 % phi.denominator == 0:
        s = f"{float(phi):.12f}".rstrip("0").rstrip(".")
        return s
    return f"{phi.numerator}/{phi.denominator}"


class ThresholdAssignment:
    """Per-node thresholds, stored as integer trigger requirements.

    ``need[v]`` is the smallest infected-incidence count that triggers ``v``;
    isolated nodes get ``need = 1`` which they can never reach.
    """

    def __init__(self, g: Graph, mode: str, need: np.ndarray, phi: Optional[Fraction] = None):
        self.mode = mode
        self.phi = phi
        self.degree = g.degree
        need = np.asarray(need, dtype=np.int64).copy()
        need.setflags(write=False)
        self.need = need

    def phi_of(self, v: int) -> Fraction:
        deg = int(self.degree[v])
        if not deg:
            return Fraction(1)
        return self.phi if self.mode == "uniform" else Fraction(int(self.need[v]), deg)


def assign_thresholds(g: Graph, spec: Union[ThresholdSpec, str], rng: Optional[RngStream] = None) -> ThresholdAssignment:
    """Uniform or random thresholds.

    Random mode draws ``r_v`` uniformly from ``{1..deg(v)}`` for all nodes at
    once, in node-id order, from ``rng.np``.
    """
    if isinstance(spec, str):
        spec = ThresholdSpec.parse(spec)
    deg = g.degree
    if spec.mode == "uniform":
        if spec.phi is None or not 0 < spec.phi <= 1:
            raise ParameterError(f"uniform threshold must lie in (0, 1], got {spec.phi}")
        p, q = spec.phi.numerator, spec.phi.denominator
        need = -((-p * deg) // q)
        return ThresholdAssignment(g, "uniform", np.maximum(need, 1), spec.phi)
    if spec.mode != "random":
        raise ParameterError(f"unknown threshold mode {spec.mode!r}")
    if rng is None:
        raise ParameterError("random thresholds need an RngStream")
    r = rng.np.integers(0, np.maximum(deg, 1)) + 1
    return ThresholdAssignment(g, "random", r)


class CascadeResult:
    """Outcome of a cascade.

    ``rounds[v]`` is the synchronous round in which ``v`` was infected
    (0 for targets, -1 if never); ``trigger_count[v]`` is the number of
    infected incidences of ``v`` when it triggered.
    """

    def __init__(self, rounds: np.ndarray, trigger_count: np.ndarray):
        self.rounds = rounds
        self.trigger_count = trigger_count

    @property
    def mask(self) -> np.ndarray:
        return self.rounds >= 0

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.rounds >= 0))

    @property
    def infected(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.rounds >= 0).tolist())

    @property
    def round(self) -> dict[int, int]:
        idx = np.flatnonzero(self.rounds >= 0)
        return dict(zip(idx.tolist(), self.rounds[idx].tolist()))

    @property
    def targeted(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.rounds == 0).tolist())


def _gather(g: Graph, frontier: np.ndarray) -> np.ndarray:
    starts = g.indptr[frontier]
    lens = g.indptr[frontier + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shift = np.repeat(starts - (np.cumsum(lens) - lens), lens)
    return g.indices[shift + np.arange(total)]


def infection_set(g: Graph, thr: ThresholdAssignment, s) -> CascadeResult:
    """Least fixed point of the trigger rule, by frontier propagation.

    Every node enters the frontier once, so the total work is O(|E|).
    """
    n = g.n
    rounds = np.full(n, -1, dtype=np.int64)
    trig = np.zeros(n, dtype=np.int64)
    frontier = np.flatnonzero(node_mask(g, s))
    rounds[frontier] = 0
    counts = np.zeros(n, dtype=np.int64)
    need = thr.need
    r = 0
    while frontier.size:
        nbrs = _gather(g, frontier)
        if nbrs.size == 0:
            break
        counts += np.bincount(nbrs, minlength=n)
        cand = np.unique(nbrs)
        cand = cand[(rounds[cand] < 0) & (counts[cand] >= need[cand])]
        r += 1
        rounds[cand] = r
        trig[cand] = counts[cand]
        frontier = cand
    return CascadeResult(rounds, trig)


def infection_set_oracle(g: Graph, thr: ThresholdAssignment, s) -> frozenset[int]:
    """Reference cascade: full sweeps with rational comparisons until stable."""
    adj = [[] for _ in range(g.n)]
    for e in g.edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    phis = [thr.phi_of(v) for v in range(g.n)]
    infected = set(int(x) for x in s)
    changed = True
    while changed:
        changed = False
        snapshot = set(infected)
        for x in range(g.n):
            if x in infected or not adj[x]:
                continue
            hit = sum(1 for y in adj[x] if y in snapshot)
            if Fraction(hit, len(adj[x])) >= phis[x]:
                infected.add(x)
                changed = True
    return frozenset(infected)


def injury_set(g: Graph, s) -> frozenset[int]:
    """Nodes outside ``s`` cut off from the largest component of ``G - s``."""
    removed = node_mask(g, s)
    lcc = largest_component_mask(g, removed)
    return frozenset(np.flatnonzero(~removed & ~lcc).tolist())


def injury_count(g: Graph, removed: np.ndarray) -> int:
    lcc = largest_component_mask(g, removed)
    return int(np.count_nonzero(~removed & ~lcc))


@dataclass(frozen=True)
class AttackPlan:
    strategy: str
    k: int

    def __post_init__(self):
        if self.strategy not in _STRATEGY_ALIASES:
            raise ParameterError(f"unknown attack strategy {self.strategy!r}")
        object.__setattr__(self, "strategy", _STRATEGY_ALIASES[self.strategy])


def attack_order(g: Graph, strategy: str, rng: Optional[RngStream] = None) -> np.ndarray:
    """All nodes in attack order; every prefix is an attack set.

    ``top_degree`` sorts by degree descending, ties by id.  ``random_uniform``
    is a uniform permutation, so its prefixes are uniform k-subsets.
    """
    strategy = AttackPlan(strategy, 0).strategy
    if strategy == "top_degree":
        return np.lexsort((np.arange(g.n), -g.degree))
    if rng is None:
        raise ParameterError("random attacks need an RngStream")
    return rng.np.permutation(g.n)


def select_attack(g: Graph, plan: AttackPlan, rng: Optional[RngStream] = None) -> frozenset[int]:
    if not 0 <= plan.k <= g.n:
        raise ParameterError(f"attack size k={plan.k} must lie in [0, n={g.n}]")
    return frozenset(attack_order(g, plan.strategy, rng)[:plan.k].tolist())


@dataclass(frozen=True)
class CurveRow:
    k: int
    strategy: str
    threshold_mode: str
    phi: Optional[Fraction]
    trials: int
    agg: str
    infection_count: Optional[float]
    infection_fraction: Optional[float]
    injury_count: int
    injury_fraction: float

    def csv_fields(self) -> list[str]:
        def num(x, spec):
            return "" if x is None else format(x, spec)

        count_spec = "d" if self.agg == "max" else ".4f"
        return [str(self.k), self.strategy, self.threshold_mode, _fmt_phi(self.phi), str(self.trials), self.agg,
                num(self.infection_count, count_spec), num(self.infection_fraction, ".6f"),
                str(self.injury_count), format(self.injury_fraction, ".6f")]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CASCADE_NET_THREADS", "1")))
    except ValueError:
        return 1


def attack_curve(g: Graph, strategy: str, k_max: int, threshold: Union[ThresholdSpec, str, None],
                 trials: int = 1, agg: str = "max", master_seed: int = 0, graph_index: int = 0,
                 ks: Optional[Sequence[int]] = None, workers: Optional[int] = None) -> list[CurveRow]:
    """Infection and injury fractions for attack sizes ``1..k_max``.

    Attack sets are nested prefixes of :func:`attack_order`.  Random
    thresholds for trial ``j`` at size ``k`` come from stream
    ``(master_seed, k*10**6 + j)``; the random attack order (if any) from
    ``(master_seed, 2000 + graph_index)``.  ``threshold=None`` skips the
    cascade and reports injury only.
    """
    if isinstance(threshold, str):
        threshold = ThresholdSpec.parse(threshold)
    if not 0 <= k_max <= g.n:
        raise ParameterError(f"k_max={k_max} must lie in [0, n={g.n}]")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if agg not in ("max", "mean"):
        raise ParameterError(f"agg must be 'max' or 'mean', got {agg!r}")
    strategy = AttackPlan(strategy, 0).strategy
    ks = list(range(1, k_max + 1)) if ks is None else list(ks)
    if any(k < 1 or k > g.n for k in ks):
        raise ParameterError("attack sizes must lie in [1, n]")
    order = attack_order(g, strategy, attack_stream(master_seed, graph_index) if strategy == "random_uniform" else None)
    fixed = None
    if threshold is not None and threshold.mode == "uniform":
        fixed = assign_thresholds(g, threshold)

    def point(k):
        removed = np.zeros(g.n, dtype=bool)
        removed[order[:k]] = True
        inj = injury_count(g, removed)
        if threshold is None:
            return CurveRow(k, strategy, "none", None, 0, "", None, None, inj, inj / g.n)
        if fixed is not None:
            sizes = [infection_set(g, fixed, removed).size]
        else:
            sizes = [infection_set(g, assign_thresholds(g, threshold, trial_stream(master_seed, k, j)), removed).size
                     for j in range(trials)]
        stat = max(sizes) if agg == "max" else sum(sizes) / len(sizes)
        return CurveRow(k, strategy, threshold.mode, threshold.phi, trials, agg, stat, stat / g.n, inj, inj / g.n)

    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, ks))
    return [point(k) for k in ks]


def format_curve_csv(rows: Iterable[CurveRow]) -> str:
    lines = [CSV_HEADER]
    lines += [",".join(r.csv_fields()) for r in rows]
    return "\n".join(lines) + "\n"


def default_k_max(n: int) -> int:
    """ceil(5 ln n), the attack-size horizon used for the curves."""
    return math.ceil(5 * math.log(n))
