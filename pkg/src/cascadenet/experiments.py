"""Experiment specs, built-in figure reproductions and the runner.

Spec files are flat ``key = value`` lines; each ``[model]`` line opens a new
model block.  ``#`` starts a comment.  Example::

    name = fig5
    task = attack_curve
    attack = top_degree
    threshold = random
    trials = 100
    agg = max
    master_seed = 2014

    [model]
    model = er
    n = 10000
    d = 15

Seed derivation: model ``i`` is generated from stream ``(master_seed,
1000 + i)``; random thresholds for trial ``j`` at attack size ``k`` use
``(master_seed, k * 10**6 + j)``; random attack orders and random initial
sets of model ``i`` use ``(master_seed, 2000 + i)``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import cascade as cz
from .errors import ParameterError, SpecError
from .generators import GenParams, generate
from .graph import Graph
from .rng import attack_stream, graph_stream, trial_stream
from .structure import structure_report

TASKS = ("attack_curve", "degree_distribution", "conductance", "random_set")
TOP_KEYS = ("name", "task", "attack", "k_max", "k_schedule", "threshold", "trials", "agg", "set_size",
            "output", "figure", "master_seed")
MODEL_KEYS = ("label", "model", "n", "p", "d", "a", "d1", "d2", "log_base", "allow_parallel")

DEFAULT_SEED = 2014


def er_p_for_d(n: int, d: float) -> float:
    """ER edge probability with the same expected edge count as PA with ``d``
    edges per node (mean degree 2d)."""
    return 2 * d / (n - 1)


@dataclass(frozen=True)
class ModelEntry:
    label: str
    params: GenParams


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    models: tuple
    task: str = "attack_curve"
    attack: str = "top_degree"
    k_schedule: Optional[tuple] = None
    threshold: cz.ThresholdSpec = cz.ThresholdSpec("random")
    trials: int = 100
    agg: str = "max"
    set_size: int = 1
    output: Optional[str] = None
    figure: Optional[str] = None
    master_seed: int = DEFAULT_SEED

    @property
    def csv_name(self) -> str:
        return self.output or f"{self.name}.csv"

    @property
    def figure_name(self) -> str:
        return self.figure or f"{self.name}.svg"

    def ks_for(self, n: int) -> list[int]:
        if self.k_schedule is not None:
            return list(self.k_schedule)
        return list(range(1, cz.default_k_max(n) + 1))

    def with_seed(self, master_seed: int) -> "ExperimentSpec":
        return replace(self, master_seed=master_seed,
                       models=tuple(ModelEntry(m.label, m.params.with_seed(master_seed)) for m in self.models))

    def validate(self) -> "ExperimentSpec":
        if not self.name or any(ch.isspace() for ch in self.name):
            raise SpecError(f"bad experiment name {self.name!r}", key="name")
        if self.task not in TASKS:
            raise SpecError(f"unknown task {self.task!r}", key="task")
        if not self.models:
            raise SpecError("spec defines no [model] block")
        labels = [m.label for m in self.models]
        if len(set(labels)) != len(labels):
            raise SpecError("model labels must be unique", key="label")
        for m in self.models:
            m.params.validate()
        cz.AttackPlan(self.attack, 0)
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.agg not in ("max", "mean"):
            raise ParameterError(f"agg must be max or mean, got {self.agg!r}")
        if self.k_schedule is not None:
            ks = list(self.k_schedule)
            if not ks or ks[0] < 1 or any(b <= a for a, b in zip(ks, ks[1:])):
                raise SpecError("k_schedule must be strictly increasing positive integers", key="k_schedule")
        if self.task in ("attack_curve", "random_set"):
            for m in self.models:
                top = self.ks_for(m.params.n)[-1] if self.task == "attack_curve" else self.set_size
                if top > m.params.n:
                    raise ParameterError(f"attack size {top} exceeds n={m.params.n} for model {m.label}")
        if self.set_size < 1:
            raise ParameterError("set_size must be >= 1")
        return self


# -- parsing / serialisation ---------------------------------------------------

def _parse_schedule(text: str) -> tuple:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(",") if x.strip())


def _format_schedule(ks) -> str:
    ks = list(ks)
    if ks == list(range(ks[0], ks[-1] + 1)):
        return f"{ks[0]}..{ks[-1]}"
    return ",".join(map(str, ks))


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _model_from_fields(fields: dict, lineno: int, master_seed: int) -> ModelEntry:
    f = {k: v for k, (v, _) in fields.items()}
    line_of = {k: ln for k, (_, ln) in fields.items()}
    if "model" not in f or "n" not in f:
        raise SpecError("[model] block needs 'model' and 'n'", lineno)
    current = "model"
    try:
        model = f["model"]
        current = "n"
        n = int(f["n"])
        kw = {}
        for key, conv in (("p", float), ("d", int), ("a", float), ("d1", int), ("d2", int)):
            if key in f:
                current = key
                kw[key] = conv(f[key])
        if "log_base" in f:
            kw["log_base"] = f["log_base"]
        if "allow_parallel" in f:
            current = "allow_parallel"
            kw["allow_parallel"] = _parse_bool(f["allow_parallel"])
    except ValueError as exc:
        raise SpecError(f"bad value for {current!r}: {exc}", line_of.get(current, lineno), current) from exc
    if model == "er" and "p" not in kw and "d" in kw:
        kw["p"] = er_p_for_d(n, kw.pop("d"))
    elif model == "er" and "d" in kw:
        raise SpecError("er takes either p or d, not both", line_of["d"], "d")
    params = GenParams(model, n, master_seed=master_seed, **kw)
    return ModelEntry(f.get("label", model), params)


def parse_spec(text: str) -> ExperimentSpec:
    top: dict = {}
    blocks: list = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[model]":
            current = {}
            blocks.append((current, lineno))
            continue
        if line.startswith("["):
            raise SpecError(f"unknown section {line}", lineno)
        if "=" not in line:
            raise SpecError(f"expected key = value, got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        allowed = MODEL_KEYS if current is not None else TOP_KEYS
        if key not in allowed:
            where = "[model] block" if current is not None else "top level"
            raise SpecError(f"unknown key {key!r} in {where}", lineno, key)
        target = current if current is not None else top
        if key in target:
            raise SpecError(f"duplicate key {key!r}", lineno, key)
        target[key] = (value, lineno)

    def get(key, conv, default):
        if key not in top:
            return default
        value, ln = top[key]
        try:
            return conv(value)
        except (ValueError, ParameterError) as exc:
            raise SpecError(f"bad value for {key!r}: {exc}", ln, key) from exc

    if "name" not in top:
        raise SpecError("spec needs a 'name'")
    master_seed = get("master_seed", int, DEFAULT_SEED)
    models = tuple(_model_from_fields(b, ln, master_seed) for b, ln in blocks)
    spec = ExperimentSpec(
        name=top["name"][0],
        models=models,
        task=get("task", str, "attack_curve"),
        attack=get("attack", lambda s: cz.AttackPlan(s, 0).strategy, "top_degree"),
        k_schedule=get("k_schedule", _parse_schedule, None),
        threshold=get("threshold", cz.ThresholdSpec.parse, cz.ThresholdSpec("random")),
        trials=get("trials", int, 100),
        agg=get("agg", str, "max"),
        set_size=get("set_size", int, 1),
        output=get("output", str, None),
        figure=get("figure", str, None),
        master_seed=master_seed,
    )
    if "k_max" in top:
        if spec.k_schedule is not None:
            raise SpecError("give either k_max or k_schedule", top["k_max"][1], "k_max")
        spec = replace(spec, k_schedule=tuple(range(1, get("k_max", int, 1) + 1)))
    return spec.validate()


def serialize_spec(spec: ExperimentSpec) -> str:
    lines = [f"name = {spec.name}", f"task = {spec.task}", f"attack = {spec.attack}"]
    if spec.k_schedule is not None:
        lines.append(f"k_schedule = {_format_schedule(spec.k_schedule)}")
    lines += [f"threshold = {spec.threshold}", f"trials = {spec.trials}", f"agg = {spec.agg}",
              f"set_size = {spec.set_size}"]
    if spec.output is not None:
        lines.append(f"output = {spec.output}")
    if spec.figure is not None:
        lines.append(f"figure = {spec.figure}")
    lines.append(f"master_seed = {spec.master_seed}")
    for m in spec.models:
        p = m.params
        lines += ["", "[model]", f"label = {m.label}", f"model = {p.model}", f"n = {p.n}"]
        if p.p is not None:
            lines.append(f"p = {p.p!r}")
        if p.model != "er" and p.d is not None and p.model != "overlap":
            lines.append(f"d = {p.d}")
        for key in ("a", "d1", "d2"):
            val = getattr(p, key)
            if val is not None:
                lines.append(f"{key} = {val!r}")
        if p.model != "er":
            lines += [f"log_base = {p.log_base}", f"allow_parallel = {int(p.allow_parallel)}"]
    return "\n".join(lines) + "\n"


def load_spec(path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


# -- built-ins -------------------------------------------------------------------

def _curve(name, *models, threshold="random", trials=100):
    return ExperimentSpec(name, tuple(models), threshold=cz.ThresholdSpec.parse(threshold), trials=trials)


def _m(label, model, n=10000, seed=DEFAULT_SEED, **kw):
    if model == "er" and "d" in kw:
        kw["p"] = er_p_for_d(n, kw.pop("d"))
    return ModelEntry(label, GenParams(model, n, master_seed=seed, **kw))


def builtin_specs(fig5_d: int = 15) -> dict[str, ExperimentSpec]:
    """Named specs reproducing the figure experiments and the PA theorems.

    ``fig5_d`` switches the three-model comparison between d=15 (caption)
    and d=10 (figure label).
    """
    specs = [
        _curve("fig1a", _m("er", "er", d=10)),
        _curve("fig1b", _m("er", "er", d=15)),
        _curve("fig2a", _m("pa", "pa", d=10)),
        _curve("fig2b", _m("pa", "pa", d=15)),
        _curve("fig5", _m("er", "er", d=fig5_d), _m("pa", "pa", d=fig5_d),
               _m("security", "security", d=fig5_d, a=1.5)),
        ExperimentSpec("fig6", (_m("security", "security", d=10, a=1.5),
                                _m("overlap", "overlap", d1=5, d2=5, a=1.5)), task="degree_distribution"),
        ExperimentSpec("fig7", (_m("security", "security", d=10, a=1.5),
                                _m("overlap", "overlap", d1=5, d2=5, a=1.5)), task="conductance"),
        _curve("fig8", _m("security", "security", d=10, a=1.5), _m("overlap", "overlap", d1=5, d2=5, a=1.5)),
        ExperimentSpec("thm-pa-single", (_m("pa", "pa", n=5000, d=20),), task="random_set",
                       threshold=cz.ThresholdSpec.uniform("1/40"), set_size=1),
        ExperimentSpec("thm-pa-robust", (_m("pa", "pa", n=10000, d=10),), task="random_set",
                       threshold=cz.ThresholdSpec.uniform("0.11"), set_size=30),
    ]
    return {s.name: s.validate() for s in specs}


# -- runner ----------------------------------------------------------------------

@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    header: str
    rows: list            # list of list[str]
    series: dict = field(default_factory=dict)   # label -> data for plotting
    csv_path: Optional[Path] = None
    figure_path: Optional[Path] = None

    def csv_text(self) -> str:
        return "\n".join([self.header] + [",".join(r) for r in self.rows]) + "\n"


def _run_attack_curve(spec, label, g, index, workers):
    rows = cz.attack_curve(g, spec.attack, 0, spec.threshold, spec.trials, spec.agg, spec.master_seed,
                           graph_index=index, ks=spec.ks_for(g.n), workers=workers)
    return [[spec.name, label] + r.csv_fields() for r in rows], rows


def _run_degrees(spec, label, g):
    hist = np.bincount(g.degree)
    tail = np.cumsum(hist[::-1])[::-1]
    out = []
    for k in np.flatnonzero(hist).tolist():
        out.append([spec.name, label, str(k), str(int(hist[k])), format(hist[k] / g.n, ".6f"),
                    format(tail[k] / g.n, ".6f")])
    return out, hist


def _run_conductance(spec, label, g):
    rep = structure_report(g, diameters=False)
    out = [[spec.name, label, str(c.color), str(c.size), format(float(c.conductance), ".6f")]
           for c in rep.communities]
    return out, np.array([float(c.conductance) for c in rep.communities])


def _run_random_set(spec, label, g, index):
    pick = attack_stream(spec.master_seed, index)
    fixed = cz.assign_thresholds(g, spec.threshold) if spec.threshold.mode == "uniform" else None
    out, sizes = [], []
    for j in range(spec.trials):
        s = pick.np.choice(g.n, size=spec.set_size, replace=False)
        thr = fixed or cz.assign_thresholds(g, spec.threshold, trial_stream(spec.master_seed, spec.set_size, j))
        size = cz.infection_set(g, thr, s).size
        sizes.append(size)
        out.append([spec.name, label, str(j), str(spec.set_size), spec.threshold.mode,
                    cz._fmt_phi(spec.threshold.phi), str(size), format(size / g.n, ".6f"),
                    str(int(size == g.n)), str(int(size == spec.set_size))])
    return out, np.array(sizes)


HEADERS = {
    "attack_curve": "experiment,model," + cz.CSV_HEADER,
    "degree_distribution": "experiment,model,degree,count,fraction,ccdf",
    "conductance": "experiment,model,color,size,conductance",
    "random_set": "experiment,model,trial,set_size,threshold_mode,phi,infection_count,infection_fraction,"
                  "full_infection,unchanged",
}


def build_graphs(spec: ExperimentSpec) -> list[Graph]:
    return [generate(m.params, graph_stream(spec.master_seed, i)) for i, m in enumerate(spec.models)]


def run_experiment(spec: ExperimentSpec, out_dir=None, figure: bool = False, workers: Optional[int] = None,
                   graphs: Optional[list] = None) -> ExperimentResult:
    """Generate every model, run the task, and optionally write CSV and figure.

    Rows are ordered by model (spec order) and then by attack size / degree /
    colour / trial.
    """
    spec.validate()
    graphs = graphs if graphs is not None else build_graphs(spec)
    rows, series = [], {}
    for i, (m, g) in enumerate(zip(spec.models, graphs)):
        if spec.task == "attack_curve":
            r, data = _run_attack_curve(spec, m.label, g, i, workers)
        elif spec.task == "degree_distribution":
            r, data = _run_degrees(spec, m.label, g)
        elif spec.task == "conductance":
            r, data = _run_conductance(spec, m.label, g)
        else:
            r, data = _run_random_set(spec, m.label, g, i)
        rows.extend(r)
        series[m.label] = data
    result = ExperimentResult(spec, HEADERS[spec.task], rows, series)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.csv_path = out / spec.csv_name
        with open(result.csv_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(result.csv_text())
        if figure:
            from .plotting import render_experiment
            result.figure_path = out / spec.figure_name
            render_experiment(result, result.figure_path)
    return result
