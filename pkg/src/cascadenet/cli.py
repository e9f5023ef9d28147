"""Command line entry point: ``cascadenet <command> ...``.

Exit codes: 0 success, 2 bad input (spec, parameters, graph file),
3 runtime failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from . import cascade as cz
from . import structure as st
from .errors import CascadeNetError, FormatError, NoPathError, ParameterError, SpecError, DomainError
from .experiments import builtin_specs, load_spec, run_experiment
from .generators import GenParams, generate
from .netgraph import read_graph, write_graph
from .rng import RngStream, graph_stream


def _write(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _csv(header: str, rows) -> str:
    return "\n".join([header] + [",".join(map(str, r)) for r in rows]) + "\n"


def cmd_gen(args):
    params = GenParams(args.model, args.n, p=args.p, d=args.d, a=args.a, d1=args.d1, d2=args.d2,
                       log_base=args.log_base, allow_parallel=args.allow_parallel, master_seed=args.seed)
    g = generate(params, graph_stream(args.seed, 0))
    write_graph(g, args.out if args.out not in (None, "-") else sys.stdout)


def cmd_cascade(args, injury_only=False):
    g = read_graph(args.graph)
    threshold = None if injury_only else cz.ThresholdSpec.parse(args.threshold)
    k_max = args.kmax if args.kmax is not None else min(cz.default_k_max(max(g.n, 2)), g.n)
    rows = cz.attack_curve(g, args.attack, k_max, threshold, args.trials if not injury_only else 1,
                           args.agg if not injury_only else "max", args.seed)
    _write(cz.format_curve_csv(rows), args.out)


def _distance_rows(g, pairs, seed):
    rng = RngStream(seed, 0)
    adj = coo_matrix((np.ones(g.m), (g.edge_u, g.edge_v)), shape=(g.n, g.n)).tocsr()
    out = []
    for _ in range(pairs):
        u, v = (int(x) for x in rng.np.integers(0, g.n, size=2))
        dist = shortest_path(adj, directed=False, unweighted=True, indices=[u])[0, v]
        nav = len(st.navigate(g, u, v)) - 1
        out.append((u, v, -1 if np.isinf(dist) else int(dist), nav))
    return out


def cmd_analyze(args):
    g = read_graph(args.graph)
    report = args.report
    if report == "communities":
        rep = st.structure_report(g)
        rows = [(c.color, c.size, c.seed_id, c.creation_time, c.internal_edges, c.external_edges,
                 format(float(c.conductance), ".6f"), c.diameter) for c in rep.communities]
        text = _csv("color,size,seed_id,creation_time,internal_edges,external_edges,conductance,diameter", rows)
    elif report == "degrees":
        k_max = int(g.degree.max()) if g.n else 0
        pl = st.power_law_report(g, k_max)
        tail = pl.ccdf()
        rows = []
        for k in np.flatnonzero(pl.histogram).tolist():
            sk = format(float(pl.s_table[k]), ".6f") if k in pl.s_table else ""
            rows.append((k, int(pl.histogram[k]), format(pl.histogram[k] / g.n, ".6f"), format(tail[k], ".6f"), sk))
        text = _csv("degree,count,fraction,ccdf,s_k", rows)
        if pl.exponent is not None:
            print(f"fitted exponent: {pl.exponent:.4f}", file=sys.stderr)
        else:
            print(f"fit failed: {pl.fit_error}", file=sys.stderr)
    elif report == "priority":
        t = st.degree_priority_table(g)
        rows = [(v, int(g.node_seed[v]), int(g.color1[v]), int(t.length[v]), int(t.d1[v]), int(t.d2[v]),
                 int(t.own[v]), int(t.first_color_is_own[v])) for v in range(g.n)]
        text = _csv("node,is_seed,color,length,d1,d2,own_color_count,first_color_is_own", rows)
    elif report == "ipt":
        tree = st.build_ipt(g)
        rows = [(c, "" if tree.parent[c] is None else tree.parent[c], tree.creation_time[c], tree.depth[c])
                for c in tree.communities]
        text = _csv("color,parent,creation_time,depth", rows)
        print(f"height: {tree.height}", file=sys.stderr)
    elif report == "strong":
        thr = cz.assign_thresholds(g, cz.ThresholdSpec.parse(args.threshold), RngStream(args.seed, 0))
        rep = st.classify_strong(g, thr, strict=args.strict)
        rows = [(c, c, int(g.degree[c]), rep.external[c], rep.need[c], int(ok)) for c, ok in rep.strong.items()]
        text = _csv("color,seed_id,seed_degree,external,need,strong", rows)
        print(f"vulnerable: {rep.vulnerable}", file=sys.stderr)
    else:
        text = _csv("source,target,distance,navigate_length", _distance_rows(g, args.pairs, args.seed))
    _write(text, args.out)


def cmd_navigate(args):
    g = read_graph(args.graph)
    path = st.navigate(g, args.src, args.dst)
    print(" ".join(map(str, path)))


def cmd_experiment(args):
    if args.builtin:
        specs = builtin_specs(fig5_d=args.fig5_d)
        if args.builtin not in specs:
            raise SpecError(f"unknown builtin {args.builtin!r}; choose from {', '.join(specs)}", key="builtin")
        spec = specs[args.builtin]
    else:
        spec = load_spec(args.spec)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    res = run_experiment(spec, args.out, figure=args.svg)
    print(res.csv_path)
    if res.figure_path:
        print(res.figure_path)


def cmd_list(args):
    for name, spec in builtin_specs().items():
        labels = ",".join(m.label for m in spec.models)
        print(f"{name}\t{spec.task}\t{labels}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cascadenet", description="Threshold cascades on generated networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph in netgraph v1 format")
    p.add_argument("--model", required=True, choices=["er", "pa", "security", "overlap"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--d1", type=int)
    p.add_argument("--d2", type=int)
    p.add_argument("--log-base", default="natural", choices=["natural", "two"])
    p.add_argument("--allow-parallel", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    for name in ("cascade", "injure"):
        p = sub.add_parser(name, help="attack curve CSV" if name == "cascade" else "injury-only curve CSV")
        p.add_argument("--graph", required=True)
        p.add_argument("--attack", default="topdeg", choices=["topdeg", "random", "top_degree", "random_uniform"])
        p.add_argument("--kmax", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-")
        if name == "cascade":
            p.add_argument("--threshold", default="random")
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--agg", default="max", choices=["max", "mean"])
            p.set_defaults(func=cmd_cascade)
        else:
            p.set_defaults(func=lambda a: cmd_cascade(a, injury_only=True))

    p = sub.add_parser("analyze", help="structural reports")
    p.add_argument("--graph", required=True)
    p.add_argument("--report", required=True,
                   choices=["communities", "degrees", "priority", "ipt", "strong", "distances"])
    p.add_argument("--threshold", default="uniform:0.5", help="thresholds for the strong report")
    p.add_argument("--strict", action="store_true", help="strong report: require every member to resist")
    p.add_argument("--pairs", type=int, default=100, help="sampled pairs for the distances report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("navigate", help="local short-path search between two nodes")
    p.add_argument("--graph", required=True)
    p.add_argument("--src", type=int, required=True)
    p.add_argument("--dst", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for compatibility; the search is deterministic")
    p.set_defaults(func=cmd_navigate)

    p = sub.add_parser("experiment", help="run a spec file or a built-in figure experiment")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec")
    src.add_argument("--builtin")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true", help="also render the figure")
    p.add_argument("--fig5-d", type=int, default=15, choices=[10, 15])
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("list", help="list built-in experiments")
    p.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (SpecError, ParameterError, FormatError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if args.command == "experiment" and getattr(args, "spec", None) else 3
    except (NoPathError, CascadeNetError, RuntimeError, MemoryError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
