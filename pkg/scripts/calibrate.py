"""One-off calibration runs for the statistical constants pinned in the tests.

Usage: python scripts/calibrate.py [--runs 50] [--n 100000]

Prints, per security-model graph (a=1.5, d=10), the quantities whose bounds
the test-suite asserts.  Re-run after any generator change and compare with
the constants in tests/calibration.py.
"""
import argparse
import math
import time

import numpy as np

from cascadenet import GenParams, generate
from cascadenet.cascade import ThresholdSpec, assign_thresholds
from cascadenet.rng import RngStream, graph_stream
from cascadenet.structure import build_ipt, classify_strong, navigate, structure_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--a", type=float, default=1.5)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--nav-runs", type=int, default=5)
    args = ap.parse_args()
    n, a = args.n, args.a
    beta = (a - 1) / (4 * (a + 1))
    ln = math.log(n)
    stats = []
    t0 = time.time()
    for run in range(args.runs):
        g = generate(GenParams("security", n, d=args.d, a=a, master_seed=run), graph_stream(run, 0))
        seeds = int(g.node_seed.sum())
        sizes = np.bincount(g.color1)
        ipt = build_ipt(g)
        vuln = classify_strong(g, assign_thresholds(g, ThresholdSpec.uniform("0.2"))).vulnerable
        rep = structure_report(g, diameters=run < 5)
        by_color = {c.color: c for c in rep.communities}
        scaled = np.array([float(by_color[c].conductance) * by_color[c].size ** beta for c in g.color1.tolist()])
        c90 = float(np.quantile(scaled, 0.9))
        diam = rep.max_diameter() if run < 5 else -1
        nav = -1.0
        if run < args.nav_runs:
            rng = RngStream(run, 77)
            lens = [len(navigate(g, *map(int, rng.np.integers(0, n, 2)))) - 1 for _ in range(1000)]
            nav = float(np.mean(lens))
        row = dict(run=run, seeds=seeds, max_size=int(sizes.max()), height=ipt.height,
                   height_ratio=ipt.height / math.log(len(ipt.communities)), vuln_frac=vuln / seeds,
                   c90=c90, diam=diam, nav=nav)
        stats.append(row)
        print(row, f"{time.time() - t0:.0f}s", flush=True)
    keys = ["seeds", "max_size", "height", "height_ratio", "vuln_frac", "c90"]
    for k in keys:
        vals = np.array([s[k] for s in stats], dtype=float)
        print(f"{k}: min={vals.min():.4f} median={np.median(vals):.4f} max={vals.max():.4f}")
    print("seed bounds", n / (2 * ln ** a), 2 * n / ln ** a, "size bound 8 ln^(a+1) n", 8 * ln ** (a + 1))
    print("diam", [s["diam"] for s in stats if s["diam"] >= 0], "nav", [s["nav"] for s in stats if s["nav"] >= 0],
          "8 ln n", 8 * ln)


if __name__ == "__main__":
    main()
