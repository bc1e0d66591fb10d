#!/usr/bin/env python3
"""Monte-Carlo estimator-variance comparison across adjustment sets.

Defaults reproduce the acceptance setting: the feedback-free persistence
graph (W -> X -> Y with self-loops on W and X), gamma = 1, n = 10000
replicates per dataset, 200 datasets in 5 model blocks, comparing the
quasi-optimal set against the two baseline sets.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from scgadjust import canonical_sets, scg_from_json, validate_scg
from scgadjust.simulate import variance_experiment
from scgadjust.unroll import MicroQuery

DEFAULT_GRAPH = validate_scg(
    ["X", "Y", "W"], [("W", "X"), ("X", "Y"), ("W", "W"), ("X", "X")]
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--graph", type=Path, default=None, help="SCG JSON (default built-in)")
    parser.add_argument("--treatment", default="X")
    parser.add_argument("--outcome", default="Y")
    parser.add_argument("--gamma", type=int, default=1)
    parser.add_argument("--gamma-max", type=int, default=1)
    parser.add_argument("--sets", default="qopt,a1,a2")
    parser.add_argument("--n", type=int, default=10_000)
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--blocks", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", type=Path, default=Path("variance_report.json"))
    args = parser.parse_args()

    g = scg_from_json(args.graph.read_text()) if args.graph else DEFAULT_GRAPH
    q = MicroQuery(args.treatment, args.outcome, args.gamma, args.gamma_max)
    named = canonical_sets(g, q)
    wanted = [s.strip() for s in args.sets.split(",") if s.strip()]
    missing = [name for name in wanted if name not in named]
    if missing:
        print(f"unknown set names {missing}; available: {sorted(named)}", file=sys.stderr)
        return 2

    start = time.perf_counter()
    report = variance_experiment(
        g, q, {name: named[name] for name in wanted},
        n=args.n, reps=args.reps, seed=args.seed, blocks=args.blocks,
    )
    elapsed = time.perf_counter() - start
    args.out.write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")

    for name in wanted:
        stats = report["per_set"][name]
        print(
            f"{name:>6}: variance={stats['variance']:.3e}  "
            f"bias={stats['bias']:+.5f} (se {stats['bias_se']:.5f})"
        )
    print(f"variance rank: {' <= '.join(report['variance_rank'])}")
    print(f"elapsed: {elapsed:.1f}s  report: {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
