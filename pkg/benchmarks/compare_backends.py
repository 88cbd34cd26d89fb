#!/usr/bin/env python3
"""Compare the JIT-compiled metric kernels against the pure-Python fallback.

The backend is chosen at import time from the ACTISUM_NO_NUMBA environment
variable, so each side runs in a fresh subprocess. The workloads mirror the
engine hot path: the directed pairwise-BLEU matrix behind every uncertainty
score, plus LCS-based ROUGE-L over a test set.

Usage: python benchmarks/compare_backends.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    import numpy as np

    from actisum.metrics import bleuvar, rouge_l

    rng = np.random.default_rng(42)

    def tokens(length):
        return " ".join(f"t{rng.integers(50)}" for _ in range(length))

    # 200 candidates x 10 stochastic summaries: one acquisition step at k=200.
    batches = [[tokens(15) for _ in range(10)] for _ in range(200)]
    # 300 candidate/reference pairs: one evaluation pass.
    pairs = [(tokens(60).split(), tokens(12).split()) for _ in range(300)]

    def score_step():
        return sum(bleuvar(batch, keep_matrix=False).value for batch in batches)

    def eval_pass():
        return sum(rouge_l(c, r).f1 for c, r in pairs)

    return [("pairwise-disagreement step (k=200, n=10)", score_step),
            ("rouge-l evaluation pass (300 pairs)", eval_pass)]


def run_worker(repeats: int) -> None:
    from actisum.metrics._kernels import NUMBA_ENABLED

    results = {"numba": NUMBA_ENABLED, "timings": {}}
    for name, fn in _workloads():
        fn()  # warm up: triggers JIT compilation on the numba side
        best = min(_timed(fn) for _ in range(repeats))
        results["timings"][name] = best
    print(json.dumps(results))


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="timed repetitions per workload (best is kept)")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        run_worker(args.repeats)
        return

    sides = {}
    for label, flag in [("numba", "0"), ("pure", "1")]:
        env = dict(os.environ, ACTISUM_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker", "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        sides[label] = json.loads(out.stdout.strip().splitlines()[-1])

    if sides["numba"]["numba"] is not True:
        print("warning: numba unavailable, both sides ran the pure fallback")
    print(f"best of {args.repeats} runs per workload, seconds:\n")
    print(f"{'workload':<45} {'numba':>9} {'pure':>9} {'speedup':>8}")
    for name in sides["numba"]["timings"]:
        fast = sides["numba"]["timings"][name]
        slow = sides["pure"]["timings"][name]
        print(f"{name:<45} {fast:>9.4f} {slow:>9.4f} {slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
