#!/usr/bin/env python3
"""Reproduce the baseline evaluation: 100 seeded scenarios, centralized
heuristic, time-steps coverage and total return.

Equivalent to `bridgenet gen` + `bridgenet run --policy heuristic`, kept
as a single script for quick experiments with the parameters.
"""

import argparse
import time

from bridgenet.harness import PolicyEndpoint, run_batch
from bridgenet.scenario import ScenarioConfig, generate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--horizon", type=int, default=100)
    parser.add_argument("--comm-range", type=float, default=0.25)
    parser.add_argument("--parallel", type=int, default=1)
    args = parser.parse_args()

    template = ScenarioConfig(seed=0, horizon=args.horizon, comm_range=args.comm_range)
    scenarios = generate(args.seed, args.count, template)
    start = time.perf_counter()
    report = run_batch(PolicyEndpoint("heuristic"), scenarios, parallelism=args.parallel)
    elapsed = time.perf_counter() - start

    print(f"scenarios        {report.n_scenarios} (seed {args.seed}), failures {report.n_failures}")
    print(f"coverage         {report.mean_coverage:.4f} +/- {report.std_coverage:.4f}")
    print(f"total return     {report.mean_return:.2f} +/- {report.std_return:.2f}")
    print(f"wall time        {elapsed:.2f}s")


if __name__ == "__main__":
    main()
