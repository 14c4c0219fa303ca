#!/usr/bin/env python3
"""Benchmark the batched all-character truncated L-sum against the naive
per-character summation loop.

Usage: python scripts/benchmark_batched_lsum.py [q ...]
"""

import sys

from qclt.harness import benchmark_truncated_lsum


def main() -> int:
    qs = [int(a) for a in sys.argv[1:]] or [10**3 + 9, 10**4 + 7]
    print(f"{'q':>8} {'phi':>8} {'batch_s':>10} {'naive_s':>10} {'speedup':>9} {'rel_err':>10}")
    for q in qs:
        b = benchmark_truncated_lsum(q, sigma=0.5)
        print(
            f"{b['q']:>8} {b['phi']:>8} {b['batch_seconds']:>10.4f} "
            f"{b['naive_seconds']:>10.3f} {b['speedup']:>9.0f} "
            f"{b['max_rel_disagreement']:>10.2e}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
