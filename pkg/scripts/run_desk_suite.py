#!/usr/bin/env python3
"""Run every experiment at desk defaults and drop the artifacts in out/.

Usage: python scripts/run_desk_suite.py [OUT_DIR]

The moduli are primes near 1e3 / 1e4 (plus 1e5+3 for the cheap batched
experiments), so the primitive family is the whole nonprincipal family.
"""

import sys
import time
from pathlib import Path

from qclt.harness import ExperimentConfig, run_experiment
from qclt.outputs import emit_outputs

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")

RUNS = [
    ("theorem1", dict(q_list=(10**3 + 9, 10**4 + 7, 10**5 + 3))),
    ("prop1", dict(q_list=(10**3 + 9, 10**4 + 7))),
    ("prop2", dict(q_list=(10**3 + 9, 10**4 + 7, 10**5 + 3), X=100)),
    ("lemma1", dict(q_list=(10**3 + 9, 10**4 + 7), X=100)),
    ("prop3", dict(q_list=(10**3 + 9, 10**4 + 7), X=50, Y=20)),
    ("prop4", dict(q_list=(10**3 + 9, 10**4 + 7), X=50, Y=20)),
    ("prop4_smoothed", dict(q_list=(10**3 + 9,), X=20, Y=6)),
]


def main() -> int:
    failures = 0
    for name, kw in RUNS:
        cfg = ExperimentConfig(
            experiment=name,
            out_dir=str(OUT / name),
            formats=("csv", "jsonl", "svg"),
            **kw,
        )
        start = time.perf_counter()
        record = run_experiment(cfg)
        paths = emit_outputs(record)
        status = "ok" if not record.errors else f"errors: {record.errors}"
        print(f"{name:15s} {time.perf_counter() - start:7.1f}s  {len(paths)} files  {status}")
        failures += bool(record.errors)
    return 3 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
