#!/usr/bin/env python3
"""Run every experiment config in a directory and print a one-line summary per config.

    python3 scripts/run_experiments.py [CONFIG_DIR]

Outputs land in each config's output_dir (scripts/out for the bundled ones).
"""
import json
import sys
import time
from pathlib import Path

from dirac_gaps.errors import NumericalFailure
from dirac_gaps.experiments import ExperimentConfig, run


def summarize(cfg, written):
    summary = json.loads(written[f"{cfg.name}.json"].read_text())
    if cfg.kind == "basis-demo":
        return f"verdict={summary['verdict']} kappa={summary.get('kappa')}"
    return (f"semilog slope={summary['semilog_slope']:.3f} "
            f"superpolynomial={summary['superpolynomial']} stable={summary['partial_sums_stable']}")


def main(argv):
    cdir = Path(argv[1]) if len(argv) > 1 else Path(__file__).parent / "configs"
    status = 0
    for path in sorted(cdir.glob("*.ini")):
        cfg = ExperimentConfig.from_ini(path)
        t0 = time.perf_counter()
        try:
            line = summarize(cfg, run(cfg))
        except NumericalFailure as exc:
            line, status = f"FAILED: {exc}", 2
        print(f"{path.name:24s} {time.perf_counter() - t0:6.1f}s  {line}")
    return status


if __name__ == "__main__":
    sys.exit(main(sys.argv))
