"""Simulate every scenario in scenarios/ and collect the reports.

Each scenario gets its own output directory with trajectory.csv, report.json
and trajectory.svg. A summary table is printed at the end.

    python3 scripts/run_scenarios.py [--out runs]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from eigenform.cli import EXIT_OK, main

ROOT = Path(__file__).resolve().parents[1]
SKIP = {"hierarchical16"}


def run(out: Path) -> int:
    failures = 0
    print(f"{'scenario':<24} {'exit':>4} {'converged':>9} {'t_conv':>8} {'final_err':>10}")
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        name = path.stem
        dest = out / name
        cmd = "hierarchical" if name in SKIP else "simulate"
        code = main([cmd, "--scenario", str(path), "--out", str(dest)])
        failures += code != EXIT_OK
        rep_path = dest / "report.json"
        if code == EXIT_OK and rep_path.exists():
            rep = json.loads(rep_path.read_text())
            t = rep.get("time_to_converge")
            err = rep.get("final_error", float("nan"))
            print(f"{name:<24} {code:>4} {str(rep['converged']):>9} "
                  f"{'-' if t is None else f'{t:8.3f}':>8} {err:10.2e}")
        else:
            print(f"{name:<24} {code:>4}")
    return failures


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs"))
    raise SystemExit(1 if run(ap.parse_args().out) else 0)
