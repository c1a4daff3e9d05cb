"""Time centralized vs two-level synthesis over a range of agent counts.

Writes bench.json and bench.csv and prints the table with speed-up ratios.

    python3 scripts/scaling_table.py [--sizes 100,200,400,800] [--trials 5]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from eigenform.cli import EXIT_OK, main


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,200,400,800")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/bench"))
    args = ap.parse_args()
    code = main(["bench", "--sizes", args.sizes, "--trials", str(args.trials),
                 "--seed", str(args.seed), "--out", str(args.out)])
    if code != EXIT_OK:
        raise SystemExit(code)
    rows = json.loads((args.out / "bench.json").read_text())["rows"]
    print(f"{'n':>6} {'centralized ms':>15} {'two-level ms':>13} {'ratio':>7}")
    for r in rows:
        print(f"{r['n']:>6} {r['centralized_ms']:15.2f} {r['hierarchical_ms']:13.2f} "
              f"{r['centralized_ms'] / r['hierarchical_ms']:7.1f}")
