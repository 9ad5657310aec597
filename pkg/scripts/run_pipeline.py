#!/usr/bin/env python3
"""Run the whole analytics pipeline on the sample dataset.

Executes every CLI subcommand for one match and prints the produced files,
the held-out prediction report, and the expansion summary.

Usage: python scripts/run_pipeline.py [--data data/sample_points.csv]
       [--match 2023-wimbledon-1304] [--out out]
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tennis_momentum.cli import main as cli_main  # noqa: E402


def run(argv):
    code = cli_main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="data/sample_points.csv")
    parser.add_argument("--match", default="2023-wimbledon-1304")
    parser.add_argument("--player", default="1")
    parser.add_argument("--out", default="out")
    args = parser.parse_args()

    base = ["--data", args.data, "--out", args.out]
    scoped = base + ["--match", args.match, "--player", args.player]

    run(["clean", *base])
    run(["indicators", *base])
    run(["evaluate", *scoped])
    run(["correlate", *scoped])
    run(["turning-points", *scoped])
    run(["predict", *scoped])
    run(["expand", *scoped])
    run(["report", *scoped])

    match_dir = Path(args.out) / args.match
    predict = json.loads(next(match_dir.glob("predict-report-p*.json")).read_text())
    expand = json.loads(next(match_dir.glob("expand-summary-p*.json")).read_text())
    print()
    print(f"match {args.match}, player {args.player}")
    print(f"  held-out MSE {predict['mse']:.4f}, ACC {predict['acc']:.4f} "
          f"(sigma {predict['sigma']:.3f})")
    print(f"  expansion: baseline ACC {expand['baseline_acc']:.4f} -> "
          f"best {expand['best_acc']:.4f} with "
          f"{expand['best_acc_features']} features")


if __name__ == "__main__":
    main()
