"""Run every biomaudit command in order on one dataset and print the rankings.

Example:
    python3 scripts/make_synthetic_dataset.py /tmp/demo -n 300
    python3 scripts/run_pipeline.py /tmp/demo /tmp/demo/out
"""

import argparse
import sys
from pathlib import Path

from biomaudit.cli import main as cli
from biomaudit.report import read_rankings

STEPS = ("features", "explain", "faces", "tier", "metrics", "report")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("data", type=Path, help="directory with manifest.csv, keypoints.json, predictions.csv")
    ap.add_argument("out", type=Path)
    ap.add_argument("extra", nargs=argparse.REMAINDER, help="extra flags passed to every command")
    args = ap.parse_args()

    common = [
        "--manifest", str(args.data / "manifest.csv"),
        "--keypoints", str(args.data / "keypoints.json"),
        "--predictions", str(args.data / "predictions.csv"),
        "--out", str(args.out),
        *args.extra,
    ]
    for step in STEPS:
        code = cli([step, *common])
        if code == 2:
            sys.exit(f"{step} failed")

    print("\nrank  feature       mean|phi|  direction")
    for i, r in enumerate(read_rankings(args.out / "rankings.csv"), 1):
        print(f"{i:>4}  {r.feature:<12}  {r.mean_abs_phi:9.4f}  {r.direction}")


if __name__ == "__main__":
    main()
