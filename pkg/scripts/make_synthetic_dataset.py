"""Write a seeded synthetic dataset (images, manifest, keypoints, predictions)."""

import argparse

from biomaudit.synthetic import make_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("root", help="output directory")
    ap.add_argument("-n", type=int, default=300, help="number of samples")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name, path in make_dataset(args.root, n=args.n, seed=args.seed).items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
