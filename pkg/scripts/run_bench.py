"""Scaling benchmark: linear kernel vs the coefficient-form reference.

    python scripts/run_bench.py --depths 4,8,12,16 --leaves 16 --reps 5 --output bench.csv
"""
import argparse
import sys

from linear_treeshap.bench import run_bench, write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", default="4,8,12,16")
    ap.add_argument("--leaves", type=int, default=16)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", help="CSV path (default: stdout)")
    args = ap.parse_args()
    rows = run_bench([int(d) for d in args.depths.split(",")], args.leaves, args.reps,
                     samples=args.samples, seed=args.seed)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    speedups = [r.speedup for r in rows]
    trend = "nondecreasing" if all(b >= a for a, b in zip(speedups, speedups[1:])) else "NOT monotone"
    print(f"speedup trend over depth: {trend}", file=sys.stderr)


if __name__ == "__main__":
    main()
