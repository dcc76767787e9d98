"""Peak live polynomial buffers of the fused traversal vs tree shape.

For each random tree prints raw depth, distinct-feature depth and the
workspace peak, then a summary of how often the peak exceeds each bound.

    python scripts/space_profile.py --trees 500 --max-depth 8
"""
import argparse
from collections import Counter

import numpy as np

from linear_treeshap.conformance import random_cases
from linear_treeshap.interp_poly import make_basis
from linear_treeshap.linear_shap import Workspace, shapley_values


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trees", type=int, default=500)
    ap.add_argument("--max-depth", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args()

    over_distinct = over_depth = n = 0
    excess = Counter()
    for tree, x in random_cases(args.trees, args.max_depth, 1, seed=args.seed):
        basis = make_basis(tree.max_degree)
        ws = Workspace(basis.size)
        shapley_values(tree, np.asarray(x), basis, "fused", ws)
        n += 1
        over_distinct += ws.peak > tree.max_degree + 1
        over_depth += ws.peak > tree.depth + 1
        excess[ws.peak - tree.max_degree - 1] += 1
        if args.verbose:
            print(f"depth={tree.depth} distinct={tree.max_degree} leaves={len(tree.leaves)} peak={ws.peak}")
    print(f"trees: {n}")
    print(f"peak > distinct depth + 1: {over_distinct}")
    print(f"peak > depth + 1:          {over_depth}")
    print("peak - (distinct depth + 1) histogram:", dict(sorted(excess.items())))


if __name__ == "__main__":
    main()
