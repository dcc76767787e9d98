"""Compare interpolation bases on deep trees.

``default``: the package basis (interior Chebyshev points of the second kind
in t = y/(1+y), positive quadrature weights).
``affine``: Chebyshev points of the second kind mapped affinely onto
[0.5, 1.5] with weights from the monomial Vandermonde system, solved in
80-digit arithmetic so only the conditioning of the basis itself shows.

Prints, per depth, the worst efficiency gap and the worst deviation from the
exact-rational coefficient reference over a few random trees.

    python scripts/basis_conditioning.py --depths 6,10,14,18 --trees 5
"""
import argparse
from math import comb

import mpmath
import numpy as np

from linear_treeshap.interp_poly import InterpolationBasis, make_basis
from linear_treeshap.linear_shap import explain
from linear_treeshap.oracle import coefficient_reference
from linear_treeshap.synthetic import TreeSpec, random_tree


def affine_basis(D: int, lo: float = 0.5, hi: float = 1.5) -> InterpolationBasis:
    mpmath.mp.dps = 80
    j = np.arange(D + 1)
    cheb = np.cos(j * np.pi / D) if D else np.zeros(1)
    y = (lo + hi) / 2 + (hi - lo) / 2 * cheb
    V = mpmath.matrix([[mpmath.mpf(float(yj)) ** k for k in range(D + 1)] for yj in y])
    N = np.zeros((D + 1, D + 1))
    for d in range(D + 1):
        C = mpmath.matrix([mpmath.mpf(1) / comb(d, k) if k <= d else 0 for k in range(D + 1)])
        N[d] = [float(v) for v in mpmath.lu_solve(V.T, C)]
    pow1p = (1.0 + y)[None, :] ** j[:, None]
    return InterpolationBasis(D, y, pow1p, N)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--depths", default="6,10,14,18")
    ap.add_argument("--trees", type=int, default=5)
    ap.add_argument("--leaves", type=int, default=120)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("depth,basis,max_efficiency_gap,max_abs_error_vs_exact")
    for depth in (int(s) for s in args.depths.split(",")):
        rng = np.random.default_rng(args.seed + depth)
        cases = []
        for _ in range(args.trees):
            tree = random_tree(TreeSpec(num_features=depth + 4, depth=depth, n_leaves=args.leaves,
                                        distinct_spine=True), rng)
            x = rng.uniform(size=tree.num_features)
            cases.append((tree, x, coefficient_reference(tree, x, exact=True)))
        D = max(t.max_degree for t, _, _ in cases)
        for name, basis in (("default", make_basis(D)), ("affine", affine_basis(D))):
            gap = err = 0.0
            for tree, x, ref in cases:
                a = explain(tree, x, basis)
                gap = max(gap, abs(a.residual))
                err = max(err, float(np.max(np.abs(a.phi - ref))))
            print(f"{depth},{name},{gap:.3e},{err:.3e}")


if __name__ == "__main__":
    main()
