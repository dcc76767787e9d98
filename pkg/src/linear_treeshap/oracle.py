"""Slow reference implementations used to check the fast path.

Everything here works directly from the definitions: prediction with
missing features, Shapley values by subset enumeration, one decision rule
per leaf in closed form, and the edge-sum identity evaluated with explicit
coefficient lists and true polynomial floor division. Nothing is shared with
:mod:`linear_treeshap.linear_shap` beyond the tree structure itself.

The coefficient routines accept any field type. With ``exact=True`` the
float inputs are converted to :class:`fractions.Fraction` and the results
are exact up to the final rounding; double precision loses everything once
shifts ``p_e`` grow large, since floor division by ``(y + p)`` then carries
powers of ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .tree_model import PreprocessedTree, as_instance

MAX_BRUTEFORCE_FEATURES = 24

# exact integers, converted once
_INV_BINOM = [[1.0 / comb(n, k) for k in range(n + 1)] for n in range(MAX_BRUTEFORCE_FEATURES + 1)]


def _inv_binom(n: int, k: int) -> float:
    if n <= MAX_BRUTEFORCE_FEATURES:
        return _INV_BINOM[n][k]
    return 1.0 / comb(n, k)


def _as_mask(S) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    mask = 0
    for i in S:
        mask |= 1 << int(i)
    return mask


def predict_with_active_set(tree: PreprocessedTree, x: Sequence[float], S) -> float:
    """``f_S(x)``: features outside ``S`` send the instance down both branches."""
    x = as_instance(x, tree.num_features)
    mask = _as_mask(S)

    def rec(v: int) -> float:
        if tree.left[v] < 0:
            return tree.value[v]
        l, r = tree.left[v], tree.right[v]
        f = tree.feature[v]
        if mask >> f & 1:
            return rec(l) if x[f] <= tree.threshold[v] else rec(r)
        return tree.in_weight[l] * rec(l) + tree.in_weight[r] * rec(r)

    return rec(0)


def _check_bruteforce_size(m: int) -> None:
    if m > MAX_BRUTEFORCE_FEATURES:
        raise ValueError(f"brute force needs 2^m evaluations; m={m} > {MAX_BRUTEFORCE_FEATURES}")


def shapley_bruteforce(tree: PreprocessedTree, x: Sequence[float], i: int) -> float:
    m = tree.num_features
    _check_bruteforce_size(m)
    others = [j for j in range(m) if j != i]
    total = 0.0
    for mask_idx in range(1 << (m - 1)):
        S = 0
        size = 0
        for k, j in enumerate(others):
            if mask_idx >> k & 1:
                S |= 1 << j
                size += 1
        gain = predict_with_active_set(tree, x, S | 1 << i) - predict_with_active_set(tree, x, S)
        total += _inv_binom(m - 1, size) * gain
    return total / m


def active_set_table(tree: PreprocessedTree, x: Sequence[float]) -> np.ndarray:
    """``f_S(x)`` for every subset ``S`` at once, indexed by bitmask.

    Same recursion as :func:`predict_with_active_set`, vectorised over masks.
    """
    m = tree.num_features
    _check_bruteforce_size(m)
    x = as_instance(x, m)
    masks = np.arange(1 << m, dtype=np.int64)

    def rec(v: int) -> np.ndarray:
        if tree.left[v] < 0:
            return np.full(masks.shape, tree.value[v])
        l, r = tree.left[v], tree.right[v]
        f = tree.feature[v]
        known = (masks >> f & 1).astype(bool)
        taken = rec(l) if x[f] <= tree.threshold[v] else rec(r)
        both = tree.in_weight[l] * rec(l) + tree.in_weight[r] * rec(r)
        return np.where(known, taken, both)

    return rec(0)


def shapley_bruteforce_all(tree: PreprocessedTree, x: Sequence[float]) -> np.ndarray:
    """All Shapley values from one table of ``f_S`` over every subset."""
    m = tree.num_features
    f = active_set_table(tree, x)
    masks = np.arange(1 << m, dtype=np.int64)
    sizes = np.array([bin(S).count("1") for S in range(1 << m)])
    weight = np.array([_inv_binom(m - 1, k) if k < m else 0.0 for k in range(m + 1)])
    phi = np.zeros(m)
    for i in range(m):
        S = masks[(masks >> i & 1) == 0]
        phi[i] = np.dot(weight[sizes[S]], f[S | 1 << i] - f[S]) / m
    return phi


# -- decision rules --------------------------------------------------------

@dataclass(frozen=True)
class DecisionRule:
    leaf: int
    q: tuple  # per feature; 1 for features the rule never tests
    r_empty: float | Fraction
    features: frozenset[int]

    def predict(self, S) -> float:
        """Rule prediction with active set ``S``."""
        mask = _as_mask(S)
        out = self.r_empty
        for j in self.features:
            if mask >> j & 1:
                out *= self.q[j]
        return out


def _path_to(tree: PreprocessedTree, v: int) -> list[int]:
    path = []
    while v != 0:
        path.append(v)
        v = tree.parent[v]
    return path[::-1]


def _satisfies(tree: PreprocessedTree, x: np.ndarray, v: int) -> bool:
    """Whether ``x`` satisfies the criterion on the edge into ``v``."""
    u = tree.parent[v]
    goes_left = x[tree.feature[u]] <= tree.threshold[u]
    return goes_left == (tree.left[u] == v)


def linearize(tree: PreprocessedTree, x: Sequence[float], exact: bool = False) -> list[DecisionRule]:
    x = as_instance(x, tree.num_features)
    num = Fraction if exact else float
    rules = []
    for leaf in tree.leaves:
        q = [num(1)] * tree.num_features
        ok = {}
        r_empty = num(tree.value[leaf])
        for v in _path_to(tree, leaf):
            f = tree.feature[tree.parent[v]]
            w = num(tree.in_weight[v])
            r_empty *= w
            q[f] /= w
            ok[f] = ok.get(f, True) and _satisfies(tree, x, v)
        for f, good in ok.items():
            if not good:
                q[f] = num(0)
        rules.append(DecisionRule(leaf, tuple(q), r_empty, frozenset(ok)))
    return rules


# -- coefficient-form polynomials (lowest degree first) ----------------------

def poly_mul_linear(a: list, p) -> list:
    """``a(y) * (y + p)``."""
    out = [0 * p] * (len(a) + 1)
    for k, c in enumerate(a):
        out[k] += c * p
        out[k + 1] += c
    return out


def synthetic_division(a: list, p) -> tuple[list, object]:
    """Quotient and remainder of ``a(y) / (y + p)``."""
    n = len(a) - 1
    if n < 1:
        return [], a[0] if a else 0
    quot = [0] * n
    carry = a[n]
    for k in range(n - 1, -1, -1):
        quot[k] = carry
        carry = a[k] - p * carry
    return quot, carry


def poly_lift(a: list, k: int) -> list:
    """``a(y) * (1 + y)^k``."""
    for _ in range(k):
        a = poly_mul_linear(a, 1)
    return a


def poly_add(a: list, b: list) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, c in enumerate(b):
        out[k] += c
    return out


def psi_coeffs(a: list, d: int):
    """``<a, B_d> / (d + 1)`` with ``a`` zero-padded to length ``d + 1``."""
    if len(a) > d + 1 and any(a[d + 1:]):
        raise ValueError(f"polynomial of degree {len(a) - 1} exceeds psi degree {d}")
    if a and isinstance(a[0], Fraction):
        return sum(Fraction(c, comb(d, k)) for k, c in enumerate(a[: d + 1])) / (d + 1)
    return math.fsum(c / comb(d, k) for k, c in enumerate(a[: d + 1])) / (d + 1)


def summary_polynomial(rule: DecisionRule) -> list:
    g = [rule.r_empty]
    for j in sorted(rule.features):
        g = poly_mul_linear(g, rule.q[j])
    return g


def shapley_per_rule(rule: DecisionRule, i: int) -> float:
    if i not in rule.features:
        return 0.0
    g = summary_polynomial(rule)
    quot, rem = synthetic_division(g, rule.q[i])
    d = len(rule.features)
    return (rule.q[i] - 1) * psi_coeffs(quot, d - 1)


def shapley_per_rule_all(tree: PreprocessedTree, x: Sequence[float], exact: bool = False) -> np.ndarray:
    phi = [0] * tree.num_features
    for rule in linearize(tree, x, exact=exact):
        for i in rule.features:
            phi[i] += shapley_per_rule(rule, i)
    return np.array([float(v) for v in phi])


# -- edge-sum identity with floor division -----------------------------------

def _edge_p(tree: PreprocessedTree, x: np.ndarray, v: int, num=float):
    """``p_e`` for the edge into ``v`` from its definition (product over the path)."""
    f = tree.feature[tree.parent[v]]
    prod = num(1)
    for u in _path_to(tree, v):
        if tree.feature[tree.parent[u]] != f:
            continue
        if not _satisfies(tree, x, u):
            return num(0)
        prod /= num(tree.in_weight[u])
    return prod


def _edge_up(tree: PreprocessedTree, v: int) -> int | None:
    f = tree.feature[tree.parent[v]]
    u = tree.parent[v]
    while u != 0:
        if tree.feature[tree.parent[u]] == f:
            return u
        u = tree.parent[u]
    return None


def coefficient_reference(tree: PreprocessedTree, x: Sequence[float], exact: bool = False) -> np.ndarray:
    """Sum the per-edge floor-division terms with explicit coefficients.

    ``G_u`` is the degree-aligned sum of the leaf summary polynomials below
    ``u``; the remainders of the non-final edge terms are discarded.
    """
    x = as_instance(x, tree.num_features)
    num = Fraction if exact else float
    G: dict[int, list] = {}
    for rule in linearize(tree, x, exact=exact):
        G[rule.leaf] = summary_polynomial(rule)
    for v in range(tree.n_nodes - 1, -1, -1):  # children before parents
        if tree.left[v] < 0:
            continue
        gl, gr = G[tree.left[v]], G[tree.right[v]]
        if len(gl) < len(gr):
            gl, gr = gr, gl
        G[v] = poly_add(gl, poly_lift(gr, len(gl) - len(gr)))

    phi = [num(0)] * tree.num_features
    for v in range(1, tree.n_nodes):
        i = tree.feature[tree.parent[v]]
        g = G[v]
        d = len(g) - 1
        pe = _edge_p(tree, x, v, num)
        quot, _ = synthetic_division(g, pe)
        term = (pe - 1) * psi_coeffs(quot, d - 1)
        up = _edge_up(tree, v)
        if up is not None:
            pu = _edge_p(tree, x, up, num)
            du = len(G[up]) - 1
            quot, _ = synthetic_division(poly_lift(g, du - d), pu)
            term -= (pu - 1) * psi_coeffs(quot, du - 1)
        phi[i] += term
    return np.array([float(v) for v in phi])


IMPLEMENTATIONS = ("bruteforce", "per_rule", "coefficient_reference")


def reference_values(
    tree: PreprocessedTree, x: Sequence[float], which: Iterable[str] = IMPLEMENTATIONS, exact: bool = True
) -> dict:
    funcs = {
        "bruteforce": shapley_bruteforce_all,
        "per_rule": lambda t, z: shapley_per_rule_all(t, z, exact=exact),
        "coefficient_reference": lambda t, z: coefficient_reference(t, z, exact=exact),
    }
    return {name: funcs[name](tree, x) for name in which}
