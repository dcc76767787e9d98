"""Linear TreeShap: exact path-dependent Shapley values in O(L D) per instance.

Both traversal modes run on the same walker, so they perform the same
floating-point operations in the same order:

* ``two_pass`` stores the summary polynomial of every node (top-down build,
  then a separate bottom-up aggregation pass over the stored polynomials);
* ``fused`` folds each node's Shapley terms in as soon as its summary
  polynomial is complete and frees it, keeping only polynomials that are
  still pending on the current root-to-node path.

The path polynomial ``C`` lives in one buffer that is multiplied on the way
down and divided back on the way up. Children are visited heavier-first
(Sethi-Ullman order) so that few completed sibling polynomials are pending
at once.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .interp_poly import DegreeError, InterpolationBasis, ValuePoly, make_basis
from .tree_model import Ensemble, InstanceError, PreprocessedTree, as_instance, predict

MODES = ("fused", "two_pass")


@dataclass
class Attribution:
    phi: np.ndarray
    base_value: float
    prediction: float

    @property
    def residual(self) -> float:
        """Efficiency gap ``sum(phi) + base_value - prediction``."""
        return float(math.fsum(self.phi) + self.base_value - self.prediction)


class Workspace:
    """Scratch buffers for one in-flight explanation, with a live/peak counter."""

    def __init__(self, size: int):
        self.size = size
        self._free: list[np.ndarray] = []
        self.live = 0
        self.peak = 0
        self.allocations = 0

    def acquire(self) -> np.ndarray:
        self.live += 1
        self.allocations += 1
        self.peak = max(self.peak, self.live)
        if self._free:
            return self._free.pop()
        return np.empty(self.size)

    def release(self, buf: np.ndarray) -> None:
        self.live -= 1
        self._free.append(buf)

    def reset_counters(self) -> None:
        self.peak = self.live
        self.allocations = 0


def _visit_orders(tree: PreprocessedTree) -> tuple[tuple[int, int], ...]:
    """(first, second) child per node, heavier register need first."""
    n = tree.n_nodes
    need = [1] * n
    order = [(-1, -1)] * n
    for v in range(n - 1, -1, -1):
        l, r = tree.left[v], tree.right[v]
        if l < 0:
            continue
        a, b = need[l], need[r]
        need[v] = max(a, b) if a != b else a + 1
        order[v] = (r, l) if b > a else (l, r)
    return tuple(order)


_ORDER_CACHE: dict[int, tuple] = {}


def visit_order(tree: PreprocessedTree) -> tuple[tuple[int, int], ...]:
    key = id(tree)
    hit = _ORDER_CACHE.get(key)
    if hit is None or hit[0] is not tree:
        hit = (tree, _visit_orders(tree))
        _ORDER_CACHE[key] = hit
    return hit[1]


def edge_shifts(tree: PreprocessedTree, x: np.ndarray) -> list[float]:
    """``p_e`` for the in-edge of every node (root entry is the sentinel 1).

    ``p_e = p_{e_up} * (1/w_e if x satisfies e else 0)`` with ``p_bottom = 1``.
    """
    p = [1.0] * tree.n_nodes
    parent, sfa = tree.parent, tree.same_feature_ancestor
    feature, threshold = tree.feature, tree.threshold
    for v in range(1, tree.n_nodes):  # preorder: parents come first
        u = parent[v]
        goes_left = x[feature[u]] <= threshold[u]
        if goes_left == tree.is_left[v]:
            up = p[sfa[v]] if sfa[v] >= 0 else 1.0
            p[v] = up / tree.in_weight[v]
        else:
            p[v] = 0.0
    return p


def _check_basis(tree: PreprocessedTree, basis: InterpolationBasis) -> None:
    if tree.max_degree > basis.max_degree:
        raise DegreeError(
            f"tree has {tree.max_degree} distinct features on a path; basis supports {basis.max_degree}"
        )


class _Walker:
    """Shared traversal; ``fused`` decides when edge terms are taken."""

    def __init__(self, tree, x, basis, ws, fused, store=None):
        self.tree = tree
        self.p = edge_shifts(tree, x)
        self.Y = basis.points
        self.pow1p = basis.pow1p
        self.N = basis.N
        self.ws = ws
        self.fused = fused
        self.store = store
        self.order = visit_order(tree)
        self.S = np.zeros(tree.num_features)

    def edge_term(self, v: int, g: np.ndarray, d: int) -> None:
        """Add the Shapley terms of the in-edge of ``v`` given ``G[v]``."""
        tree, p, Y, N = self.tree, self.p, self.Y, self.N
        pe = p[v]
        val = (pe - 1.0) * (float(np.dot(g / (Y + pe), N[d - 1])) / d)
        u = tree.same_feature_ancestor[v]
        if u >= 0:
            pu = p[u]
            du = tree.subtree_degree[u]
            lifted = g * self.pow1p[du - d]
            val -= (pu - 1.0) * (float(np.dot(lifted / (Y + pu), N[du - 1])) / du)
        self.S[tree.in_feature[v]] += val

    def descend(self, C: np.ndarray, c: int) -> None:
        C *= self.Y + self.p[c]
        u = self.tree.same_feature_ancestor[c]
        if u >= 0:
            C /= self.Y + self.p[u]

    def ascend(self, C: np.ndarray, c: int) -> None:
        u = self.tree.same_feature_ancestor[c]
        if u >= 0:
            C *= self.Y + self.p[u]
        C /= self.Y + self.p[c]

    def run(self) -> np.ndarray:
        C = self.ws.acquire()
        C.fill(1.0)
        g, d = self.visit(0, C, last=True)
        if self.store is not None:
            self.store[0] = (g, d)
        else:
            self.ws.release(g)
        return self.S

    def visit(self, v: int, C: np.ndarray, last: bool) -> tuple[np.ndarray, int]:
        """Return ``(G[v], degree)``. ``C`` holds the path polynomial at ``v``.

        When ``last`` is set nothing after this subtree needs ``C`` again, so a
        leaf may overwrite it and ancestors skip restoring it.
        """
        tree = self.tree
        if tree.left[v] < 0:
            scale = tree.reach[v] * tree.value[v]
            if last:
                C *= scale
                return C, tree.degree[v]
            g = self.ws.acquire()
            np.multiply(C, scale, out=g)
            return g, tree.degree[v]

        a, b = self.order[v]
        self.descend(C, a)
        ga, da = self.visit(a, C, last=False)
        self.ascend(C, a)
        self.finish_child(a, ga, da)

        self.descend(C, b)
        gb, db = self.visit(b, C, last=last)
        if not last:
            self.ascend(C, b)
        self.finish_child(b, gb, db)

        # G[v] = G[a] (+) G[b], accumulated into the higher-degree buffer
        if da >= db:
            hi, lo, dhi, dlo = ga, gb, da, db
        else:
            hi, lo, dhi, dlo = gb, ga, db, da
        if self.store is not None:
            out = self.ws.acquire()
            np.add(hi, lo * self.pow1p[dhi - dlo], out=out)
            return out, dhi
        hi += lo * self.pow1p[dhi - dlo]
        self.ws.release(lo)
        return hi, dhi

    def finish_child(self, c: int, g: np.ndarray, d: int) -> None:
        if self.store is not None:
            self.store[c] = (g, d)
        else:
            self.edge_term(c, g, d)

    def aggregate(self) -> np.ndarray:
        """Bottom-up pass over stored polynomials, same order as the fused walk."""
        stack = [(0, False)]
        while stack:
            v, expanded = stack.pop()
            if self.tree.left[v] >= 0 and not expanded:
                a, b = self.order[v]
                stack.append((v, True))
                stack.append((b, False))
                stack.append((a, False))
                continue
            if v != 0:
                g, d = self.store[v]
                self.edge_term(v, g, d)
        return self.S


def compute_summary_polynomials(
    tree: PreprocessedTree, x: Sequence[float], basis: InterpolationBasis
) -> tuple[dict[int, ValuePoly], list[float]]:
    """Summary polynomial of every node plus the per-edge shifts ``p_e``."""
    _check_basis(tree, basis)
    x = as_instance(x, tree.num_features)
    store: dict[int, tuple] = {}
    walker = _Walker(tree, x, basis, Workspace(basis.size), fused=False, store=store)
    walker.run()
    G = {v: ValuePoly(g.copy(), d, basis) for v, (g, d) in store.items()}
    return G, walker.p


def aggregate_shapley(
    tree: PreprocessedTree,
    x: Sequence[float],
    G: dict[int, ValuePoly],
    p: Sequence[float],
    basis: InterpolationBasis,
) -> np.ndarray:
    """Shapley vector from stored summary polynomials and shifts."""
    x = as_instance(x, tree.num_features)
    walker = _Walker(tree, x, basis, Workspace(basis.size), fused=False,
                     store={v: (g.values, g.degree) for v, g in G.items()})
    walker.p = list(p)
    return walker.aggregate()


def shapley_values(
    tree: PreprocessedTree,
    x: np.ndarray,
    basis: InterpolationBasis,
    mode: str = "fused",
    workspace: Workspace | None = None,
) -> np.ndarray:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    _check_basis(tree, basis)
    ws = workspace or Workspace(basis.size)
    if mode == "fused":
        return _Walker(tree, x, basis, ws, fused=True).run()
    store: dict[int, tuple] = {}
    walker = _Walker(tree, x, basis, ws, fused=False, store=store)
    walker.run()
    S = walker.aggregate()
    for g, _ in store.values():
        ws.release(g)
    return S


def explain(
    tree: PreprocessedTree,
    x: Sequence[float],
    basis: InterpolationBasis | None = None,
    mode: str = "fused",
    workspace: Workspace | None = None,
) -> Attribution:
    x = as_instance(x, tree.num_features)
    basis = basis or make_basis(tree.max_degree)
    phi = shapley_values(tree, x, basis, mode=mode, workspace=workspace)
    return Attribution(phi=phi, base_value=tree.base_value, prediction=predict(tree, x))


def explain_ensemble(
    ensemble: Ensemble,
    x: Sequence[float],
    basis: InterpolationBasis | None = None,
    mode: str = "fused",
    workspace: Workspace | None = None,
) -> Attribution:
    x = as_instance(x, ensemble.num_features)
    basis = basis or make_basis(ensemble.max_degree)
    ws = workspace or Workspace(basis.size)
    phi = np.zeros(ensemble.num_features)
    base = ensemble.bias
    for tree in ensemble.trees:
        phi += shapley_values(tree, x, basis, mode=mode, workspace=ws)
        base += tree.base_value
    return Attribution(phi=phi, base_value=base, prediction=predict(ensemble, x))


@dataclass
class BatchResult:
    attributions: list[Attribution | None]
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def explain_batch(
    ensemble: Union[Ensemble, PreprocessedTree],
    X: Sequence[Sequence[float]],
    basis: InterpolationBasis | None = None,
    threads: int = 1,
    mode: str = "fused",
) -> BatchResult:
    """Explain each row independently; bad rows are reported, not fatal."""
    if isinstance(ensemble, PreprocessedTree):
        ensemble = Ensemble(trees=(ensemble,), num_features=ensemble.num_features)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    basis = basis or make_basis(ensemble.max_degree)

    def one(row):
        try:
            return explain_ensemble(ensemble, row, basis, mode=mode), None
        except InstanceError as exc:
            return None, str(exc)

    rows = list(X)
    if threads == 1:
        outcomes = [one(row) for row in rows]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, rows))
    result = BatchResult(attributions=[a for a, _ in outcomes])
    for k, (_, err) in enumerate(outcomes):
        if err is not None:
            result.errors[k] = err
    return result
