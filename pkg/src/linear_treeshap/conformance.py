"""Cross-check the linear kernel against every oracle on the same inputs."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .interp_poly import make_basis
from .linear_shap import explain
from .oracle import coefficient_reference, shapley_bruteforce_all, shapley_per_rule_all
from .synthetic import TreeSpec, random_instances, random_tree
from .tree_model import Ensemble, PreprocessedTree


def _linear(tree, x):
    return explain(tree, x, make_basis(tree.max_degree)).phi


IMPLEMENTATIONS: dict[str, Callable[[PreprocessedTree, np.ndarray], np.ndarray]] = {
    "linear_shap": _linear,
    "bruteforce": shapley_bruteforce_all,
    "per_rule": lambda t, x: shapley_per_rule_all(t, x, exact=True),
    "coefficient_reference": lambda t, x: coefficient_reference(t, x, exact=True),
}


def deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Largest ``|a - b| / (1 + max(|a|, |b|))`` over features."""
    if a.size == 0:
        return 0.0
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    return float(np.max(np.abs(a - b) / scale))


@dataclass
class CheckReport:
    implementations: tuple[str, ...]
    cases: int = 0
    pair_max: dict[tuple[str, str], float] = field(default_factory=dict)
    worst_case: tuple | None = None

    @property
    def max_deviation(self) -> float:
        return max(self.pair_max.values(), default=0.0)

    def passed(self, tolerance: float) -> bool:
        return self.max_deviation <= tolerance


def check_cases(cases: Iterable[tuple[PreprocessedTree, np.ndarray]],
                implementations: dict | None = None) -> CheckReport:
    impls = implementations or IMPLEMENTATIONS
    names = tuple(impls)
    report = CheckReport(implementations=names)
    report.pair_max = {pair: 0.0 for pair in combinations(names, 2)}
    for tree, x in cases:
        results = {name: np.asarray(fn(tree, x), dtype=float) for name, fn in impls.items()}
        report.cases += 1
        for a, b in report.pair_max:
            dev = deviation(results[a], results[b])
            if dev > report.pair_max[(a, b)]:
                report.pair_max[(a, b)] = dev
                if dev >= report.max_deviation:
                    report.worst_case = (tree, x, a, b)
    return report


def model_instances(ensemble: Ensemble, n: int, rng: np.random.Generator) -> np.ndarray:
    """Instances spread around each feature's split thresholds."""
    lo = np.zeros(ensemble.num_features)
    hi = np.ones(ensemble.num_features)
    seen: dict[int, list[float]] = {}
    for tree in ensemble.trees:
        for f, thr in zip(tree.feature, tree.threshold):
            if f >= 0:
                seen.setdefault(f, []).append(thr)
    for f, thr in seen.items():
        lo[f], hi[f] = min(thr) - 1.0, max(thr) + 1.0
    return rng.uniform(lo, hi, size=(n, ensemble.num_features))


def model_cases(ensemble: Ensemble, n_instances: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    X = model_instances(ensemble, n_instances, rng)
    for tree in ensemble.trees:
        for x in X:
            yield tree, x


def random_cases(n_trees: int, max_depth: int, instances_per_tree: int = 5,
                 max_features: int = 10, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(n_trees):
        m = int(rng.integers(1, max_features + 1))
        depth = int(rng.integers(0, max_depth + 1))
        tree = random_tree(TreeSpec(num_features=m, depth=depth), rng)
        for x in random_instances(m, instances_per_tree, rng):
            yield tree, x
