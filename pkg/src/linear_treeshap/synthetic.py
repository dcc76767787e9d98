"""Random tree generators for tests, conformance checks and benchmarks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree_model import PreprocessedTree, parse_model


@dataclass
class TreeSpec:
    num_features: int
    depth: int
    n_leaves: int | None = None  # default: random between depth+1 and 2^depth
    weight_range: tuple[float, float] = (0.05, 0.95)
    distinct_spine: bool = False  # force depth distinct features along one path
    value_range: tuple[float, float] = (-1.0, 1.0)


def random_tree_document(spec: TreeSpec, rng: np.random.Generator) -> dict:
    """Grow a spine of length ``depth`` then split random shallow leaves.

    Thresholds are uniform in [0, 1] so uniform instances exercise every
    branch.
    """
    if spec.distinct_spine and spec.depth > spec.num_features:
        raise ValueError("a distinct spine needs depth <= num_features")
    max_leaves = 2 ** spec.depth if spec.depth < 40 else 1 << 40
    target = spec.n_leaves
    if target is None:
        target = int(rng.integers(spec.depth + 1, min(max_leaves, 4 * (spec.depth + 1)) + 1)) if spec.depth else 1
    target = max(1, min(target, max_leaves))
    if spec.depth == 0:
        target = 1

    # node: [depth, feature, left, right]
    nodes: list[list] = [[0, None, None, None]]
    leaves = [0]
    spine_feats = rng.permutation(spec.num_features)[: spec.depth] if spec.distinct_spine else None

    def split(v: int, feature: int) -> None:
        d = nodes[v][0]
        nodes[v][1] = feature
        nodes[v][2] = len(nodes)
        nodes.append([d + 1, None, None, None])
        nodes[v][3] = len(nodes)
        nodes.append([d + 1, None, None, None])
        leaves.remove(v)
        leaves.extend([nodes[v][2], nodes[v][3]])

    v = 0
    for k in range(spec.depth):
        f = int(spine_feats[k]) if spine_feats is not None else int(rng.integers(spec.num_features))
        split(v, f)
        v = nodes[v][2] if rng.random() < 0.5 else nodes[v][3]
    while len(leaves) < target:
        candidates = [u for u in leaves if nodes[u][0] < spec.depth]
        u = candidates[int(rng.integers(len(candidates)))]
        split(u, int(rng.integers(spec.num_features)))

    lo, hi = spec.weight_range
    out = []
    for idx, (d, f, l, r) in enumerate(nodes):
        if f is None:
            out.append({"id": idx, "kind": "leaf", "value": float(rng.uniform(*spec.value_range))})
        else:
            w = float(rng.uniform(lo, hi))
            out.append({
                "id": idx, "kind": "split", "feature": f,
                "threshold": float(rng.uniform(0.0, 1.0)),
                "left": l, "right": r, "left_weight": w, "right_weight": 1.0 - w,
            })
    return {"num_features": spec.num_features, "trees": [{"root": 0, "nodes": out}]}


def random_tree(spec: TreeSpec, rng: np.random.Generator) -> PreprocessedTree:
    return parse_model(random_tree_document(spec, rng)).trees[0]


def random_instances(num_features: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(n, num_features))

