"""Decision-tree models: parsing, validation, preprocessing and prediction.

A model document is JSON of the form::

    {"num_features": 3, "bias": 0.0, "feature_names": [...],
     "trees": [{"root": 0, "nodes": [
         {"id": 0, "kind": "split", "feature": 0, "threshold": 19.0,
          "left": 1, "right": 2, "left_weight": 0.5, "right_weight": 0.5},
         {"id": 1, "kind": "leaf", "value": 0.5}, ...]}]}

A split sends an instance left iff ``x[feature] <= threshold``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from os import PathLike
from typing import Any, Mapping, Sequence, Union

import numpy as np

WEIGHT_SUM_TOL = 1e-9
LENIENT_EPS = 1e-12


class ModelError(ValueError):
    """Base class for invalid model documents."""


class SchemaError(ModelError):
    pass


class WeightError(ModelError):
    pass


class StructureError(ModelError):
    pass


class FeatureIndexError(ModelError):
    pass


class InstanceError(ValueError):
    """An instance is missing values or has the wrong length."""


@dataclass(frozen=True)
class TreeNode:
    id: int
    kind: str
    feature: int | None = None
    threshold: float | None = None
    left: int | None = None
    right: int | None = None
    left_weight: float | None = None
    right_weight: float | None = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind == "leaf"


@dataclass(frozen=True)
class PreprocessedTree:
    """Traversal-ready tree with nodes renumbered ``0..n-1`` in preorder.

    Per-node sequences are indexed by the dense index. For a non-root node
    ``v`` the in-edge is the edge from ``parent[v]`` to ``v``; its feature is
    the split feature of the parent. ``same_feature_ancestor[v]`` is the head
    of the closest strict-ancestor edge with that feature (``-1`` if none).
    ``degree[v]`` counts distinct features on the root-to-``v`` path and
    ``subtree_degree[v]`` is the largest leaf degree below ``v``.
    """

    num_features: int
    node_ids: tuple[int, ...]
    parent: tuple[int, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    value: tuple[float, ...]
    in_feature: tuple[int, ...]
    in_weight: tuple[float, ...]
    is_left: tuple[bool, ...]
    same_feature_ancestor: tuple[int, ...]
    degree: tuple[int, ...]
    subtree_degree: tuple[int, ...]
    reach: tuple[float, ...]
    max_degree: int
    depth: int

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def is_leaf(self, v: int) -> bool:
        return self.left[v] < 0

    @property
    def leaves(self) -> list[int]:
        return [v for v in range(self.n_nodes) if self.left[v] < 0]

    @property
    def base_value(self) -> float:
        """Expected prediction with every feature missing."""
        return math.fsum(self.reach[v] * self.value[v] for v in self.leaves)

    def used_features(self) -> set[int]:
        return {f for f in self.feature if f >= 0}


@dataclass(frozen=True)
class Ensemble:
    trees: tuple[PreprocessedTree, ...]
    num_features: int
    feature_names: tuple[str, ...] | None = None
    bias: float = 0.0

    @property
    def max_degree(self) -> int:
        return max((t.max_degree for t in self.trees), default=0)


# -- parsing ---------------------------------------------------------------

def _get(obj: Mapping[str, Any], key: str, kind: type | tuple, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    # bool is an int subclass; reject it where numbers are expected
    if isinstance(val, bool) or not isinstance(val, kind):
        raise SchemaError(f"{where}: field {key!r} has wrong type {type(val).__name__}")
    return val


def _number(obj, key, where) -> float:
    val = float(_get(obj, key, (int, float), where))
    if not math.isfinite(val):
        raise SchemaError(f"{where}: field {key!r} is not finite")
    return val


def _parse_node(raw: Any, num_features: int, where: str) -> TreeNode:
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{where}: node must be an object")
    node_id = _get(raw, "id", int, where)
    where = f"{where} (node {node_id})"
    kind = _get(raw, "kind", str, where)
    if kind == "leaf":
        return TreeNode(id=node_id, kind="leaf", value=_number(raw, "value", where))
    if kind != "split":
        raise SchemaError(f"{where}: unknown node kind {kind!r}")
    feat = _get(raw, "feature", int, where)
    if not 0 <= feat < num_features:
        raise FeatureIndexError(f"{where}: feature {feat} outside [0, {num_features})")
    return TreeNode(
        id=node_id,
        kind="split",
        feature=feat,
        threshold=_number(raw, "threshold", where),
        left=_get(raw, "left", int, where),
        right=_get(raw, "right", int, where),
        left_weight=_number(raw, "left_weight", where),
        right_weight=_number(raw, "right_weight", where),
    )


def _check_weights(node: TreeNode, lenient: bool, where: str) -> TreeNode:
    wl, wr = node.left_weight, node.right_weight
    if abs(wl + wr - 1.0) > WEIGHT_SUM_TOL:
        raise WeightError(f"{where}: weights {wl} + {wr} do not sum to 1")
    if 0.0 < wl < 1.0 and 0.0 < wr < 1.0:
        return node
    if not lenient or not (0.0 <= wl <= 1.0 and 0.0 <= wr <= 1.0):
        raise WeightError(f"{where}: weights must lie strictly inside (0, 1), got {wl}, {wr}")
    wl = min(max(wl, LENIENT_EPS), 1.0 - LENIENT_EPS)
    warnings.warn(f"{where}: clamping degenerate weights ({node.left_weight}, {node.right_weight})")
    return replace(node, left_weight=wl, right_weight=1.0 - wl)


def parse_tree(raw: Any, num_features: int, lenient: bool = False, where: str = "tree") -> dict:
    """Validate one tree object; returns ``{"root": id, "nodes": {id: TreeNode}}``."""
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{where}: tree must be an object")
    root = _get(raw, "root", int, where)
    raw_nodes = _get(raw, "nodes", list, where)
    nodes: dict[int, TreeNode] = {}
    for raw_node in raw_nodes:
        node = _parse_node(raw_node, num_features, where)
        if node.id in nodes:
            raise StructureError(f"{where}: duplicate node id {node.id}")
        if not node.is_leaf:
            node = _check_weights(node, lenient, f"{where} (node {node.id})")
        nodes[node.id] = node
    if root not in nodes:
        raise StructureError(f"{where}: root {root} is not a node")

    parent_of: dict[int, int] = {}
    for node in nodes.values():
        if node.is_leaf:
            continue
        if node.left == node.right:
            raise StructureError(f"{where}: node {node.id} has duplicate children")
        for child in (node.left, node.right):
            if child not in nodes:
                raise StructureError(f"{where}: node {node.id} points to missing node {child}")
            if child == node.id:
                raise StructureError(f"{where}: node {node.id} is a self-loop")
            if child == root:
                raise StructureError(f"{where}: root {root} has a parent (cycle)")
            if child in parent_of:
                raise StructureError(f"{where}: node {child} has two parents")
            parent_of[child] = node.id

    # every node must hang off the root; with single parents this also rules out cycles
    seen = set()
    stack = [root]
    while stack:
        v = stack.pop()
        seen.add(v)
        node = nodes[v]
        if not node.is_leaf:
            stack.extend((node.left, node.right))
    if len(seen) != len(nodes):
        orphans = sorted(set(nodes) - seen)
        raise StructureError(f"{where}: unreachable nodes {orphans[:5]}")
    return {"root": root, "nodes": nodes}


def preprocess(root: int, nodes: Mapping[int, TreeNode], num_features: int) -> PreprocessedTree:
    """One root-down pass with a per-feature stack of ancestor edge heads."""
    order: list[int] = []
    index: dict[int, int] = {}
    parent: list[int] = []
    in_feature: list[int] = []
    in_weight: list[float] = []
    is_left: list[bool] = []
    sfa: list[int] = []
    degree: list[int] = []
    reach: list[float] = []
    depth = 0

    # per feature: dense indices of heads of edges carrying that feature on the current path
    feature_stack: dict[int, list[int]] = {}
    # (node id, parent index, went left, depth) ; None marks "pop feature stack"
    work: list = [(root, -1, False, 0)]
    while work:
        item = work.pop()
        if item[0] is None:
            feature_stack[item[1]].pop()
            continue
        node_id, par, went_left, d = item
        v = len(order)
        index[node_id] = v
        order.append(node_id)
        parent.append(par)
        depth = max(depth, d)
        if par < 0:
            in_feature.append(-1)
            in_weight.append(1.0)
            is_left.append(False)
            sfa.append(-1)
            degree.append(0)
            reach.append(1.0)
        else:
            pnode = nodes[order[par]]
            f = pnode.feature
            w = pnode.left_weight if went_left else pnode.right_weight
            stack = feature_stack.setdefault(f, [])
            in_feature.append(f)
            in_weight.append(w)
            is_left.append(went_left)
            sfa.append(stack[-1] if stack else -1)
            degree.append(degree[par] + (0 if stack else 1))
            reach.append(reach[par] * w)
            stack.append(v)
            work.append((None, f))
        node = nodes[node_id]
        if not node.is_leaf:
            # right pushed first so the left subtree is numbered first
            work.append((node.right, v, False, d + 1))
            work.append((node.left, v, True, d + 1))

    n = len(order)
    left = [-1] * n
    right = [-1] * n
    feature = [-1] * n
    threshold = [0.0] * n
    value = [0.0] * n
    for v, node_id in enumerate(order):
        node = nodes[node_id]
        if node.is_leaf:
            value[v] = node.value
        else:
            left[v] = index[node.left]
            right[v] = index[node.right]
            feature[v] = node.feature
            threshold[v] = node.threshold

    subtree_degree = list(degree)
    for v in range(n - 1, -1, -1):
        if left[v] >= 0:
            subtree_degree[v] = max(subtree_degree[left[v]], subtree_degree[right[v]])

    return PreprocessedTree(
        num_features=num_features,
        node_ids=tuple(order),
        parent=tuple(parent),
        left=tuple(left),
        right=tuple(right),
        feature=tuple(feature),
        threshold=tuple(threshold),
        value=tuple(value),
        in_feature=tuple(in_feature),
        in_weight=tuple(in_weight),
        is_left=tuple(is_left),
        same_feature_ancestor=tuple(sfa),
        degree=tuple(degree),
        subtree_degree=tuple(subtree_degree),
        reach=tuple(reach),
        max_degree=max(degree),
        depth=depth,
    )


def parse_model(document: Union[str, bytes, Mapping[str, Any]], lenient: bool = False) -> Ensemble:
    """Parse and validate a model document (JSON text or decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise SchemaError("model document must be a JSON object")
    m = _get(document, "num_features", int, "model")
    if m < 0:
        raise SchemaError("model: num_features must be non-negative")
    bias = _number(document, "bias", "model") if "bias" in document else 0.0
    names = None
    if document.get("feature_names") is not None:
        names = _get(document, "feature_names", list, "model")
        if len(names) != m or not all(isinstance(s, str) for s in names):
            raise SchemaError("model: feature_names must be num_features strings")
        names = tuple(names)
    raw_trees = _get(document, "trees", list, "model")
    trees = []
    for k, raw in enumerate(raw_trees):
        parsed = parse_tree(raw, m, lenient=lenient, where=f"tree {k}")
        trees.append(preprocess(parsed["root"], parsed["nodes"], m))
    return Ensemble(trees=tuple(trees), num_features=m, feature_names=names, bias=bias)


def load_model(path: Union[str, PathLike], lenient: bool = False) -> Ensemble:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), lenient=lenient)


def tree_to_document(tree: PreprocessedTree) -> dict:
    nodes = []
    for v, node_id in enumerate(tree.node_ids):
        if tree.left[v] < 0:
            nodes.append({"id": node_id, "kind": "leaf", "value": tree.value[v]})
            continue
        l, r = tree.left[v], tree.right[v]
        nodes.append({
            "id": node_id,
            "kind": "split",
            "feature": tree.feature[v],
            "threshold": tree.threshold[v],
            "left": tree.node_ids[l],
            "right": tree.node_ids[r],
            "left_weight": tree.in_weight[l],
            "right_weight": tree.in_weight[r],
        })
    return {"root": tree.node_ids[0], "nodes": nodes}


def to_document(model: Union[Ensemble, PreprocessedTree]) -> dict:
    """Serialize back to the model schema (round-trips through :func:`parse_model`)."""
    if isinstance(model, PreprocessedTree):
        model = Ensemble(trees=(model,), num_features=model.num_features)
    doc: dict[str, Any] = {"num_features": model.num_features, "bias": model.bias}
    if model.feature_names is not None:
        doc["feature_names"] = list(model.feature_names)
    doc["trees"] = [tree_to_document(t) for t in model.trees]
    return doc


def single_tree(document: Union[str, Mapping[str, Any]]) -> PreprocessedTree:
    """Convenience: parse a one-tree model and return the tree."""
    ens = parse_model(document)
    if len(ens.trees) != 1:
        raise ModelError(f"expected exactly one tree, got {len(ens.trees)}")
    return ens.trees[0]


# -- prediction ------------------------------------------------------------

def as_instance(x: Sequence[float], num_features: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != num_features:
        raise InstanceError(f"instance has shape {arr.shape}, expected ({num_features},)")
    if not np.all(np.isfinite(arr)):
        bad = np.flatnonzero(~np.isfinite(arr)).tolist()
        raise InstanceError(f"instance has missing or non-finite values at features {bad}")
    return arr


def _predict_tree(tree: PreprocessedTree, x: np.ndarray) -> float:
    v = 0
    left, right, feature, threshold = tree.left, tree.right, tree.feature, tree.threshold
    while left[v] >= 0:
        v = left[v] if x[feature[v]] <= threshold[v] else right[v]
    return tree.value[v]


def predict(model: Union[Ensemble, PreprocessedTree], x: Sequence[float]) -> float:
    x = as_instance(x, model.num_features)
    if isinstance(model, PreprocessedTree):
        return _predict_tree(model, x)
    return model.bias + math.fsum(_predict_tree(t, x) for t in model.trees)
