import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from linear_treeshap.tree_model import parse_model

ROOT = Path(__file__).resolve().parents[1]
RAIN_MODEL = ROOT / "models" / "rain.json"

# temperature 20, cloudy no (0), wind speed 6
RAIN_X = (20.0, 0.0, 6.0)
RAIN_PHI = (0.004, -0.123, -0.033)
RAIN_BASE = 0.552


@pytest.fixture
def rain_doc():
    return json.loads(RAIN_MODEL.read_text())


@pytest.fixture
def rain_tree(rain_doc):
    return parse_model(rain_doc).trees[0]


def stump_doc(w=0.3, a=2.0, b=-1.0, threshold=0.5, num_features=1):
    return {"num_features": num_features, "trees": [{"root": 0, "nodes": [
        {"id": 0, "kind": "split", "feature": 0, "threshold": threshold, "left": 1, "right": 2,
         "left_weight": w, "right_weight": 1 - w},
        {"id": 1, "kind": "leaf", "value": a},
        {"id": 2, "kind": "leaf", "value": b},
    ]}]}


def leaf_doc(value=0.5, num_features=3):
    return {"num_features": num_features, "trees": [{"root": 0, "nodes": [
        {"id": 0, "kind": "leaf", "value": value}]}]}


weights = st.floats(0.05, 0.95)
unit = st.floats(0.0, 1.0)


@st.composite
def tree_docs(draw, max_features=6, max_depth=5):
    """Random valid single-tree documents; thresholds and instances live in [0, 1]."""
    m = draw(st.integers(1, max_features))
    nodes = []

    def grow(depth):
        idx = len(nodes)
        nodes.append(None)
        if depth < max_depth and draw(st.booleans() if depth else st.just(True)):
            w = draw(weights)
            f = draw(st.integers(0, m - 1))
            thr = draw(unit)
            l = grow(depth + 1)
            r = grow(depth + 1)
            nodes[idx] = {"id": idx, "kind": "split", "feature": f, "threshold": thr,
                          "left": l, "right": r, "left_weight": w, "right_weight": 1 - w}
        else:
            nodes[idx] = {"id": idx, "kind": "leaf", "value": draw(st.floats(-2.0, 2.0))}
        return idx

    grow(0)
    return {"num_features": m, "trees": [{"root": 0, "nodes": nodes}]}


@st.composite
def trees_with_instance(draw, **kw):
    doc = draw(tree_docs(**kw))
    tree = parse_model(doc).trees[0]
    x = np.array(draw(st.lists(unit, min_size=tree.num_features, max_size=tree.num_features)))
    return tree, x


# acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
