import numpy as np
import pytest
from hypothesis import given, settings

from conftest import RAIN_BASE, RAIN_PHI, RAIN_X, leaf_doc, stump_doc, trees_with_instance
from linear_treeshap.interp_poly import DegreeError, make_basis
from linear_treeshap.linear_shap import (
    Workspace,
    aggregate_shapley,
    compute_summary_polynomials,
    edge_shifts,
    explain,
    explain_batch,
    explain_ensemble,
    shapley_values,
)
from linear_treeshap.oracle import shapley_bruteforce_all
from linear_treeshap.tree_model import Ensemble, parse_model


def _by_id(tree, values):
    return {tree.node_ids[v]: values[v] for v in range(tree.n_nodes)}


def test_rain_edge_shifts(rain_tree):
    p = _by_id(rain_tree, edge_shifts(rain_tree, np.array(RAIN_X)))
    assert p[2] == pytest.approx(2.0)
    assert p[3] == pytest.approx(2.5)
    assert p[5] == pytest.approx(1 / 0.7)
    assert p[1] == 0.0 and p[4] == 0.0 and p[6] == 0.0


def test_rain_summary_polynomial_of_leaf_d(rain_tree):
    basis = make_basis(rain_tree.max_degree)
    G, _ = compute_summary_polynomials(rain_tree, RAIN_X, basis)
    g = _by_id(rain_tree, [G[v] for v in range(rain_tree.n_nodes)])[1]
    # R_empty = 0.5 * 0.5, q_temperature = 0
    assert g.degree == 1
    np.testing.assert_allclose(g.values, 0.25 * basis.points, rtol=1e-15)


def test_rain_explain(rain_tree):
    a = explain(rain_tree, RAIN_X)
    assert a.phi == pytest.approx(RAIN_PHI, abs=1e-12)
    assert a.base_value == pytest.approx(RAIN_BASE)
    assert a.prediction == pytest.approx(0.4)
    assert abs(a.residual) < 1e-15


def test_two_pass_pieces_match(rain_tree):
    basis = make_basis(rain_tree.max_degree)
    G, p = compute_summary_polynomials(rain_tree, RAIN_X, basis)
    assert aggregate_shapley(rain_tree, RAIN_X, G, p, basis) == pytest.approx(RAIN_PHI, abs=1e-12)


def test_single_leaf_has_zero_attribution():
    tree = parse_model(leaf_doc(0.5)).trees[0]
    a = explain(tree, [1.0, 2.0, 3.0])
    assert a.phi.tolist() == [0.0, 0.0, 0.0]
    assert a.base_value == a.prediction == 0.5


@pytest.mark.parametrize("x, expected_leaf", [(0.2, 2.0), (0.9, -1.0)])
def test_stump(x, expected_leaf):
    w = 0.3
    tree = parse_model(stump_doc(w=w, a=2.0, b=-1.0)).trees[0]
    a = explain(tree, [x])
    base = w * 2.0 + (1 - w) * -1.0
    assert a.phi[0] == pytest.approx(expected_leaf - base, abs=1e-15)


def test_unused_feature_gets_zero(rain_doc):
    rain_doc["num_features"] = 4
    rain_doc.pop("feature_names")
    tree = parse_model(rain_doc).trees[0]
    assert explain(tree, RAIN_X + (5.0,)).phi[3] == 0.0


def test_symmetric_features_share_credit():
    # the same split on two features, nested symmetrically
    nodes = [
        {"id": 0, "kind": "split", "feature": 0, "threshold": 0.5, "left": 1, "right": 2,
         "left_weight": 0.5, "right_weight": 0.5},
        {"id": 1, "kind": "split", "feature": 1, "threshold": 0.5, "left": 3, "right": 4,
         "left_weight": 0.5, "right_weight": 0.5},
        {"id": 2, "kind": "split", "feature": 1, "threshold": 0.5, "left": 5, "right": 6,
         "left_weight": 0.5, "right_weight": 0.5},
        {"id": 3, "kind": "leaf", "value": 1.0},
        {"id": 4, "kind": "leaf", "value": 0.0},
        {"id": 5, "kind": "leaf", "value": 0.0},
        {"id": 6, "kind": "leaf", "value": 0.0},
    ]
    tree = parse_model({"num_features": 2, "trees": [{"root": 0, "nodes": nodes}]}).trees[0]
    phi = explain(tree, [0.0, 0.0]).phi
    assert phi[0] == pytest.approx(phi[1], abs=1e-15)
    assert phi.sum() == pytest.approx(0.75)


def test_ensemble_linearity(rain_doc):
    single = explain(parse_model(rain_doc).trees[0], RAIN_X)
    doubled = parse_model(dict(rain_doc, trees=rain_doc["trees"] * 2, bias=0.1))
    a = explain_ensemble(doubled, RAIN_X)
    assert a.phi == pytest.approx(2 * single.phi, abs=1e-15)
    assert a.base_value == pytest.approx(2 * RAIN_BASE + 0.1)
    assert a.prediction == pytest.approx(0.9)
    assert abs(a.residual) < 1e-14


def test_ensemble_with_constant_tree(rain_doc):
    const = leaf_doc(1.5)["trees"][0]
    ens = parse_model(dict(rain_doc, trees=rain_doc["trees"] + [const]))
    a = explain_ensemble(ens, RAIN_X)
    assert a.phi == pytest.approx(RAIN_PHI, abs=1e-12)
    assert a.base_value == pytest.approx(RAIN_BASE + 1.5)


def test_empty_ensemble():
    ens = Ensemble(trees=(), num_features=2, bias=0.3)
    a = explain_ensemble(ens, [1.0, 2.0])
    assert a.phi.tolist() == [0.0, 0.0]
    assert a.base_value == a.prediction == 0.3


def test_batch_reports_bad_rows(rain_tree):
    res = explain_batch(rain_tree, [RAIN_X, (1.0, float("nan"), 2.0), (1.0, 2.0), (10.0, 1.0, 0.0)])
    assert not res.ok
    assert sorted(res.errors) == [1, 2]
    assert res.attributions[1] is None
    assert res.attributions[0].phi == pytest.approx(RAIN_PHI, abs=1e-12)
    assert res.attributions[3].prediction == 0.5


def test_batch_threads_deterministic(rain_tree):
    rng = np.random.default_rng(1)
    X = rng.uniform([0, 0, 0], [40, 1, 16], size=(64, 3))
    one = explain_batch(rain_tree, X, threads=1)
    four = explain_batch(rain_tree, X, threads=4)
    for a, b in zip(one.attributions, four.attributions):
        assert np.array_equal(a.phi, b.phi)
    with pytest.raises(ValueError):
        explain_batch(rain_tree, X, threads=0)


def test_tie_goes_left(rain_tree):
    # temperature exactly at the threshold routes to leaf D
    a = explain(rain_tree, (19.0, 0.0, 6.0))
    assert a.prediction == 0.5
    assert a.phi == pytest.approx(shapley_bruteforce_all(rain_tree, (19.0, 0.0, 6.0)), abs=1e-12)


def test_basis_too_small(rain_tree):
    with pytest.raises(DegreeError):
        explain(rain_tree, RAIN_X, make_basis(2))


def test_unknown_mode(rain_tree):
    with pytest.raises(ValueError):
        explain(rain_tree, RAIN_X, mode="three_pass")


def test_workspace_released(rain_tree):
    basis = make_basis(rain_tree.max_degree)
    for mode in ("fused", "two_pass"):
        ws = Workspace(basis.size)
        shapley_values(rain_tree, np.array(RAIN_X), basis, mode=mode, workspace=ws)
        assert ws.live == 0
        assert ws.peak >= 1


@settings(max_examples=200, deadline=None)
@given(trees_with_instance(max_depth=7))
def test_matches_bruteforce(case):
    tree, x = case
    a = explain(tree, x)
    np.testing.assert_allclose(a.phi, shapley_bruteforce_all(tree, x), rtol=0, atol=1e-10)
    assert abs(a.residual) < 1e-10


@settings(max_examples=200, deadline=None)
@given(trees_with_instance(max_depth=7))
def test_modes_agree_and_fused_stays_within_depth(case):
    tree, x = case
    basis = make_basis(tree.max_degree)
    ws = Workspace(basis.size)
    fused = shapley_values(tree, x, basis, "fused", ws)
    assert np.array_equal(fused, shapley_values(tree, x, basis, "two_pass"))
    assert ws.peak <= tree.depth + 1
