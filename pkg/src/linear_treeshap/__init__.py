"""Exact Shapley values for decision trees in O(LD) per instance."""
from .interp_poly import InterpolationBasis, ValuePoly, make_basis
from .linear_shap import Attribution, explain, explain_batch, explain_ensemble
from .tree_model import Ensemble, PreprocessedTree, load_model, parse_model, predict

__all__ = [
    "Attribution",
    "Ensemble",
    "InterpolationBasis",
    "PreprocessedTree",
    "ValuePoly",
    "explain",
    "explain_batch",
    "explain_ensemble",
    "load_model",
    "make_basis",
    "parse_model",
    "predict",
]
