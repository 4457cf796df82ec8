"""Audit toolkit for gender inference on in-the-wild person crops."""

from .explain import ShapleyExplanation, mean_abs_shap, shapley_exact
from .metrics import face_importance, mean_accuracy, meta_label
from .subjfeat import FEATURES, POSES
from .trees import SurrogateParams, TreeEnsemble, fit_surrogate

__version__ = "0.1.0"
