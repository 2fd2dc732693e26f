"""Explainer exports.

Importing this package registers the built-in explainers.
"""

from segcause.explainers.attention import SegmentAttentionExplainer, extract_attributions
from segcause.explainers.base import Attribution, BaseExplainer, normalize_attribution
from segcause.explainers.gradients import (
    GradSaliencyExplainer,
    IntegratedGradientsExplainer,
    RandomExplainer,
)
from segcause.explainers.registry import (
    clear_registry,
    create_explainer,
    get_all_explainer_classes,
    get_explainer_class,
    list_explainers,
    register_explainer,
    unregister_explainer,
)

__all__ = [
    "Attribution",
    "BaseExplainer",
    "normalize_attribution",
    "SegmentAttentionExplainer",
    "RandomExplainer",
    "GradSaliencyExplainer",
    "IntegratedGradientsExplainer",
    "extract_attributions",
    # Registry
    "register_explainer",
    "get_explainer_class",
    "get_all_explainer_classes",
    "create_explainer",
    "list_explainers",
    "unregister_explainer",
    "clear_registry",
]
