"""From-scratch binary classifiers used as poisoning targets."""
from .base import (
    FAMILIES,
    STANDARD_SIX,
    PRESETS,
    FittedModel,
    GaussianNBModel,
    LabelOracle,
    LogRegModel,
    LSSVMModel,
    SVMModel,
    VictimSpec,
    decision_value,
    fit,
    load_model,
    predict,
    preset,
    save_model,
)
from .feature_selection import mi_feature_select

__all__ = [
    "FAMILIES", "STANDARD_SIX", "PRESETS", "FittedModel", "GaussianNBModel", "LabelOracle",
    "LogRegModel", "LSSVMModel", "SVMModel", "VictimSpec", "decision_value", "fit",
    "load_model", "mi_feature_select", "predict", "preset", "save_model",
]
