"""Metrics, experiment orchestration and plot-data export."""
from .metrics import UNDEFINED, ConfusionCounts, RoundReport, acc, confusion, confusion_from_labels, dr

__all__ = ["UNDEFINED", "ConfusionCounts", "RoundReport", "acc", "confusion", "confusion_from_labels", "dr"]
