"""Confusion counts, ACC / DR and the per-round report record."""
from dataclasses import dataclass, field

import numpy as np

from ..data import Label
from ..errors import SchemaError

UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionCounts:
    """Abnormal is the positive class."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


def confusion_from_labels(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    pos_t = y_true == Label.ABNORMAL
    pos_p = y_pred == Label.ABNORMAL
    return ConfusionCounts(
        tp=int(np.sum(pos_t & pos_p)),
        tn=int(np.sum(~pos_t & ~pos_p)),
        fp=int(np.sum(~pos_t & pos_p)),
        fn=int(np.sum(pos_t & ~pos_p)),
    )


def confusion(model, data):
    from ..victims import predict

    if len(data) == 0:
        raise SchemaError("cannot evaluate on an empty dataset")
    return confusion_from_labels(data.y, predict(model, np.asarray(data.X, dtype=float)))


def acc(c):
    if c.total == 0:
        raise ValueError("accuracy of an empty confusion table")
    return (c.tp + c.tn) / c.total


def dr(c):
    """Detection rate TP / (TP + FN); None when there are no Abnormal samples."""
    if c.tp + c.fn == 0:
        return None
    return c.tp / (c.tp + c.fn)


@dataclass(frozen=True)
class RoundReport:
    round: int
    counts: dict
    injected: int = 0
    train_size: int = 0
    budget_base: int = 0
    warnings: tuple = field(default_factory=tuple)

    def acc(self, name):
        return acc(self.counts[name])

    def dr(self, name):
        return dr(self.counts[name])
