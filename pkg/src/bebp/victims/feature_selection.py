"""Greedy mutual-information feature selection on binned [0, 1] features."""
import numpy as np

from ..errors import BoundError

N_BINS = 10


def discretize(X, bins=N_BINS):
    """Equal-width bins over [0, 1]; values outside are clamped into the end bins."""
    idx = np.floor(np.asarray(X, dtype=float) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def mutual_information(a, b):
    """Plug-in MI (nats) between two non-negative integer code vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    na, nb = int(a.max()) + 1, int(b.max()) + 1
    joint = np.bincount(a * nb + b, minlength=na * nb).reshape(na, nb).astype(float)
    joint /= joint.sum()
    pa = joint.sum(1, keepdims=True)
    pb = joint.sum(0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / (pa @ pb)[nz])))


def mi_feature_select(X, y, q, bins=N_BINS, return_order=False):
    """Pick ``q`` features greedily by relevance minus mean redundancy.

    Relevance is MI(feature; label); redundancy is the mean MI between the
    candidate and the features already chosen.  Ties go to the lower index.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    if not 1 <= q <= d:
        raise BoundError(f"cannot select q={q} of {d} features")
    codes = discretize(X, bins)
    y = np.asarray(y).astype(np.int64)
    relevance = np.array([mutual_information(codes[:, j], y) for j in range(d)])
    chosen = []
    redundancy = np.zeros(d)
    for step in range(q):
        score = relevance - (redundancy / step if step else 0.0)
        score[chosen] = -np.inf
        best = int(np.argmax(score))
        chosen.append(best)
        for j in range(d):
            if j not in chosen:
                redundancy[j] += mutual_information(codes[:, j], codes[:, best])
    mask = np.zeros(d, dtype=bool)
    mask[chosen] = True
    return (mask, chosen) if return_order else mask
