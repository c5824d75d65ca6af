"""Point-cloud primitives: brute-force kNN, edge pattern detection and outward normals.

An edge pattern point is one whose k nearest neighbours all lie roughly on the
same side of it.  The criterion used here averages the unit vectors pointing
from each neighbour to the point; interior points see neighbours in every
direction and the average nearly cancels, while points on the hull of the
cloud keep a large resultant.  That resultant, normalised, is also the
outward normal used to push the point away from the data.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateDirectionError, SchemaError, SizeError

DEFAULT_K = 10
DEFAULT_TAU = 0.5


@dataclass(frozen=True, eq=False)
class EdgePattern:
    point: np.ndarray
    normal: np.ndarray
    source_index: int
    magnitude: float = 1.0


def as_points(points):
    """Validate and return ``points`` as a 2-D float array."""
    try:
        arr = np.asarray(points, dtype=float)
    except ValueError as exc:  # ragged input
        raise SchemaError(f"points must share one dimension: {exc}") from None
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise SchemaError(f"expected an (n, d) point array, got shape {arr.shape}")
    return arr


def _sqdist(A, B):
    return cdist(A, B, "sqeuclidean")


def knn(points, query_index, k):
    """Indices of the ``k`` nearest neighbours of ``points[query_index]``.

    Ordered by ascending Euclidean distance, ties broken by lower index; the
    query point itself is never returned.
    """
    X = as_points(points)
    n = X.shape[0]
    if k < 1 or k >= n:
        raise SizeError(f"k={k} needs 1 <= k < n={n}")
    if not 0 <= query_index < n:
        raise IndexError(f"query_index {query_index} out of range for {n} points")
    d2 = _sqdist(X[query_index:query_index + 1], X)[0]
    d2[query_index] = np.inf
    return np.argsort(d2, kind="stable")[:k]


def knn_all(points, k):
    """Neighbour index matrix of shape (n, k); row i equals ``knn(points, i, k)``."""
    X = as_points(points)
    n = X.shape[0]
    if k < 1 or k >= n:
        raise SizeError(f"k={k} needs 1 <= k < n={n}")
    out = np.empty((n, k), dtype=np.intp)
    chunk = max(1, 2_000_000 // n)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        d2 = _sqdist(X[start:stop], X)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def _resultants(X, neighbours):
    """Mean neighbour-to-point unit vector for every row; zero-length offsets skipped."""
    diffs = X[:, None, :] - X[neighbours]
    dist = np.linalg.norm(diffs, axis=2, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        units = np.where(dist > 0, diffs / dist, 0.0)
    return units.sum(axis=1) / neighbours.shape[1]


def mean_direction(point, neighbours):
    """Return ``(magnitude, unit_normal)`` of the mean neighbour-to-point unit vector.

    ``unit_normal`` is None when the unit vectors cancel exactly.  Raises
    DegenerateDirectionError when every neighbour coincides with ``point``.
    """
    p = np.asarray(point, dtype=float).ravel()
    N = as_points(neighbours)
    if N.shape[1] != p.shape[0]:
        raise SchemaError(f"neighbour dimension {N.shape[1]} != point dimension {p.shape[0]}")
    diffs = p - N
    dist = np.linalg.norm(diffs, axis=1)
    live = dist > 0
    if not live.any():
        raise DegenerateDirectionError("all neighbours coincide with the point")
    raw = (diffs[live] / dist[live, None]).sum(axis=0) / N.shape[0]
    mag = float(np.linalg.norm(raw))
    if mag == 0.0:
        return 0.0, None
    return mag, raw / mag


def edge_detect(points, k=DEFAULT_K, tau=DEFAULT_TAU):
    """Detect edge pattern points and their outward unit normals.

    A point is an edge point when the mean of the unit vectors from its
    ``k`` nearest neighbours towards it has norm >= ``tau``.
    """
    X = as_points(points)
    if X.shape[0] <= k:
        raise SizeError(f"edge detection with k={k} needs more than {k} points, got {X.shape[0]}")
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    raw = _resultants(X, knn_all(X, k))
    mags = np.linalg.norm(raw, axis=1)
    edges = []
    for i in np.flatnonzero((mags >= tau) & (mags > 0)):
        normal = raw[i] / mags[i]
        edges.append(EdgePattern(X[i].copy(), normal / np.linalg.norm(normal), int(i), float(mags[i])))
    return edges
