"""Kernel functions and an LRU row cache for the dual solvers."""
from collections import OrderedDict

import numpy as np

KERNELS = ("linear", "rbf", "poly", "sigmoid")


def kernel_matrix(A, B, kernel, gamma=1.0, degree=3, coef0=0.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-gamma * d2)
    if kernel == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    if kernel == "sigmoid":
        return np.tanh(gamma * (A @ B.T) + coef0)
    raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def kernel_diag(X, kernel, gamma=1.0, degree=3, coef0=0.0):
    sq = (X * X).sum(1)
    if kernel == "linear":
        return sq
    if kernel == "rbf":
        return np.ones(X.shape[0])
    if kernel == "poly":
        return (gamma * sq + coef0) ** degree
    if kernel == "sigmoid":
        return np.tanh(gamma * sq + coef0)
    raise ValueError(f"unknown kernel {kernel!r}")


class KernelRows:
    """On-demand rows of the Gram matrix of ``X`` with a bounded LRU cache."""

    def __init__(self, X, kernel, gamma, degree=3, coef0=0.0, cache_mb=256):
        self.X = X
        self.kernel = kernel
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.sq = (X * X).sum(1)
        self.capacity = max(2, int(cache_mb * 2**20 // (8 * max(1, X.shape[0]))))
        self._cache = OrderedDict()
        self.diag = kernel_diag(X, kernel, gamma, degree, coef0)

    def __call__(self, i):
        row = self._cache.get(i)
        if row is not None:
            self._cache.move_to_end(i)
            return row
        dots = self.X @ self.X[i]
        if self.kernel == "linear":
            row = dots
        elif self.kernel == "rbf":
            row = np.exp(-self.gamma * np.maximum(self.sq + self.sq[i] - 2.0 * dots, 0.0))
        elif self.kernel == "poly":
            row = (self.gamma * dots + self.coef0) ** self.degree
        else:
            row = np.tanh(self.gamma * dots + self.coef0)
        self._cache[i] = row
        if len(self._cache) > self.capacity:
            self._cache.popitem(last=False)
        return row
