"""Least-squares SVM classifier with an RBF kernel.

The dual is the bordered system::

    [ 0   y'            ] [b]     [0]
    [ y   Omega + I/gam ] [a]  =  [1],    Omega_ij = y_i y_j K(x_i, x_j)

solved through two Cholesky solves with the positive definite block
H = Omega + I/gam.
"""
import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .kernels import kernel_matrix


def solve_lssvm(K, ys, reg=1.0):
    """Return ``(alpha, b)`` for Gram matrix ``K`` and labels ``ys`` in {-1, +1}."""
    H = K * np.outer(ys, ys)
    H[np.diag_indices_from(H)] += 1.0 / reg
    factor = cho_factor(H, overwrite_a=True, check_finite=False)
    eta = cho_solve(factor, ys, check_finite=False)
    nu = cho_solve(factor, np.ones_like(ys), check_finite=False)
    b = float(ys @ nu / (ys @ eta))
    return nu - b * eta, b


def fit_lssvm(X, y, reg=1.0, gamma=None, mask=None, max_rows=8000, seed=0):
    from .base import LSSVMModel

    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    d_full = X.shape[1]
    if mask is None:
        mask = np.ones(d_full, dtype=bool)
    Xs = X[:, mask]
    if Xs.shape[0] > max_rows:
        keep = np.sort(np.random.default_rng(seed).choice(Xs.shape[0], max_rows, replace=False))
        Xs, y = Xs[keep], y[keep]
    gamma = 1.0 / Xs.shape[1] if gamma is None else float(gamma)
    ys = np.where(y == 1, 1.0, -1.0)
    alpha, b = solve_lssvm(kernel_matrix(Xs, Xs, "rbf", gamma), ys, reg)
    return LSSVMModel(
        train_points=Xs,
        dual_coef=alpha * ys,
        bias=b,
        gamma=gamma,
        reg=float(reg),
        feature_mask=np.asarray(mask, dtype=bool),
        n_features=d_full,
    )


def lssvm_decision(model, X, chunk=2048):
    Xs = X[:, model.feature_mask]
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], chunk):
        K = kernel_matrix(Xs[s:s + chunk], model.train_points, "rbf", model.gamma)
        out[s:s + chunk] = K @ model.dual_coef + model.bias
    return out
