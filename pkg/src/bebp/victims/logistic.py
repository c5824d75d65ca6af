"""L2-regularised logistic regression.

Objective (intercept unpenalised)::

    J(w, b) = 0.5 * |w|^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b)))

minimised by damped Newton descent with Armijo backtracking.
"""
import numpy as np
from scipy.special import expit


def _margins(theta, X, ys):
    return ys * (X @ theta[:-1] + theta[-1])


def objective(theta, X, ys, C):
    z = _margins(theta, X, ys)
    # log(1 + exp(-z)) without overflow
    loss = np.where(z > 0, np.log1p(np.exp(-np.abs(z))), -z + np.log1p(np.exp(-np.abs(z))))
    return 0.5 * float(theta[:-1] @ theta[:-1]) + C * float(loss.sum())


def gradient(theta, X, ys, C):
    z = _margins(theta, X, ys)
    r = -C * ys * expit(-z)
    g = np.empty_like(theta)
    g[:-1] = theta[:-1] + X.T @ r
    g[-1] = r.sum()
    return g


def hessian(theta, X, ys, C):
    z = _margins(theta, X, ys)
    s = expit(z)
    D = C * s * (1.0 - s)
    Xb = np.hstack([X, np.ones((X.shape[0], 1))])
    H = Xb.T @ (Xb * D[:, None])
    H[np.arange(X.shape[1]), np.arange(X.shape[1])] += 1.0
    return H


def fit_logreg(X, y, C=1.0, tol=1e-4, max_iter=1000):
    from .base import LogRegModel

    X = np.asarray(X, dtype=float)
    ys = np.where(np.asarray(y) == 1, 1.0, -1.0)
    theta = np.zeros(X.shape[1] + 1)
    f = objective(theta, X, ys, C)
    converged = False
    n_iter = 0
    while True:
        g = gradient(theta, X, ys, C)
        if np.linalg.norm(g) <= tol:
            converged = True
            break
        if n_iter >= max_iter:
            break
        try:
            step = -np.linalg.solve(hessian(theta, X, ys, C), g)
        except np.linalg.LinAlgError:
            step = -g
        slope = float(g @ step)
        if slope >= 0:
            step, slope = -g, -float(g @ g)
        t = 1.0
        cand = theta + step
        fc = objective(cand, X, ys, C)
        while fc > f + 1e-4 * t * slope and t > 1e-12:
            t *= 0.5
            cand = theta + t * step
            fc = objective(cand, X, ys, C)
        if fc > f:
            break  # stalled at rounding level
        theta, f = cand, fc
        n_iter += 1
    return LogRegModel(weights=theta[:-1].copy(), bias=float(theta[-1]), C=C,
                       n_features=X.shape[1], converged=converged, n_iter=n_iter)


def logreg_decision(model, X):
    return X @ model.weights + model.bias
