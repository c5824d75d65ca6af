"""Gaussian naive Bayes for two classes."""
import numpy as np


def fit_gaussian_nb(X, y, var_smoothing=1e-9):
    from .base import GaussianNBModel

    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    eps = var_smoothing * float(np.var(X, axis=0).max())
    means, variances, priors = [], [], []
    for label in (0, 1):
        Xc = X[y == label]
        means.append(Xc.mean(axis=0))
        variances.append(Xc.var(axis=0) + eps)
        priors.append(Xc.shape[0] / X.shape[0])
    return GaussianNBModel(
        means=np.array(means),
        variances=np.array(variances),
        priors=np.array(priors),
        n_features=X.shape[1],
    )


def joint_log_likelihood(model, X):
    """log P(c) + sum_j log N(x_j | mu_cj, var_cj) for both classes, shape (n, 2)."""
    out = np.empty((X.shape[0], 2))
    for c in (0, 1):
        var = model.variances[c]
        ll = -0.5 * np.sum(np.log(2.0 * np.pi * var))
        ll = ll - 0.5 * np.sum((X - model.means[c]) ** 2 / var, axis=1)
        out[:, c] = np.log(model.priors[c]) + ll
    return out


def nb_decision(model, X):
    jll = joint_log_likelihood(model, X)
    return jll[:, 1] - jll[:, 0]
