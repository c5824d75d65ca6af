import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import expit
from scipy.stats import norm
from sklearn.metrics import mutual_info_score
from sklearn.svm import SVC

from bebp.data import Label
from bebp.errors import BoundError, ConfigError, DegenerateTrainingError, SchemaError
from bebp.victims import (
    STANDARD_SIX,
    LabelOracle,
    VictimSpec,
    decision_value,
    fit,
    load_model,
    mi_feature_select,
    predict,
    preset,
    save_model,
)
from bebp.victims.feature_selection import discretize, mutual_information
from bebp.victims.kernels import KernelRows, kernel_matrix
from bebp.victims.logistic import gradient, objective
from bebp.victims.lssvm import solve_lssvm
from bebp.victims.svm import kkt_fraction, smo_solve

ALL = STANDARD_SIX + ("LSSVM-MI",)


def blobs(n=40, seed=0, gap=0.35):
    rng = np.random.default_rng(seed)
    N = rng.random((n, 2)) * 0.3 + 0.05
    A = rng.random((n, 2)) * 0.3 + 0.05 + gap + 0.3
    return np.vstack([N, A]), np.r_[np.zeros(n), np.ones(n)].astype(int)


def two_moons(seed=0):
    from bebp import data as D

    ds = D.make_moons(120, 0.2, seed)
    return D.apply_normalize(D.fit_normalize(ds), ds)


# GaussianNB

SYM_X = np.array([[0.125], [0.375], [0.625], [0.875]])
SYM_Y = np.array([0, 0, 1, 1])


def test_nb_symmetric_threshold_and_tie():
    m = fit(preset("NB"), (SYM_X, SYM_Y))
    assert decision_value(m, [0.5]) == 0.0
    assert predict(m, [0.5]) == Label.NORMAL
    assert predict(m, [0.3]) == Label.NORMAL and predict(m, [0.7]) == Label.ABNORMAL
    root = brentq(lambda t: decision_value(m, [t]), 0.2, 0.8, xtol=1e-14)
    assert root == pytest.approx(0.5, abs=1e-12)


def test_nb_matches_direct_log_posterior():
    ds = two_moons(4)
    X, y = ds.X, ds.y
    m = fit(preset("NB"), ds)
    eps = 1e-9 * np.var(X, axis=0).max()
    probes = np.random.default_rng(1).random((300, 2)) * 1.4 - 0.2
    log_post = []
    for c in (0, 1):
        Xc = X[y == c]
        lp = np.log(Xc.shape[0] / X.shape[0])
        lp = lp + norm.logpdf(probes, Xc.mean(0), np.sqrt(Xc.var(0) + eps)).sum(1)
        log_post.append(lp)
    assert np.max(np.abs(decision_value(m, probes) - (log_post[1] - log_post[0]))) <= 1e-9


# Logistic regression

def test_logreg_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    X = rng.random((60, 5))
    ys = np.where(rng.random(60) < 0.5, 1.0, -1.0)
    h = 1e-6
    for _ in range(20):
        theta = rng.normal(size=6) * 2
        g = gradient(theta, X, ys, 1.0)
        fd = np.array([(objective(theta + h * e, X, ys, 1.0) - objective(theta - h * e, X, ys, 1.0)) / (2 * h)
                       for e in np.eye(6)])
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-5


def test_logreg_optimum_gradient_small():
    ds = two_moons(5)
    m = fit(preset("LR"), ds)
    ys = np.where(ds.y == 1, 1.0, -1.0)
    theta = np.r_[m.weights, m.bias]
    assert m.converged
    assert np.linalg.norm(gradient(theta, ds.X, ys, 1.0)) <= 10 * 1e-4


def test_logreg_zero_value_is_half_probability():
    m = fit(preset("LR"), two_moons(6))
    w, b = m.weights, m.bias
    x = np.array([0.5, (-b - 0.5 * w[0]) / w[1]])
    assert abs(decision_value(m, x)) < 1e-12
    assert expit(decision_value(m, x)) == pytest.approx(0.5)


# SVM

def test_svm_rbf_solves_xor():
    X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], float)
    y = np.array([0, 0, 1, 1])
    m = fit(preset("SVM-RBF", gamma=1.0), (X, y))
    assert np.array_equal(predict(m, X), y)


def test_svm_linear_separable_blobs():
    X, y = blobs()
    # exhaustive search over directions confirms a separating line exists
    angles = np.linspace(0, np.pi, 721)
    proj = X @ np.vstack([np.cos(angles), np.sin(angles)])
    assert np.any(proj[y == 0].max(0) < proj[y == 1].min(0))
    m = fit(preset("SVM-linear"), (X, y))
    assert np.array_equal(predict(m, X), y)
    w = m.dual_coef @ m.support_vectors
    assert np.all(w > 0)  # Abnormal blob sits at larger coordinates
    t = np.linspace(0, 1, 50)
    centre = X.mean(0)
    line = centre + np.outer(t, w / np.linalg.norm(w))
    vals = decision_value(m, line)
    assert np.all(np.diff(np.abs(vals[vals > 0])) > 0)


@pytest.mark.parametrize("kernel", ["linear", "rbf", "poly", "sigmoid"])
def test_smo_kkt_satisfaction(kernel):
    ds = two_moons(7)
    ys = np.where(ds.y == 1, 1.0, -1.0)
    gamma = 0.5
    rows = KernelRows(ds.X, kernel, gamma, 3, 0.0)
    res = smo_solve(rows, rows.diag, ys, C=1.0, tol=1e-3)
    assert res.converged
    K = kernel_matrix(ds.X, ds.X, kernel, gamma, 3, 0.0)
    assert kkt_fraction(K, ys, res.alpha, res.rho, 1.0, tol=1e-3) >= 0.99
    assert abs(res.alpha @ ys) < 1e-9
    assert res.alpha.min() >= 0 and res.alpha.max() <= 1.0


@pytest.mark.parametrize("name", ["SVM-RBF", "SVM-linear", "SVM-POLY", "SVM-sigmoid"])
def test_svm_agrees_with_reference_solver(name):
    ds = two_moons(8)
    spec = preset(name)
    m = fit(spec, ds)
    ref = SVC(kernel=spec.kernel, C=1.0, gamma=0.5, degree=3, coef0=0.0, tol=1e-3).fit(ds.X, ds.y)
    probes = np.random.default_rng(0).random((500, 2))
    assert np.mean(predict(m, probes) == ref.predict(probes)) >= 0.98


# LSSVM

def test_lssvm_matches_bordered_system():
    rng = np.random.default_rng(3)
    X = rng.random((40, 3))
    ys = np.where(rng.random(40) < 0.5, 1.0, -1.0)
    K = kernel_matrix(X, X, "rbf", 0.7)
    alpha, b = solve_lssvm(K.copy(), ys, reg=2.0)
    A = np.zeros((41, 41))
    A[0, 1:] = ys
    A[1:, 0] = ys
    A[1:, 1:] = K * np.outer(ys, ys) + np.eye(40) / 2.0
    sol = np.linalg.solve(A, np.r_[0.0, np.ones(40)])
    assert b == pytest.approx(sol[0], abs=1e-9)
    assert np.allclose(alpha, sol[1:], atol=1e-9)


def test_lssvm_feature_mask_applied():
    rng = np.random.default_rng(4)
    X = rng.random((80, 6))
    y = (X[:, 2] > 0.5).astype(int)
    m = fit(preset("LSSVM-MI", feature_selection=2), (X, y))
    assert m.feature_mask.sum() == 2 and m.feature_mask[2]
    assert np.mean(predict(m, X) == y) > 0.9


# Mutual-information selection

def test_mi_matches_reference_estimator():
    rng = np.random.default_rng(5)
    a = rng.integers(0, 10, 400)
    b = (a + rng.integers(0, 3, 400)) % 10
    assert mutual_information(a, b) == pytest.approx(mutual_info_score(a, b), abs=1e-12)


def test_mi_picks_dependent_feature():
    rng = np.random.default_rng(6)
    X = rng.random((300, 6))
    y = (X[:, 3] > 0.5).astype(int)
    assert np.flatnonzero(mi_feature_select(X, y, 1)).tolist() == [3]
    assert mi_feature_select(rng.random((300, 6)), rng.integers(0, 2, 300), 4).sum() == 4
    with pytest.raises(BoundError):
        mi_feature_select(X, y, 7)


def test_mi_greedy_matches_exhaustive_pair():
    rng = np.random.default_rng(9)
    n = 2000
    y = rng.integers(0, 2, n)
    noisy = lambda p: np.clip(0.5 * y + 0.25 + rng.normal(0, p, n), 0, 1)  # noqa: E731
    strong = noisy(0.08)
    X = np.column_stack([rng.random(n), noisy(0.4), strong, noisy(0.2), strong.copy()])
    codes, yc = discretize(X), y
    rel = [mutual_information(codes[:, j], yc) for j in range(5)]
    best = max(itertools.combinations(range(5), 2),
               key=lambda p: rel[p[0]] + rel[p[1]] - mutual_information(codes[:, p[0]], codes[:, p[1]]))
    assert set(np.flatnonzero(mi_feature_select(X, y, 2))) == set(best) == {2, 3}


# Common interface

@pytest.mark.parametrize("name", ALL)
def test_predict_agrees_with_sign(name):
    m = fit(preset(name, feature_selection=1) if name == "LSSVM-MI" else preset(name), two_moons(10))
    probes = np.random.default_rng(11).random((1000, 2)) * 1.4 - 0.2
    assert np.array_equal(predict(m, probes), (decision_value(m, probes) > 0).astype(np.int8))


@pytest.mark.parametrize("name", ALL)
def test_save_load_bit_exact(tmp_path, name):
    spec = preset(name, feature_selection=1) if name == "LSSVM-MI" else preset(name)
    m = fit(spec, two_moons(12))
    save_model(m, tmp_path / "m.txt")
    back = load_model(tmp_path / "m.txt")
    probes = np.random.default_rng(13).random((200, 2))
    assert decision_value(back, probes).tobytes() == decision_value(m, probes).tobytes()


def test_fit_is_deterministic():
    ds = two_moons(14)
    probes = np.random.default_rng(0).random((100, 2))
    for name in ALL:
        spec = preset(name, feature_selection=1) if name == "LSSVM-MI" else preset(name)
        a, b = fit(spec, ds, seed=3), fit(spec, ds, seed=3)
        assert decision_value(a, probes).tobytes() == decision_value(b, probes).tobytes()


def test_errors():
    X = np.random.default_rng(0).random((10, 2))
    with pytest.raises(DegenerateTrainingError):
        fit(preset("NB"), (X, np.zeros(10)))
    m = fit(preset("NB"), (X, np.r_[np.zeros(5), np.ones(5)]))
    with pytest.raises(SchemaError):
        predict(m, np.zeros(3))
    with pytest.raises(ConfigError):
        VictimSpec("SVM")
    with pytest.raises(ConfigError):
        VictimSpec("LogReg", kernel="rbf")
    with pytest.raises(ConfigError):
        preset("SVM-quartic")


def test_oracle_counts_queries_across_threads():
    m = fit(preset("LR"), two_moons(15))
    oracle = LabelOracle(m)
    pts = np.random.default_rng(0).random((400, 2))
    with ThreadPoolExecutor(8) as pool:
        labels = list(pool.map(oracle, pts))
    oracle.query_batch(pts[:50])
    assert oracle.queries == 450
    assert [int(v) for v in labels] == predict(m, pts).tolist()
    assert not hasattr(oracle, "decision_value")
