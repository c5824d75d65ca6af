import csv
from dataclasses import replace

import numpy as np
import pytest

from bebp import data as D
from bebp.attack import AttackConfig, chronic_attack
from bebp.errors import DimensionalityError
from bebp.evaluation import experiment as E
from bebp.evaluation import export
from bebp.evaluation.metrics import ConfusionCounts, RoundReport, acc, confusion, confusion_from_labels, dr
from bebp.evaluation.raster import boundary_raster, padded_bounds
from bebp.victims import STANDARD_SIX, LogRegModel, fit, predict, preset

MOONS = E.DatasetSpec()


def spec(**kw):
    base = dict(dataset=MOONS, victims=tuple(preset(v) for v in STANDARD_SIX),
                attack=AttackConfig(rounds=3), repetitions=3, seed=0)
    base.update(kw)
    return E.ExperimentSpec(**base)


def threshold_model(t=0.5, d=2):
    w = np.zeros(d)
    w[0] = 1.0
    return LogRegModel(n_features=d, weights=w, bias=-t)


def labelled(n_a, n_n, d=2):
    X = np.r_[np.ones((n_a, d)), np.zeros((n_n, d))]
    return D.from_arrays(X, np.r_[np.ones(n_a), np.zeros(n_n)])


def test_confusion_examples():
    data = labelled(10, 10)
    assert confusion(threshold_model(), data) == ConfusionCounts(tp=10, tn=10, fp=0, fn=0)
    assert confusion(threshold_model(t=5.0), data) == ConfusionCounts(tp=0, tn=10, fp=0, fn=10)


def test_confusion_matches_tally():
    rng = np.random.default_rng(0)
    data = D.from_arrays(rng.random((500, 2)), rng.integers(0, 2, 500))
    model = LogRegModel(n_features=2, weights=rng.normal(size=2), bias=0.1)
    tally = {"tp": 0, "tn": 0, "fp": 0, "fn": 0}
    for s in data.samples():
        guess = int(predict(model, s.features))
        key = ("t" if guess == s.label else "f") + ("p" if guess == 1 else "n")
        tally[key] += 1
    c = confusion(model, data)
    assert c == ConfusionCounts(**tally) and c.total == 500


def test_acc_dr_examples():
    assert acc(ConfusionCounts(50, 40, 5, 5)) == pytest.approx(0.9)
    assert dr(ConfusionCounts(tp=3, fn=1)) == 0.75
    assert acc(ConfusionCounts(7, 3, 0, 0)) == 1 and dr(ConfusionCounts(7, 3, 0, 0)) == 1
    assert dr(ConfusionCounts(tn=5, fp=2)) is None
    assert confusion_from_labels([0, 0], [0, 1]) == ConfusionCounts(tn=1, fp=1)


def test_zero_rounds_single_rep():
    res = E.run_experiment(spec(attack=AttackConfig(rounds=0), repetitions=1))
    for v in res.victims():
        (reports,) = res.reports[v]
        assert len(reports) == 1 and reports[0].injected == 0


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_aggregates_match_raw_repetitions(tmp_path):
    res = E.run_experiment(spec())
    for v in res.victims():
        export.write_reports(res, v, tmp_path / f"r_{export.slug(v)}.csv")
    export.write_summary(res, tmp_path / "summary.csv")
    for row in read_csv(tmp_path / "summary.csv"):
        raw = read_csv(tmp_path / f"r_{export.slug(row['victim'])}.csv")
        for metric in ("acc", "dr"):
            vals = np.array([float(r[metric]) for r in raw
                             if r["round"] == row["round"] and r["dataset"] == row["dataset"]])
            assert repr(float(np.mean(vals))) == row[f"{metric}_mean"]
            assert repr(float(np.std(vals, ddof=1))) == row[f"{metric}_std"]
        assert int(row["reps"]) == 3


def test_report_rows_recompute_from_counts(tmp_path):
    res = E.run_experiment(spec(repetitions=1))
    export.write_reports(res, "NB", tmp_path / "nb.csv")
    for r in read_csv(tmp_path / "nb.csv"):
        c = ConfusionCounts(int(r["tp"]), int(r["tn"]), int(r["fp"]), int(r["fn"]))
        assert repr(acc(c)) == r["acc"] and repr(dr(c)) == r["dr"]


def test_undefined_dr_is_reported_as_such(tmp_path):
    normals = labelled(0, 30)
    report = RoundReport(0, {"only-normal": confusion(threshold_model(), normals)})
    res = E.ExperimentResult(spec(), [0], {"NB": [[report]]})
    export.write_reports(res, "NB", tmp_path / "x.csv")
    (row,) = read_csv(tmp_path / "x.csv")
    assert row["dr"] == "undefined"
    assert res.aggregate("NB", "only-normal", "dr") == ([None], [None], [0])


def test_experiment_is_deterministic_and_parallel_safe():
    a = E.run_experiment(spec())
    b = E.run_experiment(spec(jobs=2))
    for v in a.victims():
        assert a.reports[v] == b.reports[v]


def test_failed_repetitions_are_recorded(monkeypatch):
    real = E.chronic_attack

    def flaky(train, victim, *a, **kw):
        if victim.label == "LR" and kw["seed"] == E.derived_seed(1, 1, 1):
            raise RuntimeError("boom")
        return real(train, victim, *a, **kw)

    monkeypatch.setattr(E, "chronic_attack", flaky)
    res = E.run_experiment(spec())
    assert not res.complete and list(res.failures) == [("LR", 1)]
    assert res.aggregate("LR", "evaluating", "acc")[2] == [2, 2, 2, 2]
    assert res.aggregate("NB", "evaluating", "acc")[2] == [3, 3, 3, 3]


def test_sweep_single_eta_equals_experiment():
    s = spec(repetitions=2)
    (only,) = E.sweep_eta(s, [0.07]).values()
    direct = E.run_experiment(s)
    assert only.reports == direct.reports


def test_starved_budget_keeps_dr_flat():
    res = E.sweep_eta(spec(repetitions=2), [0.005])[0.005]
    for v in res.victims():
        means = res.aggregate(v, "evaluating", "dr")[0]
        assert len(set(means)) == 1
        assert all(r.injected == 0 for reps in res.reports[v] for r in reps)


def test_sweep_rejects_bad_eta():
    with pytest.raises(Exception):
        E.sweep_eta(spec(), [1.2])


def test_compare_methods_shares_round_zero():
    out = E.compare_methods(spec(repetitions=2))
    rows = list(export.comparison_rows(out))
    assert {len(r) for r in rows} == {5}
    for r in rows:
        if r[1] == "0":
            assert r[2] == r[3] == r[4]


def test_raster_half_plane():
    r = boundary_raster(threshold_model(), (0, 1, 0, 1), 3)
    assert r.labels.tolist() == [[0, 0, 1]] * 3
    cells = list(r.cells())
    assert len(cells) == 9 and cells[0][:2] == (0.0, 0.0) and cells[1][:2] == (0.5, 0.0)


def test_raster_agrees_with_predict(moons, tmp_path):
    m = fit(preset("SVM-RBF"), moons)
    r = boundary_raster(m, padded_bounds(moons.X), 25)
    for x, y, label, _ in r.cells():
        assert label == int(predict(m, [x, y]))
    r.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "x,y,label,value" and len(lines) == 626


def test_raster_needs_two_dimensions():
    with pytest.raises(DimensionalityError):
        boundary_raster(threshold_model(d=41))


def test_raster_normal_area_grows_under_attack():
    data = E.prepare_data(MOONS, 0)
    bounds = padded_bounds(data.train.X)
    for v, name in enumerate(STANDARD_SIX):
        run = chronic_attack(data.train, preset(name), AttackConfig(rounds=5), data.eval_sets,
                             seed=E.derived_seed(0, 1, v))
        before = np.sum(boundary_raster(run.rounds[0].model, bounds).labels == 0)
        after = np.sum(boundary_raster(run.rounds[5].model, bounds).labels == 0)
        assert after > before, name


def test_prepare_kdd_style(kdd_file):
    counts = {"NORMAL": 40, "DOS": 40, "PROB": 15, "R2L": 10, "U2R": 6}
    train_path = kdd_file(counts)
    test_path = kdd_file({"NORMAL": 10, "DOS": 10}, name="test.txt", seed=5)
    ds = E.DatasetSpec(source="nsl-kdd", train_path=str(train_path), test_path=str(test_path),
                       train_counts={"NORMAL": 20, "DOS": 20, "U2R": 3},
                       eval_counts={"NORMAL": 10, "PROB": 10})
    prep = E.prepare_data(ds, 0)
    assert len(prep.train) == 43 and len(prep.eval_sets["evaluating"]) == 20
    for part in (prep.train, *prep.eval_sets.values()):
        assert part.dim == 41 and part.X.min() >= 0 and part.X.max() <= 1
    again = E.prepare_data(replace(ds), 0)
    assert again.train.X.tobytes() == prep.train.X.tobytes()
