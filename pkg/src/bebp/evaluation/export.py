"""CSV and manifest writers for experiment outputs."""
import re

from .experiment import fmt
from .metrics import acc, dr

REPORT_HEADER = "rep,round,dataset,tp,tn,fp,fn,acc,dr,injected,train_size,warnings"


def slug(label):
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_").lower()


def report_rows(rep, reports):
    for r in reports:
        for name, c in r.counts.items():
            yield ",".join([
                str(rep), str(r.round), name, str(c.tp), str(c.tn), str(c.fp), str(c.fn),
                fmt(acc(c)), fmt(dr(c)), str(r.injected), str(r.train_size), ";".join(r.warnings),
            ])


def write_reports(result, victim, path):
    with open(path, "w") as fh:
        fh.write(REPORT_HEADER + "\n")
        for rep, reports in enumerate(result.reports[victim]):
            if reports is None:
                fh.write(f"{rep},,,,,,,,,,,failed\n")
                continue
            for row in report_rows(rep, reports):
                fh.write(row + "\n")


def summary_rows(result, prefix=()):
    for victim in result.victims():
        for name in result.eval_names():
            am, asd, n = result.aggregate(victim, name, "acc")
            dm, dsd, _ = result.aggregate(victim, name, "dr")
            for rnd in range(len(am)):
                yield list(prefix) + [victim, name, str(rnd), fmt(am[rnd]), fmt(asd[rnd]),
                                      fmt(dm[rnd]), fmt(dsd[rnd]), str(n[rnd])]


SUMMARY_HEADER = "victim,dataset,round,acc_mean,acc_std,dr_mean,dr_std,reps"


def write_summary(result, path):
    with open(path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for row in summary_rows(result):
            fh.write(",".join(row) + "\n")


def write_sweep(results, path):
    with open(path, "w") as fh:
        fh.write("eta," + SUMMARY_HEADER + "\n")
        for eta, result in results.items():
            for row in summary_rows(result, prefix=(repr(float(eta)),)):
                fh.write(",".join(row) + "\n")


def comparison_rows(results, name="evaluating"):
    """Joined mean-DR table: one row per (victim, round), one column per method."""
    methods = list(results)
    first = results[methods[0]]
    for victim in first.victims():
        cols = {m: results[m].aggregate(victim, name, "dr")[0] for m in methods}
        for rnd in range(len(cols[methods[0]])):
            yield [victim, str(rnd)] + [fmt(cols[m][rnd]) for m in methods]


def write_comparison(results, path, name="evaluating"):
    with open(path, "w") as fh:
        fh.write("victim,round," + ",".join(results) + "\n")
        for row in comparison_rows(results, name):
            fh.write(",".join(row) + "\n")
