"""Command-line front end.

    bebp experiment --config run.ini --set attack.eta=0.04 --out runs/eta004
    bebp rerun runs/eta004/manifest.ini --out runs/check

Every command writes ``manifest.ini`` into its output directory before any
computation starts (status = running) and finalises it on exit.  The
manifest holds the effective configuration, so ``bebp rerun`` reproduces the
same CSV files byte for byte.
"""
import argparse
import configparser
import logging
import sys
from pathlib import Path

from . import __version__
from . import data as D
from .attack import chronic_attack, write_batches_csv
from .config import MANIFEST_SECTION, build_config, parse_config
from .errors import BEBPError, ConfigError, DimensionalityError
from .evaluation import export
from .evaluation.experiment import compare_methods, derived_seed, prepare_data, run_experiment, sweep_eta
from .evaluation.raster import boundary_raster, padded_bounds
from .victims import save_model

log = logging.getLogger("bebp")

COMMANDS = ("prepare", "attack", "experiment", "sweep", "compare-baselines", "raster")


class Manifest:
    def __init__(self, out_dir, command, config):
        self.path = Path(out_dir) / "manifest.ini"
        self.command = command
        self.config = config
        self.outputs = []

    def _write(self, status, error=None):
        lines = [self.config.to_ini(), f"[{MANIFEST_SECTION}]", f"command = {self.command}",
                 f"status = {status}", f"version = {__version__}",
                 "seeds = " + ", ".join(str(s) for s in self.config.experiment().seeds)]
        if self.outputs:
            lines.append("outputs = " + ", ".join(self.outputs))
        if error:
            lines.append(f"error = {error}")
        self.path.write_text("\n".join(lines) + "\n")

    def start(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._write("running")

    def add(self, name):
        self.outputs.append(name)
        return self.path.parent / name

    def finish(self, error=None, partial=()):
        if partial and not error:
            error = "failed repetitions: " + "; ".join(partial)
            self._write("partial", error)
        else:
            self._write("failed" if error else "complete", error)


def _progress(done, total):
    log.info("repetition %d/%d done", done, total)


def cmd_prepare(cfg, man):
    data = prepare_data(cfg.dataset, cfg.seed)
    D.write_dataset_csv(data.train, man.add("train.csv"))
    for name, ds in data.eval_sets.items():
        D.write_dataset_csv(ds, man.add(f"{name}.csv"))
    data.params.write(man.add("normalization.txt"))


def _single_runs(cfg):
    data = prepare_data(cfg.dataset, cfg.seed)
    for v_idx, victim in enumerate(cfg.victims):
        run = chronic_attack(data.train, victim, cfg.attack, data.eval_sets,
                             seed=derived_seed(cfg.seed, 1, v_idx), report_warnings=data.warnings)
        yield victim, data, run


def _write_run_reports(run, path):
    with open(path, "w") as fh:
        fh.write(export.REPORT_HEADER + "\n")
        for row in export.report_rows(0, run.reports):
            fh.write(row + "\n")


def cmd_attack(cfg, man):
    for victim, _, run in _single_runs(cfg):
        s = export.slug(victim.label)
        _write_run_reports(run, man.add(f"report_{s}.csv"))
        write_batches_csv([r.batch for r in run.rounds], man.add(f"adversarial_{s}.csv"))
        save_model(run.rounds[-1].model, man.add(f"model_{s}_final.txt"))


def cmd_experiment(cfg, man):
    result = run_experiment(cfg.experiment(), _progress)
    for victim in result.victims():
        export.write_reports(result, victim, man.add(f"report_{export.slug(victim)}.csv"))
    export.write_summary(result, man.add("summary.csv"))
    return result


def cmd_sweep(cfg, man):
    results = sweep_eta(cfg.experiment(), cfg.eta_values, _progress)
    export.write_sweep(results, man.add("sweep.csv"))
    return results


def cmd_compare(cfg, man):
    methods = ("bebp", "basic", "random") if cfg.baselines else ("bebp",)
    results = compare_methods(cfg.experiment(), methods, _progress)
    for method, result in results.items():
        export.write_summary(result, man.add(f"summary_{method}.csv"))
    export.write_comparison(results, man.add("comparison.csv"))
    return results


def cmd_raster(cfg, man):
    data = prepare_data(cfg.dataset, cfg.seed)
    if data.train.dim != 2:
        raise DimensionalityError(f"raster needs 2-D data, dataset has {data.train.dim} features")
    bounds = padded_bounds(data.train.X)
    for victim, _, run in _single_runs(cfg):
        s = export.slug(victim.label)
        for outcome in run.rounds:
            raster = boundary_raster(outcome.model, bounds, cfg.raster_resolution)
            raster.write_csv(man.add(f"raster_{s}_round{outcome.report.round}.csv"))
        write_batches_csv([r.batch for r in run.rounds], man.add(f"adversarial_{s}.csv"))
    D.write_dataset_csv(data.train, man.add("train.csv"))


HANDLERS = {
    "prepare": cmd_prepare,
    "attack": cmd_attack,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
    "compare-baselines": cmd_compare,
    "raster": cmd_raster,
}


def _failures(outcome):
    results = outcome.values() if isinstance(outcome, dict) else [outcome] if outcome else []
    return [f"{v}#{r}: {msg}" for res in results for (v, r), msg in res.failures.items()]


def _overrides(args):
    out = list(args.set or [])
    for flag, key in (("eta", "attack.eta"), ("rounds", "experiment.rounds"),
                      ("reps", "experiment.repetitions"), ("seed", "experiment.seed"),
                      ("jobs", "experiment.jobs")):
        value = getattr(args, flag, None)
        if value is not None:
            out.append(f"{key}={value}")
    if getattr(args, "out", None):
        out.append(f"output.dir={Path(args.out).resolve()}")
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="bebp", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI run configuration (defaults: moons, six victims)")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable, wins over the file")
        sp.add_argument("--out", help="output directory (default: [output] dir or $BEBP_OUTPUT_ROOT)")
        sp.add_argument("--eta", type=float)
        sp.add_argument("--rounds", type=int)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--jobs", type=int)

    for name in COMMANDS:
        common(sub.add_parser(name))
    rr = sub.add_parser("rerun", help="re-execute the command recorded in a manifest")
    rr.add_argument("manifest")
    rr.add_argument("--out", required=True)
    rr.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    return p


def _load(args):
    overrides = _overrides(args)
    if args.command == "rerun":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        parser.read(args.manifest)
        if not parser.has_option(MANIFEST_SECTION, "command"):
            raise ConfigError(f"{args.manifest} has no [{MANIFEST_SECTION}] command")
        command = parser.get(MANIFEST_SECTION, "command")
        return command, parse_config(args.manifest, overrides)
    if args.config:
        return args.command, parse_config(args.config, overrides)
    return args.command, build_config("", ".", overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        command, cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"bebp: {exc}", file=sys.stderr)
        return 2
    if command not in HANDLERS:
        print(f"bebp: unknown command {command!r}", file=sys.stderr)
        return 2
    man = Manifest(cfg.out_dir, command, cfg)
    man.start()
    try:
        outcome = HANDLERS[command](cfg, man)
    except (BEBPError, OSError) as exc:
        man.finish(error=str(exc))
        print(f"bebp {command}: {exc}", file=sys.stderr)
        return 1
    partial = _failures(outcome)
    man.finish(partial=partial)
    if partial:
        print(f"bebp {command}: {len(partial)} repetition(s) failed, see manifest", file=sys.stderr)
    print(f"{command}: wrote {len(man.outputs)} files to {man.path.parent}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
