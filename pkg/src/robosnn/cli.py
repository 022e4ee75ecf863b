"""Command line entry point: ``robosnn <command> [options]``.

Commands
    train    one training run, writes checkpoint.json, history.csv, metrics.json
    sweep    every (loss, contamination level, seed) cell, writes result tables
    hpo      search (a, eps, lambda) for the robos loss, writes trials.csv, best_params.json
    profile  loss curves (r, value, grad) as CSV, one file per loss
    bound    generalization bound for a trained checkpoint
    inject   export a contaminated copy of a dataset
    replay   re-run the command recorded in an output file's provenance header

Every output file carries a provenance record with the exact argument list
that produced it; ``replay`` feeds it back through this parser.

Exit codes: 0 success, 1 usage or parameter error, 2 data error, 3 divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, nn
from .data import CONTAMINATION_LEVELS, Series, ingest_csv, write_series_csv
from .errors import DataError, DimensionMismatchError, DivergenceError, InvalidParameterError, RobosError, TrialError
from .experiment import PRESETS, Contamination, ModelConfig, prepare, run_on_dataset
from .loss import LossKind, LossSpec, loss_profile, profile_to_csv
from .search import SearchSpace, random_search, tpe_search, trials_to_csv
from .theory import bound_report

log = logging.getLogger("robosnn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

DEFAULT_MODEL = ModelConfig(seq_size=30, dense_layers=2, units=64, batch_size=32)
DEFAULT_LOSSES = ("mae", "mse", "huber", "logcosh", "robos")
PROFILE_FAMILY_LAMBDAS = (0.25, 0.5, 1.0)
PROFILE_FAMILY_AS = (0.5, 1.0, 2.0, 4.0)

# Flags that never change file contents and so stay out of provenance.
_NOT_PROVENANCE = {"out", "jobs", "verbose", "command", "func"}


class UsageError(RobosError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument parsing

def _add_dataset_args(p, required=True):
    p.add_argument("--dataset", required=required, help="CSV file with the series")
    p.add_argument("--column", default=None, help="value column name or 0-based index (default: last)")
    p.add_argument("--name", default=None, help="dataset label in reports (default: preset or file stem)")


def _add_model_args(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="architecture/training defaults for a named dataset")
    p.add_argument("--seq-size", type=int, default=None)
    p.add_argument("--dense-layers", type=int, default=None)
    p.add_argument("--units", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--l2", type=float, default=None, help="weight of the (l2/2)*||theta||^2 penalty")


def _add_contamination_args(p, multi=False):
    if multi:
        p.add_argument("--level", type=float, action="append", default=None,
                       help="outlier fraction (repeatable; default 0 0.05 0.1 0.2 0.3)")
    else:
        p.add_argument("--level", type=float, default=0.0, help="outlier fraction in [0, 0.5)")
    p.add_argument("--magnitude", type=float, nargs=2, metavar=("LO", "HI"), default=(3.0, 5.0),
                   help="outlier size range in training-sigma units")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robosnn", description="Robust-loss MLP forecasting experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("train", help="train one model and score it")
    _add_dataset_args(p)
    _add_model_args(p)
    _add_contamination_args(p)
    p.add_argument("--loss", default="robos", help='loss spec, e.g. "huber:delta=1" or "@best_params.json"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="all losses x contamination levels x seeds")
    _add_dataset_args(p)
    _add_model_args(p)
    _add_contamination_args(p, multi=True)
    p.add_argument("--loss", action="append", default=None, help="loss spec (repeatable; default all five)")
    p.add_argument("--seed", type=int, action="append", default=None, help="seed (repeatable; default 0)")
    p.add_argument("--jobs", type=int, default=1, help="cells to run concurrently")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hpo", help="search the robos loss parameters")
    _add_dataset_args(p)
    _add_model_args(p)
    _add_contamination_args(p)
    p.add_argument("--strategy", choices=("random", "tpe"), default="tpe")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hpo)

    p = sub.add_parser("profile", help="export loss curves")
    p.add_argument("--loss", action="append", default=None, help="loss spec (repeatable)")
    p.add_argument("--families", action="store_true",
                   help="add the four baselines plus robos families varying lambda and a")
    p.add_argument("--range", type=float, nargs=2, metavar=("RMIN", "RMAX"), default=(-5.0, 5.0))
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("bound", help="generalization bound for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    _add_dataset_args(p, required=False)
    p.add_argument("--loss", default=None, help="robos spec (default: the one recorded in the checkpoint)")
    p.add_argument("--eps-conf", type=float, default=0.05, help="1 - confidence level, in (0, 1)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("inject", help="write a contaminated copy of a dataset")
    _add_dataset_args(p)
    _add_contamination_args(p)
    p.add_argument("--seq-size", type=int, default=None, help="window length that fixes the training region")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("replay", help="re-run the command recorded in an output file")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


# ---------------------------------------------------------------------------
# provenance

def _file_digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _canonical_argv(args: argparse.Namespace) -> list[str]:
    """Explicit argument list equivalent to ``args`` (minus output location)."""
    argv = [args.command]
    sub = _SUBPARSERS[args.command]
    for action in sub._actions:
        dest = action.dest
        if dest in _NOT_PROVENANCE or dest == "help" or not action.option_strings:
            continue
        value = getattr(args, dest, None)
        if value is None or value is False:
            continue
        flag = action.option_strings[-1]
        if value is True:
            argv.append(flag)
        elif isinstance(action, argparse._AppendAction):
            for item in value:
                argv.extend((flag, str(item)))
        elif isinstance(value, (list, tuple)):
            argv.append(flag)
            argv.extend(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            argv.extend((flag, repr(value) if isinstance(value, float) else str(value)))
    return argv


def _provenance(args: argparse.Namespace, **extra) -> dict:
    doc = {"tool": "robosnn", "version": __version__, "argv": _canonical_argv(args)}
    if getattr(args, "dataset", None):
        doc["dataset_sha256"] = _file_digest(args.dataset)
    doc.update(extra)
    return doc


def _header(prov: dict) -> str:
    return "provenance: " + json.dumps(prov, sort_keys=True)


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def read_provenance(path) -> dict:
    """Provenance record of any file this tool wrote (JSON or commented CSV)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        prov = doc.get("provenance") or doc.get("meta", {}).get("provenance")
        if prov is None:
            raise DataError(f"{path} has no provenance record")
        return prov
    for line in text.splitlines():
        if line.startswith("# provenance: "):
            return json.loads(line[len("# provenance: "):])
    raise DataError(f"{path} has no provenance header")


# ---------------------------------------------------------------------------
# shared resolution helpers

def _model(args) -> ModelConfig:
    base = PRESETS[args.preset] if getattr(args, "preset", None) else DEFAULT_MODEL
    fields = {
        "seq_size": args.seq_size,
        "dense_layers": args.dense_layers,
        "units": args.units,
        "batch_size": args.batch_size,
        "learning_rate": args.learning_rate,
        "patience": args.patience,
        "max_epochs": args.max_epochs,
        "l2_coeff": args.l2,
    }
    merged = base.to_dict()
    merged.update({k: v for k, v in fields.items() if v is not None})
    # Write the resolved values back so provenance is explicit even if presets change.
    for k, v in merged.items():
        setattr(args, "l2" if k == "l2_coeff" else k, v)
    model = ModelConfig(**merged)
    for name in ("seq_size", "dense_layers", "units", "batch_size", "patience", "max_epochs"):
        if getattr(model, name) < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return model


def parse_loss(text: str) -> LossSpec:
    """A loss spec string, or ``@file.json`` holding {"loss": "<spec>"}."""
    if text.startswith("@"):
        try:
            doc = json.loads(Path(text[1:]).read_text())
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read loss file {text[1:]}: {exc}") from exc
        text = doc["loss"]
    return LossSpec.parse(text)


def _load_series(args, min_length: int) -> Series:
    series = ingest_csv(args.dataset, args.column, min_length=min_length)
    if series.dropped_count:
        log.warning("dropped %d unusable rows from %s", series.dropped_count, args.dataset)
    name = args.name or args.preset or series.name
    return Series(series.values, name=name, dropped_count=series.dropped_count)


def _contamination(args, level: float) -> Contamination:
    lo, hi = args.magnitude
    return Contamination(level, lo, hi)


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_train(args) -> int:
    model = _model(args)
    loss = parse_loss(args.loss)
    args.loss = loss.to_string()
    series = _load_series(args, model.seq_size + 2)
    contamination = _contamination(args, args.level)
    _, data = prepare(series, model.seq_size, contamination, args.seed)
    result = run_on_dataset(data, model, loss, args.seed)
    prov = _provenance(args)

    out = _outdir(args.out)
    meta = {
        "provenance": prov,
        "loss": loss.to_string(),
        "seq_size": model.seq_size,
        "level": args.level,
        "magnitude": list(args.magnitude),
        "seed": args.seed,
        "dataset": args.dataset,
        "column": args.column,
    }
    (out / "checkpoint.json").write_text(nn.dumps(result.net, meta))
    (out / "history.csv").write_text(result.history.to_csv(_header(prov)))
    metrics = {
        "provenance": prov,
        "dataset": series.name,
        "loss": loss.to_string(),
        "level": args.level,
        "seed": args.seed,
        "metrics": result.report.to_dict(),
        "val_mae": result.val_mae,
        "epochs_run": result.history.epochs_run,
        "best_epoch": result.history.best_epoch,
        "stopped_early": result.history.stopped_early,
    }
    (out / "metrics.json").write_text(_dump_json(metrics))
    r = result.report
    print(f"{series.name} {loss.name} level={args.level:g} seed={args.seed}: "
          f"MAE={r.mae:.3f} RMSE={r.rmse:.3f} MASE={r.mase:.3f} ({result.history.epochs_run} epochs)")
    return EXIT_OK


def _sweep_cell(job):
    """Run one sweep cell; returns (key, payload). Top-level so it pickles."""
    values, name, model, loss_text, contamination, seed = job
    key = (contamination.level, loss_text, seed)
    try:
        series = Series(np.asarray(values), name=name)
        _, data = prepare(series, model.seq_size, contamination, seed)
        res = run_on_dataset(data, model, LossSpec.parse(loss_text), seed)
        return key, {"report": res.report.to_dict(), "epochs": res.history.epochs_run}
    except RobosError as exc:
        return key, {"error": f"{type(exc).__name__}: {exc}"}


def _loss_labels(losses: list[LossSpec]) -> list[str]:
    names = [l.name for l in losses]
    return [l.name if names.count(l.name) == 1 else l.to_string() for l in losses]


def render_table(dataset: str, levels, labels, means: dict, totals: dict) -> str:
    """Levels x metrics by loss, then a Total Avg. block; 3 decimals."""
    width = max(10, *(len(lbl) + 5 for lbl in labels))
    head = f"{'Dataset':<24}{'Outliers':<10}{'Metric':<8}" + "".join(f"{lbl + '-NN':>{width}}" for lbl in labels)
    rule = "-" * len(head)
    lines = [head, rule]
    for i, level in enumerate(levels):
        for j, metric in enumerate(("mae", "rmse", "mase")):
            first = dataset if i == 0 and j == 0 else ""
            lvl = f"{level * 100:g}%" if j == 0 else ""
            cells = "".join(
                f"{means[(level, lbl)][metric]:>{width}.3f}" if (level, lbl) in means else f"{'n/a':>{width}}"
                for lbl in labels
            )
            lines.append(f"{first:<24}{lvl:<10}{metric.upper():<8}{cells}")
    lines.append(rule)
    for j, metric in enumerate(("mae", "rmse", "mase")):
        first = "Total Avg." if j == 0 else ""
        cells = "".join(
            f"{totals[lbl][metric]:>{width}.3f}" if lbl in totals else f"{'n/a':>{width}}" for lbl in labels
        )
        lines.append(f"{first:<24}{'':<10}{metric.upper():<8}{cells}")
    lines.append(rule)
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    model = _model(args)
    losses = [parse_loss(t) for t in (args.loss or DEFAULT_LOSSES)]
    levels = list(args.level) if args.level is not None else list(CONTAMINATION_LEVELS)
    seeds = list(args.seed) if args.seed is not None else [0]
    args.loss = [l.to_string() for l in losses]
    args.level = levels
    args.seed = seeds
    for level in levels:
        if not 0.0 <= level < 0.5:
            raise UsageError(f"contamination level {level} outside [0, 0.5)")
    series = _load_series(args, model.seq_size + 2)
    prov = _provenance(args)
    labels = _loss_labels(losses)
    label_of = {l.to_string(): lbl for l, lbl in zip(losses, labels)}

    jobs = [
        (series.values, series.name, model, loss.to_string(), _contamination(args, level), seed)
        for level in levels for loss in losses for seed in seeds
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_sweep_cell, jobs))
    else:
        results = dict(map(_sweep_cell, jobs))

    out = _outdir(args.out)
    failures = []
    rows = ["dataset,level,loss,seed,mae,rmse,mase,n_test,epochs,status"]
    for level in levels:
        for loss in losses:
            for seed in seeds:
                cell = results[(level, loss.to_string(), seed)]
                if "error" in cell:
                    failures.append(f"level={level!r} loss={loss.to_string()} seed={seed}: {cell['error']}")
                    rows.append(f"{series.name},{level!r},\"{loss.to_string()}\",{seed},,,,,,failed")
                else:
                    r = cell["report"]
                    rows.append(f"{series.name},{level!r},\"{loss.to_string()}\",{seed},{r['mae']!r},"
                                f"{r['rmse']!r},{r['mase']!r},{r['n_test']},{cell['epochs']},ok")
    (out / "cells.csv").write_text(f"# {_header(prov)}\n" + "\n".join(rows) + "\n")

    means: dict = {}
    for level in levels:
        for loss in losses:
            reps = [results[(level, loss.to_string(), s)] for s in seeds]
            reps = [c["report"] for c in reps if "error" not in c]
            if reps:
                means[(level, label_of[loss.to_string()])] = {
                    m: float(np.mean([r[m] for r in reps])) for m in ("mae", "rmse", "mase")
                }
    totals = {}
    for lbl in labels:
        per_level = [means[(lv, lbl)] for lv in levels if (lv, lbl) in means]
        if len(per_level) == len(levels):
            totals[lbl] = {m: float(np.mean([p[m] for p in per_level])) for m in ("mae", "rmse", "mase")}

    wide = ["dataset,outliers,metric," + ",".join(f'"{lbl}"' for lbl in labels)]
    for level in levels:
        for metric in ("mae", "rmse", "mase"):
            vals = [repr(means[(level, lbl)][metric]) if (level, lbl) in means else "" for lbl in labels]
            wide.append(f"{series.name},{level!r},{metric}," + ",".join(vals))
    for metric in ("mae", "rmse", "mase"):
        vals = [repr(totals[lbl][metric]) if lbl in totals else "" for lbl in labels]
        wide.append(f"{series.name},Total Avg.,{metric}," + ",".join(vals))
    (out / "results.csv").write_text(f"# {_header(prov)}\n" + "\n".join(wide) + "\n")

    table = render_table(series.name, levels, labels, means, totals)
    (out / "results.txt").write_text(f"# {_header(prov)}\n" + table)
    summary = {"provenance": prov, "cells": len(jobs), "failed": failures}
    (out / "summary.json").write_text(_dump_json(summary))
    print(table, end="")
    if failures:
        print(f"{len(failures)} of {len(jobs)} cells failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_hpo(args) -> int:
    model = _model(args)
    series = _load_series(args, model.seq_size + 2)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    _, data = prepare(series, model.seq_size, _contamination(args, args.level), args.seed)

    def objective(params, seed):
        spec = LossSpec.robos(a=params["a"], lam=params["lambda"], eps=params["eps"])
        res = run_on_dataset(data, model, spec, seed)
        return res.val_mae, res.history.epochs_run

    space = SearchSpace()
    if args.strategy == "tpe":
        best, trials = tpe_search(space, args.trials, objective, args.seed)
    else:
        best, trials = random_search(space, args.trials, objective, args.seed)
    prov = _provenance(args)
    out = _outdir(args.out)
    (out / "trials.csv").write_text(trials_to_csv(trials, _header(prov)))
    spec = LossSpec.robos(a=best.params["a"], lam=best.params["lambda"], eps=best.params["eps"])
    doc = {
        "provenance": prov,
        "loss": spec.to_string(),
        "best": {"trial": best.trial, "params": best.params, "val_mae": best.val_metric,
                 "seed": best.seed, "epochs": best.epochs_run},
        "search_space": {k: [d.lo, d.hi, "log" if d.log else "linear"] for k, d in space.dims.items()},
    }
    (out / "best_params.json").write_text(_dump_json(doc))
    print(f"best trial {best.trial}: a={best.params['a']:.3f} eps={best.params['eps']:.3f} "
          f"lambda={best.params['lambda']:.3f} val MAE={best.val_metric:.4f}")
    return EXIT_OK


def profile_specs(args) -> list[LossSpec]:
    specs = [parse_loss(t) for t in (args.loss or [])]
    if args.families:
        specs += [LossSpec.absolute(), LossSpec.square(), LossSpec.huber(), LossSpec.logcosh()]
        specs += [LossSpec.robos(a=1.0, lam=lam, eps=0.01) for lam in PROFILE_FAMILY_LAMBDAS]
        specs += [LossSpec.robos(a=a, lam=1.0, eps=0.01) for a in PROFILE_FAMILY_AS]
    return specs


def _profile_filename(spec: LossSpec) -> str:
    if spec.kind is LossKind.ROBOS:
        return f"robos_a{spec.a:g}_lambda{spec.lam:g}_eps{spec.eps:g}.csv"
    if spec.kind is LossKind.HUBER:
        return f"huber_delta{spec.delta:g}.csv"
    return f"{spec.kind.value}.csv"


def cmd_profile(args) -> int:
    specs = profile_specs(args)
    if not specs:
        raise UsageError("give at least one --loss or --families")
    lo, hi = args.range
    prov = _provenance(args)
    out = _outdir(args.out)
    seen = set()
    for spec in specs:
        fname = _profile_filename(spec)
        if fname in seen:
            continue
        seen.add(fname)
        rows = loss_profile(spec, lo, hi, args.points)
        header = _header(prov) + "\nloss: " + spec.to_string()
        (out / fname).write_text(profile_to_csv(rows, header))
    print(f"wrote {len(seen)} profile files to {out}")
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        doc = json.loads(Path(args.checkpoint).read_text())
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read checkpoint {args.checkpoint}: {exc}") from exc
    net = nn.from_dict(doc)
    meta = doc.get("meta", {})
    if not 0.0 < args.eps_conf < 1.0:
        raise InvalidParameterError(f"--eps-conf must lie in (0, 1), got {args.eps_conf!r}")
    args.dataset = args.dataset or meta.get("dataset")
    if args.dataset is None:
        raise UsageError("no --dataset given and none recorded in the checkpoint")
    if args.column is None:
        args.column = meta.get("column")
    loss_text = args.loss or meta.get("loss")
    if loss_text is None:
        raise UsageError("no --loss given and none recorded in the checkpoint")
    spec = parse_loss(loss_text)
    args.loss = spec.to_string()
    seq_size = net.input_dim
    lo, hi = meta.get("magnitude", (3.0, 5.0))
    contamination = Contamination(float(meta.get("level", 0.0)), lo, hi)
    series = ingest_csv(args.dataset, args.column, min_length=seq_size + 2)
    _, data = prepare(series, seq_size, contamination, int(meta.get("seed", 0)))
    rep = bound_report(net, data, spec, args.eps_conf)
    prov = _provenance(args, checkpoint_sha256=_file_digest(args.checkpoint))
    result = {"provenance": prov, **rep.to_dict()}
    text = _dump_json(result)
    if args.out:
        _outdir(args.out)
        (Path(args.out) / "bound.json").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_inject(args) -> int:
    if args.seq_size is None:
        args.seq_size = (PRESETS[args.preset] if args.preset else DEFAULT_MODEL).seq_size
    series = _load_series(args, args.seq_size + 2)
    dirty, _ = prepare(series, args.seq_size, _contamination(args, args.level), args.seed)
    prov = _provenance(args)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_series_csv(dirty, path, _header(prov))
    changed = int(np.sum(dirty.values != series.values))
    print(f"wrote {path} ({changed} of {len(series)} points contaminated)")
    return EXIT_OK


def cmd_replay(args) -> int:
    prov = read_provenance(args.file)
    argv = list(prov["argv"])
    if argv and argv[0] == "replay":
        raise UsageError("refusing to replay a replay")
    # Inputs must be the ones that produced the original output.
    for flag, key in (("--dataset", "dataset_sha256"), ("--checkpoint", "checkpoint_sha256")):
        if key in prov and flag in argv:
            path = argv[argv.index(flag) + 1]
            if _file_digest(path) != prov[key]:
                raise DataError(f"{path} changed since the recorded run ({key} mismatch)")
    return main(argv + ["--out", args.out])


_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def _index_subparsers(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            _SUBPARSERS.update(action.choices)


def main(argv=None) -> int:
    parser = build_parser()
    _index_subparsers(parser)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InvalidParameterError) as exc:
        print(f"robosnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrialError as exc:
        print(f"robosnn: error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED if isinstance(exc.__cause__, DivergenceError) else EXIT_DATA
    except DivergenceError as exc:
        print(f"robosnn: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, DimensionMismatchError) as exc:
        print(f"robosnn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
