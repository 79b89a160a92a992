"""Command-line interface.

Subcommands:
  solve      score file in, selected indices out
  infer      run config in, full run report out
  sweep      sweep config in, tidy CSV out
  correlate  run config in, per-step preview/final correlation CSV out
  nfe        pruning-schedule calculator

Exit codes: 0 success, 1 validation or usage error, 2 runtime or budget
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .config import (
    load_json, run_config_from_dict, sweep_spec_from_dict,
)
from .engine import group_inference
from .errors import BudgetError, ValidationError
from .harness import correlate_run, correlation_csv, run_sweep
from .qip import ScoreSet, SelectionProblem, solve
from .schedule import build_schedule, nfe_naive


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; we reserve 2 for runtime
    # failures and use 1 for anything the caller wrote wrong.
    def error(self, message):
        raise _UsageError(message)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="groupinfer", description=__doc__)
    parser.add_argument("--version", action="version", version=f"groupinfer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="select k indices from a score file")
    p_solve.add_argument("--scores", required=True, help="JSON file with 'unary' and 'binary' ('-' for stdin)")
    p_solve.add_argument("--k", required=True, type=int)
    p_solve.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_solve.add_argument("--strategy", choices=("auto", "exact", "greedy"), default="auto")
    p_solve.add_argument("--output", default=None)

    p_infer = sub.add_parser("infer", help="run group inference from a config file")
    p_infer.add_argument("--config", required=True, help="run config JSON ('-' for stdin)")
    p_infer.add_argument("--output", default=None)
    p_infer.add_argument("--steps-csv", default=None, help="also write per-step records as CSV")
    p_infer.add_argument("--timings", action="store_true", help="include wall times in the report")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p_sweep.add_argument("--config", required=True, help="sweep config JSON ('-' for stdin)")
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--workers", type=int, default=None,
                         help=f"overrides the GROUPINFER_WORKERS environment variable")
    p_sweep.add_argument("--repeats", type=int, default=1, help="timing repeats per cell")

    p_corr = sub.add_parser("correlate", help="preview-vs-final score correlation per step")
    p_corr.add_argument("--config", required=True, help="run config JSON with rho = 1 ('-' for stdin)")
    p_corr.add_argument("--pairs", type=int, default=512, help="sampled candidate pairs for the binary column")
    p_corr.add_argument("--output", default=None)

    p_nfe = sub.add_parser("nfe", help="pruning schedule and evaluation counts")
    p_nfe.add_argument("--m", required=True, type=int)
    p_nfe.add_argument("--k", required=True, type=int)
    p_nfe.add_argument("--rho", required=True, type=float)
    p_nfe.add_argument("--steps", required=True, type=int)
    p_nfe.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _load_score_set(text: str) -> ScoreSet:
    doc = load_json(text, "score file")
    if not isinstance(doc, dict):
        raise ValidationError("score file must be a JSON object")
    unknown = set(doc) - {"unary", "binary"}
    if unknown:
        raise ValidationError(f"score file: unknown keys {sorted(unknown)}")
    if "unary" not in doc or "binary" not in doc:
        raise ValidationError("score file needs both 'unary' and 'binary'")
    return ScoreSet(unary=doc["unary"], binary=doc["binary"])


def _cmd_solve(args) -> int:
    scores = _load_score_set(_read(args.scores))
    selection = solve(SelectionProblem(scores, k=args.k, lam=args.lam), strategy=args.strategy)
    _write(args.output, json.dumps({
        "indices": list(selection.indices),
        "objective": selection.objective,
        "strategy": selection.strategy,
    }))
    return 0


def _cmd_infer(args) -> int:
    cfg = run_config_from_dict(load_json(_read(args.config), "run config"))
    report = group_inference(cfg)
    _write(args.output, report.to_json(include_timings=args.timings))
    if args.steps_csv:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["step", "pool_size", "strategy", "selected", "wall_ms"],
            lineterminator="\n",
        )
        writer.writeheader()
        for row in report.step_rows():
            writer.writerow(row)
        _write(args.steps_csv, buf.getvalue())
    return 0


def _cmd_sweep(args) -> int:
    spec = sweep_spec_from_dict(load_json(_read(args.config), "sweep config"))
    result = run_sweep(spec, workers=args.workers, repeats=args.repeats)
    _write(args.output, result.to_csv())
    return 0


def _cmd_correlate(args) -> int:
    cfg = run_config_from_dict(load_json(_read(args.config), "run config"))
    rows = correlate_run(cfg, sample_count=args.pairs)
    _write(args.output, correlation_csv(rows))
    return 0


def _cmd_nfe(args) -> int:
    sched = build_schedule(args.m, args.k, args.rho, args.steps)
    naive = nfe_naive(args.m, args.steps)
    if args.json:
        _write(None, json.dumps({
            "m": sched.m, "k": sched.k, "rho": sched.rho, "steps": sched.t_total,
            "sizes": list(sched.sizes), "t_star": sched.t_star,
            "nfe": sched.nfe, "naive": naive, "savings": sched.savings_ratio(),
        }))
        return 0
    lines = [
        f"sizes: {' '.join(str(s) for s in sched.sizes)}",
        f"t_star: {'-' if sched.t_star is None else sched.t_star}",
        f"nfe: {sched.nfe}",
        f"naive: {naive}",
        f"savings: {sched.savings_ratio()}",
    ]
    _write(None, "\n".join(lines))
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "infer": _cmd_infer,
    "sweep": _cmd_sweep,
    "correlate": _cmd_correlate,
    "nfe": _cmd_nfe,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:  # includes ConfigError
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
