"""Command-line interface.

Subcommands: ``sweep-fig1``, ``symmetry``, ``scaling``, ``empirical``,
``nogo``, ``estimate``. Exit codes: 0 on success, 1 on usage or I/O
errors, 2 when a numerical self-check fails.

Options may also be supplied through a flat JSON config file
(``--config``); explicit flags take precedence over the file.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .experiments import ExperimentConfig, GridSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with code 1 on usage errors."""

    def error(self, message: str):  # noqa: D102 (argparse API)
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with_usage(message))

    def exit_with_usage(self, message: str) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_USAGE


class _JsonEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, complex):
            return [o.real, o.imag]
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        return super().default(o)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, cls=_JsonEncoder) + "\n"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--states", type=int, default=None, metavar="M", help="ensemble size")
    parser.add_argument("--pairs", type=int, default=None, metavar="N", help="pair budget")
    parser.add_argument(
        "--grid", type=str, default=None, metavar="START:STOP:STEPS", help="sweep grid"
    )
    parser.add_argument("--out", type=str, default=None, help="output file (default stdout)")
    parser.add_argument(
        "--strategy", choices=["local", "cc"], default=None, help="estimation strategy"
    )
    parser.add_argument(
        "--format", choices=["csv", "json"], default=None, dest="fmt", help="output format"
    )
    parser.add_argument("--config", type=str, default=None, help="flat JSON config file")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a flat JSON object")
    return data


def _resolve(args: argparse.Namespace, key: str, default):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in args.config_data:
        return args.config_data[key]
    return default


def _build_config(args: argparse.Namespace, name: str, **defaults) -> ExperimentConfig:
    grid = _resolve(args, "grid", defaults.get("grid"))
    if isinstance(grid, str):
        grid = GridSpec.parse(grid)
    cfg = ExperimentConfig(
        name=name,
        seed=int(_resolve(args, "seed", 0)),
        states=int(_resolve(args, "states", defaults.get("states", 10_000))),
        pairs=int(_resolve(args, "pairs", defaults.get("pairs", 10_000))),
        grid=grid,
        strategy=str(_resolve(args, "strategy", defaults.get("strategy", "local"))),
        trials=int(_resolve(args, "trials", defaults.get("trials", 1_000))),
        bases=int(_resolve(args, "bases", defaults.get("bases", 1_000))),
        counterexample_bases=int(
            _resolve(args, "counterexamples", defaults.get("counterexamples", 100))
        ),
        c2_range=_parse_range(_resolve(args, "c2_range", None)),
        nondegenerate=bool(_resolve(args, "nondegenerate", False)),
    )
    cfg.validate()
    return cfg


def _parse_range(text):
    if text is None or isinstance(text, tuple):
        return text
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ValueError(f"range must be lo:hi, got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _emit(args: argparse.Namespace, text: str) -> None:
    out = _resolve(args, "out", None)
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _emit_rows(args: argparse.Namespace, columns: list[str], rows: list[dict]) -> None:
    fmt = _resolve(args, "fmt", "csv")
    if fmt == "json":
        _emit(args, _dump_json(rows))
    else:
        _emit(args, experiments.rows_to_csv_text(columns, rows))


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "sweep-fig1", states=10_000, strategy="local")
    rows = experiments.run_fig1_sweep(cfg)
    _emit_rows(args, experiments.SWEEP_COLUMNS, rows)
    return EXIT_OK


def _cmd_symmetry(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "symmetry", states=10_000)
    rows = experiments.run_symmetry(cfg)
    _emit_rows(args, experiments.SYMMETRY_COLUMNS, rows)
    return EXIT_OK


def _cmd_scaling(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "scaling", states=100_000)
    fits, rows = experiments.run_scaling(cfg)
    fmt = _resolve(args, "fmt", "csv")
    if fmt == "json":
        _emit(args, _dump_json({"fits": fits, "table": rows}))
    else:
        _emit(args, experiments.rows_to_csv_text(experiments.SCALING_COLUMNS, rows))
        # fit summary goes to stderr so the CSV stream stays clean
        for fit in fits:
            print(
                f"{fit.strategy}/{fit.covariance}: c = {fit.constant:.4f}, "
                f"slope = {fit.slope:.4f}, residual = {fit.residual:.2e}",
                file=sys.stderr,
            )
    return EXIT_OK


def _cmd_empirical(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "empirical", states=50)
    rows = experiments.run_empirical(cfg)
    _emit_rows(args, experiments.EMPIRICAL_COLUMNS, rows)
    return EXIT_OK


def _cmd_nogo(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "nogo", pairs=3)
    report = experiments.run_nogo(cfg)
    _emit(args, _dump_json(report))
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    strategy = _resolve(args, "strategy", "local")
    pairs = int(_resolve(args, "pairs", 10_000))
    seed = int(_resolve(args, "seed", 0))
    report = experiments.run_estimate(args.state_file, strategy, pairs, seed)
    _emit(args, _dump_json(report))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="entmeter",
        description="Precision analysis of local two-qubit entanglement measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep-fig1", help="average uncertainty vs relative azimuth")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("symmetry", help="direction-flip equalities of the average uncertainty")
    _add_common(p)
    p.set_defaults(func=_cmd_symmetry)

    p = sub.add_parser("scaling", help="fit the c/sqrt(N) constants of both strategies")
    _add_common(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("empirical", help="Monte Carlo check of the analytic propagation")
    _add_common(p)
    p.add_argument("--trials", type=int, default=None, help="simulated runs per state")
    p.add_argument(
        "--c2-range", dest="c2_range", type=str, default=None, metavar="LO:HI",
        help="keep only states with squared concurrence in the open interval",
    )
    p.add_argument(
        "--nondegenerate", action="store_const", const=True, default=None,
        help="drop states near the estimator's degenerate configurations",
    )
    p.set_defaults(func=_cmd_empirical)

    p = sub.add_parser("nogo", help="verify the single-observable impossibility result")
    _add_common(p)
    p.add_argument("--bases", type=int, default=None, help="random bases for the identity checks")
    p.add_argument(
        "--counterexamples", type=int, default=None,
        help="random bases for counterexample construction",
    )
    p.set_defaults(func=_cmd_nogo)

    p = sub.add_parser("estimate", help="single-state end-to-end estimate")
    _add_common(p)
    p.add_argument("state_file", help="text file with 8 reals: interleaved re/im amplitudes")
    p.set_defaults(func=_cmd_estimate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.config_data = _load_config_file(args.config)
        return args.func(args)
    except experiments.NumericalCheckError as exc:
        print(f"entmeter: numerical check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (ValueError, experiments.StateFileError, OSError) as exc:
        print(f"entmeter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
