"""Command-line front end: spectra, closed-form disk values, nodal sets, suites and reports."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import config
from .config import Config
from .errors import DataError, SteklovError
from .geometry import build_interior_grid, build_quadrature, curve_from_spec
from .layer import assemble_boundary_ops
from .nodal import mode_level_set
from .oracle_disk import oracle_eigenvalue, oracle_operator_multiplier
from .steklov import ProblemKind, solve_problem
from .verify import SUITE_NAMES, run_metadata, run_suite, strip_metadata, write_check_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

PROBLEM_CHOICES = [k.value for k in ProblemKind]
DEFAULT_MODES = 10
ORACLE_OPERATORS = ("S1", "S2", "S3", "N", "Lambda", "theta", "Theta", "Xi", "Pi")


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _error(message: str) -> None:
    sys.stderr.write(json.dumps({"status": "error", "message": message}, ensure_ascii=False) + "\n")


def _config(args: argparse.Namespace) -> Config:
    return Config().with_overrides(
        domain=getattr(args, "domain", None),
        n=getattr(args, "n", None),
        grid=getattr(args, "grid", None),
        collar=getattr(args, "collar", None),
        admissibility_c=getattr(args, "c", None),
        threads=getattr(args, "threads", None),
    ).validate()


def _problem(value: str) -> ProblemKind:
    return ProblemKind(value.lower())


# --- subcommands ------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _config(args)
    started = time.perf_counter()
    curve = curve_from_spec(cfg.domain)
    ops = assemble_boundary_ops(curve, build_quadrature(curve, cfg.n))
    solution = solve_problem(_problem(args.problem), ops, args.modes)
    payload = solution.spectrum.to_dict()
    if not args.deterministic:
        payload["metadata"] = run_metadata(started)
    _emit(payload, args.out)
    if args.traces:
        solution.spectrum.write_traces(args.traces)
    if args.export_operator:
        solution.operator.to_csv(args.export_operator)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    kind = _problem(args.problem)
    if args.k < 0:
        raise DataError(f"k must be a non-negative integer (got {args.k})")
    lam, mu = oracle_eigenvalue(kind, args.k)
    payload = {
        "problem": kind.value,
        "k": args.k,
        "lambda": lam,
        "mu": mu,
        "multiplicity": 1 if args.k == 0 else 2,
        "multipliers": {name: oracle_operator_multiplier(name, args.k) for name in ORACLE_OPERATORS},
    }
    _emit(payload, None)
    return EXIT_OK


def cmd_nodal(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kind = _problem(args.problem)
    curve = curve_from_spec(cfg.domain)
    ops = assemble_boundary_ops(curve, build_quadrature(curve, cfg.n))
    solution = solve_problem(kind, ops, args.mode_index + 1)
    pair = solution.spectrum.pairs[args.mode_index]
    cd = solution.cauchy_data(args.mode_index, ops)
    grid = build_interior_grid(curve, cfg.grid, cfg.collar_width(curve))
    geometry = mode_level_set(
        kind,
        cd,
        pair.lam,
        grid,
        args.field,
        args.alpha,
        c=cfg.admissibility_c,
        upsample=cfg.field_upsample,
        threads=cfg.threads,
    )
    payload = dict(
        geometry.to_dict(),
        problem=kind.value,
        domain=cfg.domain,
        N=cfg.n,
        mode_index=args.mode_index,
        field=args.field,
        **{"lambda": pair.lam, "delta": grid.delta, "grid": cfg.grid},
    )
    _emit(payload, args.out)
    if args.svg:
        geometry.write_svg(args.svg, curve)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    report = run_suite(args.suite, cfg)
    payload = report.to_dict()
    if args.deterministic:
        payload = strip_metadata(payload)
    _emit(payload, args.out)
    if args.csv:
        report.write_csv(args.csv)
    failed = [c.id for c in report.checks if not c.passed]
    if failed:
        logger.warning("%d of %d checks failed", len(failed), len(report.checks))
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def cmd_report(args: argparse.Namespace) -> int:
    src = Path(args.input)
    if not src.is_dir():
        raise DataError(f"report input '{src}' is not a directory")
    reports = []
    for path in sorted(src.glob("*.json")):
        data = json.loads(path.read_text())
        if isinstance(data, dict) and "suite" in data and "checks" in data:
            reports.append(data)
        else:
            logger.info("skipping %s: not a suite report", path)
    if not reports:
        raise DataError(f"no suite reports found in '{src}'")
    with Path(args.out).open("w", newline="") as fh:
        writer = csv.writer(fh)
        for i, data in enumerate(reports):
            write_check_rows(writer, data["suite"], data["checks"], header=i == 0)
    failed = sum(not c["pass"] for data in reports for c in data["checks"])
    logger.info("aggregated %d reports into %s, %d failed checks", len(reports), args.out, failed)
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


# --- parser -----------------------------------------------------------------


def _add_domain_args(p: argparse.ArgumentParser, grid: bool = False) -> None:
    defaults = Config()
    p.add_argument(
        "--domain",
        help=f"disk | ellipse:a,b | kite | star:eps,m (default: {defaults.domain})",
    )
    p.add_argument(
        "--n",
        type=int,
        help=f"boundary nodes, even, {config.MIN_N}..{config.MAX_N} (default: {defaults.n})",
    )
    if grid:
        p.add_argument(
            "--grid",
            type=int,
            help=f"interior lattice resolution, {config.MIN_GRID}..{config.MAX_GRID} (default: {defaults.grid})",
        )
        p.add_argument(
            "--collar",
            type=float,
            help=f"collar width delta (default: {defaults.collar_fraction:g} x domain diameter)",
        )
        p.add_argument(
            "--c",
            type=float,
            help=f"admissibility constant c (default: {defaults.admissibility_c:g})",
        )
        p.add_argument(
            "--threads",
            type=int,
            help=f"worker threads for field evaluation (default: {defaults.threads})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklov-lab",
        description="Boundary-integral spectra and nodal geometry of the biharmonic Steklov problems.",
    )
    parser.add_argument(
        "--log-level",
        default=config.LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level (default: %(default)s)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="eigenvalues of Theta, Xi, Pi or Lambda on a domain")
    p.add_argument("--problem", required=True, choices=PROBLEM_CHOICES)
    _add_domain_args(p)
    p.add_argument("--modes", type=int, default=DEFAULT_MODES, help="number of eigenpairs, at most N/8 (default: %(default)s)")
    p.add_argument("--out", help="spectrum JSON path (default: standard output)")
    p.add_argument("--traces", help="write eigenfunction traces to this CSV")
    p.add_argument("--export-operator", help="write the symmetrised operator matrix to this CSV")
    p.add_argument("--deterministic", action="store_true", help="omit the metadata block")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="closed-form unit-disk eigenvalue and multipliers")
    p.add_argument("--problem", required=True, choices=PROBLEM_CHOICES)
    p.add_argument("--k", type=int, required=True, help="angular index k >= 0")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("nodal", help="nodal or level set of one computed mode")
    p.add_argument("--problem", required=True, choices=PROBLEM_CHOICES)
    _add_domain_args(p, grid=True)
    p.add_argument("--mode-index", type=int, default=1, help="0-based mode index (default: %(default)s)")
    p.add_argument("--alpha", type=float, default=0.0, help="level value (default: %(default)s)")
    p.add_argument("--field", choices=["e", "lap"], default="e", help="level set of e or of Delta e (default: %(default)s)")
    p.add_argument("--out", help="NodalGeometry JSON path (default: standard output)")
    p.add_argument("--svg", help="also render the level set to this SVG")
    p.set_defaults(func=cmd_nodal)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all", choices=list(SUITE_NAMES) + ["all"], help="suite name (default: %(default)s)")
    _add_domain_args(p, grid=True)
    p.add_argument("--out", help="SuiteReport JSON path (default: standard output)")
    p.add_argument("--csv", help="also write the checks as CSV")
    p.add_argument("--deterministic", action="store_true", help="omit the metadata block")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="aggregate SuiteReport JSON files into one CSV")
    p.add_argument("--in", dest="input", required=True, help="directory holding *.json reports")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if hasattr(args, "mode_index") and args.mode_index < 0:
        _error(f"mode index must be non-negative (got {args.mode_index})")
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as e:
        _error(str(e))
        return EXIT_USAGE
    except SteklovError as e:
        logger.error("%s: %s", type(e).__name__, e)
        _error(str(e))
        return EXIT_CHECK_FAILED
