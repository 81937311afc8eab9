"""Command-line entry point: ``nonneutral <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..numerics import DEFAULT_CONFIG, SolveConfig
from .config import ADVERTISEMENT, SUBSCRIPTION, ConfigValidationError, ParseError, load_config
from .runner import emit_csv, run_scenario
from .verify import SUITES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonneutral",
                                description="Equilibria and side-payment bargaining for ISP/CP markets.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "subscription-ne": "price equilibrium of a subscription scenario",
        "ad-ne": "equilibrium of an advertisement scenario",
        "bargain": "bargained side payment (needs gamma, optional timing=pre|post)",
        "sweep": "run any scenario, including sweeps and series, to CSV",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="key=value scenario file")
        sp.add_argument("--out", help="CSV destination (default: the config's output key, else stdout)")
        sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        sp.add_argument("--tol", type=float, help="absolute solver tolerance")
    vp = sub.add_parser("verify", help="run a verification suite and print a JSON report")
    vp.add_argument("suite", help="one of: all, " + ", ".join(SUITES))
    vp.add_argument("--out", help="write the JSON report here as well")
    vp.add_argument("--tol", type=float, help="absolute solver tolerance")
    vp.add_argument("--config", help="unused; accepted for symmetry")
    vp.add_argument("--workers", type=int, default=1, help="unused; suites run serially")
    return p


def _solve_cfg(tol: Optional[float]) -> SolveConfig:
    return DEFAULT_CONFIG if tol is None else SolveConfig(abs_tol=tol)


def _run_scenario_command(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ParseError, ConfigValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    want = {"subscription-ne": SUBSCRIPTION, "ad-ne": ADVERTISEMENT}.get(args.command)
    if want and cfg.model != want:
        print(f"error: {args.command} needs model={want}", file=sys.stderr)
        return EXIT_ERROR
    if args.command in ("subscription-ne", "ad-ne") and cfg.bargain is not None:
        print(f"error: {args.command} does not bargain; use the bargain command", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "bargain" and cfg.bargain is None:
        print("error: bargain needs gamma in the config", file=sys.stderr)
        return EXIT_ERROR
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        rows = run_scenario(cfg, workers=args.workers, solve_cfg=_solve_cfg(args.tol))
        emit_csv(rows, args.out or cfg.output)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def _run_verify(args) -> int:
    try:
        reports = run_suites(args.suite, _solve_cfg(args.tol))
    except KeyError:
        print(json.dumps({"error": f"unknown suite '{args.suite}'", "suites": ["all", *SUITES]}))
        return EXIT_ERROR
    except Exception as exc:  # solver blew up: configuration/solver error, not a failed check
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}))
        return EXIT_ERROR
    doc = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    text = json.dumps(doc, indent=2, default=str)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    return _run_scenario_command(args)


if __name__ == "__main__":
    sys.exit(main())
