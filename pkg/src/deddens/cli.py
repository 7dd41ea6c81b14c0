"""Command line front end: ``deddens run | gen | suite``.

Exit status: 0 success, 1 structural or validation error, 2 consistency failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import ConsistencyFailure, DeddensError, ScenarioError
from .generate import KINDS, GeneratorSpec, generate
from .hilbert import DEFAULT_TOL
from .scenario import emit_report, parse_scenario, run_scenario
from .suite import SuiteConfig, run_suite, suite_json

logger = logging.getLogger("deddens")

EXIT_OK = 0
EXIT_STRUCTURAL = 1
EXIT_CONSISTENCY = 2


def _add_tol_flags(p):
    g = p.add_argument_group("tolerances")
    g.add_argument("--tol-residual", type=float, help="relative residual for identity checks")
    g.add_argument("--tol-rank", type=float, help="relative singular-value cutoff")
    g.add_argument("--max-n", type=int, help="number of powers in Deddens profiles")
    g.add_argument("--max-m", type=int, help="number of R_m members in B_T profiles")
    g.add_argument("--slope-tol", type=float, help="log-slope above which a profile counts as growing")


def _tol_overrides(args):
    pairs = {
        "residual_tol": args.tol_residual,
        "rank_tol": args.tol_rank,
        "max_power": args.max_n,
        "max_index": args.max_m,
        "growth_slope_tol": args.slope_tol,
    }
    return {k: v for k, v in pairs.items() if v is not None}


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    p = argparse.ArgumentParser(
        prog="deddens",
        description="Deddens and spectral radius algebra workbench.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a JSON scenario")
    r.add_argument("scenario", help="path to the scenario file, or - for stdin")
    r.add_argument("--format", choices=("json", "table"), default="json")
    r.add_argument("--out", help="write the report here instead of stdout")
    _add_tol_flags(r)

    g = sub.add_parser("gen", help="generate a seeded scenario")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--blocks", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--condition-cap", type=float, default=100.0)
    g.add_argument("--max-dim", type=int, default=16)
    g.add_argument("--out", help="write the scenario here instead of stdout")

    s = sub.add_parser("suite", help="run the acceptance battery")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, help="instances per family (default: the full battery)")
    s.add_argument("--max-dim", type=int, default=16)
    s.add_argument("--only", type=int, action="append", help="run only this criterion (repeatable)")
    s.add_argument("--out", help="write the JSON report here instead of stdout")
    _add_tol_flags(s)
    return p


def _cmd_run(args):
    path = args.scenario
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    sc = parse_scenario(text)
    overrides = _tol_overrides(args)
    if overrides:
        sc = sc.with_tolerances(**overrides)
    report = run_scenario(sc)
    _write(emit_report(report, args.format), args.out)
    if report.consistency_failures:
        logger.error("%d consistency failure(s)", report.consistency_failures)
        return EXIT_CONSISTENCY
    return EXIT_OK


def _cmd_gen(args):
    spec = GeneratorSpec(args.kind, args.dim, args.blocks, args.seed, args.condition_cap, args.max_dim)
    _write(generate(spec).to_json(), args.out)
    return EXIT_OK


def _cmd_suite(args):
    tol = replace(DEFAULT_TOL, **_tol_overrides(args))
    cfg = SuiteConfig(seed=args.seed, count=args.count, max_dim=args.max_dim, tol=tol)
    report, elapsed = run_suite(cfg, only=args.only, progress=lambda r: logger.info(r.line()))
    _write(suite_json(report), args.out)
    logger.info("suite finished in %.1f s", elapsed)
    return EXIT_OK if report["passed"] else EXIT_CONSISTENCY


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    handler = {"run": _cmd_run, "gen": _cmd_gen, "suite": _cmd_suite}[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        logger.error("%s", exc)
        return EXIT_STRUCTURAL
    except ConsistencyFailure as exc:
        logger.error("%s", exc)
        return EXIT_CONSISTENCY
    except (DeddensError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
