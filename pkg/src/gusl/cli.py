"""Command line front end.

    gusl run <config> [--seed N] [--horizon T] [--runs K] [--out PATH]
    gusl check <config>

``run`` simulates the configured scenario and writes the results CSV plus a
JSON summary; ``check`` validates the network and distinguishability
assumptions and prints the per-agent divergence table without simulating.

Exit codes: 0 success, 2 bad config, 3 failed validation, 4 I/O trouble.
Set GUSL_LOG=debug|info|warning to adjust logging verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, parse_config, scenario_to_mapping
from .core import kl_gaussian
from .network import NetworkValidationError, describe_assumptions
from .results import write_results, write_summary
from .simulate import ExplicitNetworkSpec, Scenario, ensemble, identifiability_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

LOG_ENV = "GUSL_LOG"

log = logging.getLogger("gusl")


def _configure_logging() -> None:
    level = os.environ.get(LOG_ENV, "warning").strip().lower()
    numeric = {"debug": logging.DEBUG, "info": logging.INFO, "warning": logging.WARNING}.get(
        level, logging.WARNING
    )
    logging.basicConfig(level=numeric, format="%(levelname)s %(name)s: %(message)s")


def _load_scenario(path: str) -> Scenario:
    try:
        return parse_config(path)
    except OSError as err:
        raise _ExitWith(EXIT_IO, f"cannot read config {path}: {err}") from err
    except ConfigError as err:
        raise _ExitWith(EXIT_CONFIG, f"bad config {path}: {err}") from err


class _ExitWith(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.out is not None:
        overrides["results_path"] = args.out
        overrides["summary_path"] = None
    if overrides:
        try:
            scenario = dataclasses.replace(scenario, **overrides)
        except ValueError as err:
            raise _ExitWith(EXIT_CONFIG, f"bad override: {err}") from err

    results_path = scenario.results_path or "results.csv"
    summary_path = scenario.summary_path
    if summary_path is None:
        stem, dot, _ = results_path.rpartition(".")
        summary_path = (stem if dot else results_path) + "_summary.json"

    try:
        scenario.network.build()
    except NetworkValidationError as err:
        raise _ExitWith(EXIT_VALIDATION, f"invalid network: {err}") from err

    diag = ensemble(scenario)
    if not diag.identifiability.passed:
        print("warning: collective distinguishability fails; see summary", file=sys.stderr)

    try:
        write_results(results_path, diag.runs)
        write_summary(
            summary_path,
            scenario,
            diag.runs,
            diag.identifiability,
            config_mapping=scenario_to_mapping(scenario),
        )
    except OSError as err:
        raise _ExitWith(EXIT_IO, f"cannot write results: {err}") from err

    names = scenario.hypothesis_names
    last = diag.runs[-1]
    print(f"{scenario.runs} run(s), horizon {scenario.horizon}, {scenario.m} agents")
    for k, name in enumerate(names):
        final = last.log_beliefs[-1, :, k]
        print(
            f"  {name}: final log belief [{final.min():.4g}, {final.max():.4g}], "
            f"target {last.centralized_target[k]:.6g}"
        )
    print(f"results: {results_path}")
    print(f"summary: {summary_path}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.config)
    if isinstance(scenario.network, ExplicitNetworkSpec):
        raw = np.array(scenario.network.weights, dtype=np.float64)
    else:
        raw = scenario.network.build().weights
    try:
        checks = describe_assumptions(raw)
    except NetworkValidationError as err:
        # Not even a square nonnegative matrix; per-assumption verdicts
        # would be meaningless.
        print(f"network: FAIL ({err})")
        return EXIT_VALIDATION

    failed = False
    for code, desc, ok, detail in checks:
        print(f"assumption {code} ({desc}): {'pass' if ok else f'FAIL ({detail})'}")
        failed = failed or not ok

    report = identifiability_report(scenario)
    for line in report.lines(scenario.hypothesis_names):
        print(line)

    names = scenario.hypothesis_names
    width = max(len(n) for n in names) + 14
    header = "agent  " + "".join(f"KL(truth || {n})".ljust(width) for n in names)
    print(header.rstrip())
    for i in range(scenario.m):
        cells = "".join(
            f"{kl_gaussian(scenario.truth[i], scenario.hypotheses[i][k]):.10f}".ljust(width)
            for k in range(len(names))
        )
        print(f"{i:<5d}  {cells}".rstrip())

    return EXIT_VALIDATION if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gusl",
        description="simulate social learning with Gaussian uncertain likelihood models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write results")
    run.add_argument("config", help="path to the scenario config")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--horizon", type=int, help="override the horizon")
    run.add_argument("--runs", type=int, help="override the number of runs")
    run.add_argument("--out", help="results CSV path (summary goes next to it)")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="validate a scenario without simulating")
    check.add_argument("config", help="path to the scenario config")
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ExitWith as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
