"""Command-line entry point: ``amortis <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from amortis import plots, report
from amortis.calibration import calibrate, load_golden, verify_golden
from amortis.errors import CalibrationError, InvalidInputError
from amortis.market import discounted_price
from amortis.scenario import PRESETS, Scenario, load_scenario, preset

log = logging.getLogger("amortis")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2

COMMANDS = ("sweep", "table", "verify", "calibrate", "report")
DEFAULT_PRESET = {
    "sweep": "paper-baseline",
    "table": "paper-annexe1",
    "verify": "paper-annexe1",
    "calibrate": "paper-annexe1",
    "report": "paper-annexe1",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="amortis",
        description="Simulate the effect of longer mortgage amortization periods on loan demand, supply and household risk.",
    )
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", type=Path, metavar="PATH", help="scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="compiled-in scenario (default depends on command)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, metavar="DIR", help="output directory (default: stdout)")
    p.add_argument("--plot", action="store_true", help="also write figure data files and SVG charts (needs --out)")
    p.add_argument("--paper-compat", action="store_true", help="reproduce the published supply figures, which feed transcription-error demand values into the supply model")
    p.add_argument("--golden", type=Path, metavar="PATH", help="golden metrics CSV for verify/calibrate (default: bundled table)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_scenario(args: argparse.Namespace) -> Scenario:
    if args.scenario is not None:
        scenario = load_scenario(args.scenario, is_preset=False)
    else:
        scenario = preset(args.preset or DEFAULT_PRESET[args.command])
    if args.paper_compat:
        scenario = replace(scenario, paper_compat=True)
    return scenario


def _emit(out_dir: Optional[Path], files: Sequence[tuple[str, str]]) -> None:
    if out_dir is None:
        multiple = len(files) > 1
        for name, text in files:
            if multiple:
                sys.stdout.write(f"# {name}\n")
            sys.stdout.write(text)
        return
    for name, text in files:
        path = report.write_atomic(out_dir / name, text)
        log.info("wrote %s", path)


def execute(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    fmt = args.format
    cmd = args.command
    status = EXIT_OK
    market = metrics = None

    if cmd == "sweep":
        market = report.run_sweep(scenario)
        if fmt == "csv":
            files = [("market.csv", report.market_csv(market))]
        else:
            files = [("market.json", report.to_json([report.market_record(p) for p in market]))]
    elif cmd == "table":
        metrics = report.run_table(scenario)
        if fmt == "csv":
            files = [("metrics.csv", report.metrics_csv(metrics))]
        else:
            files = [("metrics.json", report.to_json([report.metrics_record(r) for r in metrics]))]
    elif cmd == "verify":
        golden = load_golden(args.golden)
        metrics = report.run_table(scenario)
        result = verify_golden(metrics, golden, paper_compat=scenario.paper_compat)
        if fmt == "csv":
            files = [("verify.csv", report.verification_csv(result))]
        else:
            files = [("verify.json", report.to_json(report.verification_dict(result, scenario.name)))]
        status = EXIT_OK if result.passed else EXIT_VERIFY_FAILED
        log.info("verification %s", "passed" if result.passed else "FAILED")
    elif cmd == "calibrate":
        golden = load_golden(args.golden)
        principal = discounted_price(scenario.property_price, scenario.household.contribution_rate)
        cal = calibrate(golden, principal, scenario.weights.max_term_months)
        if fmt == "csv":
            files = [("calibration.csv", report.calibration_csv(cal))]
        else:
            files = [("calibration.json", report.to_json(report.calibration_dict(cal)))]
    else:
        full = report.build_report(scenario)
        market, metrics = full.market, full.metrics
        if fmt == "csv":
            files = [
                ("report_market.csv", report.market_csv(full.market)),
                ("report_metrics.csv", report.metrics_csv(full.metrics)),
                ("report_summary.csv", report.summary_csv(full)),
            ]
        else:
            files = [("report.json", report.to_json(report.report_dict(full)))]

    _emit(args.out, files)
    if args.plot:
        if market is not None:
            plots.write_market_plots(market, args.out)
        if metrics is not None:
            plots.write_metrics_plots(metrics, args.out)
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.plot and args.out is None:
        parser.error("--plot needs --out")
    try:
        return execute(args)
    except (InvalidInputError, CalibrationError) as exc:
        print(f"amortis: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"amortis: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
