"""Assemble run results and render them as CSV or JSON.

CSV cells are rounded to the printed precision of the published tables; JSON
carries full float precision. Nothing time- or host-dependent is emitted, so
the same scenario always produces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from amortis.annuity import MetricsRow, build_metrics_table
from amortis.calibration import (
    COLUMNS,
    GOLDEN_HEADER,
    CalibrationReport,
    VerificationReport,
)
from amortis.market import (
    COMPAT_SUPPLY_DEMAND,
    MarketPoint,
    discounted_price,
    market_gap,
    sweep_market,
)
from amortis.scenario import Scenario

# Supply growth over 20 -> 60 years as stated in the prose accompanying the
# published supply figure; it disagrees with the published table (~103.7%).
STATED_SUPPLY_GROWTH_PCT = 43.5

MARKET_HEADER = ("Years", "N", "D", "Variation_D", "S_raw", "S", "Variation_S", "Gap_Ratio")
MARKET_DECIMALS = {"D": 2, "Variation_D": 2, "S_raw": 3, "S": 2, "Variation_S": 2, "Gap_Ratio": 6}
METRICS_DECIMALS = {
    "Monthly_Payment": 4,
    "Total_Debt": 1,
    "Relative_Increase": 6,
    "Debt_Ratio": 7,
    "Repayment_Capacity": 6,
    "Risk_Index": 6,
}


@dataclass(frozen=True)
class Report:
    scenario: Scenario
    market: list[MarketPoint]
    metrics: list[MetricsRow]
    gap: dict[str, Any]
    headline: dict[str, Any]


def run_sweep(scenario: Scenario) -> list[MarketPoint]:
    overrides = COMPAT_SUPPLY_DEMAND if scenario.paper_compat else None
    return sweep_market(
        scenario.demand_coeffs,
        scenario.supply_coeffs,
        scenario.macro,
        scenario.household,
        scenario.property_price,
        scenario.years,
        scenario.step,
        supply_demand_overrides=overrides,
    )


def run_table(scenario: Scenario) -> list[MetricsRow]:
    return build_metrics_table(
        scenario.household,
        scenario.loan_rate,
        scenario.property_price,
        scenario.years,
        scenario.weights,
        scenario.monthly_income_override,
    )


def _growth(first: float, last: float) -> Optional[float]:
    return (last - first) / first * 100.0 if first else None


def gap_summary(points: Sequence[MarketPoint]) -> dict[str, Any]:
    first, last = points[0], points[-1]
    g0, g1 = market_gap(first), market_gap(last)
    return {
        "first_years": first.term_months // 12,
        "last_years": last.term_months // 12,
        "first_difference": g0.difference,
        "last_difference": g1.difference,
        "first_ratio": g0.ratio,
        "last_ratio": g1.ratio,
        "balanced_anywhere": any(market_gap(p).balanced for p in points),
        "demand_growth_pct": _growth(first.demand, last.demand),
        "supply_growth_pct": _growth(first.supply_loans, last.supply_loans),
        "stated_supply_growth_pct": STATED_SUPPLY_GROWTH_PCT,
    }


def headline(rows: Sequence[MetricsRow], scenario: Scenario) -> dict[str, Any]:
    return {
        "min_years": rows[0].duration_years,
        "max_years": rows[-1].duration_years,
        "principal": discounted_price(scenario.property_price, scenario.household.contribution_rate),
        "payment_at_min_term": rows[0].monthly_payment,
        "payment_at_max_term": rows[-1].monthly_payment,
        "cost_increase_at_max_term_pct": rows[-1].relative_increase,
    }


def build_report(scenario: Scenario) -> Report:
    market = run_sweep(scenario)
    metrics = run_table(scenario)
    return Report(scenario, market, metrics, gap_summary(market), headline(metrics, scenario))


# ---- JSON -----------------------------------------------------------------


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def market_record(p: MarketPoint) -> dict[str, Any]:
    return {"years": p.term_months // 12, **asdict(p)}


def metrics_record(r: MetricsRow) -> dict[str, Any]:
    return {**asdict(r), "term_months": r.term_months}


def report_dict(report: Report) -> dict[str, Any]:
    return {
        "scenario": report.scenario.to_dict(),
        "market": [market_record(p) for p in report.market],
        "metrics": [metrics_record(r) for r in report.metrics],
        "gap": report.gap,
        "headline": report.headline,
    }


def verification_dict(v: VerificationReport, scenario_name: str = "") -> dict[str, Any]:
    return {
        "scenario": scenario_name,
        "paper_compat": v.paper_compat,
        "passed": v.passed,
        "columns": {
            col: {"max_abs_error": v.column_errors[col], "tolerance": v.tolerances[col], "passed": v.column_pass[col]}
            for col in COLUMNS
        },
        "failed_rows": [y for y, ok in v.row_pass.items() if not ok],
        "failures": [{"duration": y, "column": c, "error": e} for y, c, e in v.failures],
    }


def calibration_dict(c: CalibrationReport) -> dict[str, Any]:
    return asdict(c)


def to_json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


# ---- CSV ------------------------------------------------------------------


def _fmt(value: Optional[float], decimals: int) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return ""
    return f"{value:.{decimals}f}"


def csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def market_csv(points: Sequence[MarketPoint]) -> str:
    d = MARKET_DECIMALS
    rows = [
        [
            str(p.term_months // 12),
            str(p.term_months),
            _fmt(p.demand, d["D"]),
            _fmt(p.demand_step_variation, d["Variation_D"]),
            _fmt(p.supply_raw, d["S_raw"]),
            _fmt(p.supply_loans, d["S"]),
            _fmt(p.supply_step_variation, d["Variation_S"]),
            _fmt(p.gap_ratio, d["Gap_Ratio"]),
        ]
        for p in points
    ]
    return csv_text(MARKET_HEADER, rows)


def metrics_csv(rows: Sequence[MetricsRow]) -> str:
    out = []
    for r in rows:
        out.append(
            [str(r.duration_years)]
            + [_fmt(getattr(r, attr), METRICS_DECIMALS[col]) for col, attr in COLUMNS.items()]
        )
    return csv_text(GOLDEN_HEADER, out)


def verification_csv(v: VerificationReport) -> str:
    rows = [
        [col, f"{v.column_errors[col]:.3e}", f"{v.tolerances[col]:g}", "pass" if v.column_pass[col] else "FAIL"]
        for col in COLUMNS
    ]
    return csv_text(("Column", "Max_Abs_Error", "Tolerance", "Result"), rows)


def _key_value_csv(pairs: Sequence[tuple[str, Any]]) -> str:
    rows = []
    for k, v in pairs:
        if isinstance(v, bool) or v is None:
            cell = "" if v is None else str(v).lower()
        elif isinstance(v, float):
            cell = "" if not math.isfinite(v) else repr(v)
        else:
            cell = str(v)
        rows.append([k, cell])
    return csv_text(("Field", "Value"), rows)


def calibration_csv(c: CalibrationReport) -> str:
    w = c.fitted_weights
    return _key_value_csv(
        [
            ("w1", w.w1),
            ("w2", w.w2),
            ("w3", w.w3),
            ("w4", w.w4),
            ("max_term_months", w.max_term_months),
            ("weight_residual_max", c.weight_residual_max),
            ("implied_monthly_income", c.implied_monthly_income),
            ("income_spread", c.income_spread),
            ("implied_rate", c.implied_rate),
            ("rate_residual", c.rate_residual),
        ]
    )


def summary_csv(report: Report) -> str:
    pairs = [("scenario", report.scenario.name)]
    pairs += [(f"gap.{k}", v) for k, v in report.gap.items()]
    pairs += [(f"headline.{k}", v) for k, v in report.headline.items()]
    return _key_value_csv(pairs)


# ---- files ----------------------------------------------------------------


def write_atomic(path: Union[str, Path], text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
