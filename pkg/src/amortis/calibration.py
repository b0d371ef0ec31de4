"""Recover unstated parameters from a published metrics table and check computed tables against it."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from amortis import linalg
from amortis.annuity import MONTHS_PER_YEAR, LoanTerms, MetricsRow, RiskWeights, monthly_payment
from amortis.errors import CalibrationError, InvalidInputError

GOLDEN_HEADER = (
    "Duration",
    "Monthly_Payment",
    "Total_Debt",
    "Relative_Increase",
    "Debt_Ratio",
    "Repayment_Capacity",
    "Risk_Index",
)
GOLDEN_ROWS = 41

# Map table column names to MetricsRow attributes.
COLUMNS: Mapping[str, str] = {
    "Monthly_Payment": "monthly_payment",
    "Total_Debt": "total_debt",
    "Relative_Increase": "relative_increase",
    "Debt_Ratio": "debt_ratio",
    "Repayment_Capacity": "repayment_capacity",
    "Risk_Index": "risk_index",
}

DEFAULT_TOLERANCES: Mapping[str, float] = {
    "Monthly_Payment": 0.0005,
    "Total_Debt": 0.1,
    "Relative_Increase": 1e-4,
    "Debt_Ratio": 1e-6,
    "Repayment_Capacity": 1e-5,
    "Risk_Index": 1e-5,
}

CONDITION_WARN = 1e8
RATE_XTOL = 1e-10


@dataclass(frozen=True)
class GoldenTable:
    rows: tuple[MetricsRow, ...]
    source: str = ""

    def __post_init__(self) -> None:
        if not self.rows:
            raise InvalidInputError("golden table has no rows")
        years = [r.duration_years for r in self.rows]
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise InvalidInputError("golden table durations must increase by exactly one year")

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


@dataclass(frozen=True)
class CalibrationReport:
    fitted_weights: RiskWeights
    weight_residual_max: float
    implied_monthly_income: float
    income_spread: float
    implied_rate: float
    rate_residual: float


@dataclass
class VerificationReport:
    column_errors: dict[str, float]
    tolerances: dict[str, float]
    row_pass: dict[int, bool]
    failures: list[tuple[int, str, float]] = field(default_factory=list)
    paper_compat: bool = False

    @property
    def column_pass(self) -> dict[str, bool]:
        return {c: self.column_errors[c] <= self.tolerances[c] for c in self.column_errors}

    @property
    def passed(self) -> bool:
        return all(self.column_pass.values())


TableLike = Union[GoldenTable, Sequence[MetricsRow]]


def _rows(table: TableLike) -> Sequence[MetricsRow]:
    return table.rows if isinstance(table, GoldenTable) else table


def parse_golden_csv(text: str, source: str = "", expected_rows: Optional[int] = None) -> GoldenTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != GOLDEN_HEADER:
        raise InvalidInputError(f"{source or 'golden table'}: header must be {','.join(GOLDEN_HEADER)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(GOLDEN_HEADER):
            raise InvalidInputError(f"{source}:{lineno}: expected {len(GOLDEN_HEADER)} fields, got {len(rec)}")
        try:
            rows.append(MetricsRow(int(rec[0]), *(float(v) for v in rec[1:])))
        except ValueError as exc:
            raise InvalidInputError(f"{source}:{lineno}: {exc}") from None
    if expected_rows is not None and len(rows) != expected_rows:
        raise InvalidInputError(f"{source}: expected {expected_rows} rows, got {len(rows)}")
    return GoldenTable(tuple(rows), source)


def load_golden(path: Union[str, Path, None] = None) -> GoldenTable:
    """Load a golden metrics table; without ``path``, the bundled 20-60 year table."""
    if path is None:
        text = resources.files("amortis").joinpath("data/golden_metrics.csv").read_text(encoding="utf-8")
        return parse_golden_csv(text, "golden_metrics.csv", expected_rows=GOLDEN_ROWS)
    path = Path(path)
    return parse_golden_csv(path.read_text(encoding="utf-8"), str(path))


def _regressors(row: MetricsRow, max_term_months: int) -> list[float]:
    return [
        row.debt_ratio,
        row.relative_increase,
        row.repayment_capacity,
        row.term_months / max_term_months,
    ]


def risk_residuals(table: TableLike, weights: RiskWeights) -> list[float]:
    rows = _rows(table)
    w = weights.as_tuple()
    return [
        r.risk_index - sum(wi * xi for wi, xi in zip(w, _regressors(r, weights.max_term_months)))
        for r in rows
    ]


def fit_risk_weights(table: TableLike, max_term_months: int = 720) -> tuple[RiskWeights, float]:
    """Least-squares risk-index weights over every row, with the max absolute residual.

    Raises CalibrationError when the regressors do not span four dimensions.
    """
    rows = _rows(table)
    design = [_regressors(r, max_term_months) for r in rows]
    target = [r.risk_index for r in rows]
    w, cond = linalg.lstsq(design, target)
    if cond > CONDITION_WARN:
        warnings.warn(f"risk-weight normal equations are ill-conditioned (cond={cond:.3g})", RuntimeWarning)
    weights = RiskWeights(*w, max_term_months=max_term_months)
    residual = max(abs(e) for e in risk_residuals(rows, weights))
    return weights, residual


def infer_monthly_income(table: TableLike) -> tuple[float, float]:
    """Mean and max-min spread of payment / debt-ratio across rows."""
    rows = _rows(table)
    if not rows:
        raise InvalidInputError("table has no rows")
    incomes = []
    for r in rows:
        if r.debt_ratio <= 0:
            raise InvalidInputError(f"debt ratio of the {r.duration_years}-year row is not positive")
        incomes.append(r.monthly_payment / r.debt_ratio)
    return math.fsum(incomes) / len(incomes), max(incomes) - min(incomes)


def _payment(principal: float, rate: float, term_months: int) -> float:
    return monthly_payment(LoanTerms(principal, rate, MONTHS_PER_YEAR, term_months))


def infer_loan_rate(
    table: TableLike,
    principal: float,
    bracket: tuple[float, float] = (0.001, 0.2),
    xtol: float = RATE_XTOL,
) -> tuple[float, float]:
    """Annual rate reproducing the first row's payment, found by bisection.

    Returns the rate and the largest payment error across all rows at that rate.
    """
    rows = _rows(table)
    if not rows:
        raise InvalidInputError("table has no rows")
    lo, hi = bracket
    if not 0 <= lo < hi:
        raise InvalidInputError(f"invalid rate bracket {bracket}")
    ref = rows[0]

    def f(rate: float) -> float:
        return _payment(principal, rate, ref.term_months) - ref.monthly_payment

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo, _rate_residual(rows, principal, lo)
    if f_hi == 0:
        return hi, _rate_residual(rows, principal, hi)
    if (f_lo > 0) == (f_hi > 0):
        raise CalibrationError(f"no sign change of the payment error in rate bracket [{lo}, {hi}]")

    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    rate = 0.5 * (lo + hi)
    return rate, _rate_residual(rows, principal, rate)


def _rate_residual(rows: Iterable[MetricsRow], principal: float, rate: float) -> float:
    return max(abs(_payment(principal, rate, r.term_months) - r.monthly_payment) for r in rows)


def calibrate(
    table: TableLike,
    principal: float,
    max_term_months: int = 720,
    bracket: tuple[float, float] = (0.001, 0.2),
) -> CalibrationReport:
    weights, w_res = fit_risk_weights(table, max_term_months)
    income, spread = infer_monthly_income(table)
    rate, r_res = infer_loan_rate(table, principal, bracket)
    return CalibrationReport(weights, w_res, income, spread, rate, r_res)


def verify_golden(
    computed: TableLike,
    golden: TableLike,
    tolerances: Optional[Mapping[str, float]] = None,
    paper_compat: bool = False,
) -> VerificationReport:
    """Compare two tables column by column with absolute tolerances."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(COLUMNS)
        if unknown:
            raise InvalidInputError(f"unknown tolerance columns: {sorted(unknown)}")
        tol.update(tolerances)
    a_rows, b_rows = _rows(computed), _rows(golden)
    if len(a_rows) != len(b_rows):
        raise InvalidInputError(f"row count mismatch: {len(a_rows)} computed vs {len(b_rows)} golden")
    col_err = {c: 0.0 for c in COLUMNS}
    row_pass: dict[int, bool] = {}
    failures: list[tuple[int, str, float]] = []
    for a, b in zip(a_rows, b_rows):
        if a.duration_years != b.duration_years:
            raise InvalidInputError(
                f"duration mismatch: {a.duration_years} computed vs {b.duration_years} golden"
            )
        ok = True
        for col, attr in COLUMNS.items():
            err = abs(getattr(a, attr) - getattr(b, attr))
            if math.isnan(err):
                err = math.inf
            col_err[col] = max(col_err[col], err)
            if err > tol[col]:
                ok = False
                failures.append((a.duration_years, col, err))
        row_pass[a.duration_years] = ok
    return VerificationReport(col_err, tol, row_pass, failures, paper_compat)
