"""Annuity and household-finance arithmetic.

Every function here is pure and works in 64-bit floats with no intermediate
rounding; rounding happens only when a report is printed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from amortis.errors import InvalidInputError

MONTHS_PER_YEAR = 12
ZERO_RATE_EPS = 1e-12
MAX_TABLE_YEARS = 80
_FIXED_BITS = 64


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class LoanTerms:
    principal: float
    annual_rate: float
    payments_per_year: int = MONTHS_PER_YEAR
    term_months: int = 240

    def __post_init__(self) -> None:
        _check_finite("principal", self.principal)
        _check_finite("annual_rate", self.annual_rate)
        if self.principal <= 0:
            raise InvalidInputError(f"principal must be > 0, got {self.principal}")
        if self.annual_rate < 0:
            raise InvalidInputError(f"annual_rate must be >= 0, got {self.annual_rate}")
        if int(self.payments_per_year) != self.payments_per_year or self.payments_per_year < 1:
            raise InvalidInputError(
                f"payments_per_year must be a positive integer, got {self.payments_per_year}"
            )
        if int(self.term_months) != self.term_months or self.term_months < 1:
            raise InvalidInputError(f"term_months must be a positive integer, got {self.term_months}")

    @property
    def periodic_rate(self) -> float:
        return self.annual_rate / self.payments_per_year


@dataclass(frozen=True)
class HouseholdProfile:
    annual_income: float
    contribution_rate: float = 0.30

    def __post_init__(self) -> None:
        _check_finite("annual_income", self.annual_income)
        _check_finite("contribution_rate", self.contribution_rate)
        if self.annual_income <= 0:
            raise InvalidInputError(f"annual_income must be > 0, got {self.annual_income}")
        if not 0 <= self.contribution_rate < 1:
            raise InvalidInputError(
                f"contribution_rate must be in [0, 1), got {self.contribution_rate}"
            )

    @property
    def monthly_income(self) -> float:
        return self.annual_income / MONTHS_PER_YEAR


@dataclass(frozen=True)
class RiskWeights:
    w1: float = 0.25
    w2: float = 0.25
    w3: float = 0.25
    w4: float = 0.25
    max_term_months: int = 720

    def __post_init__(self) -> None:
        for name in ("w1", "w2", "w3", "w4"):
            _check_finite(name, getattr(self, name))
        if int(self.max_term_months) != self.max_term_months or self.max_term_months < 1:
            raise InvalidInputError(
                f"max_term_months must be a positive integer, got {self.max_term_months}"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w1, self.w2, self.w3, self.w4)


@dataclass(frozen=True)
class MetricsRow:
    """One amortization duration's household metrics (one line of the metrics table)."""

    duration_years: int
    monthly_payment: float
    total_debt: float
    relative_increase: float
    debt_ratio: float
    repayment_capacity: float
    risk_index: float

    @property
    def term_months(self) -> int:
        return self.duration_years * MONTHS_PER_YEAR


class ScheduleRow(NamedTuple):
    period: int
    interest_paid: float
    principal_paid: float
    balance: float


def monthly_payment(terms: LoanTerms) -> float:
    """Constant installment that amortizes ``terms.principal`` over ``terms.term_months``.

    Falls back to ``principal / term_months`` when the periodic rate is below
    ``ZERO_RATE_EPS``, where the closed form degenerates to 0/0.
    """
    i = terms.periodic_rate
    if i < ZERO_RATE_EPS:
        return terms.principal / terms.term_months
    # 1 - (1+i)^-N without cancellation for small i
    return terms.principal * i / -math.expm1(-terms.term_months * math.log1p(i))


def total_debt(monthly_payment: float, term_months: int) -> float:
    """Sum of all installments over the life of the loan."""
    _check_finite("monthly_payment", monthly_payment)
    if monthly_payment <= 0:
        raise InvalidInputError(f"monthly_payment must be > 0, got {monthly_payment}")
    if term_months < 1:
        raise InvalidInputError(f"term_months must be >= 1, got {term_months}")
    return monthly_payment * term_months


def relative_cost_increase(total_debt: float, reference_debt: float) -> float:
    """Percentage by which ``total_debt`` exceeds ``reference_debt``."""
    _check_finite("total_debt", total_debt)
    _check_finite("reference_debt", reference_debt)
    if reference_debt <= 0:
        raise InvalidInputError(f"reference_debt must be > 0, got {reference_debt}")
    return (total_debt - reference_debt) / reference_debt * 100.0


def debt_ratio(monthly_payment: float, monthly_income: float) -> float:
    _check_finite("monthly_payment", monthly_payment)
    _check_finite("monthly_income", monthly_income)
    if monthly_income <= 0:
        raise InvalidInputError(f"monthly_income must be > 0, got {monthly_income}")
    if monthly_payment < 0:
        raise InvalidInputError(f"monthly_payment must be >= 0, got {monthly_payment}")
    return monthly_payment / monthly_income


def repayment_capacity(debt_ratio: float) -> float:
    _check_finite("debt_ratio", debt_ratio)
    if debt_ratio <= 0:
        raise InvalidInputError(f"debt_ratio must be > 0, got {debt_ratio}")
    return 1.0 / debt_ratio


def risk_index(
    debt_ratio: float,
    relative_increase: float,
    repayment_capacity: float,
    term_months: int,
    weights: RiskWeights,
) -> float:
    """Weighted sum of debt ratio, cost increase, repayment capacity and normalized term."""
    if term_months > weights.max_term_months:
        raise InvalidInputError(
            f"term_months {term_months} exceeds max_term_months {weights.max_term_months}"
        )
    if term_months < 0:
        raise InvalidInputError(f"term_months must be >= 0, got {term_months}")
    return (
        weights.w1 * debt_ratio
        + weights.w2 * relative_increase
        + weights.w3 * repayment_capacity
        + weights.w4 * term_months / weights.max_term_months
    )


def _to_fixed(x: float) -> int:
    num, den = x.as_integer_ratio()
    return (num << _FIXED_BITS) // den


def amortization_schedule(terms: LoanTerms) -> list[ScheduleRow]:
    """Month-by-month balance simulation, independent of the closed-form total.

    The balance is carried in fixed point (units of 2**-64 euro) and the
    periodic rate is applied as the exact binary fraction of its float value,
    so rounding does not compound over long, high-rate loans. The final
    balance is left as computed (not forced to zero) so callers can use it to
    check the closed-form payment.
    """
    payment = monthly_payment(terms)
    i = terms.periodic_rate if terms.periodic_rate >= ZERO_RATE_EPS else 0.0
    rate_num, rate_den = i.as_integer_ratio()
    shift = rate_den.bit_length() - 1  # float denominators are powers of two
    balance = _to_fixed(float(terms.principal))
    m = _to_fixed(payment)
    rows = []
    for period in range(1, terms.term_months + 1):
        interest = (balance * rate_num) >> shift
        balance += interest - m
        rows.append(
            ScheduleRow(
                period,
                math.ldexp(float(interest), -_FIXED_BITS),
                math.ldexp(float(m - interest), -_FIXED_BITS),
                math.ldexp(float(balance), -_FIXED_BITS),
            )
        )
    return rows


def build_metrics_table(
    profile: HouseholdProfile,
    loan_rate: float,
    price: float,
    year_range: Sequence[int],
    weights: RiskWeights,
    monthly_income_override: Optional[float] = None,
) -> list[MetricsRow]:
    """One :class:`MetricsRow` per whole year in the inclusive ``year_range``.

    The borrowed principal is ``price`` net of the household contribution, and
    the cost increase of every row is measured against the shortest duration.
    """
    first, last = year_range
    if first > last:
        raise InvalidInputError(f"empty year range {first}..{last}")
    if first < 1 or last > MAX_TABLE_YEARS:
        raise InvalidInputError(f"year range {first}..{last} outside [1, {MAX_TABLE_YEARS}]")
    _check_finite("price", price)
    if price <= 0:
        raise InvalidInputError(f"price must be > 0, got {price}")

    principal = price * (1.0 - profile.contribution_rate)
    income = profile.monthly_income if monthly_income_override is None else monthly_income_override

    rows: list[MetricsRow] = []
    reference = None
    for years in range(first, last + 1):
        n_months = years * MONTHS_PER_YEAR
        m = monthly_payment(LoanTerms(principal, loan_rate, MONTHS_PER_YEAR, n_months))
        e = total_debt(m, n_months)
        if reference is None:
            reference = e
        a = relative_cost_increase(e, reference)
        rd = debt_ratio(m, income)
        cr = repayment_capacity(rd)
        rows.append(MetricsRow(years, m, e, a, rd, cr, risk_index(rd, a, cr, n_months, weights)))
    return rows
