"""Linear loan demand and supply models and the amortization-period sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping, NamedTuple, Optional, Sequence

from amortis.annuity import MONTHS_PER_YEAR, HouseholdProfile
from amortis.errors import InvalidInputError

EUROS_PER_MILLION = 1e6


def _check_all_finite(obj) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if not math.isfinite(value):
            raise InvalidInputError(f"{type(obj).__name__}.{f.name} must be finite, got {value!r}")


@dataclass(frozen=True)
class DemandCoefficients:
    alpha: float
    beta_income: float
    beta_rate: float
    beta_price: float
    beta_term: float
    c: float = 0.0

    def __post_init__(self) -> None:
        _check_all_finite(self)


@dataclass(frozen=True)
class SupplyCoefficients:
    """Coefficients of the supply model; the output unit is millions of euros."""

    alpha: float
    beta_rate: float
    beta_gdp: float
    beta_index: float
    beta_inflation: float
    beta_demand: float
    beta_term: float

    def __post_init__(self) -> None:
        _check_all_finite(self)


@dataclass(frozen=True)
class MacroIndicators:
    gdp: float  # millions of euros
    price_index: float  # base 100 in 2015
    inflation: float
    market_rate: float

    def __post_init__(self) -> None:
        _check_all_finite(self)
        if self.gdp <= 0:
            raise InvalidInputError(f"gdp must be > 0, got {self.gdp}")
        if self.price_index <= 0:
            raise InvalidInputError(f"price_index must be > 0, got {self.price_index}")
        if not 0 <= self.inflation < 1:
            raise InvalidInputError(f"inflation must be in [0, 1), got {self.inflation}")


BASELINE_DEMAND = DemandCoefficients(
    alpha=20000.0,
    beta_income=0.001,
    beta_rate=-160000.0,
    beta_price=-0.0025,
    beta_term=3000.0,
    c=0.1,
)

# Alternate demand set, used once for a single 60-year point.
ALT_DEMAND = DemandCoefficients(
    alpha=24000.0,
    beta_income=0.005,
    beta_rate=-128000.0,
    beta_price=-0.0010,
    beta_term=5000.0,
    c=0.1,
)

BASELINE_SUPPLY = SupplyCoefficients(
    alpha=641.777,
    beta_rate=-50.0,
    beta_gdp=0.0025,
    beta_index=30.0,
    beta_inflation=100.0,
    beta_demand=0.01,
    beta_term=22.0,
)

BASELINE_MACRO = MacroIndicators(gdp=2_779_000.0, price_index=128.9, inflation=0.039, market_rate=0.035)

# Misprinted demand values fed into the supply model in the published figures,
# keyed by term in months. Only used in paper-compat mode.
COMPAT_SUPPLY_DEMAND: Mapping[int, float] = {240: 733_949.0, 720: 2_173_923.0}


@dataclass(frozen=True)
class MarketPoint:
    term_months: int
    demand: float
    supply_raw: float
    supply_loans: float
    demand_step_variation: Optional[float]
    supply_step_variation: Optional[float]
    gap_ratio: float
    supply_demand_input: float

    @property
    def years(self) -> float:
        return self.term_months / MONTHS_PER_YEAR


class MarketGap(NamedTuple):
    difference: float
    ratio: float
    balanced: bool


def discounted_price(price: float, contribution_rate: float) -> float:
    """Price net of the household's own contribution, i.e. the borrowed amount."""
    if not (math.isfinite(price) and price > 0):
        raise InvalidInputError(f"price must be > 0, got {price}")
    if not 0 <= contribution_rate < 1:
        raise InvalidInputError(f"contribution_rate must be in [0, 1), got {contribution_rate}")
    return price * (1.0 - contribution_rate)


def demand(
    coeffs: DemandCoefficients, income: float, rate: float, price: float, term_months: int
) -> float:
    """Number of loan applications for the given household and term."""
    if term_months < 1:
        raise InvalidInputError(f"term_months must be >= 1, got {term_months}")
    return (
        coeffs.alpha
        + coeffs.beta_income * income
        + coeffs.beta_rate * rate
        + coeffs.beta_price * price
        + coeffs.beta_term * term_months
        + coeffs.c
    )


def supply_raw(
    coeffs: SupplyCoefficients, indicators: MacroIndicators, demand: float, term_months: int
) -> float:
    """Bank lending volume in millions of euros."""
    if term_months < 1:
        raise InvalidInputError(f"term_months must be >= 1, got {term_months}")
    return (
        coeffs.alpha
        + coeffs.beta_rate * indicators.market_rate
        + coeffs.beta_gdp * indicators.gdp
        + coeffs.beta_index * indicators.price_index
        + coeffs.beta_inflation * indicators.inflation
        + coeffs.beta_demand * demand
        + coeffs.beta_term * term_months
    )


def supply_loans(supply_raw: float, discounted_price: float) -> float:
    """Convert a lending volume in millions of euros into a number of loans."""
    if not discounted_price > 0:
        raise InvalidInputError(f"discounted_price must be > 0, got {discounted_price}")
    return supply_raw * EUROS_PER_MILLION / discounted_price


def _step_variation(current: float, previous: Optional[float]) -> Optional[float]:
    if previous is None or previous == 0:
        return None
    return (current - previous) / previous * 100.0


def sweep_market(
    demand_coeffs: DemandCoefficients,
    supply_coeffs: SupplyCoefficients,
    indicators: MacroIndicators,
    profile: HouseholdProfile,
    price: float,
    year_range: Sequence[int],
    step_years: int = 1,
    supply_demand_overrides: Optional[Mapping[int, float]] = None,
) -> list[MarketPoint]:
    """Evaluate demand and supply for terms ``first, first+step, ..., <= last`` years.

    The supply at each term is fed the demand at that same term, unless
    ``supply_demand_overrides`` maps the term (in months) to another value.
    Variations are step-over-step percentages and are ``None`` for the first point.
    """
    first, last = year_range
    if first > last:
        raise InvalidInputError(f"empty year range {first}..{last}")
    if first < 1:
        raise InvalidInputError(f"year range must start at >= 1, got {first}")
    if step_years < 1:
        raise InvalidInputError(f"step_years must be >= 1, got {step_years}")
    overrides = supply_demand_overrides or {}
    loan_price = discounted_price(price, profile.contribution_rate)

    points: list[MarketPoint] = []
    prev_d = prev_s = None
    for years in range(first, last + 1, step_years):
        n_months = years * MONTHS_PER_YEAR
        d = demand(demand_coeffs, profile.annual_income, indicators.market_rate, price, n_months)
        d_in = overrides.get(n_months, d)
        s_raw = supply_raw(supply_coeffs, indicators, d_in, n_months)
        s = supply_loans(s_raw, loan_price)
        points.append(
            MarketPoint(
                term_months=n_months,
                demand=d,
                supply_raw=s_raw,
                supply_loans=s,
                demand_step_variation=_step_variation(d, prev_d),
                supply_step_variation=_step_variation(s, prev_s),
                gap_ratio=d / s if s > 0 else math.nan,
                supply_demand_input=d_in,
            )
        )
        prev_d, prev_s = d, s
    return points


def market_gap(point: MarketPoint, epsilon: float = 1.0) -> MarketGap:
    """Excess of demand over converted supply; ``balanced`` when within ``epsilon`` loans."""
    if point.supply_loans == 0:
        raise InvalidInputError("supply_loans is zero; demand/supply ratio is undefined")
    diff = point.demand - point.supply_loans
    return MarketGap(diff, point.demand / point.supply_loans, abs(diff) < epsilon)
