"""Scenario simulator for longer mortgage amortization periods."""

from amortis.annuity import (
    HouseholdProfile,
    LoanTerms,
    MetricsRow,
    RiskWeights,
    amortization_schedule,
    build_metrics_table,
    debt_ratio,
    monthly_payment,
    relative_cost_increase,
    repayment_capacity,
    risk_index,
    total_debt,
)
from amortis.errors import CalibrationError, InvalidInputError, ScenarioError
from amortis.market import (
    DemandCoefficients,
    MacroIndicators,
    MarketPoint,
    SupplyCoefficients,
    demand,
    discounted_price,
    market_gap,
    supply_loans,
    supply_raw,
    sweep_market,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "DemandCoefficients",
    "HouseholdProfile",
    "InvalidInputError",
    "LoanTerms",
    "MacroIndicators",
    "MarketPoint",
    "MetricsRow",
    "RiskWeights",
    "ScenarioError",
    "SupplyCoefficients",
    "amortization_schedule",
    "build_metrics_table",
    "debt_ratio",
    "demand",
    "discounted_price",
    "market_gap",
    "monthly_payment",
    "relative_cost_increase",
    "repayment_capacity",
    "risk_index",
    "supply_loans",
    "supply_raw",
    "sweep_market",
    "total_debt",
]
