import csv
import warnings
from dataclasses import replace

import pytest

from amortis.annuity import HouseholdProfile, RiskWeights, build_metrics_table
from amortis.calibration import (
    DEFAULT_TOLERANCES,
    GOLDEN_HEADER,
    GoldenTable,
    fit_risk_weights,
    infer_loan_rate,
    infer_monthly_income,
    load_golden,
    parse_golden_csv,
    risk_residuals,
    verify_golden,
)
from amortis.errors import CalibrationError, InvalidInputError
from amortis.report import run_table
from amortis.scenario import preset

P = 133_476.0
EQUAL = RiskWeights()


def synthetic(rate=0.039, income=4053.0, weights=EQUAL, years=(20, 60)):
    return build_metrics_table(HouseholdProfile(50_000, 0.3), rate, 190_680, years, weights, income)


class TestFixture:
    def test_bundled_table(self, golden):
        assert len(golden) == 41
        assert [r.duration_years for r in golden] == list(range(20, 61))
        assert golden.rows[0].monthly_payment == 801.8224
        assert golden.rows[-1].risk_index == 22.309012

    def test_header_is_exact(self):
        from importlib import resources

        text = resources.files("amortis").joinpath("data/golden_metrics.csv").read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(GOLDEN_HEADER)
        assert len(text.splitlines()) == 42

    def test_bad_header(self):
        with pytest.raises(InvalidInputError):
            parse_golden_csv("a,b\n1,2\n")

    def test_bad_cell_reports_line(self):
        text = ",".join(GOLDEN_HEADER) + "\n20,1,2,3,4,5,6\n21,x,2,3,4,5,6\n"
        with pytest.raises(InvalidInputError, match=":3:"):
            parse_golden_csv(text, "t.csv")

    def test_gap_in_durations(self):
        rows = synthetic(years=(20, 22))
        with pytest.raises(InvalidInputError):
            GoldenTable((rows[0], rows[2]))

    def test_load_from_path(self, tmp_path, golden):
        p = tmp_path / "g.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(GOLDEN_HEADER)
            for r in golden.rows[:3]:
                w.writerow([r.duration_years, r.monthly_payment, r.total_debt, r.relative_increase,
                            r.debt_ratio, r.repayment_capacity, r.risk_index])
        assert load_golden(p).rows == golden.rows[:3]


class TestRiskWeights:
    def test_published_table(self, golden):
        w, resid = fit_risk_weights(golden, 720)
        assert w.as_tuple() == pytest.approx((0.25,) * 4, abs=1e-3)
        assert resid < 1e-3

    def test_exact_solve_on_four_rows(self, golden):
        rows = [r for r in golden if r.duration_years in (20, 30, 40, 60)]
        w, resid = fit_risk_weights(rows, 720)
        # printed 6-7 digit rounding moves a square solve by up to ~3e-3
        assert w.as_tuple() == pytest.approx((0.25,) * 4, abs=5e-3)
        assert resid < 1e-9

    def test_round_trip(self):
        truth = RiskWeights(0.1, 0.2, 0.3, 0.4, 720)
        w, resid = fit_risk_weights(synthetic(weights=truth), 720)
        assert w.as_tuple() == pytest.approx(truth.as_tuple(), abs=1e-9)
        assert resid < 1e-9

    def test_rank_deficient(self, golden):
        with pytest.raises(CalibrationError):
            fit_risk_weights([golden.rows[5]] * 4, 720)

    def test_no_conditioning_warning_on_fixture(self, golden):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fit_risk_weights(golden, 720)

    def test_least_squares_optimality(self, golden):
        w, _ = fit_risk_weights(golden, 720)

        def sse(weights):
            return sum(e * e for e in risk_residuals(golden, weights))

        best = sse(w)
        for k in ("w1", "w2", "w3", "w4"):
            for d in (-1e-3, 1e-3):
                assert sse(replace(w, **{k: getattr(w, k) + d})) > best


class TestIncome:
    def test_published_table(self, golden):
        income, spread = infer_monthly_income(golden)
        assert income == pytest.approx(4052.99, abs=0.05)
        assert spread < 0.05

    def test_round_trip(self):
        income, spread = infer_monthly_income(synthetic(income=4166.667))
        assert income == pytest.approx(4166.667, rel=1e-12)
        assert spread < 1e-9

    def test_single_row(self, golden):
        row = golden.rows[0]
        assert infer_monthly_income([row]) == (row.monthly_payment / row.debt_ratio, 0.0)

    def test_zero_ratio(self, golden):
        with pytest.raises(InvalidInputError):
            infer_monthly_income([replace(golden.rows[0], debt_ratio=0.0)])


class TestRate:
    def test_published_table(self, golden):
        rate, resid = infer_loan_rate(golden, P, (0.001, 0.2))
        assert rate == pytest.approx(0.039, abs=1e-4)
        assert resid < 0.01

    def test_round_trip(self):
        rate, resid = infer_loan_rate(synthetic(rate=0.05), P)
        assert rate == pytest.approx(0.05, abs=1e-8)
        assert resid < 1e-6

    def test_no_root(self, golden):
        with pytest.raises(CalibrationError):
            infer_loan_rate(golden, P, (0.10, 0.20))

    def test_bad_bracket(self, golden):
        with pytest.raises(InvalidInputError):
            infer_loan_rate(golden, P, (0.2, 0.1))


class TestVerify:
    def test_golden_preset_passes(self, golden):
        report = verify_golden(run_table(preset("paper-annexe1")), golden)
        assert report.passed
        assert all(report.row_pass.values())

    def test_spec_income_value_misses_capacity_tolerance(self, golden):
        # 4052.99 is a rounding of the implied income; 4053.00 is needed for C_r at 1e-5.
        rows = synthetic(income=4052.99)
        report = verify_golden(rows, golden)
        assert not report.column_pass["Repayment_Capacity"]

    def test_perturbation_flagged(self, golden):
        rows = run_table(preset("paper-annexe1"))
        bad = list(rows)
        bad[7] = replace(bad[7], debt_ratio=bad[7].debt_ratio + 10 * DEFAULT_TOLERANCES["Debt_Ratio"])
        report = verify_golden(bad, golden)
        assert not report.passed
        assert report.row_pass[27] is False
        assert sum(not ok for ok in report.row_pass.values()) == 1
        assert report.failures == [(27, "Debt_Ratio", pytest.approx(1e-5, rel=0.1))]

    def test_stated_income_fails_only_ratio_columns(self, golden):
        rows = synthetic(income=50_000 / 12)
        report = verify_golden(rows, golden)
        cp = report.column_pass
        assert not cp["Debt_Ratio"]
        assert cp["Monthly_Payment"] and cp["Total_Debt"] and cp["Relative_Increase"]

    def test_symmetry(self, golden):
        rows = synthetic(income=4052.99)
        assert verify_golden(rows, golden).passed == verify_golden(golden, rows).passed
        rows = run_table(preset("paper-annexe1"))
        assert verify_golden(rows, golden).passed == verify_golden(golden, rows).passed

    def test_shape_mismatch(self, golden):
        with pytest.raises(InvalidInputError):
            verify_golden(golden.rows[:-1], golden)
        shifted = synthetic(years=(19, 59))
        with pytest.raises(InvalidInputError):
            verify_golden(shifted, golden)

    def test_custom_tolerance(self, golden):
        rows = run_table(preset("paper-annexe1"))
        assert not verify_golden(rows, golden, {"Total_Debt": 1e-6}).passed
        with pytest.raises(InvalidInputError):
            verify_golden(rows, golden, {"Nope": 1.0})
