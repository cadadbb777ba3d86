import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadrisk.errors import InsufficientDataError, ValidationError
from spreadrisk.ingest import MacroTable
from spreadrisk.prep import cubic_spline_to_monthly
from spreadrisk.spline import NaturalCubicSpline


def test_three_knot_midpoint():
    s = NaturalCubicSpline([0, 1, 2], [0, 1, 0])
    # curvature at the middle knot is -3; value at 0.5 is 0.5 + 3 * 0.375 / 6
    assert s(0.5) == pytest.approx(0.6875, abs=1e-14)
    assert s.derivative(0.0, order=2) == 0.0
    assert s.derivative(2.0, order=2) == 0.0


def test_linear_data_reproduced():
    x = np.array([0.0, 1.0, 3.0, 4.0, 7.0])
    s = NaturalCubicSpline(x, 2 * x + 1)
    t = np.linspace(-2, 9, 45)
    np.testing.assert_allclose(s(t), 2 * t + 1, rtol=0, atol=1e-12)


def test_constant_and_linear_extension():
    s = NaturalCubicSpline([0, 1, 2, 3], [5, 5, 5, 5])
    assert np.all(s(np.linspace(-3, 6, 10)) == 5)
    s = NaturalCubicSpline([0, 1, 2], [0, 1, 0])
    slope = float(s.derivative(2.0))
    assert s(4.0) == pytest.approx(slope * 2.0, abs=1e-12)


def test_rejects_bad_knots():
    with pytest.raises(InsufficientDataError):
        NaturalCubicSpline([0, 1], [0, 1])
    with pytest.raises(ValidationError):
        NaturalCubicSpline([0, 2, 1], [0, 1, 2])


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=12))
def test_knots_reproduced(values):
    x = np.arange(len(values), dtype=float) * 3.0
    s = NaturalCubicSpline(x, values)
    np.testing.assert_allclose(s(x), values, rtol=1e-9, atol=1e-9)
    # continuity of the first derivative at interior knots
    for k in x[1:-1]:
        assert s.derivative(k - 1e-7) == pytest.approx(float(s.derivative(k + 1e-7)), rel=1e-4, abs=1e-3)


def test_quarterly_knots_exact_in_monthly_output():
    q = pd.period_range("2001Q1", periods=8, freq="Q")
    vals = np.array([100.0, 101.3, 99.7, 102.2, 104.9, 103.1, 105.5, 107.0])
    m = cubic_spline_to_monthly(MacroTable("gdp", "quarterly", pd.Series(vals, index=q)))
    assert len(m) == 24
    ends = pd.PeriodIndex([p.asfreq("M", how="end") for p in q], freq="M")
    assert (m.loc[ends].to_numpy() == vals).all()
    mid = cubic_spline_to_monthly(MacroTable("gdp", "quarterly", pd.Series(vals, index=q)), knot_placement="mid")
    assert mid.loc[pd.Period("2001-02", "M")] == vals[0]


def test_annual_table():
    a = pd.period_range("2000", periods=4, freq="Y")
    m = cubic_spline_to_monthly(MacroTable("x", "annual", pd.Series([1.0, 2.0, 3.0, 4.0], index=a)))
    assert len(m) == 48
    # linear data stays linear at a monthly step of 1/12
    np.testing.assert_allclose(np.diff(m.to_numpy()), 1 / 12, atol=1e-12)
