import math

import numpy as np
import pytest
import statsmodels.api as sm
from statsmodels.tsa.stattools import adfuller

from spreadrisk.errors import DegenerateInputError, InsufficientDataError, ValidationError
from spreadrisk.unitroot import adf_test, critical_values, pp_bandwidth, pp_test, unit_root_test


def _series(rng):
    return {
        "noise": rng.standard_normal(200),
        "walk": np.cumsum(rng.standard_normal(200)),
        "mixed": 0.3 * np.cumsum(rng.standard_normal(131)) + rng.standard_normal(131),
    }


def test_white_noise_rejects_random_walk_does_not(rng):
    s = _series(rng)
    for test in (adf_test, pp_test):
        assert test(s["noise"]).reject_unit_root_at_5pct
        assert not test(s["walk"]).reject_unit_root_at_5pct


def test_adf_matches_statsmodels(rng):
    for y in _series(rng).values():
        ours = adf_test(y, 12)
        ml = min(12, math.floor(12 * (len(y) / 100) ** 0.25))
        stat, _, lag, nobs, cv, _ = adfuller(y, maxlag=ml, regression="c", autolag="AIC")
        assert ours.test_statistic == pytest.approx(stat, rel=1e-9)
        assert ours.lag_or_bandwidth == lag and ours.n_obs == nobs
        for k in cv:
            assert ours.critical_values[k] == pytest.approx(cv[k], abs=1e-12)


def test_pp_against_textbook_formula(rng):
    y = _series(rng)["mixed"]
    dy = np.diff(y)
    X = sm.add_constant(y[:-1])
    res = sm.OLS(dy, X).fit()
    u = res.resid
    T = len(u)
    l = math.floor(4 * (T / 100) ** (2 / 9))
    g = [u[j:] @ u[: T - j] / T for j in range(l + 1)]
    lrv = g[0] + 2 * sum((1 - j / (l + 1)) * g[j] for j in range(1, l + 1))
    t = res.tvalues[1]
    se = res.bse[1]
    s = math.sqrt(res.ssr / res.df_resid)
    z = math.sqrt(g[0] / lrv) * t - (lrv - g[0]) / (2 * math.sqrt(lrv)) * T * se / s
    ours = pp_test(y)
    assert ours.lag_or_bandwidth == l == pp_bandwidth(T)
    assert ours.test_statistic == pytest.approx(z, rel=1e-9)


def test_pp_bandwidth_zero_is_dickey_fuller(rng):
    y = _series(rng)["walk"]
    assert pp_test(y, bandwidth=0).test_statistic == pytest.approx(adf_test(y, max_lag=0).test_statistic, rel=1e-12)


def test_critical_values_large_sample():
    cv = critical_values(10**9)
    assert cv["5%"] == pytest.approx(-2.86154, abs=1e-6)
    assert cv["1%"] < cv["5%"] < cv["10%"]


def test_bad_inputs():
    with pytest.raises(DegenerateInputError):
        adf_test(np.full(50, 3.0))
    with pytest.raises(DegenerateInputError):
        pp_test(np.full(50, 3.0))
    with pytest.raises(InsufficientDataError):
        adf_test(np.arange(10.0))
    with pytest.raises(ValidationError):
        adf_test(np.r_[np.arange(30.0), np.nan])
    with pytest.raises(ValidationError):
        unit_root_test(np.arange(30.0), "KPSS")


def test_dispatch(rng):
    y = rng.standard_normal(100)
    assert unit_root_test(y, "ADF").method == "ADF"
    assert unit_root_test(y, "pp", 3).lag_or_bandwidth == 3


@pytest.mark.slow
def test_size_and_power():
    rng = np.random.default_rng(99)
    size = sum(adf_test(np.cumsum(rng.standard_normal(200))).reject_unit_root_at_5pct for _ in range(100))
    power = 0
    for _ in range(100):
        e = rng.standard_normal(500)
        y = np.zeros(500)
        for t in range(1, 500):
            y[t] = 0.5 * y[t - 1] + e[t]
        power += adf_test(y).reject_unit_root_at_5pct
    assert size <= 10
    assert power >= 95
