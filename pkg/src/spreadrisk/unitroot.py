"""Augmented Dickey-Fuller and Phillips-Perron unit-root tests (constant only).

Critical values come from MacKinnon's response surfaces,
``cv(T) = b0 + b1/T + b2/T**2 + b3/T**3`` (MacKinnon, 2010, "Critical Values
for Cointegration Tests", Queen's Economics Department WP 1227, Table 2,
constant-no-trend case with one variable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError, ValidationError

MACKINNON_CONSTANT = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.040),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}
MIN_LENGTH = 20


@dataclass(frozen=True)
class UnitRootResult:
    method: str
    test_statistic: float
    lag_or_bandwidth: int
    critical_values: dict
    n_obs: int

    @property
    def reject_unit_root_at_5pct(self) -> bool:
        return self.test_statistic < self.critical_values["5%"]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "test_statistic": self.test_statistic,
            "lag_or_bandwidth": self.lag_or_bandwidth,
            "critical_values": dict(self.critical_values),
            "n_obs": self.n_obs,
            "reject_unit_root_at_5pct": self.reject_unit_root_at_5pct,
        }

    @classmethod
    def from_dict(cls, d) -> "UnitRootResult":
        return cls(d["method"], float(d["test_statistic"]), int(d["lag_or_bandwidth"]),
                   {k: float(v) for k, v in d["critical_values"].items()}, int(d["n_obs"]))


def critical_values(nobs: int) -> dict:
    return {
        level: b0 + b1 / nobs + b2 / nobs**2 + b3 / nobs**3
        for level, (b0, b1, b2, b3) in MACKINNON_CONSTANT.items()
    }


def _lstsq(y, X):
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return beta, resid


def _t_first(y, X):
    """Coefficient, standard error and residuals for column 0 of ``X``."""
    beta, resid = _lstsq(y, X)
    T, k = X.shape
    s2 = resid @ resid / (T - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(s2 * xtx_inv[0, 0])
    return beta[0], se, resid


def _adf_design(y, p, start):
    """Regression of dy_t on [y_{t-1}, const, dy_{t-1..t-p}] for t >= start (in dy positions)."""
    dy = np.diff(y)
    rows = np.arange(start, len(dy))
    cols = [y[rows], np.ones(len(rows))]
    for i in range(1, p + 1):
        cols.append(dy[rows - i])
    return dy[rows], np.column_stack(cols)


def _check(series):
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValidationError("unit-root tests take a 1-d series")
    if len(y) < MIN_LENGTH:
        raise InsufficientDataError(f"series of length {len(y)} is too short (need {MIN_LENGTH})")
    if not np.isfinite(y).all():
        raise ValidationError("series contains non-finite values")
    if np.ptp(y) == 0:
        raise DegenerateInputError("series is constant")
    return y


def adf_test(series, max_lag=12) -> UnitRootResult:
    """ADF t-test with the augmentation order chosen by AIC over ``0..max_lag``.

    Lag selection uses a common sample (the first ``max_lag`` differences are
    held back for every candidate); the chosen order is then re-estimated on
    the longest sample it allows.
    """
    y = _check(series)
    n = len(y)
    # keep enough degrees of freedom for short series
    max_lag = int(max(0, min(max_lag, math.floor(12 * (n / 100) ** 0.25), (n - 1) // 2 - 3)))
    best, best_aic = 0, np.inf
    for p in range(max_lag + 1):
        dy, X = _adf_design(y, p, max_lag)
        _, resid = _lstsq(dy, X)
        T = len(dy)
        ssr = resid @ resid
        if ssr <= 0:
            raise DegenerateInputError("series is perfectly predictable")
        aic = T * math.log(ssr / T) + 2 * X.shape[1]
        if aic < best_aic - 1e-12:
            best, best_aic = p, aic
    dy, X = _adf_design(y, best, best)
    gamma, se, _ = _t_first(dy, X)
    stat = gamma / se
    return UnitRootResult("ADF", float(stat), best, critical_values(len(dy)), len(dy))


def pp_bandwidth(nobs: int) -> int:
    return int(math.floor(4 * (nobs / 100) ** (2 / 9)))


def pp_test(series, bandwidth=None) -> UnitRootResult:
    """Phillips-Perron Z_tau: the Dickey-Fuller t-statistic corrected with a
    Bartlett-kernel long-run variance of the residuals."""
    y = _check(series)
    dy, X = _adf_design(y, 0, 0)
    T = len(dy)
    l = pp_bandwidth(T) if bandwidth is None else int(bandwidth)
    if l < 0:
        raise ValidationError("bandwidth must be >= 0")
    gamma, se, u = _t_first(dy, X)
    s2 = u @ u / (T - X.shape[1])
    g0 = u @ u / T
    lrv = g0
    for j in range(1, l + 1):
        lrv += 2.0 * (1.0 - j / (l + 1.0)) * (u[j:] @ u[:-j]) / T
    if lrv <= 0:
        raise DegenerateInputError("non-positive long-run variance estimate")
    lam = math.sqrt(lrv)
    t = gamma / se
    z = math.sqrt(g0 / lrv) * t - (lrv - g0) / (2.0 * lam) * (T * se / math.sqrt(s2))
    return UnitRootResult("PhillipsPerron", float(z), l, critical_values(T), T)


def unit_root_test(series, method="ADF", max_lag_or_bandwidth=None) -> UnitRootResult:
    m = method.lower().replace("-", "").replace("_", "")
    if m == "adf":
        return adf_test(series, 12 if max_lag_or_bandwidth is None else max_lag_or_bandwidth)
    if m in ("pp", "phillipsperron"):
        return pp_test(series, max_lag_or_bandwidth)
    raise ValidationError(f"unknown unit-root method {method!r}")
