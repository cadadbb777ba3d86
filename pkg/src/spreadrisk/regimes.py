"""Crisis / non-crisis split of the index slope."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError, InsufficientDataError, ThinRegimeError, ValidationError
from .ols import RegressionFit, ols_fit

log = logging.getLogger(__name__)

MIN_REGIME_OBS = 12


@dataclass(frozen=True)
class RegimeWindow:
    label: str
    start: pd.Period
    end: pd.Period

    def __post_init__(self):
        object.__setattr__(self, "start", pd.Period(self.start, freq="M"))
        object.__setattr__(self, "end", pd.Period(self.end, freq="M"))
        if self.start > self.end:
            raise ConfigError(f"regime {self.label}: start {self.start} is after end {self.end}")

    @classmethod
    def parse(cls, label, text) -> "RegimeWindow":
        """``"2007-07..2009-03"``"""
        start, sep, end = text.partition("..")
        if not sep:
            raise ConfigError(f"regime {label}: expected 'YYYY-MM..YYYY-MM', got {text!r}")
        try:
            return cls(label, start.strip(), end.strip())
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"regime {label}: bad month in {text!r}") from None

    @property
    def n_months(self) -> int:
        return (self.end - self.start).n + 1

    def to_dict(self) -> dict:
        return {"label": self.label, "start": str(self.start), "end": str(self.end)}

    @classmethod
    def from_dict(cls, d) -> "RegimeWindow":
        return cls(d["label"], d["start"], d["end"])

    def __str__(self):
        return f"{self.label} {self.start}..{self.end}"


SUBPRIME = RegimeWindow("subprime", "2007-07", "2009-03")
# bounds are a guess from the "2000-2002" phrasing
DOTCOM = RegimeWindow("dotcom", "2000-01", "2002-12")
PRESETS = {w.label: w for w in (SUBPRIME, DOTCOM)}


def crisis_mask(dates, window: RegimeWindow) -> np.ndarray:
    """0/1 float vector: 1 for months inside ``[start, end]``."""
    idx = pd.PeriodIndex(dates, freq="M")
    if len(idx) > 1 and not idx.is_monotonic_increasing:
        raise ValidationError("dates must be sorted")
    mask = ((idx >= window.start) & (idx <= window.end)).astype(float)
    if not mask.any():
        raise ThinRegimeError(f"regime {window} does not overlap the sample {idx[0]}..{idx[-1]}")
    return np.asarray(mask)


@dataclass(eq=False)
class RegimeResult:
    window: RegimeWindow
    fit: RegressionFit
    n_crisis: int
    n_calm: int
    collapsed: bool = False

    @property
    def lambda_crisis(self) -> float:
        return float(self.fit.coef.get("delta_rho_crisis", np.nan))

    @property
    def lambda_calm(self) -> float:
        return float(self.fit.coef.get("delta_rho_noncrisis", np.nan))

    def to_dict(self) -> dict:
        return {
            "window": self.window.to_dict(),
            "n_crisis": self.n_crisis,
            "n_noncrisis": self.n_calm,
            "collapsed": self.collapsed,
            "fit": self.fit.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "RegimeResult":
        return cls(RegimeWindow.from_dict(d["window"]), RegressionFit.from_dict(d["fit"]),
                   int(d["n_crisis"]), int(d["n_noncrisis"]), bool(d["collapsed"]))


def regime_design(delta_rho, mask) -> np.ndarray:
    x = np.asarray(delta_rho, dtype=float)
    m = np.asarray(mask, dtype=float)
    return np.column_stack([np.ones(len(x)), m * x, (1.0 - m) * x])


def regime_regression(delta_ys, delta_rho, mask, min_obs=MIN_REGIME_OBS, dates=()) -> RegressionFit:
    """OLS of ``y`` on ``[const, mask*x, (1-mask)*x]``.

    Coefficients are named ``phi``, ``delta_rho_crisis`` and
    ``delta_rho_noncrisis``. When one regime is empty the fit collapses to the
    single-slope regression with a warning, keeping only the populated column.
    """
    y = np.asarray(delta_ys, dtype=float)
    x = np.asarray(delta_rho, dtype=float)
    m = np.asarray(mask, dtype=float)
    if not (len(y) == len(x) == len(m)):
        raise ValidationError("delta_ys, delta_rho and mask differ in length")
    if not np.isin(m, (0.0, 1.0)).all():
        raise ValidationError("mask must contain only 0 and 1")
    if len(y) < 24:
        raise InsufficientDataError(f"regime regression needs at least 24 observations, got {len(y)}")
    n1 = int(m.sum())
    n0 = len(m) - n1
    X = regime_design(x, m)
    names = ["phi", "delta_rho_crisis", "delta_rho_noncrisis"]
    if n1 == 0 or n0 == 0:
        keep = 1 if n0 == 0 else 2
        dropped = names[3 - keep]
        msg = f"one regime is empty; dropping {dropped} and fitting a single slope"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        log.warning(msg)
        return ols_fit(y, X[:, [0, keep]], [names[0], names[keep]], dates=dates)
    if min(n0, n1) < min_obs:
        which = "crisis" if n1 < min_obs else "non-crisis"
        raise ThinRegimeError(f"{which} regime has {min(n0, n1)} observations, need at least {min_obs}")
    return ols_fit(y, X, names, dates=dates)


def run_regime(delta_ys: pd.Series, delta_rho: pd.Series, window: RegimeWindow, min_obs=MIN_REGIME_OBS) -> RegimeResult:
    joined = pd.concat([delta_ys.rename("y"), delta_rho.rename("x")], axis=1, join="inner")
    mask = crisis_mask(joined.index, window)
    dates = tuple(str(d) for d in joined.index)
    fit = regime_regression(joined["y"].to_numpy(), joined["x"].to_numpy(), mask, min_obs, dates)
    n1 = int(mask.sum())
    return RegimeResult(window, fit, n1, len(mask) - n1, collapsed=fit.k_params == 2)
