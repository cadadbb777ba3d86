"""Firm-level default-risk proxies and their cross-firm aggregation.

Four level series come out of this module, one value per month:

* ``CFv`` - coefficient of variation of operating cash flow over a rolling window
* ``DD``  - distance to default, ``(ln assets - ln liabilities) / monthly volatility``
* ``Z``   - Altman Z-score from five accounting ratios
* ``IR``  - monthly downgrade percentage (spline of the annual ratings series)

Months where a proxy is undefined for a firm (zero volatility, near-zero mean
cash flow) are dropped from that firm's series and excluded from aggregation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DomainError, GapError, InsufficientDataError, ValidationError

logger = logging.getLogger(__name__)

PROXY_NAMES = ("CFv", "DD", "Z", "IR")
ALTMAN_1968 = (1.2, 1.4, 3.3, 0.6, 1.0)


@dataclass(frozen=True)
class ZInputs:
    """Altman ratios: working capital, retained earnings, EBIT and sales over
    total assets (x1, x2, x3, x5); market equity over book liabilities (x4)."""

    x1: float
    x2: float
    x3: float
    x4: float
    x5: float

    def __post_init__(self):
        vals = (self.x1, self.x2, self.x3, self.x4, self.x5)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"Z-score ratios must be finite, got {vals}")
        if self.x5 < 0:
            raise DomainError(f"sales/total assets (x5) must be >= 0, got {self.x5}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4, self.x5])


@dataclass(frozen=True, eq=False)
class ProxySeries:
    """Monthly level series for one proxy. ``flagged`` lists months dropped as undefined."""

    name: str
    observations: pd.Series
    flagged: tuple = field(default=())

    def __post_init__(self):
        idx = self.observations.index
        if not isinstance(idx, pd.PeriodIndex):
            raise ValidationError(f"{self.name}: observations need a monthly PeriodIndex")
        if len(idx) > 1 and not (np.diff(idx.asi8) > 0).all():
            raise ValidationError(f"{self.name}: months must be strictly increasing")

    def __eq__(self, other):
        if not isinstance(other, ProxySeries):
            return NotImplemented
        return (
            self.name == other.name
            and self.flagged == other.flagged
            and self.observations.equals(other.observations)
        )

    __hash__ = None


# --------------------------------------------------------------------------
# scalar definitions


def monthly_stock_volatility(daily_prices) -> float:
    """Sample standard deviation of within-month daily log returns.

    ``daily_prices`` is a sequence of closes or of ``(date, close)`` pairs,
    already restricted to one month and in date order.
    """
    closes = [p[1] if isinstance(p, (tuple, list)) else p for p in daily_prices]
    if len(closes) < 2:
        raise InsufficientDataError("at least 2 daily prices are needed for a monthly volatility")
    arr = np.asarray(closes, dtype=float)
    if not (arr > 0).all():
        raise DomainError("prices must be strictly positive")
    rets = np.diff(np.log(arr))
    if rets.size < 2:
        # a single return has no sample dispersion
        return 0.0
    return float(np.std(rets, ddof=1))


def distance_to_default(total_assets, total_liabilities, monthly_vol) -> float:
    if not total_assets > 0 or not total_liabilities > 0:
        raise DomainError("assets and liabilities must be strictly positive")
    if monthly_vol < 0 or not math.isfinite(monthly_vol):
        raise DomainError(f"volatility must be finite and >= 0, got {monthly_vol}")
    if monthly_vol == 0:
        raise DomainError("distance to default undefined for zero volatility")
    return (math.log(total_assets) - math.log(total_liabilities)) / monthly_vol


def altman_z(inputs: ZInputs, coefficients=ALTMAN_1968) -> float:
    return float(np.dot(np.asarray(coefficients, dtype=float), inputs.as_array()))


def cash_flow_volatility(cash_flows, epsilon=1e-9) -> float:
    """``sd / |mean|`` of a window of operating cash flows."""
    arr = np.asarray(cash_flows, dtype=float)
    if arr.size < 2:
        raise InsufficientDataError("cash-flow window needs at least 2 values")
    mean = arr.mean()
    if abs(mean) <= epsilon:
        raise DomainError(f"cash-flow mean {mean:g} is within {epsilon:g} of zero")
    return float(arr.std(ddof=1) / abs(mean))


# --------------------------------------------------------------------------
# vectorised per-firm series


def volatility_by_month(prices: pd.Series) -> pd.Series:
    """Per-month sample sd of daily log returns (returns never span two months)."""
    months = prices.index.to_period("M")
    logp = np.log(prices.to_numpy(dtype=float))
    codes = months.asi8
    same = codes[1:] == codes[:-1]
    rets = np.diff(logp)[same]
    grp = codes[1:][same]
    out = pd.Series(rets).groupby(grp).std(ddof=1)
    # months with one return have no dispersion, matching the scalar definition
    counts = pd.Series(grp).value_counts()
    out[counts.reindex(out.index).to_numpy() < 2] = 0.0
    out.index = pd.PeriodIndex.from_ordinals(out.index.to_numpy(), freq="M")
    return out


def firm_dd(panel, vol: pd.Series | None = None) -> pd.Series:
    if vol is None:
        vol = volatility_by_month(panel.prices)
    f = panel.fundamentals
    v = vol.reindex(f.index).to_numpy()
    num = np.log(f["total_assets"].to_numpy()) - np.log(f["total_liabilities"].to_numpy())
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = np.where(v > 0, num / v, np.nan)
    return pd.Series(dd, index=f.index)


def firm_z(panel, coefficients=ALTMAN_1968) -> pd.Series:
    if panel.zratios is None:
        return pd.Series(dtype=float, index=pd.PeriodIndex([], freq="M"))
    z = panel.zratios[["x1", "x2", "x3", "x4", "x5"]].to_numpy() @ np.asarray(coefficients, dtype=float)
    return pd.Series(z, index=panel.zratios.index)


def firm_cfv(panel, window=12, epsilon=1e-9) -> pd.Series:
    cf = panel.fundamentals["operating_cash_flow"]
    roll = cf.rolling(window, min_periods=window)
    mean = roll.mean()
    sd = roll.std(ddof=1)
    ok = mean.abs() > epsilon
    return (sd / mean.abs()).where(ok)


@dataclass
class ProxyOptions:
    cfv_window: int = 12
    cfv_epsilon: float = 1e-9
    z_coefficients: tuple = ALTMAN_1968

    def __post_init__(self):
        if self.cfv_window < 2:
            raise ValidationError("cfv_window must be >= 2")


def firm_proxies(panel, options: ProxyOptions | None = None) -> dict[str, ProxySeries]:
    """CFv, DD and Z series for one firm, undefined months flagged and dropped."""
    options = options or ProxyOptions()
    raw = {
        "CFv": firm_cfv(panel, options.cfv_window, options.cfv_epsilon),
        "DD": firm_dd(panel),
        "Z": firm_z(panel, options.z_coefficients),
    }
    out = {}
    for name, s in raw.items():
        if name == "CFv":
            # the first window-1 months are warm-up, not flagged months
            s = s.iloc[options.cfv_window - 1 :]
        undefined = s.isna().to_numpy()
        flagged = tuple(str(m) for m in s.index[undefined])
        out[name] = ProxySeries(name, s[~undefined].astype(float), flagged)
    return out


def aggregate_firms(per_firm: dict, weights: dict | None = None, name=None) -> ProxySeries:
    """Weighted cross-firm average per month over the firms defined that month.

    ``per_firm`` maps firm id to a :class:`ProxySeries` (or a monthly Series).
    Weights default to equal and are renormalised over the defined subset.
    """
    if not per_firm:
        raise ValidationError("no firms to aggregate")
    series = {}
    for fid, s in per_firm.items():
        obs = s.observations if isinstance(s, ProxySeries) else s
        series[fid] = obs.dropna()
        if name is None and isinstance(s, ProxySeries):
            name = s.name
    frame = pd.DataFrame(series)
    if frame.empty:
        raise GapError(f"{name}: no defined values for any firm")
    full = pd.period_range(frame.index.min(), frame.index.max(), freq="M")
    out = _weighted_mean(frame.reindex(full), weights, name or "proxy")
    return ProxySeries(name or "proxy", out.rename(None))


def _weighted_mean(frame: pd.DataFrame, weights: dict | None, name) -> pd.Series:
    """Row-wise weighted mean over the defined (non-NaN) entries of a months x firms frame."""
    if weights is None:
        wv = np.ones(frame.shape[1])
    else:
        missing = [fid for fid in frame.columns if fid not in weights]
        if missing:
            raise ValidationError(f"no weight for firm {missing[0]}")
        wv = np.array([float(weights[fid]) for fid in frame.columns])
        if (wv < 0).any():
            raise DomainError("firm weights must be >= 0")
        if wv.sum() <= 0:
            raise DomainError("firm weights must sum to a positive number")
    vals = frame.to_numpy()
    defined = ~np.isnan(vals)
    wsum = defined.astype(float) @ wv
    empty = np.flatnonzero(wsum <= 0)
    if empty.size:
        raise GapError(f"{name}: no firm (with positive weight) defined in {frame.index[empty[0]]}")
    num = np.where(defined, vals, 0.0) @ wv
    return pd.Series(num / wsum, index=frame.index, name=name)


def panel_volatility(panels) -> pd.DataFrame:
    """Monthly volatility for every firm at once (months x firms)."""
    ids = [p.firm_id for p in panels]
    lengths = np.array([len(p.prices) for p in panels])
    firm = np.repeat(np.arange(len(panels)), lengths)
    days = np.concatenate([p.prices.index.to_numpy() for p in panels])
    # months since 1970-01, the same ordinals monthly periods use
    month = days.astype("datetime64[M]").astype(np.int64)
    logp = np.log(np.concatenate([p.prices.to_numpy(dtype=float) for p in panels]))
    same = (firm[1:] == firm[:-1]) & (month[1:] == month[:-1])
    r = np.diff(logp)[same]
    m0 = month.min() if len(month) else 0
    nm = int(month.max() - m0 + 1) if len(month) else 0
    key = firm[1:][same] * nm + (month[1:][same] - m0)
    size = len(panels) * nm
    n = np.bincount(key, minlength=size).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.bincount(key, r, minlength=size) / n
        ss = np.bincount(key, (r - mean[key]) ** 2, minlength=size)
        var = ss / (n - 1)
    vol = np.sqrt(var)
    vol[n == 1] = 0.0
    vol[n == 0] = np.nan
    idx = pd.PeriodIndex.from_ordinals(np.arange(m0, m0 + nm), freq="M")
    return pd.DataFrame(vol.reshape(len(panels), nm).T, index=idx, columns=ids)


def _stack_monthly(frames, columns) -> tuple[pd.PeriodIndex, dict]:
    """Place per-firm monthly frames side by side: ``{column: months x firms array}``."""
    ords = [f.index.asi8 for f in frames]
    lo = min(o[0] for o in ords if len(o))
    hi = max(o[-1] for o in ords if len(o))
    out = {c: np.full((hi - lo + 1, len(frames)), np.nan) for c in columns}
    for i, (f, o) in enumerate(zip(frames, ords)):
        vals = f[list(columns)].to_numpy(dtype=float) if list(f.columns) != list(columns) else f.to_numpy(dtype=float)
        for j, c in enumerate(columns):
            out[c][o - lo, i] = vals[:, j]
    return pd.PeriodIndex.from_ordinals(np.arange(lo, hi + 1), freq="M"), out


def panel_proxies(panels, options: ProxyOptions | None = None) -> tuple[dict, int]:
    """CFv, DD and Z for all firms as months x firms frames (undefined = NaN).

    Returns the frames and the number of flagged (undefined) firm-months.
    Equivalent to :func:`firm_proxies` applied firm by firm.
    """
    options = options or ProxyOptions()
    ids = [p.firm_id for p in panels]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate firm ids in panel list")
    months, fund = _stack_monthly([p.fundamentals for p in panels],
                                  ["total_assets", "total_liabilities", "operating_cash_flow"])
    ta, tl = fund["total_assets"], fund["total_liabilities"]
    present = ~np.isnan(ta)

    vol = panel_volatility(panels).reindex(index=months, columns=ids).to_numpy()
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.log(ta) - np.log(tl)
        dd = np.where(vol > 0, num / vol, np.nan)
    flagged = int((present & ~(vol > 0)).sum())

    cf = pd.DataFrame(fund["operating_cash_flow"], index=months)
    roll = cf.rolling(options.cfv_window, min_periods=options.cfv_window)
    mean = roll.mean().to_numpy()
    sd = roll.std(ddof=1).to_numpy()
    with np.errstate(invalid="ignore"):
        ok = np.abs(mean) > options.cfv_epsilon
    cfv = np.where(ok, sd / np.abs(mean), np.nan)
    # warm-up months (first window-1 of each firm) are not flagged
    counts = np.cumsum(present, axis=0)
    warm = present & (counts >= options.cfv_window)
    cfv[~warm] = np.nan
    flagged += int((warm & np.isnan(cfv)).sum())

    frames = {
        "CFv": pd.DataFrame(cfv, index=months, columns=ids),
        "DD": pd.DataFrame(dd, index=months, columns=ids),
    }
    with_z = [p for p in panels if p.zratios is not None]
    if with_z:
        zmonths, zr = _stack_monthly([p.zratios for p in with_z], ["x1", "x2", "x3", "x4", "x5"])
        coef = np.asarray(options.z_coefficients, dtype=float)
        z = sum(coef[j] * zr[c] for j, c in enumerate(("x1", "x2", "x3", "x4", "x5")))
        frames["Z"] = pd.DataFrame(z, index=zmonths, columns=[p.firm_id for p in with_z])
    return frames, flagged


def compute_proxies(panels, ratings_monthly: pd.Series | None = None, weights=None,
                    options: ProxyOptions | None = None) -> pd.DataFrame:
    """Aggregate CFv/DD/Z across firms and attach the monthly IR levels.

    Returns a frame indexed by month with columns ``CFv, DD, Z, IR`` restricted
    to months where every available column is defined.
    """
    if not panels:
        raise ValidationError("no firms to aggregate")
    frames, flagged = panel_proxies(panels, options)
    if flagged:
        logger.info("%d firm-months flagged undefined and excluded", flagged)
    cols = {}
    for pname, frame in frames.items():
        frame = frame.dropna(axis=1, how="all")
        if frame.shape[1] == 0:
            continue
        defined = frame.notna().any(axis=1).to_numpy()
        first = int(np.argmax(defined))
        last = len(defined) - int(np.argmax(defined[::-1]))
        frame = frame.iloc[first:last]
        frame.index = pd.PeriodIndex(frame.index, freq="M")
        full = pd.period_range(frame.index[0], frame.index[-1], freq="M")
        cols[pname] = _weighted_mean(frame.reindex(full), weights, pname)
    if ratings_monthly is not None:
        cols["IR"] = ratings_monthly
    frame = pd.DataFrame(cols)
    frame = frame.dropna()
    frame.index.name = "date"
    return frame[[c for c in PROXY_NAMES if c in frame.columns]]


def write_proxies(frame: pd.DataFrame, path) -> None:
    out = frame.copy()
    out.index = out.index.astype(str)
    out.index.name = "date"
    out.to_csv(path)


def read_proxies(path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype=str)
    if "date" not in frame.columns:
        raise ValidationError(f"{path}: missing date column")
    idx = pd.PeriodIndex(frame.pop("date"), freq="M", name="date")
    data = {c: np.asarray(frame[c].to_numpy(), dtype=float) for c in frame.columns}
    return pd.DataFrame(data, index=idx)
