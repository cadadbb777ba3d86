"""CSV ingestion for firm panels, macro series and downgrade ratings.

File layouts (UTF-8, ``.`` decimal separator, header row required)::

    firms.csv     firm_id,date,total_assets,total_liabilities,operating_cash_flow   (date YYYY-MM)
    prices.csv    firm_id,date,close                                               (date YYYY-MM-DD)
    zratios.csv   firm_id,date,x1,x2,x3,x4,x5                                      (date YYYY-MM)
    macro_*.csv   date,value             (YYYY-MM, YYYY-Qn or YYYY per declared frequency)
    ratings.csv   year,downgrade_pct
    weights.csv   firm_id,weight

Loaders either return a fully validated structure or raise a
:class:`~spreadrisk.errors.ValidationError` subclass naming the file and line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DomainError, GapError, ParseError, SchemaError, ValidationError

FIRM_COLUMNS = ["firm_id", "date", "total_assets", "total_liabilities", "operating_cash_flow"]
PRICE_COLUMNS = ["firm_id", "date", "close"]
ZRATIO_COLUMNS = ["firm_id", "date", "x1", "x2", "x3", "x4", "x5"]
MACRO_COLUMNS = ["date", "value"]
RATINGS_COLUMNS = ["year", "downgrade_pct"]
WEIGHT_COLUMNS = ["firm_id", "weight"]

FREQUENCIES = ("monthly", "quarterly", "annual")
_PANDAS_FREQ = {"monthly": "M", "quarterly": "Q", "annual": "Y"}
_DATE_PATTERNS = {
    "monthly": re.compile(r"^\d{4}-(0[1-9]|1[0-2])$"),
    "quarterly": re.compile(r"^\d{4}-Q[1-4]$"),
    "annual": re.compile(r"^\d{4}$"),
}
_DAY_PATTERN = r"^\d{4}-\d{2}-\d{2}$"


@dataclass(frozen=True, eq=False)
class FirmPanel:
    """Dated fundamentals and daily closes for one firm.

    ``fundamentals`` is indexed by a monthly ``PeriodIndex`` and carries
    ``total_assets``, ``total_liabilities`` and ``operating_cash_flow``.
    ``prices`` is a float Series of closes on a ``DatetimeIndex``.
    ``zratios`` (optional) holds the five Altman ratios ``x1..x5`` per month.
    """

    firm_id: str
    fundamentals: pd.DataFrame
    prices: pd.Series
    zratios: pd.DataFrame | None = None
    filled_months: tuple = field(default=())

    def __post_init__(self):
        _check_panel(self)

    def __eq__(self, other):
        if not isinstance(other, FirmPanel):
            return NotImplemented
        if self.firm_id != other.firm_id or self.filled_months != other.filled_months:
            return False
        if not self.fundamentals.equals(other.fundamentals):
            return False
        if not self.prices.equals(other.prices):
            return False
        if (self.zratios is None) != (other.zratios is None):
            return False
        return self.zratios is None or self.zratios.equals(other.zratios)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MacroTable:
    series_name: str
    native_frequency: str
    observations: pd.Series

    def __post_init__(self):
        if self.native_frequency not in FREQUENCIES:
            raise ValidationError(f"unknown frequency {self.native_frequency!r}")
        idx = self.observations.index
        if not isinstance(idx, pd.PeriodIndex) or idx.freqstr[0] != _PANDAS_FREQ[self.native_frequency][0]:
            raise ValidationError(
                f"{self.series_name}: observations must be indexed by "
                f"{self.native_frequency} periods"
            )
        if idx.has_duplicates:
            raise ValidationError(f"{self.series_name}: duplicate dates")
        if not idx.is_monotonic_increasing:
            raise ValidationError(f"{self.series_name}: dates not strictly increasing")

    def __eq__(self, other):
        if not isinstance(other, MacroTable):
            return NotImplemented
        return (
            self.series_name == other.series_name
            and self.native_frequency == other.native_frequency
            and self.observations.equals(other.observations)
        )

    __hash__ = None

    def __len__(self):
        return len(self.observations)


@dataclass(frozen=True, eq=False)
class RatingsSeries:
    """Annual percentage of issuers downgraded, indexed by integer year."""

    observations: pd.Series
    gaps: tuple = ()

    def __post_init__(self):
        years = self.observations.index
        if len(years) and not (np.diff(years.to_numpy()) > 0).all():
            raise ValidationError("ratings: years must be strictly increasing")
        vals = self.observations.to_numpy(dtype=float)
        bad = np.flatnonzero(~((vals >= 0) & (vals <= 100)))
        if bad.size:
            y = years[bad[0]]
            raise DomainError(f"ratings: downgrade_pct {vals[bad[0]]} for {y} outside [0, 100]")

    def __eq__(self, other):
        if not isinstance(other, RatingsSeries):
            return NotImplemented
        return self.gaps == other.gaps and self.observations.equals(other.observations)

    __hash__ = None

    def __len__(self):
        return len(self.observations)

    def to_macro(self) -> MacroTable:
        idx = pd.PeriodIndex([pd.Period(str(y), freq="Y") for y in self.observations.index])
        return MacroTable("ratings", "annual", pd.Series(self.observations.to_numpy(float), index=idx))


def _check_panel(panel: FirmPanel) -> None:
    f = panel.fundamentals
    fid = panel.firm_id
    if not isinstance(f.index, pd.PeriodIndex):
        raise ValidationError(f"firm {fid}: fundamentals need a monthly PeriodIndex")
    months = f.index.asi8
    if len(months) > 1 and not (np.diff(months) > 0).all():
        raise ValidationError(f"firm {fid}: months not strictly increasing")
    for col in ("total_assets", "total_liabilities"):
        bad = np.flatnonzero(~(f[col].to_numpy() > 0))
        if bad.size:
            raise DomainError(f"firm {fid}, {f.index[bad[0]]}: {col} must be > 0")
    p = panel.prices
    if len(p) > 1 and not (np.diff(p.index.asi8) > 0).all():
        raise ValidationError(f"firm {fid}: price dates not strictly increasing")
    if (p.to_numpy() <= 0).any():
        raise DomainError(f"firm {fid}: non-positive closing price")


# --------------------------------------------------------------------------
# low-level CSV helpers


def _read_strict(path, columns) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=False)
    except FileNotFoundError:
        raise
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty file, expected header {','.join(columns)}")
    except pd.errors.ParserError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError("malformed row (wrong number of fields)", path, int(m.group(1)) if m else None)
    header = list(frame.columns)
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}; expected {','.join(columns)}")
    extra = [c for c in header if c not in columns]
    if extra:
        raise SchemaError(f"{path}: unexpected column(s) {', '.join(extra)}")
    return frame[columns]


def _line(i) -> int:
    # header is line 1
    return int(i) + 2


def _floats(frame, col, path) -> np.ndarray:
    raw = frame[col]
    try:
        # exact decimal parsing; pandas' fast float parser is not round-trip safe
        vals = np.asarray(raw.to_numpy(), dtype=float)
    except ValueError:
        vals = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = bad[0]
        raise ParseError(f"{col}={raw.iloc[i]!r} is not a finite number", path, _line(i))
    return vals


def _check_dates(frame, col, pattern, path, what) -> None:
    ok = frame[col].str.fullmatch(pattern).to_numpy(dtype=bool)
    bad = np.flatnonzero(~ok)
    if bad.size:
        i = bad[0]
        raise ParseError(f"{col}={frame[col].iloc[i]!r} is not a {what} date", path, _line(i))


def _check_ids(frame, path) -> None:
    bad = np.flatnonzero((frame["firm_id"].str.strip() == "").to_numpy())
    if bad.size:
        raise ParseError("empty firm_id", path, _line(bad[0]))


def _strictly_increasing_by_firm(ids: np.ndarray, keys: np.ndarray, path, what):
    same = ids[1:] == ids[:-1]
    bad = np.flatnonzero(same & (keys[1:] <= keys[:-1]))
    if bad.size:
        i = bad[0] + 1
        kind = "duplicate" if keys[i] == keys[i - 1] else "out of order"
        raise ValidationError(f"{path}:{_line(i)}: firm {ids[i]}: {what} {kind}")
    # a firm's rows must be contiguous, otherwise ordering cannot be judged
    starts = ids[np.r_[True, ~same]]
    if len(set(starts)) != len(starts):
        dup = pd.Series(starts).loc[pd.Series(starts).duplicated()].iloc[0]
        raise ValidationError(f"{path}: rows for firm {dup} are not contiguous")


# --------------------------------------------------------------------------
# firm panel


def load_firm_panel(firms_path, prices_path, zratios_path=None, *, forward_fill=False) -> list[FirmPanel]:
    """Load ``firms.csv`` + ``prices.csv`` (+ optional ``zratios.csv``).

    Missing months inside a firm's range raise :class:`GapError` unless
    ``forward_fill`` is set, which carries fundamentals (never prices) forward.
    """
    firms = _read_strict(firms_path, FIRM_COLUMNS)
    _check_ids(firms, firms_path)
    _check_dates(firms, "date", _DATE_PATTERNS["monthly"].pattern, firms_path, "YYYY-MM")
    values = {c: _floats(firms, c, firms_path) for c in FIRM_COLUMNS[2:]}
    for col in ("total_assets", "total_liabilities"):
        bad = np.flatnonzero(values[col] <= 0)
        if bad.size:
            i = bad[0]
            raise DomainError(
                f"{firms_path}:{_line(i)}: firm {firms['firm_id'].iloc[i]}, "
                f"{firms['date'].iloc[i]}: {col} must be > 0"
            )
    months = pd.PeriodIndex(firms["date"], freq="M")
    ids = firms["firm_id"].to_numpy()
    _strictly_increasing_by_firm(ids, months.asi8, firms_path, "month")

    prices = _read_strict(prices_path, PRICE_COLUMNS)
    _check_ids(prices, prices_path)
    _check_dates(prices, "date", _DAY_PATTERN, prices_path, "YYYY-MM-DD")
    days = pd.to_datetime(prices["date"], format="%Y-%m-%d", errors="coerce")
    bad = np.flatnonzero(days.isna().to_numpy())
    if bad.size:
        raise ParseError(f"invalid calendar date {prices['date'].iloc[bad[0]]!r}", prices_path, _line(bad[0]))
    close = _floats(prices, "close", prices_path)
    bad = np.flatnonzero(close <= 0)
    if bad.size:
        raise DomainError(f"{prices_path}:{_line(bad[0])}: close must be > 0")
    pids = prices["firm_id"].to_numpy()
    _strictly_increasing_by_firm(pids, days.to_numpy().astype("int64"), prices_path, "date")

    zr = None
    if zratio_path_given(zratios_path):
        zr = _read_strict(zratios_path, ZRATIO_COLUMNS)
        _check_ids(zr, zratios_path)
        _check_dates(zr, "date", _DATE_PATTERNS["monthly"].pattern, zratios_path, "YYYY-MM")
        zvals = {c: _floats(zr, c, zratios_path) for c in ZRATIO_COLUMNS[2:]}
        zmonths = pd.PeriodIndex(zr["date"], freq="M")
        zids = zr["firm_id"].to_numpy()
        _strictly_increasing_by_firm(zids, zmonths.asi8, zratios_path, "month")

    known = set(ids)
    strays = [f for f in pd.unique(pids) if f not in known]
    if strays:
        raise ValidationError(f"{prices_path}: prices for unknown firm {strays[0]}")

    fund = pd.DataFrame(values, index=months)
    fund.index.name = "date"
    price_series = pd.Series(close, index=pd.DatetimeIndex(days, name="date"), name="close")
    zframe = None
    if zr is not None:
        zframe = pd.DataFrame(zvals, index=zmonths)
        zframe.index.name = "date"

    panels = []
    price_groups = _group_positions(pids)
    z_groups = _group_positions(zids) if zr is not None else {}
    for fid, pos in _group_positions(ids).items():
        f = fund.iloc[pos]
        filled = ()
        full = pd.period_range(f.index[0], f.index[-1], freq="M")
        if len(full) != len(f):
            missing = full.difference(f.index)
            if not forward_fill:
                raise GapError(f"{firms_path}: firm {fid} is missing month {missing[0]} (set forward_fill to carry fundamentals)")
            f = f.reindex(full).ffill()
            f.index.name = "date"
            filled = tuple(str(m) for m in missing)
        ppos = price_groups.get(fid, np.array([], dtype=int))
        p = price_series.iloc[ppos]
        counts = p.groupby(p.index.to_period("M")).size()
        for m in f.index:
            if str(m) in filled:
                continue
            if counts.get(m, 0) < 2:
                raise ValidationError(f"{prices_path}: firm {fid} has fewer than 2 daily prices in {m}")
        z = zframe.iloc[z_groups[fid]] if fid in z_groups else None
        panels.append(FirmPanel(str(fid), f, p, z, filled))
    return panels


def zratio_path_given(path) -> bool:
    return path is not None and str(path) != ""


def _group_positions(ids: np.ndarray) -> dict:
    out = {}
    codes, uniques = pd.factorize(ids, sort=False)
    order = np.argsort(codes, kind="stable")
    bounds = np.searchsorted(codes[order], np.arange(len(uniques) + 1))
    for k, fid in enumerate(uniques):
        out[fid] = order[bounds[k] : bounds[k + 1]]
    return out


def write_firm_panel(panels, firms_path, prices_path, zratios_path=None) -> None:
    """Inverse of :func:`load_firm_panel` (forward-filled months are written as-is)."""
    frames, pframes, zframes = [], [], []
    for p in panels:
        f = p.fundamentals.copy()
        f.insert(0, "date", f.index.astype(str))
        f.insert(0, "firm_id", p.firm_id)
        frames.append(f.reset_index(drop=True))
        pf = pd.DataFrame(
            {"firm_id": p.firm_id, "date": p.prices.index.strftime("%Y-%m-%d"), "close": p.prices.to_numpy()}
        )
        pframes.append(pf)
        if p.zratios is not None:
            z = p.zratios.copy()
            z.insert(0, "date", z.index.astype(str))
            z.insert(0, "firm_id", p.firm_id)
            zframes.append(z.reset_index(drop=True))
    pd.concat(frames, ignore_index=True)[FIRM_COLUMNS].to_csv(firms_path, index=False)
    pd.concat(pframes, ignore_index=True)[PRICE_COLUMNS].to_csv(prices_path, index=False)
    if zratios_path is not None and zframes:
        pd.concat(zframes, ignore_index=True)[ZRATIO_COLUMNS].to_csv(zratios_path, index=False)


# --------------------------------------------------------------------------
# macro tables, ratings, weights


def _period_index(dates: pd.Series, frequency: str) -> pd.PeriodIndex:
    if frequency == "annual":
        return pd.PeriodIndex([pd.Period(d, freq="Y") for d in dates], freq="Y")
    return pd.PeriodIndex(dates, freq=_PANDAS_FREQ[frequency])


def load_macro_table(path, declared_frequency, series_name=None) -> MacroTable:
    if declared_frequency not in FREQUENCIES:
        raise ValidationError(f"unknown frequency {declared_frequency!r}; use one of {', '.join(FREQUENCIES)}")
    path = Path(path)
    if series_name is None:
        series_name = path.stem[6:] if path.stem.startswith("macro_") else path.stem
    frame = _read_strict(path, MACRO_COLUMNS)
    dates = frame["date"].str.strip()
    pattern = _DATE_PATTERNS[declared_frequency]
    ok = dates.str.fullmatch(pattern.pattern).to_numpy(dtype=bool)
    bad = np.flatnonzero(~ok)
    if bad.size:
        i = bad[0]
        actual = next((f for f, p in _DATE_PATTERNS.items() if p.fullmatch(dates.iloc[i])), None)
        if actual is not None:
            raise ParseError(
                f"date {dates.iloc[i]!r} is {actual} but the series was declared {declared_frequency} "
                "(frequency mismatch)",
                path,
                _line(i),
            )
        raise ParseError(f"date {dates.iloc[i]!r} does not match the {declared_frequency} format", path, _line(i))
    values = _floats(frame, "value", path)
    idx = _period_index(dates, declared_frequency)
    keys = idx.asi8
    dup = np.flatnonzero(keys[1:] == keys[:-1])
    if dup.size or pd.Index(keys).has_duplicates:
        i = dup[0] + 1 if dup.size else int(np.flatnonzero(pd.Index(keys).duplicated())[0])
        raise ValidationError(f"{path}:{_line(i)}: duplicate date {dates.iloc[i]}")
    back = np.flatnonzero(keys[1:] < keys[:-1])
    if back.size:
        i = back[0] + 1
        raise ValidationError(f"{path}:{_line(i)}: date {dates.iloc[i]} out of order")
    idx.name = "date"
    return MacroTable(series_name, declared_frequency, pd.Series(values, index=idx, name=series_name))


def write_macro_table(table: MacroTable, path) -> None:
    frame = pd.DataFrame({"date": _format_periods(table.observations.index, table.native_frequency),
                          "value": table.observations.to_numpy()})
    frame.to_csv(path, index=False)


def _format_periods(idx: pd.PeriodIndex, frequency: str) -> list[str]:
    if frequency == "quarterly":
        return [f"{p.year}-Q{p.quarter}" for p in idx]
    if frequency == "annual":
        return [str(p.year) for p in idx]
    return [str(p) for p in idx]


def load_ratings(path, *, allow_gaps=False) -> RatingsSeries:
    frame = _read_strict(path, RATINGS_COLUMNS)
    _check_dates(frame, "year", _DATE_PATTERNS["annual"].pattern, path, "YYYY")
    years = frame["year"].astype(int).to_numpy()
    values = _floats(frame, "downgrade_pct", path)
    bad = np.flatnonzero((values < 0) | (values > 100))
    if bad.size:
        i = bad[0]
        raise DomainError(f"{path}:{_line(i)}: downgrade_pct {values[i]} outside [0, 100]")
    steps = np.diff(years)
    if (steps <= 0).any():
        i = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise ValidationError(f"{path}:{_line(i)}: year {years[i]} not strictly increasing")
    gaps = tuple(int(y) for a, b in zip(years[:-1], years[1:]) for y in range(a + 1, b))
    if gaps and not allow_gaps:
        raise GapError(f"{path}: missing year {gaps[0]} (pass allow_gaps to flag gaps instead)")
    obs = pd.Series(values, index=pd.Index(years, name="year"), name="downgrade_pct")
    return RatingsSeries(obs, gaps)


def write_ratings(series: RatingsSeries, path) -> None:
    frame = pd.DataFrame({"year": series.observations.index, "downgrade_pct": series.observations.to_numpy()})
    frame.to_csv(path, index=False)


def load_weights(path) -> dict[str, float]:
    frame = _read_strict(path, WEIGHT_COLUMNS)
    _check_ids(frame, path)
    w = _floats(frame, "weight", path)
    bad = np.flatnonzero(w < 0)
    if bad.size:
        raise DomainError(f"{path}:{_line(bad[0])}: weight must be >= 0")
    ids = frame["firm_id"].to_numpy()
    if pd.Index(ids).has_duplicates:
        raise ValidationError(f"{path}: duplicate firm_id {pd.Index(ids)[pd.Index(ids).duplicated()][0]}")
    return dict(zip(ids.tolist(), w.tolist()))


def write_weights(weights: dict, path) -> None:
    pd.DataFrame({"firm_id": list(weights), "weight": list(weights.values())}).to_csv(path, index=False)
