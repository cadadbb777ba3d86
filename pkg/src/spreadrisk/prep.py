"""Monthly alignment: disaggregation, change transforms, lags and trimming.

Transform chains are lists of steps applied in order after any spline step:

``log``   natural log of positive levels
``pct``   percent change, ``100 * (x_t - x_{t-1}) / x_{t-1}``
``diff``  first difference
``dlog``  log-percent change, ``100 * (ln x_t - ln x_{t-1})``
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import ConfigError, DomainError, InsufficientDataError, ValidationError
from .ingest import MacroTable
from .spline import NaturalCubicSpline

STEPS = ("log", "pct", "diff", "dlog")
MIN_ALIGNED = 24

# canonical column order, so output never depends on registration order
PROXY_ORDER = ("CFv", "dDD", "dZ", "dIR")
CONTROL_ORDER = ("dCPI", "dIPI", "dFFR", "dYS_lag1", "dPPI", "dlnGDP")


def pct_change(series: pd.Series) -> pd.Series:
    """Percent change from the previous month; drops the first observation."""
    x = series.to_numpy(dtype=float)
    prev = x[:-1]
    zero = np.flatnonzero(prev == 0)
    if zero.size:
        raise DomainError(f"{series.name or 'series'}: zero level in {series.index[zero[0]]}, percent change undefined")
    out = 100.0 * (x[1:] - prev) / prev
    return pd.Series(out, index=series.index[1:], name=series.name)


def log_transform(series: pd.Series) -> pd.Series:
    x = series.to_numpy(dtype=float)
    bad = np.flatnonzero(~(x > 0))
    if bad.size:
        raise DomainError(f"{series.name or 'series'}: non-positive value {x[bad[0]]} in {series.index[bad[0]]}, log undefined")
    return pd.Series(np.log(x), index=series.index, name=series.name)


def first_difference(series: pd.Series) -> pd.Series:
    x = series.to_numpy(dtype=float)
    return pd.Series(np.diff(x), index=series.index[1:], name=series.name)


def apply_chain(series: pd.Series, steps) -> pd.Series:
    for step in steps:
        if step == "log":
            series = log_transform(series)
        elif step == "pct":
            series = pct_change(series)
        elif step == "diff":
            series = first_difference(series)
        elif step == "dlog":
            series = 100.0 * first_difference(log_transform(series))
        else:
            raise ConfigError(f"unknown transform step {step!r}; expected one of {', '.join(STEPS)}")
    return series


def _knot_month(period: pd.Period, placement: str) -> pd.Period:
    start = period.asfreq("M", how="start")
    end = period.asfreq("M", how="end")
    if placement == "end":
        return end
    if placement == "mid":
        n = (end - start).n + 1
        return start + n // 2
    raise ConfigError(f"spline.knot_placement must be 'end' or 'mid', got {placement!r}")


def cubic_spline_to_monthly(table: MacroTable, knot_placement="end") -> pd.Series:
    """Disaggregate a quarterly or annual table to every month of its periods.

    Knots sit at the last (or middle) month of each native period; months
    before the first or after the last knot use the natural linear extension.
    """
    obs = table.observations
    if table.native_frequency == "monthly":
        out = obs.copy()
        out.index = pd.PeriodIndex(obs.index, freq="M")
        return out
    if len(obs) < 3:
        raise InsufficientDataError(f"{table.series_name}: spline needs at least 3 knots, got {len(obs)}")
    knots = pd.PeriodIndex([_knot_month(p, knot_placement) for p in obs.index], freq="M")
    spline = NaturalCubicSpline(knots.asi8.astype(float), obs.to_numpy(dtype=float))
    months = pd.period_range(obs.index[0].asfreq("M", how="start"), obs.index[-1].asfreq("M", how="end"), freq="M")
    values = spline(months.asi8.astype(float))
    # knot values are reproduced exactly rather than to rounding error
    pos = months.get_indexer(knots)
    values[pos] = obs.to_numpy(dtype=float)
    return pd.Series(values, index=months, name=table.series_name)


def yield_spread(corporate: pd.DataFrame, treasury: pd.DataFrame) -> pd.Series:
    """Mean corporate yield across maturities/grades minus mean treasury yield."""
    spread = corporate.mean(axis=1) - treasury.mean(axis=1)
    return spread.dropna().rename("YS")


# --------------------------------------------------------------------------
# aligned dataset


@dataclass(frozen=True)
class ColumnSpec:
    """One aligned column: ``name`` built from ``source`` through ``steps``."""

    name: str
    source: str
    steps: tuple = ()
    role: str = "control"  # "proxy", "control" or "dependent"

    @classmethod
    def parse(cls, name, text, role):
        """Parse ``"source | step step"`` (steps optional)."""
        src, _, rest = text.partition("|")
        steps = tuple(s for s in rest.replace(",", " ").split() if s)
        for s in steps:
            if s not in STEPS:
                raise ConfigError(f"column {name}: unknown transform step {s!r}")
        return cls(name, src.strip(), steps, role)


@dataclass
class PrepConfig:
    dependent: ColumnSpec = field(default_factory=lambda: ColumnSpec("dYS", "YS", ("pct",), "dependent"))
    proxies: tuple = (
        ColumnSpec("CFv", "CFv", (), "proxy"),
        ColumnSpec("dDD", "DD", ("pct",), "proxy"),
        ColumnSpec("dZ", "Z", ("pct",), "proxy"),
        ColumnSpec("dIR", "IR", ("dlog",), "proxy"),
    )
    controls: tuple = (
        ColumnSpec("dCPI", "cpi", ("pct",)),
        ColumnSpec("dIPI", "ipi", ("pct",)),
        ColumnSpec("dFFR", "ffr", ("pct",)),
    )
    robustness: tuple = (
        ColumnSpec("dPPI", "ppi", ("pct",)),
        ColumnSpec("dlnGDP", "gdp", ("dlog",)),
    )
    lags: int = 1
    knot_placement: str = "end"
    min_obs: int = MIN_ALIGNED


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """Monthly design data: dependent change, proxy columns and controls."""

    frame: pd.DataFrame
    y_name: str
    proxies: tuple
    controls: tuple
    metadata: dict

    def __post_init__(self):
        if self.frame.isna().any().any():
            col = self.frame.columns[self.frame.isna().any()][0]
            raise ValidationError(f"aligned column {col} has undefined entries")

    @property
    def dates(self) -> pd.PeriodIndex:
        return self.frame.index

    @property
    def y(self) -> pd.Series:
        return self.frame[self.y_name]

    def __len__(self):
        return len(self.frame)

    def column(self, name) -> pd.Series:
        if name not in self.frame.columns:
            raise ValidationError(f"dataset has no column {name!r}; available: {', '.join(self.frame.columns)}")
        return self.frame[name]

    def __eq__(self, other):
        if not isinstance(other, AlignedDataset):
            return NotImplemented
        return (
            self.y_name == other.y_name
            and self.proxies == other.proxies
            and self.controls == other.controls
            and self.metadata == other.metadata
            and self.frame.equals(other.frame)
        )

    __hash__ = None

    def summary(self) -> dict:
        return {
            "n_obs": len(self),
            "start": str(self.dates[0]),
            "end": str(self.dates[-1]),
            "dependent": self.y_name,
            "proxies": list(self.proxies),
            "controls": list(self.controls),
            "metadata": self.metadata,
        }

    def to_csv(self, path) -> None:
        """CSV with ``#``-prefixed JSON metadata header lines."""
        header = {"y": self.y_name, "proxies": list(self.proxies), "controls": list(self.controls)}
        lines = ["# aligned " + json.dumps(header, sort_keys=True)]
        for col in self.frame.columns:
            lines.append(f"# column {col} " + json.dumps(self.metadata.get(col, {}), sort_keys=True))
        out = self.frame.copy()
        out.index = out.index.astype(str)
        out.index.name = "date"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
            out.to_csv(fh)

    @classmethod
    def from_csv(cls, path) -> "AlignedDataset":
        header, meta = None, {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                body = line[1:].strip()
                if body.startswith("aligned "):
                    header = json.loads(body[len("aligned "):])
                elif body.startswith("column "):
                    name, _, js = body[len("column "):].partition(" ")
                    meta[name] = json.loads(js)
        if header is None:
            raise ValidationError(f"{path}: missing '# aligned' metadata header")
        raw = pd.read_csv(path, comment="#", dtype=str)
        idx = pd.PeriodIndex(raw.pop("date"), freq="M", name="date")
        frame = pd.DataFrame({c: np.asarray(raw[c].to_numpy(), dtype=float) for c in raw.columns}, index=idx)
        return cls(frame, header["y"], tuple(header["proxies"]), tuple(header["controls"]), meta)

    def subset(self, proxies=None, controls=None) -> "AlignedDataset":
        proxies = tuple(self.proxies if proxies is None else proxies)
        controls = tuple(self.controls if controls is None else controls)
        cols = [self.y_name, *proxies, *controls]
        for c in cols:
            self.column(c)
        return AlignedDataset(self.frame[cols], self.y_name, proxies, controls,
                              {c: self.metadata.get(c, {}) for c in cols})


def _ordered(names, canonical):
    known = [n for n in canonical if n in names]
    return known + sorted(n for n in names if n not in canonical)


def _as_monthly(source, placement):
    """Return (monthly Series, native frequency) for a Series or MacroTable."""
    if isinstance(source, MacroTable):
        return cubic_spline_to_monthly(source, placement), source.native_frequency
    s = source.copy()
    if not isinstance(s.index, pd.PeriodIndex) or s.index.freqstr != "M":
        raise ValidationError("monthly inputs must be indexed by a monthly PeriodIndex")
    return s.astype(float), "monthly"


def build_aligned(ys_monthly, proxy_levels, control_levels, config: PrepConfig | None = None) -> AlignedDataset:
    """Transform every registered column and trim to the common valid window.

    ``ys_monthly`` is the yield-spread level series; ``proxy_levels`` and
    ``control_levels`` map source names to monthly Series or MacroTables
    (non-monthly tables are splined first). Column specs in ``config`` pick
    sources and transform chains. Controls whose source is absent are skipped,
    proxies are required.
    """
    config = config or PrepConfig()
    sources = {}
    sources[config.dependent.source] = ys_monthly
    sources.update(proxy_levels)
    sources.update(control_levels)

    columns, meta = {}, {}

    def build(spec):
        if spec.source not in sources:
            raise ValidationError(f"column {spec.name}: no input named {spec.source!r}")
        monthly, native = _as_monthly(sources[spec.source], config.knot_placement)
        monthly = monthly.dropna()
        full = pd.period_range(monthly.index[0], monthly.index[-1], freq="M")
        if len(full) != len(monthly):
            gap = full.difference(monthly.index)[0]
            raise ValidationError(f"column {spec.name}: source {spec.source} has no value for {gap}")
        monthly.name = spec.name
        out = apply_chain(monthly, spec.steps)
        transforms = (["spline"] if native != "monthly" else []) + list(spec.steps)
        meta[spec.name] = {"source": spec.source, "transform": transforms, "native_frequency": native}
        return out.rename(spec.name)

    y = build(config.dependent)
    columns[y.name] = y
    proxies = []
    for spec in config.proxies:
        columns[spec.name] = build(spec)
        proxies.append(spec.name)
    controls = []
    for spec in (*config.controls, *config.robustness):
        if spec.source not in sources:
            continue
        columns[spec.name] = build(spec)
        controls.append(spec.name)
    for k in range(1, config.lags + 1):
        name = f"{y.name}_lag{k}"
        columns[name] = pd.Series(y.to_numpy()[:-k] if k < len(y) else [], index=y.index[k:], name=name)
        meta[name] = {"source": config.dependent.source, "transform": list(meta[y.name]["transform"]) + [f"lag{k}"],
                      "native_frequency": meta[y.name]["native_frequency"]}
        controls.append(name)

    frame = pd.DataFrame(columns)
    valid = frame.notna().all(axis=1).to_numpy()
    if not valid.any():
        raise InsufficientDataError("aligned columns share no common month")
    first = int(np.argmax(valid))
    last = len(valid) - int(np.argmax(valid[::-1])) - 1
    window = frame.iloc[first : last + 1]
    holes = window.isna().any(axis=1).to_numpy()
    if holes.any():
        m = window.index[np.argmax(holes)]
        col = window.columns[window.loc[m].isna().to_numpy()][0]
        raise ValidationError(f"column {col} is undefined in {m} inside the common window")
    if len(window) < config.min_obs:
        raise InsufficientDataError(f"only {len(window)} aligned months, need at least {config.min_obs}")

    proxies = _ordered(proxies, PROXY_ORDER)
    controls = _ordered(controls, CONTROL_ORDER)
    window = window[[y.name, *proxies, *controls]].copy()
    window.index.name = "date"
    meta = {c: meta[c] for c in window.columns}
    return AlignedDataset(window, y.name, tuple(proxies), tuple(controls), meta)
