"""Stage-by-stage orchestration from raw CSV inputs to the report object."""

from __future__ import annotations

import datetime as _dt
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import __version__
from .config import REQUIRED_INPUTS, PipelineConfig
from .diagnostics import CollinearityReport, TestResult, breusch_godfrey, collinearity_report, ramsey_reset
from .errors import ConfigError, PipelineError, SpreadRiskError, ValidationError
from .ingest import load_firm_panel, load_macro_table, load_ratings, load_weights
from .ols import RegressionFit, fit_spread_model
from .posthoc import PosthocIndex, construct, index_regression
from .prep import AlignedDataset, build_aligned, cubic_spline_to_monthly
from .proxies import compute_proxies
from .regimes import RegimeResult, crisis_mask, regime_design, run_regime
from .unitroot import UnitRootResult, adf_test, pp_test

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SINGLE_LABELS = ("1", "2", "3", "4")

HINTS = {
    "config": "check the configuration file against data/default.ini",
    "ingest": "check that every input path exists and the CSV headers match the documented schemas",
    "proxies": "check firm coverage: every month needs at least one firm with defined proxies",
    "prep": "check that the series overlap and that transform steps suit the data (log/dlog need positive levels)",
    "regress": "drop collinear or constant columns from [proxies]/[controls]",
    "diagnostics": "lower bg_lags or reset powers for short samples",
    "index": "raise alpha or inspect the proxy columns; at least one proxy must be significant",
    "regimes": "check that every regime window overlaps the sample with enough months on both sides",
}


# --------------------------------------------------------------------------
# report objects


@dataclass(eq=False)
class FitEntry:
    """A regression plus the diagnostics computed on it."""

    label: str
    fit: RegressionFit
    bg: TestResult | None = None
    reset: TestResult | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "fit": self.fit.to_dict(),
            "breusch_godfrey": self.bg.to_dict() if self.bg else None,
            "reset": self.reset.to_dict() if self.reset else None,
        }

    @classmethod
    def from_dict(cls, d) -> "FitEntry":
        bg, reset = d.get("breusch_godfrey"), d.get("reset")
        return cls(d["label"], RegressionFit.from_dict(d["fit"]),
                   TestResult.from_dict(bg) if bg else None, TestResult.from_dict(reset) if reset else None)


@dataclass(eq=False)
class RegimeEntry:
    result: RegimeResult
    bg: TestResult | None = None
    reset: TestResult | None = None

    def to_dict(self) -> dict:
        return {
            "result": self.result.to_dict(),
            "breusch_godfrey": self.bg.to_dict() if self.bg else None,
            "reset": self.reset.to_dict() if self.reset else None,
        }

    @classmethod
    def from_dict(cls, d) -> "RegimeEntry":
        bg, reset = d.get("breusch_godfrey"), d.get("reset")
        return cls(RegimeResult.from_dict(d["result"]),
                   TestResult.from_dict(bg) if bg else None, TestResult.from_dict(reset) if reset else None)


@dataclass(eq=False)
class RunReport:
    software: dict
    timestamp: str | None
    config: dict
    data: dict  # aligned-dataset summary and ingest counts
    unit_roots: dict  # column -> {"ADF": UnitRootResult, "PP": UnitRootResult}
    table1: list  # FitEntry for columns 1..6
    collinearity: CollinearityReport | None
    selection: dict  # significant, principal, aic
    index_weights: dict
    index_series: pd.DataFrame  # date, rho, delta_rho
    table2: FitEntry | None
    regimes: list = field(default_factory=list)  # RegimeEntry
    schema_version: str = SCHEMA_VERSION

    def column(self, label) -> FitEntry:
        for entry in self.table1:
            if entry.label == label:
                return entry
        raise KeyError(label)

    def to_dict(self) -> dict:
        series = {
            "dates": [str(d) for d in self.index_series.index],
            **{c: [_num(v) for v in self.index_series[c]] for c in self.index_series.columns},
        }
        return _clean({
            "schema_version": self.schema_version,
            "software": dict(self.software),
            "timestamp": self.timestamp,
            "config": self.config,
            "data": self.data,
            "unit_roots": {c: {m: r.to_dict() for m, r in tests.items()} for c, tests in self.unit_roots.items()},
            "table1": [e.to_dict() for e in self.table1],
            "collinearity": self.collinearity.to_dict() if self.collinearity else None,
            "selection": self.selection,
            "index": {"weights": self.index_weights, "series": series},
            "table2": {
                "index_regression": self.table2.to_dict() if self.table2 else None,
                "regimes": [r.to_dict() for r in self.regimes],
            },
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d) -> "RunReport":
        if str(d.get("schema_version")) != SCHEMA_VERSION:
            raise ValidationError(f"unsupported report schema {d.get('schema_version')!r}; expected {SCHEMA_VERSION}")
        s = d["index"]["series"]
        cols = [c for c in s if c != "dates"]
        frame = pd.DataFrame({c: [_unnum(v) for v in s[c]] for c in cols},
                             index=pd.PeriodIndex(s["dates"], freq="M", name="date"))
        coll = d.get("collinearity")
        t2 = d["table2"]
        return cls(
            software=d["software"],
            timestamp=d["timestamp"],
            config=d["config"],
            data=d["data"],
            unit_roots={c: {m: UnitRootResult.from_dict(r) for m, r in t.items()} for c, t in d["unit_roots"].items()},
            table1=[FitEntry.from_dict(e) for e in d["table1"]],
            collinearity=CollinearityReport.from_dict(coll) if coll else None,
            selection=d["selection"],
            index_weights=d["index"]["weights"],
            index_series=frame,
            table2=FitEntry.from_dict(t2["index_regression"]) if t2["index_regression"] else None,
            regimes=[RegimeEntry.from_dict(r) for r in t2["regimes"]],
            schema_version=str(d["schema_version"]),
        )

    @classmethod
    def from_json(cls, text) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _unnum(v):
    return float("nan") if v is None else float(v)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


# --------------------------------------------------------------------------
# stages


class stage:
    """Context manager that tags failures with the stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s: start", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            log.info("stage %s: done", self.name)
            return False
        if isinstance(exc, PipelineError):
            return False
        if isinstance(exc, (SpreadRiskError, OSError, ValueError, ArithmeticError)):
            log.error("stage %s failed: %s", self.name, exc)
            raise PipelineError(self.name, exc, HINTS.get(self.name, "")) from exc
        return False



@dataclass
class Inputs:
    panels: list
    macro: dict  # name -> MacroTable
    ratings: object
    spreads: pd.Series
    weights: dict | None = None


def load_inputs(cfg: PipelineConfig) -> Inputs:
    missing = [k for k in REQUIRED_INPUTS if k not in cfg.inputs]
    if missing:
        raise ConfigError(f"no path configured for required input {missing[0]!r} in [inputs]")
    gone = cfg.missing_paths()
    if gone:
        raise FileNotFoundError(f"input file not found: {gone[0]}")
    panels = load_firm_panel(cfg.inputs["firms"], cfg.inputs["prices"], cfg.inputs.get("zratios"),
                             forward_fill=cfg.forward_fill)
    macro = {m.name: load_macro_table(m.path, m.frequency, m.name) for m in cfg.macro}
    ratings = load_ratings(cfg.inputs["ratings"])
    spreads = load_macro_table(cfg.inputs["spreads"], "monthly", "YS").observations
    spreads.index = pd.PeriodIndex(spreads.index, freq="M")
    weights = load_weights(cfg.inputs["weights"]) if "weights" in cfg.inputs else None
    log.info("loaded %d firms, %d macro series, %d rating years", len(panels), len(macro), len(ratings.observations))
    return Inputs(panels, macro, ratings, spreads, weights)


def proxy_levels(inputs: Inputs, cfg: PipelineConfig) -> pd.DataFrame:
    ir = cubic_spline_to_monthly(inputs.ratings.to_macro(), cfg.prep.knot_placement)
    return compute_proxies(inputs.panels, ir, inputs.weights, cfg.proxy_options)


def align(levels: pd.DataFrame, inputs: Inputs, cfg: PipelineConfig) -> AlignedDataset:
    return build_aligned(inputs.spreads, {c: levels[c] for c in levels.columns}, inputs.macro, cfg.prep)


def unit_roots(data: AlignedDataset, cfg: PipelineConfig) -> dict:
    """ADF and PP on the dependent, proxy and control columns (lag columns skipped)."""
    out = {}
    lag_prefix = f"{data.y_name}_lag"
    for col in data.frame.columns:
        if col.startswith(lag_prefix):
            continue
        x = data.frame[col].to_numpy()
        out[col] = {"ADF": adf_test(x, cfg.adf_max_lag), "PP": pp_test(x, cfg.pp_bandwidth)}
    return out


def _design(data: AlignedDataset, cols) -> np.ndarray:
    return np.column_stack([np.ones(len(data)), data.frame[list(cols)].to_numpy(dtype=float)])


def _check_columns(data: AlignedDataset, cols, key):
    missing = [c for c in cols if c not in data.frame.columns]
    if missing:
        raise ConfigError(f"[regression] {key} names {missing[0]!r}, which is not an aligned column")


def regressions(data: AlignedDataset, cfg: PipelineConfig) -> list[FitEntry]:
    """Single-proxy columns, the full model and the robustness model."""
    main = list(cfg.main_controls)
    _check_columns(data, main, "main_controls")
    entries = []
    for label, proxy in zip(SINGLE_LABELS, data.proxies):
        entries.append(FitEntry(label, fit_spread_model(data, [proxy], main)))
    entries.append(FitEntry("5", fit_spread_model(data, list(data.proxies), main)))
    if cfg.robustness_controls:
        rob = list(cfg.robustness_controls)
        _check_columns(data, rob, "robustness_controls")
        entries.append(FitEntry("6", fit_spread_model(data, list(data.proxies), rob)))
    return entries


def diagnose(entries: list[FitEntry], data: AlignedDataset, cfg: PipelineConfig) -> CollinearityReport | None:
    for e in entries:
        X = _design(data, e.fit.names[1:])
        e.bg = breusch_godfrey(e.fit, X, cfg.bg_lags)
    proxies = list(data.proxies)
    if len(proxies) < 2:
        return None
    return collinearity_report(data.frame[proxies].to_numpy(dtype=float), proxies)


def _test_pair(fit, y, X, cfg):
    return breusch_godfrey(fit, X, cfg.bg_lags), ramsey_reset(y, X, cfg.reset_powers)


def posthoc(full: RegressionFit, data: AlignedDataset, cfg: PipelineConfig):
    index, significant, aic = construct(full, data, cfg.alpha, cfg.index_form, cfg.index_delta)
    joined = pd.concat([data.y.rename("y"), index.delta_series.rename("x")], axis=1, join="inner")
    fit = index_regression(data.y, index.delta_series)
    X = np.column_stack([np.ones(len(joined)), joined["x"].to_numpy()])
    bg, reset = _test_pair(fit, joined["y"].to_numpy(), X, cfg)
    selection = {"alpha": cfg.alpha, "significant": significant, "principal": index.principal, "aic": aic}
    log.info("index from %s, principal %s, effect %.4g", ", ".join(significant), index.principal, index.effect)
    return index, selection, FitEntry("eq4", fit, bg, reset)


def regimes(data: AlignedDataset, index: PosthocIndex, cfg: PipelineConfig) -> list[RegimeEntry]:
    out = []
    for window in cfg.regimes:
        res = run_regime(data.y, index.delta_series, window)
        joined = pd.concat([data.y.rename("y"), index.delta_series.rename("x")], axis=1, join="inner")
        y = joined["y"].to_numpy()
        if res.collapsed:
            X = np.column_stack([np.ones(len(y)), joined["x"].to_numpy()])
        else:
            X = regime_design(joined["x"].to_numpy(), crisis_mask(joined.index, window))
        bg, reset = _test_pair(res.fit, y, X, cfg)
        out.append(RegimeEntry(res, bg, reset))
    return out


def timestamp() -> str | None:
    """UTC time from ``SOURCE_DATE_EPOCH`` when set, otherwise ``None`` (keeps reports reproducible)."""
    raw = os.environ.get("SOURCE_DATE_EPOCH")
    if not raw:
        return None
    try:
        t = int(raw)
    except ValueError:
        raise ConfigError(f"SOURCE_DATE_EPOCH must be an integer, got {raw!r}") from None
    return _dt.datetime.fromtimestamp(t, tz=_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Ingest through regime regressions; any stage failure raises a stage-tagged PipelineError."""
    with stage("ingest"):
        inputs = load_inputs(cfg)
    with stage("proxies"):
        levels = proxy_levels(inputs, cfg)
    with stage("prep"):
        data = align(levels, inputs, cfg)
        roots = unit_roots(data, cfg)
    with stage("regress"):
        table1 = regressions(data, cfg)
    with stage("diagnostics"):
        coll = diagnose(table1, data, cfg)
    full = next(e.fit for e in table1 if e.label == "5")
    with stage("index"):
        index, selection, eq4 = posthoc(full, data, cfg)
    with stage("regimes"):
        reg = regimes(data, index, cfg)
    if not cfg.regimes:
        log.info("no regimes configured; regime split skipped")

    summary = data.summary()
    summary["n_firms"] = len(inputs.panels)
    summary["filled_months"] = int(sum(len(p.filled_months) for p in inputs.panels))
    return RunReport(
        software={"name": "spreadrisk", "version": __version__},
        timestamp=timestamp(),
        config=cfg.to_dict(),
        data=summary,
        unit_roots=roots,
        table1=table1,
        collinearity=coll,
        selection=selection,
        index_weights=index.weights_dict(),
        index_series=index.to_frame(),
        table2=eq4,
        regimes=reg,
    )
