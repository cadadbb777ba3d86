"""Seeded synthetic data with known ground truth.

Random numbers come from numpy's PCG64 bit generator (O'Neill, 2014; seeded
through ``SeedSequence``). Normal variates are produced by the inverse normal
CDF (``scipy.special.ndtri``) applied to open-interval uniforms, so a given
seed yields the same stream on every platform. Draws are taken in a fixed
order: latent shocks, proxy noise, controls, ratings, firm characteristics,
daily returns, cash-flow shocks, Z-ratio shares, regression errors.

The data-generating process
---------------------------
A latent default-risk factor ``L_t`` follows a stationary AR(1) whose shock
standard deviation is multiplied by ``crisis_volatility`` inside the crisis
window. The aligned proxy columns load on it:

* ``dDD_t`` and ``dZ_t`` (percent changes of the cross-firm averages) equal
  ``loading * L_t + noise``; firm liabilities are then chosen so that
  ``ln(TA/TL) / realised volatility`` reproduces each firm's target distance
  to default, and the fifth Altman ratio budget is solved so that the
  Z-score reproduces its target.
* ``CFv`` is driven through the dispersion of monthly operating cash flows,
  lognormal cash flows ``CF_it = mu_i * exp(s_t z_it - s_t^2 / 2)`` with
  ``ln s_t`` linear in ``L_t`` plus persistent AR(1) noise (a 12-month
  window would average iid noise away); positive flows keep the mean away
  from zero.
* annual downgrade percentages are log-linear in the yearly mean of ``L_t``.

Macro controls are random-walk levels with iid percentage growth. The
spread change is then generated from the realised aligned columns,

    dYS_t = const + c_t * sum_j alpha_j X_jt + sum_k gamma_k W_kt
            + gamma_lag * dYS_{t-1} + error_sd * e_t,

with ``c_t = crisis_amplification`` inside the crisis window and 1 outside,
so the spread model is exactly correct when the amplification is 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import special

from .errors import ConfigError
from .ingest import (FirmPanel, MacroTable, RatingsSeries, write_firm_panel,
                     write_macro_table, write_ratings)
from .prep import AlignedDataset, PrepConfig, build_aligned, cubic_spline_to_monthly
from .proxies import compute_proxies, panel_volatility
from .regimes import SUBPRIME, RegimeWindow

GENERATOR = "PCG64 (numpy SeedSequence) + inverse-normal-CDF (scipy.special.ndtri)"
PRESAMPLE_MONTHS = 12
CFV_NOISE_PHI = 0.9

DEFAULT_COEFFICIENTS = {
    "const": 0.0,
    "CFv": 1.51,
    "dDD": -0.15,
    "dZ": -0.04,
    "dIR": 1.17,
    "dCPI": -4.65,
    "dIPI": -0.65,
    "dFFR": -2.54,
    # a stationary lag; 1.34 would make the spread change explosive
    "dYS_lag1": 0.2,
}
DEFAULT_LOADINGS = {"CFv": 0.6, "dDD": -5.0, "dZ": -1.2, "dIR": 0.1}
DEFAULT_NOISE = {"CFv": 0.6, "dDD": 6.0, "dZ": 2.2, "dIR": 0.05}
# (mean, sd) of monthly percentage growth; gdp is quarterly log growth in percent
DEFAULT_CONTROLS = {
    "cpi": (0.2, 0.3),
    "ipi": (0.1, 0.7),
    "ffr": (0.0, 0.5),
    "ppi": (0.2, 0.5),
    "gdp": (0.6, 0.6),
}
CONTROL_SOURCES = {"dCPI": "cpi", "dIPI": "ipi", "dFFR": "ffr"}


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # shift off zero so the inverse CDF stays finite
    return rng.random(size) + 2.0**-54


def normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals by inverse CDF (no rejection sampling)."""
    return special.ndtri(_open_uniform(rng, size))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class LatentFactor:
    ar1_phi: float = 0.5
    shock_sd: float = math.sqrt(0.75)  # unit stationary variance at phi = 0.5

    def __post_init__(self):
        if not abs(self.ar1_phi) < 1:
            raise ConfigError("latent ar1_phi must lie in (-1, 1)")
        if not self.shock_sd > 0:
            raise ConfigError("latent shock_sd must be > 0")


@dataclass
class SynthConfig:
    seed: int = 20100131
    n_firms: int = 252
    start: str = "2000-01"
    end: str = "2010-12"
    true_coefficients: dict = field(default_factory=lambda: dict(DEFAULT_COEFFICIENTS))
    latent: LatentFactor = field(default_factory=LatentFactor)
    loadings: dict = field(default_factory=lambda: dict(DEFAULT_LOADINGS))
    noise_sd: dict = field(default_factory=lambda: dict(DEFAULT_NOISE))
    controls: dict = field(default_factory=lambda: dict(DEFAULT_CONTROLS))
    error_sd: float = 2.0
    crisis: RegimeWindow = SUBPRIME
    crisis_volatility: float = 3.0
    crisis_amplification: float = 1.0
    ys_start: float = 2.5
    dd_start: float = 8.0
    z_start: float = 4.0
    cfv_dispersion: float = 0.55
    ratings_start: float = 12.0

    def __post_init__(self):
        if isinstance(self.latent, dict):
            self.latent = LatentFactor(**self.latent)
        if isinstance(self.crisis, dict):
            self.crisis = RegimeWindow.from_dict(self.crisis)
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.n_firms < 1:
            raise ConfigError("n_firms must be >= 1")
        if len(self.months) < 48:
            raise ConfigError(f"need at least 48 months, got {len(self.months)}")
        for name in ("CFv", "dDD", "dZ", "dIR"):
            if name not in self.loadings or name not in self.noise_sd:
                raise ConfigError(f"loading and noise_sd required for proxy {name}")
            if self.noise_sd[name] < 0:
                raise ConfigError(f"noise_sd for {name} must be >= 0")
        missing = [k for k in DEFAULT_COEFFICIENTS if k not in self.true_coefficients]
        if missing:
            raise ConfigError(f"true_coefficients lacks {missing[0]}")
        if self.error_sd < 0:
            raise ConfigError("error_sd must be >= 0")
        for name, (_, sd) in self.controls.items():
            if sd < 0:
                raise ConfigError(f"control {name}: sd must be >= 0")
        if self.crisis_volatility <= 0:
            raise ConfigError("crisis_volatility must be > 0")

    @property
    def months(self) -> pd.PeriodIndex:
        return pd.period_range(self.start, self.end, freq="M")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["crisis"] = self.crisis.to_dict()
        d["controls"] = {k: list(v) for k, v in self.controls.items()}
        return d

    @classmethod
    def from_dict(cls, d) -> "SynthConfig":
        d = dict(d)
        if "controls" in d:
            d["controls"] = {k: tuple(v) for k, v in d["controls"].items()}
        return cls(**d)


@dataclass(eq=True)
class GroundTruth:
    seed: int
    generator: str
    n_firms: int
    months: tuple
    coefficients: dict
    latent: dict
    loadings: dict
    noise_sd: dict
    error_sd: float
    crisis: dict
    crisis_volatility: float
    crisis_amplification: float
    config: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["months"] = list(self.months)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d) -> "GroundTruth":
        d = dict(d)
        d["months"] = tuple(d["months"])
        return cls(**d)

    @classmethod
    def from_json(cls, text) -> "GroundTruth":
        return cls.from_dict(json.loads(text))


def ground_truth(config: SynthConfig) -> GroundTruth:
    return GroundTruth(
        seed=int(config.seed),
        generator=GENERATOR,
        n_firms=int(config.n_firms),
        months=(config.start, config.end),
        coefficients={k: float(v) for k, v in config.true_coefficients.items()},
        latent=asdict(config.latent),
        loadings=dict(config.loadings),
        noise_sd=dict(config.noise_sd),
        error_sd=float(config.error_sd),
        crisis=config.crisis.to_dict(),
        crisis_volatility=float(config.crisis_volatility),
        crisis_amplification=float(config.crisis_amplification),
        config=config.to_dict(),
    )


@dataclass(eq=False)
class SynthData:
    panels: list
    macro: dict  # name -> MacroTable
    ratings: RatingsSeries
    spreads: pd.Series  # monthly yield-spread levels
    truth: GroundTruth
    latent: pd.Series
    delta_ys: pd.Series
    levels: pd.DataFrame | None = None  # aggregated proxy levels, cached
    _design: pd.DataFrame | None = field(default=None, repr=False)
    _errors: np.ndarray | None = field(default=None, repr=False)

    def spreads_table(self) -> MacroTable:
        return MacroTable("YS", "monthly", self.spreads.rename("YS"))

    def proxy_levels(self, weights=None) -> pd.DataFrame:
        if weights is None and self.levels is not None:
            return self.levels.copy()
        ir = cubic_spline_to_monthly(self.ratings.to_macro())
        return compute_proxies(self.panels, ir, weights)

    def with_amplification(self, factor: float) -> "SynthData":
        """Same draws with a different crisis amplification.

        Only the spread series depends on the amplification, so this equals
        ``generate`` with the modified config at a fraction of the cost.
        """
        if self._design is None:
            raise ConfigError("dataset has no cached design; regenerate it instead")
        cfg = SynthConfig.from_dict({**self.truth.config, "crisis_amplification": float(factor)})
        dys, spreads = _spread_path(cfg, self._design, self._errors, self.spreads.index)
        return replace(self, spreads=spreads, delta_ys=dys, truth=ground_truth(cfg))

    def aligned(self, config: PrepConfig | None = None) -> AlignedDataset:
        levels = self.proxy_levels()
        return build_aligned(self.spreads, {c: levels[c] for c in levels.columns}, self.macro, config)


def _latent_path(rng, cfg: SynthConfig, months: pd.PeriodIndex) -> np.ndarray:
    phi, sd = cfg.latent.ar1_phi, cfg.latent.shock_sd
    crisis = ((months >= cfg.crisis.start) & (months <= cfg.crisis.end)).astype(float)
    scale = np.where(crisis > 0, cfg.crisis_volatility, 1.0) * sd
    e = normals(rng, len(months))
    L = np.empty(len(months))
    L[0] = e[0] * sd / math.sqrt(1.0 - phi**2)
    for t in range(1, len(months)):
        L[t] = phi * L[t - 1] + scale[t] * e[t]
    return L


def _growth_path(start, pct):
    """Levels from percentage growth rates, ``x_t = x_{t-1} * (1 + g_t / 100)``."""
    out = np.empty(len(pct) + 1)
    out[0] = start
    for t, g in enumerate(pct, 1):
        out[t] = out[t - 1] * (1.0 + g / 100.0)
    return out


def _spread_path(cfg: SynthConfig, X: pd.DataFrame, eps: np.ndarray, macro_months) -> tuple[pd.Series, pd.Series]:
    """Spread changes from the aligned design and the error draws, plus levels."""
    months = X.index
    coef = cfg.true_coefficients
    proxy_part = X[["CFv", "dDD", "dZ", "dIR"]].to_numpy() @ np.array([coef[c] for c in ("CFv", "dDD", "dZ", "dIR")])
    control_part = X[list(CONTROL_SOURCES)].to_numpy() @ np.array([coef[c] for c in CONTROL_SOURCES])
    crisis = (months >= cfg.crisis.start) & (months <= cfg.crisis.end)
    amp = np.where(crisis, cfg.crisis_amplification, 1.0)
    dys = np.empty(len(months))
    prev = 0.0
    for t in range(len(months)):
        prev = coef["const"] + amp[t] * proxy_part[t] + control_part[t] + coef["dYS_lag1"] * prev + cfg.error_sd * eps[t]
        dys[t] = prev
    if (dys <= -100).any():
        raise ConfigError("spread change below -100%; spread level would turn negative")
    ys = _growth_path(cfg.ys_start, dys)
    return pd.Series(dys, index=months, name="dYS"), pd.Series(ys, index=macro_months.rename("date"), name="YS")


def generate(config: SynthConfig | None = None) -> SynthData:
    cfg = config or SynthConfig()
    rng = make_rng(cfg.seed)
    months = cfg.months
    firm_months = pd.period_range(months[0] - PRESAMPLE_MONTHS, months[-1], freq="M")
    macro_months = pd.period_range(months[0] - 1, months[-1], freq="M")
    nf, nm = cfg.n_firms, len(firm_months)

    # latent factor and proxy targets
    L = _latent_path(rng, cfg, firm_months)
    noise = {k: normals(rng, nm) for k in ("CFv", "dDD", "dZ")}
    u = noise["CFv"]
    u[0] = u[0] / math.sqrt(1.0 - CFV_NOISE_PHI**2)
    for t in range(1, nm):
        u[t] = CFV_NOISE_PHI * u[t - 1] + u[t]
    u *= math.sqrt(1.0 - CFV_NOISE_PHI**2)
    ld, ns = cfg.loadings, cfg.noise_sd
    d_dd = ld["dDD"] * L + ns["dDD"] * noise["dDD"]
    d_z = ld["dZ"] * L + ns["dZ"] * noise["dZ"]
    if (d_dd[1:] <= -100).any() or (d_z[1:] <= -100).any():
        raise ConfigError("target proxy change below -100%; reduce loadings or noise")
    dd_path = _growth_path(cfg.dd_start, d_dd[1:])
    z_path = _growth_path(cfg.z_start, d_z[1:])
    dispersion = cfg.cfv_dispersion * np.exp(ld["CFv"] * L + ns["CFv"] * noise["CFv"])

    # macro controls
    macro = {}
    n_macro = len(macro_months) - 1
    for name in ("cpi", "ipi", "ffr", "ppi"):
        mu, sd = cfg.controls[name]
        growth = mu + sd * normals(rng, n_macro)
        if (growth <= -100).any():
            raise ConfigError(f"control {name}: growth below -100%")
        base = {"cpi": 170.0, "ipi": 90.0, "ffr": 4.0, "ppi": 130.0}[name]
        values = _growth_path(base, growth)
        macro[name] = MacroTable(name, "monthly", pd.Series(values, index=macro_months.rename("date"), name=name))
    quarters = pd.period_range(firm_months[0].asfreq("Q"), months[-1].asfreq("Q"), freq="Q")
    mu, sd = cfg.controls["gdp"]
    gdp = 10000.0 * np.exp(np.cumsum(np.r_[0.0, (mu + sd * normals(rng, len(quarters) - 1)) / 100.0]))
    macro["gdp"] = MacroTable("gdp", "quarterly", pd.Series(gdp, index=quarters.rename("date"), name="gdp"))

    # annual downgrade percentages; the presample year repeats the next one so
    # the spline's linear extension before the first knot stays flat-ish
    years = np.arange(firm_months[0].year, months[-1].year + 1)
    year_of = np.asarray(firm_months.year)
    lbar = np.array([L[year_of == y].mean() for y in years])
    r = math.log(cfg.ratings_start) + ld["dIR"] * lbar / 0.5 + ns["dIR"] * normals(rng, len(years))
    r[0] = r[1]
    ir = np.exp(r)
    if (ir > 100).any():
        raise ConfigError("generated downgrade percentage exceeds 100")
    ratings = RatingsSeries(pd.Series(ir, index=pd.Index(years, name="year"), name="downgrade_pct"))
    ir_monthly = cubic_spline_to_monthly(ratings.to_macro())
    if not (ir_monthly > 0).all():
        raise ConfigError("splined downgrade percentages are not all positive; lower the IR loading")

    # firm characteristics
    fid = [f"F{i + 1:03d}" for i in range(nf)]
    ta0 = np.exp(math.log(2000.0) + 0.8 * normals(rng, nf))
    p0 = np.exp(math.log(40.0) + 0.5 * normals(rng, nf))
    vol_base = 0.01 + 0.02 * _open_uniform(rng, nf)
    dd_mult = np.exp(0.3 * normals(rng, nf))
    dd_mult /= dd_mult.mean()
    z_mult = np.exp(0.15 * normals(rng, nf))
    z_mult /= z_mult.mean()
    cf_scale = 0.01 * ta0 * np.exp(0.2 * normals(rng, nf))
    ta_growth = 0.004 + 0.02 * normals(rng, (nm, nf))
    ta = ta0 * np.exp(np.cumsum(ta_growth, axis=0))

    # daily prices on business days
    days = pd.bdate_range(firm_months[0].start_time, firm_months[-1].end_time, name="date")
    day_month = np.asarray(days.to_period("M").asi8 - firm_months[0].ordinal)
    daily_sd = vol_base[None, :] * np.exp(0.25 * L)[day_month][:, None]
    rets = daily_sd * normals(rng, (len(days), nf))
    prices = p0 * np.exp(np.cumsum(rets, axis=0))

    price_series = [pd.Series(prices[:, i], index=days, name="close") for i in range(nf)]
    vol = panel_volatility([_PriceOnly(f, s) for f, s in zip(fid, price_series)]).to_numpy()

    # liabilities from target distance to default and realised volatility
    dd_firm = dd_path[:, None] * dd_mult[None, :]
    tl = ta * np.exp(-dd_firm * vol)
    if not (tl > 0).all() or not np.isfinite(tl).all():
        raise ConfigError("implied liabilities are not positive; distance-to-default targets infeasible")

    # cash flows with latent-driven dispersion
    z_cf = normals(rng, (nm, nf))
    cf = cf_scale[None, :] * np.exp(dispersion[:, None] * z_cf - 0.5 * dispersion[:, None] ** 2)

    # Z-score ratios: random split of the score between the ratio terms
    z_firm = z_path[:, None] * z_mult[None, :]
    shares = _open_uniform(rng, (nm, nf, 5))
    other = 0.2 + 0.4 * shares[..., 4]  # fraction of Z carried by x1, x2, x3, x5
    split = shares[..., :4] / shares[..., :4].sum(axis=2, keepdims=True)
    budget = (other * z_firm)[..., None] * split
    x1, x2, x3, x5 = budget[..., 0] / 1.2, budget[..., 1] / 1.4, budget[..., 2] / 3.3, budget[..., 3]
    x4 = (1.0 - other) * z_firm / 0.6
    if not (x4 > 0).all():
        raise ConfigError("market-equity ratio x4 would be non-positive; Z-score targets infeasible")

    midx = firm_months.rename("date")
    panels = []
    for i in range(nf):
        fund = pd.DataFrame(
            {"total_assets": ta[:, i], "total_liabilities": tl[:, i], "operating_cash_flow": cf[:, i]}, index=midx
        )
        zr = pd.DataFrame({"x1": x1[:, i], "x2": x2[:, i], "x3": x3[:, i], "x4": x4[:, i], "x5": x5[:, i]}, index=midx)
        panels.append(FirmPanel(fid[i], fund, price_series[i], zr))

    # spread changes from the realised aligned columns
    levels = compute_proxies(panels, ir_monthly)
    placeholder = pd.Series(1.0, index=macro_months)
    prep = PrepConfig(lags=0, robustness=())
    design = build_aligned(placeholder, {c: levels[c] for c in levels.columns}, macro, prep)
    X = design.frame.loc[months[0] : months[-1]]
    if len(X) != len(months):
        raise ConfigError("generated inputs do not cover the requested months")
    eps = normals(rng, len(months))
    dys, spreads = _spread_path(cfg, X, eps, macro_months)

    return SynthData(
        panels=panels,
        macro=macro,
        ratings=ratings,
        spreads=spreads,
        truth=ground_truth(cfg),
        latent=pd.Series(L, index=firm_months, name="latent"),
        delta_ys=dys,
        levels=levels,
        _design=X,
        _errors=eps,
    )


@dataclass(frozen=True)
class _PriceOnly:
    firm_id: str
    prices: pd.Series


FIXTURE_FILES = ("firms.csv", "prices.csv", "zratios.csv", "macro_cpi.csv", "macro_ipi.csv", "macro_ffr.csv",
                 "macro_ppi.csv", "macro_gdp.csv", "ratings.csv", "spreads.csv", "ground_truth.json", "pipeline.ini")


def pipeline_ini() -> str:
    """Pipeline configuration matching the fixture file names (paths relative to the file)."""
    return (
        "[inputs]\n"
        "firms = firms.csv\n"
        "prices = prices.csv\n"
        "zratios = zratios.csv\n"
        "ratings = ratings.csv\n"
        "spreads = spreads.csv\n"
        "\n"
        "[macro]\n"
        "cpi = macro_cpi.csv, monthly\n"
        "ipi = macro_ipi.csv, monthly\n"
        "ffr = macro_ffr.csv, monthly\n"
        "ppi = macro_ppi.csv, monthly\n"
        "gdp = macro_gdp.csv, quarterly\n"
        "\n"
        "[regimes]\n"
        "subprime = 2007-07..2009-03\n"
        "\n"
        "[output]\n"
        "directory = out\n"
    )


def write_fixture(data: SynthData, directory) -> Path:
    """Write the full fixture directory; returns its path."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_firm_panel(data.panels, out / "firms.csv", out / "prices.csv", out / "zratios.csv")
    for name, table in data.macro.items():
        write_macro_table(table, out / f"macro_{name}.csv")
    write_ratings(data.ratings, out / "ratings.csv")
    write_macro_table(data.spreads_table(), out / "spreads.csv")
    (out / "ground_truth.json").write_text(data.truth.to_json(), encoding="utf-8")
    (out / "pipeline.ini").write_text(pipeline_ini(), encoding="utf-8")
    return out


# --------------------------------------------------------------------------
# column-level latent-factor data


@dataclass(eq=False)
class LatentDataset:
    data: AlignedDataset
    latent: np.ndarray
    covariance: np.ndarray  # population Cov(x)
    cov_xy: np.ndarray  # population Cov(x, y)
    principal: str
    implied_lambda: float


LATENT_PROXIES = ("CFv", "dDD", "dZ", "dIR")


def latent_proxy_dataset(seed, n_obs=131, loadings=(1.0, -0.9, 0.7, 0.6), noise_sd=(0.8, 0.9, 1.0, 1.1),
                         effect=1.0, coefficients=None, error_sd=0.7, ar1_phi=0.5, names=LATENT_PROXIES) -> LatentDataset:
    """Proxies ``x_j = a_j L_t + s_j e_jt`` sharing one AR(1) latent factor.

    The outcome is ``y = effect * L_t + error`` or, when ``coefficients`` is
    given, ``y = sum_j alpha_j x_jt + error``. ``implied_lambda`` is the
    population value of the composite effect, ``c' Sigma^-1 c / c_1`` with
    ``c = Cov(x, y)``, ``Sigma = Cov(x)`` and ``1`` the proxy most correlated
    with ``y``; it is what the index regression estimates when every proxy is
    retained.
    """
    a = np.asarray(loadings, dtype=float)
    s = np.asarray(noise_sd, dtype=float)
    k = len(a)
    if len(s) != k or len(names) < k:
        raise ConfigError("loadings, noise_sd and names must have matching lengths")
    if not abs(ar1_phi) < 1:
        raise ConfigError("ar1_phi must lie in (-1, 1)")
    names = tuple(names[:k])
    rng = make_rng(seed)
    e = normals(rng, n_obs + 1)
    sd = math.sqrt(1.0 - ar1_phi**2)
    L = np.empty(n_obs)
    L[0] = e[0]
    for t in range(1, n_obs):
        L[t] = ar1_phi * L[t - 1] + sd * e[t]
    X = L[:, None] * a[None, :] + normals(rng, (n_obs, k)) * s[None, :]
    eps = normals(rng, n_obs)
    sigma = np.outer(a, a) + np.diag(s**2)
    if coefficients is None:
        y = effect * L + error_sd * eps
        c = effect * a
        var_y = effect**2 + error_sd**2
    else:
        alpha = np.asarray(coefficients, dtype=float)
        y = X @ alpha + error_sd * eps
        c = sigma @ alpha
        var_y = alpha @ sigma @ alpha + error_sd**2
    corr = np.abs(c) / np.sqrt(np.diag(sigma) * var_y)
    p = int(np.argmax(corr))
    implied = float(c @ np.linalg.solve(sigma, c) / c[p])
    idx = pd.period_range("2000-02", periods=n_obs, freq="M", name="date")
    frame = pd.DataFrame({"dYS": y, **{n: X[:, j] for j, n in enumerate(names)}}, index=idx)
    meta = {col: {"source": "latent", "transform": [], "native_frequency": "monthly"} for col in frame.columns}
    data = AlignedDataset(frame, "dYS", names, (), meta)
    return LatentDataset(data, L, sigma, c, names[p], implied)

