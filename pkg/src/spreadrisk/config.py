"""Pipeline configuration: INI file with sections, paths relative to the file.

Every key has a default; see ``data/default.ini`` for the full annotated list.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .ingest import FREQUENCIES
from .posthoc import DELTA_MODES, INDEX_FORMS
from .prep import ColumnSpec, PrepConfig
from .proxies import ProxyOptions
from .regimes import SUBPRIME, RegimeWindow

INPUT_KEYS = ("firms", "prices", "zratios", "ratings", "spreads", "weights")
REQUIRED_INPUTS = ("firms", "prices", "ratings", "spreads")
MAIN_CONTROLS = ("dCPI", "dIPI", "dFFR", "dYS_lag1")
ROBUSTNESS_CONTROLS = ("dPPI", "dlnGDP", "dFFR", "dYS_lag1")
OUTPUT_FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class MacroInput:
    name: str
    path: Path
    frequency: str


@dataclass
class PipelineConfig:
    inputs: dict = field(default_factory=dict)  # key -> Path
    macro: tuple = ()  # MacroInput entries
    prep: PrepConfig = field(default_factory=PrepConfig)
    proxy_options: ProxyOptions = field(default_factory=ProxyOptions)
    forward_fill: bool = False
    alpha: float = 0.10
    main_controls: tuple = MAIN_CONTROLS
    robustness_controls: tuple = ROBUSTNESS_CONTROLS
    bg_lags: int = 12
    reset_powers: tuple = (2, 3)
    adf_max_lag: int = 12
    pp_bandwidth: int | None = None
    index_form: str = "lw"
    index_delta: str = "none"
    regimes: tuple = (SUBPRIME,)
    output_dir: Path = Path("out")
    formats: tuple = OUTPUT_FORMATS
    source: str | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.bg_lags < 1:
            raise ConfigError("bg_lags must be >= 1")
        if not self.reset_powers or any(p not in (2, 3, 4) for p in self.reset_powers):
            raise ConfigError("reset_powers must be a non-empty subset of {2, 3, 4}")
        if self.adf_max_lag < 0:
            raise ConfigError("adf max_lag must be >= 0")
        if self.pp_bandwidth is not None and self.pp_bandwidth < 0:
            raise ConfigError("pp bandwidth must be >= 0")
        if self.index_form not in INDEX_FORMS:
            raise ConfigError(f"index form must be one of {', '.join(INDEX_FORMS)}")
        if self.index_delta not in DELTA_MODES:
            raise ConfigError(f"index delta must be one of {', '.join(DELTA_MODES)}")
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"unknown output format {bad[0]!r}")
        labels = [w.label for w in self.regimes]
        if len(set(labels)) != len(labels):
            raise ConfigError("duplicate regime labels")

    def missing_paths(self) -> list[Path]:
        paths = list(self.inputs.values()) + [m.path for m in self.macro]
        return [p for p in paths if not Path(p).exists()]

    def to_dict(self) -> dict:
        """Echo for reports; paths are given as configured (no machine-specific prefix)."""

        def rel(p):
            p = Path(p)
            if self.source is not None:
                try:
                    return Path(p).relative_to(Path(self.source).parent).as_posix()
                except ValueError:
                    pass
            return p.as_posix()

        def spec(s: ColumnSpec):
            return s.source + (" | " + " ".join(s.steps) if s.steps else "")

        return {
            "inputs": {k: rel(v) for k, v in sorted(self.inputs.items())},
            "macro": {m.name: {"path": rel(m.path), "frequency": m.frequency} for m in self.macro},
            "columns": {
                "dependent": {self.prep.dependent.name: spec(self.prep.dependent)},
                "proxies": {s.name: spec(s) for s in self.prep.proxies},
                "controls": {s.name: spec(s) for s in self.prep.controls},
                "robustness": {s.name: spec(s) for s in self.prep.robustness},
            },
            "prep": {"lags": self.prep.lags, "knot_placement": self.prep.knot_placement, "min_obs": self.prep.min_obs},
            "firms": {
                "cfv_window": self.proxy_options.cfv_window,
                "cfv_epsilon": self.proxy_options.cfv_epsilon,
                "forward_fill": self.forward_fill,
            },
            "regression": {
                "alpha": self.alpha,
                "main_controls": list(self.main_controls),
                "robustness_controls": list(self.robustness_controls),
            },
            "diagnostics": {"bg_lags": self.bg_lags, "reset_powers": list(self.reset_powers)},
            "unitroot": {"adf_max_lag": self.adf_max_lag, "pp_bandwidth": self.pp_bandwidth},
            "index": {"form": self.index_form, "delta": self.index_delta},
            "regimes": [w.to_dict() for w in self.regimes],
            "output": {"directory": rel(self.output_dir), "formats": list(self.formats)},
        }


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # column names are case sensitive
    return cp


def default_ini() -> str:
    return resources.files("spreadrisk").joinpath("data/default.ini").read_text(encoding="utf-8")


def _list(text, cast=str) -> tuple:
    items = [t.strip() for t in text.replace(";", ",").split(",")]
    try:
        return tuple(cast(t) for t in items if t)
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def _get(cp, section, key, cast, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    try:
        if cast is bool:
            return cp.getboolean(section, key)
        return cast(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _columns(cp, section, role, default) -> tuple:
    if not cp.has_section(section):
        return default
    return tuple(ColumnSpec.parse(name, text, role) for name, text in cp.items(section))


def parse_config(text: str, base_dir=".", source=None) -> PipelineConfig:
    """Build a :class:`PipelineConfig` from INI text; relative paths resolve against ``base_dir``."""
    cp = _parser()
    try:
        cp.read_string(text, source=str(source or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    base = Path(base_dir)

    def path(p):
        p = Path(p.strip())
        return p if p.is_absolute() else base / p

    known = {"inputs", "macro", "dependent", "proxies", "controls", "robustness", "prep", "firms", "regression",
             "diagnostics", "spline", "adf", "pp", "index", "regimes", "output"}
    unknown = [s for s in cp.sections() if s not in known]
    if unknown:
        raise ConfigError(f"unknown config section [{unknown[0]}]")

    inputs = {}
    if cp.has_section("inputs"):
        for key, value in cp.items("inputs"):
            if key not in INPUT_KEYS:
                raise ConfigError(f"[inputs] unknown key {key!r}; expected one of {', '.join(INPUT_KEYS)}")
            if value.strip():
                inputs[key] = path(value)

    macro = []
    if cp.has_section("macro"):
        for name, value in cp.items("macro"):
            p, sep, freq = value.rpartition(",")
            if not sep:
                raise ConfigError(f"[macro] {name}: expected 'path, frequency'")
            freq = freq.strip().lower()
            if freq not in FREQUENCIES:
                raise ConfigError(f"[macro] {name}: frequency must be one of {', '.join(FREQUENCIES)}")
            macro.append(MacroInput(name, path(p), freq))

    defaults = PrepConfig()
    dependent = _columns(cp, "dependent", "dependent", (defaults.dependent,))
    if len(dependent) != 1:
        raise ConfigError("[dependent] must define exactly one column")
    knots = _get(cp, "spline", "knot_placement", str, defaults.knot_placement)
    if knots not in ("end", "mid"):
        raise ConfigError("[spline] knot_placement must be 'end' or 'mid'")
    prep = PrepConfig(
        dependent=dependent[0],
        proxies=_columns(cp, "proxies", "proxy", defaults.proxies),
        controls=_columns(cp, "controls", "control", defaults.controls),
        robustness=_columns(cp, "robustness", "control", defaults.robustness),
        lags=_get(cp, "prep", "lags", int, defaults.lags),
        knot_placement=knots,
        min_obs=_get(cp, "prep", "min_obs", int, defaults.min_obs),
    )
    if prep.lags < 0:
        raise ConfigError("[prep] lags must be >= 0")
    if not prep.proxies:
        raise ConfigError("[proxies] must define at least one column")

    options = ProxyOptions(
        cfv_window=_get(cp, "firms", "cfv_window", int, 12),
        cfv_epsilon=_get(cp, "firms", "cfv_epsilon", float, 1e-9),
    )

    regimes = (SUBPRIME,)
    if cp.has_section("regimes"):
        regimes = tuple(RegimeWindow.parse(label, text) for label, text in cp.items("regimes"))

    pp_bw = _get(cp, "pp", "bandwidth", str, "auto").strip().lower()
    try:
        pp_bw = None if pp_bw == "auto" else int(pp_bw)
    except ValueError:
        raise ConfigError(f"[pp] bandwidth must be 'auto' or an integer, got {pp_bw!r}") from None

    return PipelineConfig(
        inputs=inputs,
        macro=tuple(macro),
        prep=prep,
        proxy_options=options,
        forward_fill=_get(cp, "firms", "forward_fill", bool, False),
        alpha=_get(cp, "regression", "alpha", float, 0.10),
        main_controls=_get(cp, "regression", "main_controls", _list, MAIN_CONTROLS),
        robustness_controls=_get(cp, "regression", "robustness_controls", _list, ROBUSTNESS_CONTROLS),
        bg_lags=_get(cp, "diagnostics", "bg_lags", int, 12),
        reset_powers=_get(cp, "diagnostics", "reset_powers", lambda t: _list(t, int), (2, 3)),
        adf_max_lag=_get(cp, "adf", "max_lag", int, 12),
        pp_bandwidth=pp_bw,
        index_form=_get(cp, "index", "form", str, "lw"),
        index_delta=_get(cp, "index", "delta", str, "none"),
        regimes=regimes,
        output_dir=path(_get(cp, "output", "directory", str, "out")),
        formats=_get(cp, "output", "formats", _list, OUTPUT_FORMATS),
        source=str(source) if source is not None else None,
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config(text, path.parent, path)
