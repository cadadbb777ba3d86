"""Default-risk proxies, a post-hoc composite index and yield-spread regressions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateInputError,
    DomainError,
    EmptySelectionError,
    GapError,
    InsufficientDataError,
    NumericError,
    ParseError,
    PipelineError,
    SchemaError,
    SingularDesignError,
    SpreadRiskError,
    ThinRegimeError,
    ValidationError,
)
from .ols import RegressionFit, fit_spread_model, ols_fit  # noqa: E402
from .posthoc import PosthocIndex, build_index, construct, index_regression, lw_weights, select_proxies  # noqa: E402
from .prep import AlignedDataset, PrepConfig, build_aligned  # noqa: E402
from .regimes import RegimeWindow, regime_regression, run_regime  # noqa: E402
from .synth import SynthConfig, generate  # noqa: E402

__all__ = [
    "__version__",
    "AlignedDataset",
    "ConfigError",
    "DegenerateInputError",
    "DomainError",
    "EmptySelectionError",
    "GapError",
    "InsufficientDataError",
    "NumericError",
    "ParseError",
    "PipelineError",
    "PosthocIndex",
    "PrepConfig",
    "RegimeWindow",
    "RegressionFit",
    "SchemaError",
    "SingularDesignError",
    "SpreadRiskError",
    "SynthConfig",
    "ThinRegimeError",
    "ValidationError",
    "build_aligned",
    "build_index",
    "construct",
    "fit_spread_model",
    "generate",
    "index_regression",
    "lw_weights",
    "ols_fit",
    "regime_regression",
    "run_regime",
    "select_proxies",
]
