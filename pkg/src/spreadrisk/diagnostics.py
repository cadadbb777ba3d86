"""Serial-correlation, specification and collinearity diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import special

from .errors import DegenerateInputError, DomainError, InsufficientDataError, ValidationError
from .ols import RegressionFit, ols_fit


def chi2_sf(x, df) -> float:
    """Upper tail of the chi-square distribution (regularised upper incomplete gamma)."""
    if df <= 0:
        raise DomainError("chi-square degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def f_sf(x, df1, df2) -> float:
    """Upper tail of the F distribution via the regularised incomplete beta function."""
    if df1 <= 0 or df2 <= 0:
        raise DomainError("F degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x)))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    df: tuple
    p_value: float

    @property
    def reject_at_5pct(self) -> bool:
        return self.p_value < 0.05

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "df": list(self.df),
            "p_value": self.p_value,
            "reject_at_5pct": self.reject_at_5pct,
        }

    @classmethod
    def from_dict(cls, d) -> "TestResult":
        return cls(d["name"], float(d["statistic"]), tuple(int(v) for v in d["df"]), float(d["p_value"]))


def _design(X):
    if isinstance(X, pd.DataFrame):
        return X.to_numpy(dtype=float), list(X.columns)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X, [f"x{i}" for i in range(X.shape[1])]


def breusch_godfrey(fit: RegressionFit, X, lags=12) -> TestResult:
    """LM test for serial correlation up to ``lags`` in the residuals of ``fit``.

    The auxiliary regression uses the original design plus lagged residuals,
    with pre-sample lags set to zero; LM = T * R^2 ~ chi2(lags).
    """
    X, names = _design(X)
    e = np.asarray(fit.residuals, dtype=float)
    T, k = X.shape
    if len(e) != T:
        raise ValidationError("residuals and design differ in length")
    if lags < 1:
        raise ValidationError("Breusch-Godfrey lag order must be >= 1")
    if lags >= T - k:
        raise InsufficientDataError(f"{lags} lags leave no degrees of freedom with T={T}, k={k}")
    lagged = np.zeros((T, lags))
    for j in range(1, lags + 1):
        lagged[j:, j - 1] = e[:-j]
    aux = np.hstack([X, lagged])
    aux_names = [*names, *(f"resid_lag{j}" for j in range(1, lags + 1))]
    a = ols_fit(e, aux, aux_names, condition_cap=1e12)
    tss = float(((e - e.mean()) ** 2).sum())
    if tss == 0:
        raise DegenerateInputError("residuals are identically zero")
    r2 = 1.0 - a.ssr / tss
    lm = T * r2
    return TestResult("breusch_godfrey", lm, (lags,), chi2_sf(lm, lags))


def ramsey_reset(y, X, powers=(2, 3)) -> TestResult:
    """F test that powers of the fitted values add nothing to the linear model."""
    X, names = _design(X)
    y = np.asarray(y, dtype=float)
    powers = tuple(sorted(set(int(p) for p in powers)))
    if not powers or any(p not in (2, 3, 4) for p in powers):
        raise ValidationError("RESET powers must be a non-empty subset of {2, 3, 4}")
    T, k = X.shape
    q = len(powers)
    if T <= k + q:
        raise InsufficientDataError(f"T={T} too small for RESET with k={k} and {q} powers")
    base = ols_fit(y, X, names)
    if base.ssr <= 1e-20 * max(float(y @ y), 1.0):
        raise DegenerateInputError("perfect fit: zero residual variance")
    yhat = base.fitted
    sd = yhat.std()
    if sd == 0:
        raise DegenerateInputError("fitted values are constant")
    # the F statistic is invariant to rescaling the added columns; standardising
    # keeps the powers well conditioned
    z = (yhat - yhat.mean()) / sd
    extra = np.column_stack([z**p for p in powers])
    aug = ols_fit(y, np.hstack([X, extra]), [*names, *(f"yhat^{p}" for p in powers)], condition_cap=1e12)
    df2 = T - k - q
    F = ((base.ssr - aug.ssr) / q) / (aug.ssr / df2)
    return TestResult("ramsey_reset", float(F), (q, df2), f_sf(F, q, df2))


@dataclass(eq=False)
class CollinearityReport:
    names: list
    correlation_matrix: pd.DataFrame
    vif: pd.Series
    condition_indices: np.ndarray
    variance_decomposition: pd.DataFrame

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "correlation_matrix": self.correlation_matrix.to_numpy().tolist(),
            "vif": {k: float(v) for k, v in self.vif.items()},
            "condition_indices": self.condition_indices.tolist(),
            "variance_decomposition": {
                "columns": list(self.variance_decomposition.columns),
                "rows": self.variance_decomposition.to_numpy().tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d) -> "CollinearityReport":
        names = list(d["names"])
        vd = d["variance_decomposition"]
        ci = np.array(d["condition_indices"], dtype=float)
        return cls(
            names,
            pd.DataFrame(d["correlation_matrix"], index=names, columns=names),
            pd.Series(d["vif"], dtype=float)[names],
            ci,
            pd.DataFrame(vd["rows"], columns=vd["columns"], index=pd.Index(ci, name="condition_index")),
        )


def variance_inflation(X, names=None) -> pd.Series:
    """VIF_j = 1 / (1 - R^2_j), R^2_j from regressing column j on the others plus a constant."""
    X, default = _design(X)
    names = default if names is None else list(names)
    T, p = X.shape
    out = {}
    ones = np.ones((T, 1))
    for j in range(p):
        xj = X[:, j]
        others = np.hstack([ones, np.delete(X, j, axis=1)])
        fit = ols_fit(xj, others, ["const", *(n for i, n in enumerate(names) if i != j)], condition_cap=1e14)
        out[names[j]] = 1.0 / (1.0 - fit.r2) if fit.r2 < 1 else np.inf
    return pd.Series(out)[names]


def belsley(X, names, include_intercept=True):
    """Condition indices (ascending) and variance-decomposition proportions.

    Columns are scaled to unit length (intercept column included first when
    requested). Row ``i`` of the proportions matrix belongs to condition index
    ``i``; every column sums to one.
    """
    X = np.asarray(X, dtype=float)
    names = list(names)
    if include_intercept:
        X = np.hstack([np.ones((X.shape[0], 1)), X])
        names = ["const", *names]
    Xs = X / np.linalg.norm(X, axis=0)
    _, s, vt = np.linalg.svd(Xs, full_matrices=False)
    ci = s[0] / s
    phi = (vt.T**2) / s**2  # phi[k, j]: coefficient k, singular value j
    props = (phi / phi.sum(axis=1, keepdims=True)).T  # rows: singular values
    return ci, pd.DataFrame(props, columns=names, index=pd.Index(ci, name="condition_index"))


def collinearity_report(X, names=None, include_intercept=True) -> CollinearityReport:
    """Correlation matrix, VIFs and Belsley diagnostics for a design without intercept."""
    X, default = _design(X)
    names = default if names is None else list(names)
    if X.shape[1] < 2:
        raise ValidationError("collinearity diagnostics need at least 2 columns")
    sd = X.std(axis=0)
    const = np.flatnonzero(sd == 0)
    if const.size:
        raise DegenerateInputError(f"column {names[const[0]]} is constant")
    corr = np.corrcoef(X, rowvar=False)
    np.fill_diagonal(corr, 1.0)
    ci, vd = belsley(X, names, include_intercept)
    return CollinearityReport(
        names,
        pd.DataFrame(corr, index=names, columns=names),
        variance_inflation(X, names),
        ci,
        vd,
    )
