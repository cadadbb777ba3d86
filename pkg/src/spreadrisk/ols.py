"""Ordinary least squares with the summary statistics used in the tables.

Coefficients come from a QR decomposition of the design; the explicit
normal-equations route is kept only as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats
from scipy.linalg import solve_triangular

from .errors import DomainError, InsufficientDataError, SingularDesignError, ValidationError

CONDITION_CAP = 1e10


@dataclass(eq=False)
class RegressionFit:
    coef: pd.Series
    stderr: pd.Series
    t_stat: pd.Series
    p_value: pd.Series
    residuals: np.ndarray
    fitted: np.ndarray
    r2: float
    adj_r2: float
    aic: float
    durbin_watson: float
    ssr: float
    n_obs: int
    k_params: int
    dates: tuple = field(default=())

    @property
    def names(self) -> list[str]:
        return list(self.coef.index)

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.k_params

    @property
    def sigma2(self) -> float:
        return self.ssr / self.df_resid

    def stars(self) -> dict:
        return {n: significance_stars(p) if np.isfinite(p) else "" for n, p in self.p_value.items()}

    def to_dict(self, full=True) -> dict:
        table = [
            {
                "name": n,
                "coef": _num(self.coef[n]),
                "stderr": _num(self.stderr[n]),
                "t_stat": _num(self.t_stat[n]),
                "p_value": _num(self.p_value[n]),
                "star": self.stars()[n],
            }
            for n in self.names
        ]
        out = {
            "coefficients": table,
            "n_obs": self.n_obs,
            "k_params": self.k_params,
            "r2": _num(self.r2),
            "adj_r2": _num(self.adj_r2),
            "aic": _num(self.aic),
            "durbin_watson": _num(self.durbin_watson),
            "ssr": _num(self.ssr),
        }
        if full:
            out["residuals"] = [_num(v) for v in self.residuals]
            out["fitted"] = [_num(v) for v in self.fitted]
            out["dates"] = list(self.dates)
        return out

    @classmethod
    def from_dict(cls, d) -> "RegressionFit":
        names = [row["name"] for row in d["coefficients"]]

        def col(key):
            return pd.Series([_unnum(row[key]) for row in d["coefficients"]], index=names, dtype=float)

        return cls(
            coef=col("coef"),
            stderr=col("stderr"),
            t_stat=col("t_stat"),
            p_value=col("p_value"),
            residuals=np.array([_unnum(v) for v in d.get("residuals", [])], dtype=float),
            fitted=np.array([_unnum(v) for v in d.get("fitted", [])], dtype=float),
            r2=_unnum(d["r2"]),
            adj_r2=_unnum(d["adj_r2"]),
            aic=_unnum(d["aic"]),
            durbin_watson=_unnum(d["durbin_watson"]),
            ssr=_unnum(d["ssr"]),
            n_obs=int(d["n_obs"]),
            k_params=int(d["k_params"]),
            dates=tuple(d.get("dates", ())),
        )


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _unnum(v):
    return float("nan") if v is None else float(v)


def significance_stars(p_value) -> str:
    """``"a"`` below 1%, ``"b"`` below 5%, ``"c"`` below 10%, otherwise ``""``."""
    if not 0.0 <= p_value <= 1.0:
        raise DomainError(f"p-value must lie in [0, 1], got {p_value}")
    if p_value < 0.01:
        return "a"
    if p_value < 0.05:
        return "b"
    if p_value < 0.10:
        return "c"
    return ""


def check_rank(X: np.ndarray, names, cap=CONDITION_CAP) -> float:
    """Raise :class:`SingularDesignError` when the column-equilibrated design is
    numerically rank deficient; return its condition number otherwise."""
    norms = np.linalg.norm(X, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise SingularDesignError(f"all-zero column(s): {', '.join(names[i] for i in zero)}",
                                  [names[i] for i in zero])
    for i in range(X.shape[1]):
        for j in range(i + 1, X.shape[1]):
            if np.array_equal(X[:, i], X[:, j]):
                raise SingularDesignError(f"duplicate columns {names[i]} and {names[j]}", [names[i], names[j]])
    s, vt = np.linalg.svd(X / norms, full_matrices=False)[1:]
    cond = s[0] / s[-1] if s[-1] > 0 else np.inf
    if not cond < cap:
        v = np.abs(vt[-1])
        involved = [names[i] for i in np.flatnonzero(v > 0.1 * v.max())]
        raise SingularDesignError(
            f"design is numerically singular (condition number {cond:.3g}); "
            f"near-dependent columns: {', '.join(involved)}",
            involved,
        )
    return cond


def _has_intercept(X) -> bool:
    return bool(np.any(np.all(X == X[0], axis=0) & (X[0] != 0)))


def ols_fit(y, X, names=None, *, condition_cap=CONDITION_CAP, dates=()) -> RegressionFit:
    """Least-squares fit of ``y`` on the columns of ``X`` (intercept included by the caller)."""
    if isinstance(X, pd.DataFrame):
        names = list(X.columns) if names is None else list(names)
        if not dates and isinstance(X.index, pd.PeriodIndex):
            dates = tuple(str(d) for d in X.index)
        X = X.to_numpy(dtype=float)
    else:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        names = [f"x{i}" for i in range(X.shape[1])] if names is None else list(names)
    y = np.asarray(y, dtype=float)
    T, k = X.shape
    if len(names) != k:
        raise ValidationError(f"{len(names)} names for {k} columns")
    if y.shape != (T,):
        raise ValidationError(f"y has shape {y.shape}, design has {T} rows")
    if T <= k:
        raise InsufficientDataError(f"{T} observations for {k} parameters")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValidationError("regression data contain non-finite values")
    check_rank(X, names, condition_cap)

    q, r = np.linalg.qr(X)
    beta = solve_triangular(r, q.T @ y)
    fitted = X @ beta
    resid = y - fitted
    ssr = float(resid @ resid)
    df = T - k
    sigma2 = ssr / df
    rinv = solve_triangular(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(rinv**2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    p = 2.0 * stats.t.sf(np.abs(t), df)

    if _has_intercept(X):
        tss = float(((y - y.mean()) ** 2).sum())
    else:
        tss = float(y @ y)
    r2 = 1.0 - ssr / tss if tss > 0 else float("nan")
    adj = 1.0 - (1.0 - r2) * (T - 1) / df
    with np.errstate(divide="ignore", invalid="ignore"):
        aic = T * math.log(ssr / T) + 2 * k if ssr > 0 else float("-inf")
        dw = float(np.sum(np.diff(resid) ** 2) / ssr) if ssr > 0 else float("nan")

    idx = pd.Index(names)
    return RegressionFit(
        coef=pd.Series(beta, index=idx),
        stderr=pd.Series(se, index=idx),
        t_stat=pd.Series(t, index=idx),
        p_value=pd.Series(p, index=idx),
        residuals=resid,
        fitted=fitted,
        r2=r2,
        adj_r2=adj,
        aic=aic,
        durbin_watson=dw,
        ssr=ssr,
        n_obs=T,
        k_params=k,
        dates=tuple(dates),
    )


def durbin_watson(residuals) -> float:
    e = np.asarray(residuals, dtype=float)
    return float(np.sum(np.diff(e) ** 2) / np.sum(e**2))


def with_constant(frame: pd.DataFrame, columns) -> pd.DataFrame:
    """Design frame ``[const, *columns]``."""
    X = frame[list(columns)].copy() if columns else pd.DataFrame(index=frame.index)
    X.insert(0, "const", 1.0)
    return X


def fit_spread_model(data, proxies=None, controls=None) -> RegressionFit:
    """Yield-spread change on intercept, proxy columns and controls.

    Defaults to every proxy and control registered in the dataset, proxies
    first in their canonical order.
    """
    proxies = list(data.proxies if proxies is None else proxies)
    controls = list(data.controls if controls is None else controls)
    for name in (*proxies, *controls):
        if name not in data.frame.columns:
            raise ValidationError(f"dataset has no column {name!r}")
    cols = [*proxies, *controls]
    X = data.frame[cols].copy()
    X.insert(0, "const", 1.0)
    X.columns = ["const", *cols]
    return ols_fit(data.y.to_numpy(), X.to_numpy(), ["const", *cols],
                   dates=tuple(str(d) for d in data.dates))
