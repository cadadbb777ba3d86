"""Post-hoc composite default-risk index from several noisy proxies.

Given the multi-proxy regression coefficients ``beta_j`` of the significant
proxies, each proxy gets the weight ``beta_j * Cov(y, x_j) / Cov(y, x_1)``
where ``x_1`` is the principal proxy. The sum of the weights is the effect of
the latent default risk on ``y`` in units of the principal proxy.

Two index forms are available:

``"lw"`` (default)
    ``rho_t = sum_j beta_j x_jt / sum_j weight_j``: the fitted proxy
    combination rescaled to the principal's units, so that regressing ``y`` on
    ``rho`` recovers the composite effect. Proxies entering with opposite
    signs reinforce rather than cancel, and rescaling the principal rescales
    ``rho`` by the same factor.
``"weighted"``
    ``rho_t = sum_j weight_j x_jt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DegenerateInputError, EmptySelectionError, InsufficientDataError, ValidationError
from .ols import RegressionFit, ols_fit

INDEX_FORMS = ("lw", "weighted")
DELTA_MODES = ("none", "diff", "pct")


@dataclass(frozen=True)
class IndexMember:
    name: str
    beta: float
    cov_ratio: float
    weight: float

    def to_dict(self) -> dict:
        return {"name": self.name, "beta": self.beta, "cov_ratio": self.cov_ratio, "weight": self.weight}


@dataclass(eq=False)
class PosthocIndex:
    principal: str
    members: list
    series: pd.Series
    delta_series: pd.Series
    form: str = "lw"
    delta: str = "none"

    @property
    def effect(self) -> float:
        """Sum of the weights: composite effect in principal-proxy units."""
        return float(sum(m.weight for m in self.members))

    def weights(self) -> dict:
        return {m.name: m.weight for m in self.members}

    def weights_dict(self) -> dict:
        return {
            "principal": self.principal,
            "form": self.form,
            "delta": self.delta,
            "effect": self.effect,
            "members": {m.name: {"beta": m.beta, "cov_ratio": m.cov_ratio, "weight": m.weight} for m in self.members},
        }

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"rho": self.series, "delta_rho": self.delta_series})
        frame.index.name = "date"
        return frame

    def to_csv(self, path) -> None:
        frame = self.to_frame()
        frame.index = frame.index.astype(str)
        frame.to_csv(path)


def sample_cov(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(((a - a.mean()) * (b - b.mean())).sum() / (len(a) - 1))


def single_proxy_fit(y, x, name="proxy") -> RegressionFit:
    x = np.asarray(x, dtype=float)
    X = np.column_stack([np.ones(len(x)), x])
    return ols_fit(np.asarray(y, dtype=float), X, ["const", name])


def select_proxies(fit: RegressionFit, data, alpha=0.10, proxies=None):
    """Significant proxies (p < alpha in ``fit``) and the principal among them.

    The principal is the significant proxy whose regression of ``y`` on an
    intercept and that proxy alone has the lowest AIC. Returns
    ``(significant, principal, aic_by_proxy)``; ``significant`` keeps dataset order.
    """
    proxies = list(data.proxies if proxies is None else proxies)
    missing = [p for p in proxies if p not in fit.p_value.index]
    if missing:
        raise ValidationError(f"fit has no coefficient for proxy {missing[0]}")
    significant = [p for p in proxies if fit.p_value[p] < alpha]
    if not significant:
        raise EmptySelectionError(f"no proxy significant at alpha={alpha}")
    y = data.y.to_numpy()
    aic = {p: single_proxy_fit(y, data.column(p).to_numpy(), p).aic for p in significant}
    principal = min(significant, key=lambda p: (aic[p], significant.index(p)))
    return significant, principal, aic


def lw_weights(y, X_sig: pd.DataFrame, betas, principal) -> list[IndexMember]:
    """Covariance-ratio weights ``beta_j * Cov(y, x_j) / Cov(y, x_principal)``."""
    y = np.asarray(y, dtype=float)
    if principal not in X_sig.columns:
        raise ValidationError(f"principal {principal!r} is not among the proxies")
    betas = pd.Series(betas, dtype=float) if not isinstance(betas, pd.Series) else betas
    x1 = X_sig[principal].to_numpy(dtype=float)
    sy, s1 = y.std(ddof=1), x1.std(ddof=1)
    if sy == 0 or s1 == 0:
        raise DegenerateInputError("y or the principal proxy is constant")
    c1 = sample_cov(y, x1)
    if abs(c1 / (sy * s1)) <= 1e-12:
        raise DegenerateInputError(f"Cov(y, {principal}) is numerically zero; principal is ill-conditioned")
    members = []
    for name in X_sig.columns:
        ratio = 1.0 if name == principal else sample_cov(y, X_sig[name].to_numpy(dtype=float)) / c1
        b = float(betas[name])
        members.append(IndexMember(name, b, ratio, b * ratio))
    return members


def _delta(series: pd.Series, mode: str) -> pd.Series:
    if mode == "none":
        return series.copy()
    if mode == "diff":
        return series.diff().iloc[1:]
    if mode == "pct":
        prev = series.shift(1).iloc[1:]
        if (prev == 0).any():
            raise DegenerateInputError(f"index is zero in {prev.index[(prev == 0).to_numpy()][0]}; use delta='diff'")
        return 100.0 * (series.iloc[1:] - prev) / prev
    raise ValidationError(f"delta mode must be one of {', '.join(DELTA_MODES)}")


def build_index(members, X_sig: pd.DataFrame, principal=None, form="lw", delta="none") -> PosthocIndex:
    """Monthly index from index members (or a plain ``{name: weight}`` mapping).

    ``delta`` selects the change series handed to the index regression:
    ``"none"`` uses the index itself, which is already a change series when
    it is built from the differenced proxy columns.
    """
    if isinstance(members, dict):
        members = [IndexMember(n, w, 1.0, w) for n, w in members.items()]
        if form == "lw":
            raise ValidationError("the 'lw' form needs IndexMember entries with betas")
    if not members:
        raise ValidationError("index needs at least one member")
    names = [m.name for m in members]
    missing = [n for n in names if n not in X_sig.columns]
    if missing:
        raise ValidationError(f"no column for index member {missing[0]}")
    if form not in INDEX_FORMS:
        raise ValidationError(f"index form must be one of {', '.join(INDEX_FORMS)}")
    principal = principal or next((m.name for m in members if m.cov_ratio == 1.0), names[0])
    X = X_sig[names].to_numpy(dtype=float)
    if form == "weighted":
        rho = X @ np.array([m.weight for m in members])
    else:
        total = sum(m.weight for m in members)
        if total == 0:
            raise DegenerateInputError("index weights sum to zero; composite effect undefined")
        rho = X @ np.array([m.beta for m in members]) / total
    series = pd.Series(rho, index=X_sig.index, name="rho")
    return PosthocIndex(principal, list(members), series, _delta(series, delta).rename("delta_rho"), form, delta)


def index_regression(delta_ys, delta_rho) -> RegressionFit:
    """``y = phi + lambda * delta_rho + v`` over the common dates."""
    if isinstance(delta_ys, pd.Series) and isinstance(delta_rho, pd.Series):
        joined = pd.concat([delta_ys.rename("y"), delta_rho.rename("x")], axis=1, join="inner")
        y, x = joined["y"].to_numpy(), joined["x"].to_numpy()
        dates = tuple(str(d) for d in joined.index)
    else:
        y, x = np.asarray(delta_ys, dtype=float), np.asarray(delta_rho, dtype=float)
        if y.shape != x.shape:
            raise ValidationError("delta_ys and delta_rho differ in length")
        dates = ()
    if len(y) < 24:
        raise InsufficientDataError(f"index regression needs at least 24 observations, got {len(y)}")
    X = np.column_stack([np.ones(len(x)), x])
    return ols_fit(y, X, ["phi", "delta_rho"], dates=dates)


def construct(fit: RegressionFit, data, alpha=0.10, form="lw", delta="none", proxies=None):
    """Selection, weights and index in one call; returns ``(index, significant, aic)``."""
    significant, principal, aic = select_proxies(fit, data, alpha, proxies)
    X_sig = data.frame[significant]
    members = lw_weights(data.y.to_numpy(), X_sig, fit.coef[significant], principal)
    return build_index(members, X_sig, principal, form, delta), significant, aic
