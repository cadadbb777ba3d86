import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadrisk.errors import DegenerateInputError, EmptySelectionError, SingularDesignError, ValidationError
from spreadrisk.ols import fit_spread_model, ols_fit
from spreadrisk.posthoc import (
    IndexMember,
    build_index,
    construct,
    index_regression,
    lw_weights,
    sample_cov,
    select_proxies,
    single_proxy_fit,
)
from spreadrisk.prep import AlignedDataset
from spreadrisk.synth import latent_proxy_dataset

from conftest import monthly


def _brute_cov(a, b):
    ma = sum(a) / len(a)
    mb = sum(b) / len(b)
    return sum((x - ma) * (z - mb) for x, z in zip(a, b)) / (len(a) - 1)


def _dataset(frame, proxies):
    meta = {c: {} for c in frame.columns}
    return AlignedDataset(frame, "dYS", tuple(proxies), (), meta)


def _fake_fit(pvalues, coefs=None):
    names = ["const", *pvalues]
    n = len(names)
    coefs = coefs or {k: 1.0 for k in pvalues}
    return type("F", (), {
        "p_value": pd.Series([0.5, *pvalues.values()], index=names),
        "coef": pd.Series([0.0, *(coefs[k] for k in pvalues)], index=names),
    })()


def test_table_pattern_selects_three(small_synth):
    data = small_synth.aligned()
    fit = _fake_fit({"CFv": 0.08, "dDD": 0.001, "dZ": 0.6, "dIR": 0.004})
    sig, principal, aic = select_proxies(fit, data, alpha=0.10)
    assert sig == ["CFv", "dDD", "dIR"]
    assert principal in sig
    assert principal == min(aic, key=aic.get)
    with pytest.raises(EmptySelectionError):
        select_proxies(_fake_fit({"CFv": 0.5, "dDD": 0.5, "dZ": 0.6, "dIR": 0.4}), data)


def test_single_significant_proxy_is_principal(small_synth):
    data = small_synth.aligned()
    sig, principal, _ = select_proxies(_fake_fit({"CFv": 0.5, "dDD": 0.5, "dZ": 0.01, "dIR": 0.4}), data)
    assert sig == ["dZ"] and principal == "dZ"


def test_principal_has_the_stronger_signal():
    hits = 0
    for seed in range(100):
        ld = latent_proxy_dataset(seed, loadings=(1.0, 0.5), noise_sd=(1.0, 1.0))
        idx, _, _ = construct(fit_spread_model(ld.data), ld.data)
        hits += idx.principal == "CFv"
    assert hits >= 90


def test_weights_against_brute_force(rng):
    T = 12
    y = rng.standard_normal(T)
    X = pd.DataFrame(rng.standard_normal((T, 3)), columns=["a", "b", "c"])
    betas = {"a": 0.7, "b": -1.3, "c": 0.2}
    members = lw_weights(y, X, betas, "b")
    c1 = _brute_cov(list(y), list(X["b"]))
    for m in members:
        ratio = _brute_cov(list(y), list(X[m.name])) / c1
        assert m.cov_ratio == pytest.approx(ratio, abs=1e-12)
        assert m.weight == pytest.approx(betas[m.name] * ratio, abs=1e-12)
    assert next(m for m in members if m.name == "b").cov_ratio == 1.0


def test_single_and_equal_covariance_weights(rng):
    y = rng.standard_normal(30)
    X = pd.DataFrame({"a": rng.standard_normal(30)})
    (m,) = lw_weights(y, X, {"a": 2.5}, "a")
    assert m.weight == 2.5 and m.cov_ratio == 1.0
    # two proxies with equal covariance with y: x2 = x1 + component orthogonal to y
    x1 = rng.standard_normal(30)
    z = rng.standard_normal(30)
    yc = y - y.mean()
    z = z - z.mean() - (z @ yc) / (yc @ yc) * yc
    X = pd.DataFrame({"a": x1, "b": x1 + z})
    w = {m.name: m.weight for m in lw_weights(y, X, {"a": 0.4, "b": -0.9}, "a")}
    assert w["a"] == 0.4
    assert w["b"] == pytest.approx(-0.9, rel=1e-12)


def test_ddof_is_immaterial(rng):
    y = rng.standard_normal(40)
    X = pd.DataFrame(rng.standard_normal((40, 2)), columns=["a", "b"])
    members = lw_weights(y, X, {"a": 1.0, "b": 1.0}, "a")
    pop = np.cov(np.column_stack([y, X]).T, ddof=0)
    assert members[1].cov_ratio == pytest.approx(pop[0, 2] / pop[0, 1], rel=1e-12)


def test_ill_conditioned_principal(rng):
    y = rng.standard_normal(40)
    yc = y - y.mean()
    x = rng.standard_normal(40)
    x = x - x.mean() - (x @ yc) / (yc @ yc) * yc  # exactly uncorrelated with y
    X = pd.DataFrame({"a": x, "b": rng.standard_normal(40)})
    with pytest.raises(DegenerateInputError, match="principal"):
        lw_weights(y, X, {"a": 1.0, "b": 1.0}, "a")
    with pytest.raises(ValidationError):
        lw_weights(y, X, {"a": 1.0, "b": 1.0}, "zz")


def test_build_index_weighted_examples(rng):
    X = pd.DataFrame(rng.standard_normal((10, 3)), columns=["a", "b", "c"], index=pd.period_range("2000-01", periods=10, freq="M"))
    one = build_index({"b": 1.0}, X, form="weighted")
    np.testing.assert_array_equal(one.series.to_numpy(), X["b"].to_numpy())
    two = build_index({"a": 0.0, "b": 2.0, "c": 0.0}, X, form="weighted")
    np.testing.assert_array_equal(two.series.to_numpy(), 2 * X["b"].to_numpy())
    with pytest.raises(ValidationError):
        build_index({"a": 1.0}, X)


def test_two_proxy_index_by_hand():
    idx = pd.period_range("2000-01", periods=4, freq="M")
    X = pd.DataFrame({"a": [1.0, 2.0, -1.0, 0.5], "b": [0.0, 3.0, 1.0, -2.0]}, index=idx)
    members = [IndexMember("a", 0.5, 1.0, 0.5), IndexMember("b", -0.4, 2.0, -0.8)]
    w = build_index(members, X, "a", form="weighted")
    np.testing.assert_allclose(w.series.to_numpy(), [0.5, 1.0 - 2.4, -0.5 - 0.8, 0.25 + 1.6], atol=1e-15)
    lw = build_index(members, X, "a", form="lw")
    # sum of betas times columns over sum of weights (-0.3)
    np.testing.assert_allclose(lw.series.to_numpy(), [0.5 / -0.3, (1.0 - 1.2) / -0.3, (-0.5 - 0.4) / -0.3, (0.25 + 0.8) / -0.3])
    d = build_index(members, X, "a", form="weighted", delta="diff")
    np.testing.assert_allclose(d.delta_series.to_numpy(), np.diff(w.series.to_numpy()))
    assert len(d.delta_series) == 3
    assert lw.effect == pytest.approx(-0.3)


def test_pct_delta_guards_zero():
    X = pd.DataFrame({"a": [0.0, 1.0, 2.0]}, index=pd.period_range("2000-01", periods=3, freq="M"))
    with pytest.raises(DegenerateInputError):
        build_index({"a": 1.0}, X, form="weighted", delta="pct")


def test_index_regression_identity(rng):
    y = monthly(rng.standard_normal(30))
    f = index_regression(y, y.copy())
    assert f.coef["delta_rho"] == pytest.approx(1.0, abs=1e-12)
    assert f.coef["phi"] == pytest.approx(0.0, abs=1e-12)
    assert f.adj_r2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(SingularDesignError):
        index_regression(y, monthly(np.ones(30)))


def test_index_regression_recovers_known_lambda():
    rng = np.random.default_rng(31)
    x = rng.standard_normal(131)
    y = 0.2 - 0.6 * x + 0.8 * rng.standard_normal(131)
    f = index_regression(monthly(y), monthly(x))
    assert abs(f.coef["delta_rho"] + 0.6) < 2 * f.stderr["delta_rho"]
    assert f.names == ["phi", "delta_rho"]


def test_lw_index_regression_returns_composite_effect():
    ld = latent_proxy_dataset(11)
    fit = fit_spread_model(ld.data)
    # exact when every proxy is retained: the slope on the fitted proxy part is one
    idx, sig, _ = construct(fit, ld.data, alpha=1 - 1e-12)
    assert sig == list(ld.data.proxies)
    f = index_regression(ld.data.y, idx.delta_series)
    assert f.coef["delta_rho"] == pytest.approx(idx.effect, rel=1e-9)


def test_rescaling_principal():
    ld = latent_proxy_dataset(4)
    data = ld.data
    fit = fit_spread_model(data)
    idx, sig, _ = construct(fit, data)
    c = 7.5
    frame = data.frame.copy()
    frame[idx.principal] *= c
    scaled = _dataset(frame, data.proxies)
    fit2 = fit_spread_model(scaled)
    idx2, sig2, _ = construct(fit2, scaled)
    assert sig2 == sig and idx2.principal == idx.principal
    for m, m2 in zip(idx.members, idx2.members):
        if m.name != idx.principal:
            assert m2.cov_ratio == pytest.approx(m.cov_ratio / c, rel=1e-10)
    a = index_regression(data.y, idx.delta_series)
    b = index_regression(scaled.y, idx2.delta_series)
    assert b.t_stat["delta_rho"] == pytest.approx(a.t_stat["delta_rho"], rel=1e-10)
    assert b.r2 == pytest.approx(a.r2, rel=1e-10)
    assert b.p_value["delta_rho"] == pytest.approx(a.p_value["delta_rho"], rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations([0, 1, 2, 3]))
def test_weights_permutation_invariant(seed, perm):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(25)
    X = pd.DataFrame(rng.standard_normal((25, 4)) + 0.5 * y[:, None], columns=list("abcd"))
    betas = dict(zip("abcd", rng.standard_normal(4)))
    base = {m.name: m.weight for m in lw_weights(y, X, betas, "a")}
    cols = [X.columns[i] for i in perm]
    shuffled = {m.name: m.weight for m in lw_weights(y, X[cols], betas, "a")}
    for k in base:
        assert shuffled[k] == pytest.approx(base[k], rel=1e-12, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_weight_identity(seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(20)
    X = pd.DataFrame(rng.standard_normal((20, 3)) + y[:, None], columns=list("abc"))
    for m in lw_weights(y, X, dict(zip("abc", rng.standard_normal(3))), "c"):
        assert m.weight == m.beta * m.cov_ratio


def test_mean_lambda_matches_implied_effect():
    # CFv is the unambiguous principal here, so the implied value is fixed
    lam, implied = [], None
    for seed in range(100):
        ld = latent_proxy_dataset(seed, noise_sd=(0.5, 0.9, 1.0, 1.1))
        idx, _, _ = construct(fit_spread_model(ld.data), ld.data, alpha=1 - 1e-12)
        assert idx.principal == ld.principal
        lam.append(index_regression(ld.data.y, idx.delta_series).coef["delta_rho"])
        implied = ld.implied_lambda
    assert abs(np.mean(lam) / implied - 1) < 0.05


def test_lambda_tracks_implied_for_chosen_principal():
    ratio = []
    for seed in range(100):
        ld = latent_proxy_dataset(seed)
        idx, _, _ = construct(fit_spread_model(ld.data), ld.data, alpha=1 - 1e-12)
        j = list(ld.data.proxies).index(idx.principal)
        c = ld.cov_xy
        implied = c @ np.linalg.solve(ld.covariance, c) / c[j]
        ratio.append(index_regression(ld.data.y, idx.delta_series).coef["delta_rho"] / implied)
    assert abs(np.mean(ratio) - 1) < 0.05


def test_index_export(tmp_path):
    ld = latent_proxy_dataset(1)
    idx, _, _ = construct(fit_spread_model(ld.data), ld.data)
    idx.to_csv(tmp_path / "i.csv")
    head = (tmp_path / "i.csv").read_text().splitlines()[0]
    assert head == "date,rho,delta_rho"
    w = idx.weights_dict()
    assert w["principal"] == idx.principal
    assert set(w["members"][idx.principal]) == {"beta", "cov_ratio", "weight"}
