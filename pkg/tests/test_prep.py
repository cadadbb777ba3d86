import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spreadrisk.errors import ConfigError, DomainError, ValidationError
from spreadrisk.ingest import MacroTable
from spreadrisk.prep import (
    AlignedDataset,
    ColumnSpec,
    PrepConfig,
    apply_chain,
    build_aligned,
    log_transform,
    pct_change,
    yield_spread,
)

from conftest import monthly


def test_pct_change_examples():
    out = pct_change(monthly([100, 110, 99]))
    np.testing.assert_allclose(out.to_numpy(), [10.0, -10.0], atol=1e-12)
    assert str(out.index[0]) == "2000-02"
    with pytest.raises(DomainError, match="2000-01"):
        pct_change(monthly([0, 5]))


def test_log_examples():
    out = log_transform(monthly([math.e, math.e**2]))
    np.testing.assert_allclose(out.to_numpy(), [1.0, 2.0], rtol=1e-15)
    with pytest.raises(DomainError, match="-0.3"):
        log_transform(monthly([1.0, -0.3]))


def test_chain_steps():
    s = monthly([100, 110, 121])
    np.testing.assert_allclose(apply_chain(s, ("dlog",)).to_numpy(), 100 * np.log(1.1), rtol=1e-12)
    np.testing.assert_allclose(apply_chain(s, ("diff",)).to_numpy(), [10, 11])
    with pytest.raises(ConfigError):
        apply_chain(s, ("cube",))
    with pytest.raises(ConfigError):
        ColumnSpec.parse("x", "src | sqrt", "control")
    assert ColumnSpec.parse("dIR", "IR | dlog", "proxy") == ColumnSpec("dIR", "IR", ("dlog",), "proxy")


@given(st.lists(st.floats(0.1, 1e4), min_size=2, max_size=40))
def test_pct_reconstructs_levels(levels):
    s = monthly(levels)
    r = pct_change(s).to_numpy()
    rebuilt = levels[0] * np.cumprod(1 + r / 100)
    np.testing.assert_allclose(rebuilt, levels[1:], rtol=1e-9)


def test_yield_spread():
    idx = pd.period_range("2000-01", periods=2, freq="M")
    corp = pd.DataFrame({"aaa": [7.0, 7.2], "baa": [8.0, 8.4]}, index=idx)
    tsy = pd.DataFrame({"t10": [5.0, 5.1], "t30": [5.5, 5.7]}, index=idx)
    np.testing.assert_allclose(yield_spread(corp, tsy).to_numpy(), [2.25, 2.4])


def _levels(n=30, start="2000-01", seed=0):
    rng = np.random.default_rng(seed)
    lv = lambda: monthly(100 + np.cumsum(rng.random(n)), start)
    return lv(), {"CFv": lv(), "DD": lv(), "Z": lv(), "IR": lv()}, {"cpi": lv(), "ipi": lv(), "ffr": lv()}


def test_no_lag_no_diff_keeps_length():
    ys, px, ctl = _levels()
    cfg = PrepConfig(
        dependent=ColumnSpec("YS", "YS", (), "dependent"),
        proxies=tuple(ColumnSpec(n, n, (), "proxy") for n in px),
        controls=tuple(ColumnSpec(n, n, ()) for n in ctl),
        robustness=(),
        lags=0,
    )
    data = build_aligned(ys, px, ctl, cfg)
    assert len(data) == 30
    assert data.dates[0] == pd.Period("2000-01", "M")


def test_default_chain_trims_two_months():
    ys, px, ctl = _levels()
    data = build_aligned(ys, px, ctl)
    # one month lost to differencing and one to the lag
    assert len(data) == 28
    assert list(data.frame.columns) == ["dYS", "CFv", "dDD", "dZ", "dIR", "dCPI", "dIPI", "dFFR", "dYS_lag1"]
    np.testing.assert_array_equal(data.column("dYS_lag1").to_numpy(), pct_change(ys).to_numpy()[:-1][-28:])
    assert data.metadata["dIR"]["transform"] == ["dlog"]
    assert data.metadata["dYS_lag1"]["transform"] == ["pct", "lag1"]


def test_registration_order_irrelevant():
    ys, px, ctl = _levels()
    a = build_aligned(ys, px, ctl)
    rev = PrepConfig()
    rev = PrepConfig(proxies=tuple(reversed(rev.proxies)), controls=tuple(reversed(rev.controls)))
    b = build_aligned(ys, dict(reversed(list(px.items()))), dict(reversed(list(ctl.items()))), rev)
    assert a.frame[sorted(a.frame.columns)].equals(b.frame[sorted(b.frame.columns)])


def test_quarterly_control_is_splined():
    ys, px, ctl = _levels(n=36)
    q = pd.period_range("2000Q1", periods=12, freq="Q")
    gdp = MacroTable("gdp", "quarterly", pd.Series(np.linspace(100, 111, 12), index=q))
    data = build_aligned(ys, px, {**ctl, "gdp": gdp})
    assert "dlnGDP" in data.controls
    assert data.metadata["dlnGDP"]["transform"] == ["spline", "dlog"]
    assert data.metadata["dlnGDP"]["native_frequency"] == "quarterly"


def test_gap_in_source_rejected():
    ys, px, ctl = _levels()
    px["DD"] = px["DD"].drop(px["DD"].index[10])
    with pytest.raises(ValidationError, match="2000-11"):
        build_aligned(ys, px, ctl)


def test_missing_proxy_source():
    ys, px, ctl = _levels()
    del px["Z"]
    with pytest.raises(ValidationError, match="Z"):
        build_aligned(ys, px, ctl)


def test_synthetic_sample_has_131_rows(default_synth):
    data = default_synth.aligned()
    assert len(data) == 131
    assert str(data.dates[0]) == "2000-02" and str(data.dates[-1]) == "2010-12"


def test_csv_round_trip(tmp_path, small_synth):
    data = small_synth.aligned()
    data.to_csv(tmp_path / "a.csv")
    back = AlignedDataset.from_csv(tmp_path / "a.csv")
    assert back == data


def test_subset(small_synth):
    data = small_synth.aligned()
    sub = data.subset(proxies=("dIR",), controls=("dCPI",))
    assert list(sub.frame.columns) == ["dYS", "dIR", "dCPI"]
    with pytest.raises(ValidationError):
        data.subset(proxies=("nope",))
