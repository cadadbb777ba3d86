import numpy as np
import pandas as pd
import pytest

from spreadrisk.synth import SynthConfig, generate, write_fixture


@pytest.fixture(scope="session")
def small_synth():
    """A 30-firm synthetic dataset; cheap enough for many tests."""
    return generate(SynthConfig(seed=7, n_firms=30))


@pytest.fixture(scope="session")
def default_synth():
    return generate(SynthConfig())


@pytest.fixture(scope="session")
def bundled_fixture(tmp_path_factory, default_synth):
    """The default-seed fixture directory with its pipeline.ini."""
    return write_fixture(default_synth, tmp_path_factory.mktemp("fixture"))


@pytest.fixture(scope="session")
def small_fixture(tmp_path_factory, small_synth):
    return write_fixture(small_synth, tmp_path_factory.mktemp("small"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def monthly(values, start="2000-01"):
    return pd.Series(np.asarray(values, dtype=float), index=pd.period_range(start, periods=len(values), freq="M"))


@pytest.fixture(scope="session")
def fixture_report(bundled_fixture):
    from spreadrisk.config import load_config
    from spreadrisk.pipeline import run_pipeline

    return run_pipeline(load_config(bundled_fixture / "pipeline.ini"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
