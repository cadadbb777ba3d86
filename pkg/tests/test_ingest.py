import numpy as np
import pandas as pd
import pytest

from spreadrisk.errors import DomainError, GapError, ParseError, SchemaError, ValidationError
from spreadrisk.ingest import (
    load_firm_panel,
    load_macro_table,
    load_ratings,
    load_weights,
    write_firm_panel,
    write_macro_table,
    write_ratings,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _prices(firms, months):
    rows = ["firm_id,date,close"]
    for f in firms:
        for m in months:
            for d in ("03", "04", "05"):
                rows.append(f"{f},{m}-{d},{100 + int(d)}.5")
    return "\n".join(rows) + "\n"


@pytest.fixture
def two_firms(tmp_path):
    firms = _write(tmp_path / "firms.csv", (
        "firm_id,date,total_assets,total_liabilities,operating_cash_flow\n"
        "A,2000-01,100,50,5\nA,2000-02,110,55,6\nA,2000-03,120,60,-1\n"
        "B,2000-01,200,150,10\nB,2000-02,210,150,11\nB,2000-03,220,150,12\n"
    ))
    prices = _write(tmp_path / "prices.csv", _prices("AB", ("2000-01", "2000-02", "2000-03")))
    return firms, prices


def test_two_firm_panel(two_firms):
    panels = load_firm_panel(*two_firms)
    assert [p.firm_id for p in panels] == ["A", "B"]
    assert all(len(p.fundamentals) == 3 for p in panels)
    assert panels[0].fundamentals["total_assets"].tolist() == [100.0, 110.0, 120.0]
    assert len(panels[1].prices) == 9


def test_round_trip_is_bit_exact(two_firms, tmp_path):
    panels = load_firm_panel(*two_firms)
    write_firm_panel(panels, tmp_path / "f2.csv", tmp_path / "p2.csv")
    again = load_firm_panel(tmp_path / "f2.csv", tmp_path / "p2.csv")
    assert all(a == b for a, b in zip(panels, again))


def test_zero_assets_cites_row(tmp_path, two_firms):
    bad = two_firms[0].read_text().replace("A,2000-02,110", "A,2000-02,0")
    _write(two_firms[0], bad)
    with pytest.raises(DomainError, match=r"firms.csv:3.*A.*2000-02.*total_assets"):
        load_firm_panel(*two_firms)


def test_months_out_of_order_names_firm(tmp_path, two_firms):
    text = two_firms[0].read_text().replace("B,2000-02", "B,2000-09")
    _write(two_firms[0], text)
    with pytest.raises(ValidationError, match="firm B.*out of order"):
        load_firm_panel(*two_firms)


def test_missing_column_is_schema_error(tmp_path, two_firms):
    _write(two_firms[0], "firm_id,date,total_assets,total_liabilities\nA,2000-01,1,1\n")
    with pytest.raises(SchemaError, match="operating_cash_flow"):
        load_firm_panel(*two_firms)


def test_malformed_row_has_line_number(tmp_path, two_firms):
    text = two_firms[0].read_text().replace("B,2000-01,200,150,10", "B,2000-01,abc,150,10")
    _write(two_firms[0], text)
    with pytest.raises(ParseError) as err:
        load_firm_panel(*two_firms)
    assert err.value.line == 5


def test_gap_month_errors_unless_forward_filled(tmp_path, two_firms):
    lines = two_firms[0].read_text().splitlines()
    _write(two_firms[0], "\n".join(l for l in lines if not l.startswith("A,2000-02")) + "\n")
    with pytest.raises(GapError, match="A"):
        load_firm_panel(*two_firms)
    panels = load_firm_panel(*two_firms, forward_fill=True)
    a = panels[0]
    assert a.filled_months == ("2000-02",)
    assert a.fundamentals.loc[pd.Period("2000-02", "M"), "total_assets"] == 100.0


def test_monthly_macro(tmp_path):
    rows = "\n".join(f"2000-{m:02d},{170 + m / 10}" for m in range(1, 13))
    t = load_macro_table(_write(tmp_path / "macro_cpi.csv", "date,value\n" + rows + "\n"), "monthly")
    assert t.native_frequency == "monthly" and len(t) == 12 and t.series_name == "cpi"


def test_quarterly_macro(tmp_path):
    p = _write(tmp_path / "gdp.csv", "date,value\n2000-Q1,1\n2000-Q2,2\n2000-Q3,3\n2000-Q4,4\n")
    t = load_macro_table(p, "quarterly")
    assert t.native_frequency == "quarterly" and len(t) == 4
    write_macro_table(t, tmp_path / "again.csv")
    assert load_macro_table(tmp_path / "again.csv", "quarterly", "gdp") == t


def test_quarterly_file_declared_monthly(tmp_path):
    p = _write(tmp_path / "gdp.csv", "date,value\n2000-Q1,1\n2000-Q2,2\n")
    with pytest.raises(ParseError, match="monthly"):
        load_macro_table(p, "monthly")


def test_duplicate_macro_date(tmp_path):
    p = _write(tmp_path / "m.csv", "date,value\n2000-01,1\n2000-01,2\n")
    with pytest.raises(ValidationError):
        load_macro_table(p, "monthly")


def test_ratings(tmp_path):
    rows = "\n".join(f"{y},{5 + y % 3}" for y in range(2000, 2011))
    r = load_ratings(_write(tmp_path / "r.csv", "year,downgrade_pct\n" + rows + "\n"))
    assert len(r) == 11
    write_ratings(r, tmp_path / "r2.csv")
    assert load_ratings(tmp_path / "r2.csv") == r


def test_rating_out_of_range(tmp_path):
    with pytest.raises(DomainError, match="104.2"):
        load_ratings(_write(tmp_path / "r.csv", "year,downgrade_pct\n2000,5\n2001,104.2\n"))


def test_rating_gap_year(tmp_path):
    p = _write(tmp_path / "r.csv", "year,downgrade_pct\n2004,5\n2006,6\n2007,7\n")
    with pytest.raises(GapError, match="2005"):
        load_ratings(p)
    assert load_ratings(p, allow_gaps=True).gaps == (2005,)


def test_weights(tmp_path):
    w = load_weights(_write(tmp_path / "w.csv", "firm_id,weight\nA,1\nB,3\n"))
    assert w == {"A": 1.0, "B": 3.0}
    with pytest.raises(DomainError):
        load_weights(_write(tmp_path / "w.csv", "firm_id,weight\nA,-1\n"))


def test_missing_file_is_oserror(tmp_path):
    with pytest.raises(OSError):
        load_ratings(tmp_path / "nope.csv")


def test_fixture_reingest_is_exact(small_synth, small_fixture):
    panels = load_firm_panel(small_fixture / "firms.csv", small_fixture / "prices.csv", small_fixture / "zratios.csv")
    assert len(panels) == len(small_synth.panels)
    assert all(a == b for a, b in zip(panels, small_synth.panels))
    assert load_ratings(small_fixture / "ratings.csv") == small_synth.ratings
    gdp = load_macro_table(small_fixture / "macro_gdp.csv", "quarterly", "gdp")
    assert gdp == small_synth.macro["gdp"]
    ys = load_macro_table(small_fixture / "spreads.csv", "monthly", "YS")
    np.testing.assert_array_equal(ys.observations.to_numpy(), small_synth.spreads.to_numpy())
