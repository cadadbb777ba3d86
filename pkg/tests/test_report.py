import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from spreadrisk.errors import ValidationError
from spreadrisk.pipeline import RunReport
from spreadrisk.report import cell, fit_table, render_csv, render_report, render_text


def test_cell_format():
    assert cell(-0.15, 0.03, "a") == "-0.15 a (0.03)"
    assert cell(1.51, 0.84, "c") == "1.51 c (0.84)"
    assert cell(-0.04, 0.05, "") == "-0.04 (0.05)"
    assert cell(-0.001, 0.002, "") == "0.00 (0.00)"
    assert cell(float("nan"), 0.1) == ""


def test_text_layout(fixture_report):
    text = render_text(fixture_report)
    for heading in ("Unit-root tests", "Table 1", "Proxy collinearity", "Post-hoc index", "Table 2"):
        assert heading in text
    for row in ("Observations", "R2 adjusted", "D-W", "LM statistic (B-G)", "p-value (B-G)",
                "F statistic (RESET)", "d_rho (crisis)", "d_rho (non-crisis)", "phi"):
        assert row in text
    f = fixture_report.column("5").fit
    star = f.stars()["dDD"]
    assert cell(float(f.coef["dDD"]), float(f.stderr["dDD"]), star) in text


def test_empty_regimes_noted(fixture_report):
    r = replace(fixture_report, regimes=[])
    text = render_text(r)
    assert "regime-split column omitted" in text
    assert "d_rho (crisis)" not in text


def test_csv_one_file_per_table(fixture_report):
    files = render_csv(fixture_report)
    assert {"table1.csv", "table1_stats.csv", "table2.csv", "table2_stats.csv", "unit_roots.csv",
            "collinearity_correlation.csv", "collinearity_vif.csv", "collinearity_belsley.csv",
            "index_weights.csv", "index_series.csv"} <= set(files)
    rows = list(csv.DictReader(io.StringIO(files["table1.csv"])))
    col5 = {r["term"]: float(r["coef"]) for r in rows if r["column"] == "5"}
    assert col5["dIR"] == float(fixture_report.column("5").fit.coef["dIR"])
    labels = [r["column"] for r in csv.DictReader(io.StringIO(files["table2_stats.csv"]))]
    assert labels == ["eq4", "subprime"]
    head = files["index_series.csv"].splitlines()[0]
    assert head == "date,rho,delta_rho"
    belsley = list(csv.reader(io.StringIO(files["collinearity_belsley.csv"])))
    sums = np.array([[float(v) for v in r[1:]] for r in belsley[1:]]).sum(axis=0)
    np.testing.assert_allclose(sums, 1.0, atol=1e-8)


def test_render_report_writes_files(fixture_report, tmp_path):
    paths = render_report(fixture_report, "json", tmp_path)
    assert [p.name for p in paths] == ["report.json"]
    assert RunReport.from_json(paths[0].read_text()) == fixture_report
    assert render_report(fixture_report, "text", tmp_path)[0].read_text() == render_text(fixture_report)
    with pytest.raises(ValidationError):
        render_report(fixture_report, "pdf", tmp_path)


def test_output_path_blocked_by_file(fixture_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        render_report(fixture_report, "json", blocker / "out")


def test_fit_table(fixture_report):
    text = fit_table(fixture_report.table1[:2], first=("CFv", "dDD"))
    assert text.splitlines()[0].split() == ["1", "2"]
