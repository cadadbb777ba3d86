"""Render a :class:`RunReport` as JSON, CSV tables or plain-text tables."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .errors import ValidationError
from .pipeline import FitEntry, RunReport

FORMATS = ("json", "csv", "text")

TERM_LABELS = {
    "dYS_lag1": "dYS(t-1)",
    "delta_rho": "d_rho",
    "delta_rho_crisis": "d_rho (crisis)",
    "delta_rho_noncrisis": "d_rho (non-crisis)",
}


def cell(coef, stderr, star="") -> str:
    """Table cell in the ``-0.15 a (0.03)`` style: 2 decimals, star letter, stderr in brackets."""
    if coef is None or (isinstance(coef, float) and math.isnan(coef)):
        return ""
    text = _fmt(coef)
    if star:
        text += f" {star}"
    if stderr is not None and not (isinstance(stderr, float) and math.isnan(stderr)):
        text += f" ({_fmt(stderr)})"
    return text


def _fmt(v, digits=2) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    out = f"{float(v):.{digits}f}"
    return "0.00" if out == "-0.00" else out


def _grid(header, rows) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = []
    for j, r in enumerate([header, *rows]):
        parts = [str(r[0]).ljust(widths[0])] + [str(c).rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if j == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)


def _coef_rows(entries: list[FitEntry], skip=("const",), first=()) -> list:
    terms = []
    for e in entries:
        for n in e.fit.names:
            if n not in skip and n not in terms:
                terms.append(n)
    terms = [t for t in first if t in terms] + [t for t in terms if t not in first]
    rows = []
    for t in terms:
        row = [TERM_LABELS.get(t, t)]
        for e in entries:
            f = e.fit
            if t in f.coef.index:
                row.append(cell(float(f.coef[t]), float(f.stderr[t]), f.stars()[t]))
            else:
                row.append("")
        rows.append(row)
    return rows


def _stat_rows(entries: list[FitEntry], with_reset=False) -> list:
    rows = [
        ["Observations", *(str(e.fit.n_obs) for e in entries)],
        ["R2 adjusted", *(_fmt(e.fit.adj_r2) for e in entries)],
        ["D-W", *(_fmt(e.fit.durbin_watson) for e in entries)],
        ["LM statistic (B-G)", *(_fmt(e.bg.statistic) if e.bg else "" for e in entries)],
        ["p-value (B-G)", *(_fmt(e.bg.p_value) if e.bg else "" for e in entries)],
    ]
    if with_reset:
        rows += [
            ["F statistic (RESET)", *(_fmt(e.reset.statistic) if e.reset else "" for e in entries)],
            ["p-value (RESET)", *(_fmt(e.reset.p_value) if e.reset else "" for e in entries)],
        ]
    return rows


def fit_table(entries: list[FitEntry], first=(), with_reset=False) -> str:
    """Text grid of several fits side by side, one column per entry."""
    return _grid(["", *(e.label for e in entries)], _coef_rows(entries, first=first) + _stat_rows(entries, with_reset))


def _table2_entries(report: RunReport) -> list[FitEntry]:
    entries = [report.table2] if report.table2 else []
    for r in report.regimes:
        entries.append(FitEntry(r.result.window.label, r.result.fit, r.bg, r.reset))
    return entries


def render_text(report: RunReport) -> str:
    out = []
    d = report.data
    out.append(f"spreadrisk {report.software.get('version', '')}  report schema {report.schema_version}")
    out.append(f"sample {d.get('start')}..{d.get('end')}, {d.get('n_obs')} months, {d.get('n_firms', '?')} firms")
    out.append("")

    out.append("Unit-root tests (5% critical value in brackets; * rejects a unit root)")
    rows = []
    for col, tests in report.unit_roots.items():
        row = [col]
        for m in ("ADF", "PP"):
            r = tests[m]
            row.append(f"{_fmt(r.test_statistic)}{'*' if r.reject_unit_root_at_5pct else ''} ({_fmt(r.critical_values['5%'])})")
        rows.append(row)
    out.append(_grid(["", "ADF", "PP"], rows))
    out.append("")

    out.append(f"Table 1: spread change on default-risk proxies (dependent: {d.get('dependent')})")
    labels = [e.label for e in report.table1]
    out.append(_grid(["", *labels], _coef_rows(report.table1, first=d.get("proxies", ())) + _stat_rows(report.table1)))
    out.append("Standard errors in brackets. a, b, c: significant at 1%, 5%, 10%.")
    out.append("")

    if report.collinearity is not None:
        c = report.collinearity
        out.append("Proxy collinearity")
        out.append(_grid(["", *c.names, "VIF"],
                         [[n, *(_fmt(v) for v in c.correlation_matrix.loc[n]), _fmt(c.vif[n])] for n in c.names]))
        out.append(f"largest condition index: {_fmt(float(max(c.condition_indices)))}")
        out.append("")

    sel = report.selection
    w = report.index_weights
    out.append(f"Post-hoc index: principal {sel.get('principal')}, members {', '.join(sel.get('significant', []))}"
               f" (alpha {sel.get('alpha')}), form {w.get('form')}")
    out.append(_grid(["", "beta", "cov ratio", "weight"],
                     [[n, _fmt(m["beta"], 4), _fmt(m["cov_ratio"], 4), _fmt(m["weight"], 4)]
                      for n, m in w.get("members", {}).items()]))
    out.append(f"composite effect (sum of weights): {_fmt(w.get('effect'), 4)}")
    out.append("")

    entries = _table2_entries(report)
    out.append("Table 2: spread change on the post-hoc index")
    if entries:
        out.append(_grid(["", *("index" if e.label == "eq4" else e.label for e in entries)],
                         _coef_rows(entries, skip=("phi",)) + [_phi_row(entries)]
                         + _stat_rows(entries, with_reset=True)))
    if not report.regimes:
        out.append("No crisis regimes configured: regime-split column omitted.")
    for r in report.regimes:
        res = r.result
        note = " (one regime empty; single slope)" if res.collapsed else ""
        out.append(f"regime {res.window}: {res.n_crisis} crisis / {res.n_calm} non-crisis months{note}")
    return "\n".join(out) + "\n"


def _phi_row(entries) -> list:
    row = ["phi"]
    for e in entries:
        f = e.fit
        row.append(cell(float(f.coef["phi"]), float(f.stderr["phi"]), f.stars()["phi"]) if "phi" in f.coef.index else "")
    return row


def _num(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return repr(v) if math.isfinite(v) else ""


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fit_rows(entries):
    rows = []
    for e in entries:
        f = e.fit
        stars = f.stars()
        for n in f.names:
            rows.append([e.label, n, _num(f.coef[n]), _num(f.stderr[n]), _num(f.t_stat[n]), _num(f.p_value[n]), stars[n]])
    return rows


def _fit_stats(entries):
    rows = []
    for e in entries:
        f = e.fit
        rows.append([
            e.label, f.n_obs, f.k_params, _num(f.r2), _num(f.adj_r2), _num(f.aic), _num(f.durbin_watson),
            _num(e.bg.statistic) if e.bg else "", _num(e.bg.p_value) if e.bg else "",
            _num(e.reset.statistic) if e.reset else "", _num(e.reset.p_value) if e.reset else "",
        ])
    return rows


COEF_HEADER = ["column", "term", "coef", "stderr", "t_stat", "p_value", "star"]
STATS_HEADER = ["column", "n_obs", "k_params", "r2", "adj_r2", "aic", "durbin_watson",
                "bg_statistic", "bg_p_value", "reset_statistic", "reset_p_value"]


def render_csv(report: RunReport) -> dict:
    """``{file name: CSV text}``, one file per table."""
    files = {
        "table1.csv": _csv(COEF_HEADER, _fit_rows(report.table1)),
        "table1_stats.csv": _csv(STATS_HEADER, _fit_stats(report.table1)),
    }
    t2 = _table2_entries(report)
    files["table2.csv"] = _csv(COEF_HEADER, _fit_rows(t2))
    files["table2_stats.csv"] = _csv(STATS_HEADER, _fit_stats(t2))
    ur = []
    for col, tests in report.unit_roots.items():
        for m, r in tests.items():
            ur.append([col, m, _num(r.test_statistic), r.lag_or_bandwidth, r.n_obs,
                       _num(r.critical_values["1%"]), _num(r.critical_values["5%"]), _num(r.critical_values["10%"]),
                       str(r.reject_unit_root_at_5pct).lower()])
    files["unit_roots.csv"] = _csv(["column", "method", "statistic", "lag_or_bandwidth", "n_obs",
                                    "cv_1pct", "cv_5pct", "cv_10pct", "reject_at_5pct"], ur)
    c = report.collinearity
    if c is not None:
        files["collinearity_correlation.csv"] = _csv(["", *c.names],
                                                     [[n, *(_num(v) for v in c.correlation_matrix.loc[n])] for n in c.names])
        files["collinearity_vif.csv"] = _csv(["proxy", "vif"], [[n, _num(c.vif[n])] for n in c.names])
        vd = c.variance_decomposition
        files["collinearity_belsley.csv"] = _csv(
            ["condition_index", *vd.columns], [[_num(ci), *(_num(v) for v in row)] for ci, row in zip(c.condition_indices, vd.to_numpy())]
        )
    w = report.index_weights
    files["index_weights.csv"] = _csv(
        ["proxy", "beta", "cov_ratio", "weight", "principal"],
        [[n, _num(m["beta"]), _num(m["cov_ratio"]), _num(m["weight"]), str(n == w.get("principal")).lower()]
         for n, m in w.get("members", {}).items()],
    )
    s = report.index_series
    files["index_series.csv"] = _csv(["date", *s.columns], [[str(d), *(_num(v) for v in row)] for d, row in zip(s.index, s.to_numpy())])
    return files


def render_report(report: RunReport, fmt: str, out_dir) -> list[Path]:
    """Write the report in ``fmt`` under ``out_dir``; returns the written paths.

    An unwritable directory raises ``OSError``.
    """
    if fmt not in FORMATS:
        raise ValidationError(f"report format must be one of {', '.join(FORMATS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        files = {"report.json": report.to_json()}
    elif fmt == "text":
        files = {"report.txt": render_text(report)}
    else:
        files = render_csv(report)
    written = []
    for name, text in files.items():
        p = out / name
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(p)
    return written
