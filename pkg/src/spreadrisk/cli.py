"""``spreadrisk`` command line.

Each stage can run on its own with CSV/JSON handoff files, or all at once
through ``pipeline``. Exit codes: 0 success, 1 invalid input or config,
2 numerical failure, 3 file-system error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import pandas as pd

from . import __version__
from .config import PipelineConfig, default_ini, load_config, parse_config
from .errors import ConfigError, NumericError, PipelineError, SchemaError, SpreadRiskError
from .ols import fit_spread_model
from .pipeline import RunReport, align, diagnose, load_inputs, posthoc, proxy_levels, regimes, regressions, run_pipeline, stage, unit_roots
from .posthoc import PosthocIndex
from .prep import AlignedDataset
from .proxies import read_proxies, write_proxies
from .regimes import RegimeWindow
from .report import FORMATS, fit_table, render_report, render_text
from .synth import SynthConfig, generate, write_fixture

log = logging.getLogger("spreadrisk")

LOG_ENV = "SPREADRISK_LOG_LEVEL"


class _Parser(argparse.ArgumentParser):
    # usage errors are validation failures (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _config(path) -> PipelineConfig:
    if path is None:
        return parse_config(default_ini(), ".")
    return load_config(path)


def _write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _load_index(path) -> PosthocIndex:
    frame = pd.read_csv(path, dtype={"date": str})
    if not {"date", "rho", "delta_rho"} <= set(frame.columns):
        raise SchemaError(f"{path}: expected columns date,rho,delta_rho")
    idx = pd.PeriodIndex(frame["date"], freq="M", name="date")
    rho = pd.Series(frame["rho"].to_numpy(dtype=float), index=idx, name="rho")
    delta = pd.Series(frame["delta_rho"].to_numpy(dtype=float), index=idx, name="delta_rho").dropna()
    return PosthocIndex("", [], rho, delta)


# --------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = SynthConfig(seed=args.seed, n_firms=args.firms, crisis_amplification=args.crisis_amplification,
                      crisis_volatility=args.crisis_volatility)
    out = write_fixture(generate(cfg), args.out)
    print(out)
    return 0


def cmd_proxies(args) -> int:
    cfg = _config(args.config)
    with stage("ingest"):
        inputs = load_inputs(cfg)
    with stage("proxies"):
        levels = proxy_levels(inputs, cfg)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_proxies(levels, args.out)
    print(args.out)
    return 0


def cmd_prep(args) -> int:
    cfg = _config(args.config)
    with stage("ingest"):
        inputs = load_inputs(cfg)
    with stage("proxies"):
        levels = read_proxies(args.proxies) if args.proxies else proxy_levels(inputs, cfg)
    with stage("prep"):
        data = align(levels, inputs, cfg)
        roots = unit_roots(data, cfg) if args.unit_roots else None
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    data.to_csv(args.out)
    if roots is not None:
        _write_json({c: {m: r.to_dict() for m, r in t.items()} for c, t in roots.items()}, args.unit_roots)
    print(args.out)
    return 0


def cmd_regress(args) -> int:
    cfg = _config(args.config)
    data = AlignedDataset.from_csv(args.aligned)
    with stage("regress"):
        entries = regressions(data, cfg)
    with stage("diagnostics"):
        coll = diagnose(entries, data, cfg)
    _write_json({"table1": [e.to_dict() for e in entries],
                 "collinearity": coll.to_dict() if coll else None}, args.out)
    if not args.quiet:
        print(fit_table(entries, first=data.proxies))
    return 0


def cmd_index(args) -> int:
    cfg = _config(args.config)
    if args.alpha is not None:
        cfg.alpha = args.alpha
    data = AlignedDataset.from_csv(args.aligned)
    with stage("regress"):
        full = fit_spread_model(data, list(data.proxies), list(cfg.main_controls))
    with stage("index"):
        index, selection, eq4 = posthoc(full, data, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index.to_csv(out / "index.csv")
    _write_json({"selection": selection, "weights": index.weights_dict(), "index_regression": eq4.to_dict()},
                out / "index.json")
    if not args.quiet:
        f = eq4.fit
        print(f"principal {index.principal}; members {', '.join(selection['significant'])}")
        print(f"lambda {f.coef['delta_rho']:.4f} (se {f.stderr['delta_rho']:.4f}), adj R2 {f.adj_r2:.3f}")
    return 0


def cmd_regimes(args) -> int:
    cfg = _config(args.config)
    if args.window:
        windows = []
        for w in args.window:
            label, sep, span = w.partition("=")
            if not sep:
                raise ConfigError(f"--window expects label=YYYY-MM..YYYY-MM, got {w!r}")
            windows.append(RegimeWindow.parse(label.strip(), span))
        cfg.regimes = tuple(windows)
    data = AlignedDataset.from_csv(args.aligned)
    index = _load_index(args.index)
    with stage("regimes"):
        entries = regimes(data, index, cfg)
    _write_json({"regimes": [e.to_dict() for e in entries]}, args.out)
    if not args.quiet:
        for e in entries:
            f = e.result.fit
            print(f"{e.result.window}: " + ", ".join(f"{n} {f.coef[n]:.4f} (t {f.t_stat[n]:.2f})" for n in f.names))
    return 0


def cmd_pipeline(args) -> int:
    with stage("config"):
        cfg = load_config(args.config)
    report = run_pipeline(cfg)
    out = Path(args.out) if args.out else cfg.output_dir
    formats = args.format or list(cfg.formats)
    written = []
    for fmt in formats:
        written += render_report(report, fmt, out)
    for p in written:
        print(p)
    if args.print_text:
        sys.stdout.write(render_text(report))
    return 0


def cmd_report(args) -> int:
    report = RunReport.from_json(Path(args.input).read_text(encoding="utf-8"))
    if args.out is None:
        if args.format != "text":
            raise ConfigError("--out is required for json and csv output")
        sys.stdout.write(render_text(report))
        return 0
    for p in render_report(report, args.format, args.out):
        print(p)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spreadrisk", description="Default-risk proxies, post-hoc index and yield-spread regressions.",
                epilog=f"Log level: set {LOG_ENV} (DEBUG, INFO, WARNING, ERROR). "
                       "Exit codes: 0 ok, 1 invalid input or config, 2 numerical failure, 3 file-system error.")
    p.add_argument("--version", action="version", version=f"spreadrisk {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("synth", help="write a seeded synthetic fixture directory",
                       description="Generate synthetic firm panels, macro series, ratings and spreads with known "
                                   "coefficients, plus ground_truth.json and a ready-to-run pipeline.ini.")
    d = SynthConfig()
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=d.seed, help=f"random seed (default {d.seed})")
    s.add_argument("--firms", type=int, default=d.n_firms, help=f"number of firms (default {d.n_firms})")
    s.add_argument("--crisis-amplification", type=float, default=d.crisis_amplification,
                   help="multiplier on the proxy effect inside the crisis window (default %(default)s)")
    s.add_argument("--crisis-volatility", type=float, default=d.crisis_volatility,
                   help="multiplier on the latent-factor shock sd inside the crisis window (default %(default)s)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("proxies", help="aggregate firm-level proxies to monthly levels",
                       description="Compute CFv, DD and Z per firm, aggregate across firms and attach the splined "
                                   "downgrade series IR. Writes date,CFv,DD,Z,IR.")
    s.add_argument("--config", required=True, help="pipeline INI file")
    s.add_argument("--out", required=True, help="output CSV")
    s.set_defaults(func=cmd_proxies)

    s = sub.add_parser("prep", help="build the aligned monthly design",
                       description="Transform spreads, proxies and controls per the config and trim to the common "
                                   "window. Optionally run ADF and PP unit-root tests on every column.")
    s.add_argument("--config", required=True, help="pipeline INI file")
    s.add_argument("--proxies", help="proxy-levels CSV from 'proxies' (recomputed when omitted)")
    s.add_argument("--out", required=True, help="aligned dataset CSV")
    s.add_argument("--unit-roots", help="write unit-root results to this JSON file")
    s.set_defaults(func=cmd_prep)

    s = sub.add_parser("regress", help="single-proxy, full and robustness regressions with diagnostics",
                       description="Fit the spread model columns (one per proxy, all proxies, substituted controls) "
                                   "with Breusch-Godfrey tests and proxy collinearity diagnostics.")
    s.add_argument("--aligned", required=True, help="aligned dataset CSV from 'prep'")
    s.add_argument("--config", help="pipeline INI file for controls and diagnostics options (defaults otherwise)")
    s.add_argument("--out", required=True, help="output JSON")
    s.add_argument("--quiet", action="store_true", help="do not print the table")
    s.set_defaults(func=cmd_regress)

    s = sub.add_parser("index", help="select proxies, build the post-hoc index and regress spreads on it",
                       description="Select significant proxies from the full model, choose the principal by AIC, "
                                   "compute covariance-ratio weights and fit the index regression. Writes index.csv "
                                   "and index.json into --out.")
    s.add_argument("--aligned", required=True, help="aligned dataset CSV from 'prep'")
    s.add_argument("--config", help="pipeline INI file (defaults otherwise)")
    s.add_argument("--alpha", type=float, help="selection level (overrides the config)")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--quiet", action="store_true", help="do not print a summary")
    s.set_defaults(func=cmd_index)

    s = sub.add_parser("regimes", help="crisis / non-crisis split of the index regression",
                       description="Regress spread changes on the index change interacted with a crisis dummy, "
                                   "for each configured or given window.")
    s.add_argument("--aligned", required=True, help="aligned dataset CSV from 'prep'")
    s.add_argument("--index", required=True, help="index.csv from 'index'")
    s.add_argument("--config", help="pipeline INI file ([regimes] section used unless --window is given)")
    s.add_argument("--window", action="append", metavar="LABEL=YYYY-MM..YYYY-MM", help="regime window (repeatable)")
    s.add_argument("--out", required=True, help="output JSON")
    s.add_argument("--quiet", action="store_true", help="do not print a summary")
    s.set_defaults(func=cmd_regimes)

    s = sub.add_parser("pipeline", help="run every stage and write the report",
                       description="Ingest, proxies, preparation and unit roots, regressions, diagnostics, index "
                                   "and regime split, then render the report.")
    s.add_argument("--config", required=True, help="pipeline INI file")
    s.add_argument("--out", help="output directory (overrides [output] directory)")
    s.add_argument("--format", action="append", choices=FORMATS, help="output format (repeatable; default from config)")
    s.add_argument("--print-text", action="store_true", help="also print the text report")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("report", help="re-render a saved JSON report",
                       description="Read report.json and write it as json, csv tables or text.")
    s.add_argument("--input", required=True, help="report.json from 'pipeline'")
    s.add_argument("--format", choices=FORMATS, default="text", help="output format (default text)")
    s.add_argument("--out", help="output directory (text goes to stdout when omitted)")
    s.set_defaults(func=cmd_report)
    return p


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SpreadRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, NumericError) else 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
