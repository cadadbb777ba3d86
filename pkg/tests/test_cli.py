import json
import shutil
import subprocess
import sys

import pytest

from spreadrisk.cli import build_parser, main
from spreadrisk.pipeline import RunReport

COMMANDS = ("synth", "proxies", "prep", "regress", "index", "regimes", "pipeline", "report")


@pytest.mark.parametrize("cmd", COMMANDS)
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_top_level_help_and_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["pipeline"])
    assert exc.value.code == 1


def test_stage_chain(small_fixture, tmp_path, capsys):
    ini = str(small_fixture / "pipeline.ini")
    assert main(["proxies", "--config", ini, "--out", str(tmp_path / "proxies.csv")]) == 0
    assert main(["prep", "--config", ini, "--proxies", str(tmp_path / "proxies.csv"),
                 "--out", str(tmp_path / "aligned.csv"), "--unit-roots", str(tmp_path / "ur.json")]) == 0
    assert "dYS" in json.loads((tmp_path / "ur.json").read_text())
    assert main(["regress", "--aligned", str(tmp_path / "aligned.csv"), "--config", ini,
                 "--out", str(tmp_path / "t1.json")]) == 0
    assert [c["label"] for c in json.loads((tmp_path / "t1.json").read_text())["table1"]] == list("123456")
    assert main(["index", "--aligned", str(tmp_path / "aligned.csv"), "--config", ini,
                 "--out", str(tmp_path / "idx")]) == 0
    assert (tmp_path / "idx" / "index.csv").exists()
    assert main(["regimes", "--aligned", str(tmp_path / "aligned.csv"), "--index", str(tmp_path / "idx" / "index.csv"),
                 "--window", "gfc=2007-07..2009-03", "--out", str(tmp_path / "reg.json")]) == 0
    reg = json.loads((tmp_path / "reg.json").read_text())["regimes"][0]
    assert reg["result"]["n_crisis"] == 21

    # the staged index regression equals the one in the full pipeline
    assert main(["pipeline", "--config", ini, "--out", str(tmp_path / "run"), "--format", "json"]) == 0
    report = RunReport.from_json((tmp_path / "run" / "report.json").read_text())
    staged = json.loads((tmp_path / "idx" / "index.json").read_text())["index_regression"]
    assert staged == json.loads(json.dumps(report.table2.to_dict()))
    capsys.readouterr()
    assert main(["report", "--input", str(tmp_path / "run" / "report.json")]) == 0
    assert "Table 2" in capsys.readouterr().out
    assert main(["report", "--input", str(tmp_path / "run" / "report.json"), "--format", "csv",
                 "--out", str(tmp_path / "csv")]) == 0
    assert (tmp_path / "csv" / "table1.csv").exists()


def test_synth_command(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "fx"), "--seed", "5", "--firms", "3"]) == 0
    assert (tmp_path / "fx" / "ground_truth.json").exists()
    assert (tmp_path / "fx" / "pipeline.ini").exists()


def test_exit_codes(small_fixture, tmp_path, capsys):
    # validation: malformed config
    bad = tmp_path / "bad.ini"
    bad.write_text("[regression]\nalpha = 2\n")
    assert main(["pipeline", "--config", str(bad)]) == 1
    # IO: config that does not exist, and an input file that is gone
    assert main(["pipeline", "--config", str(tmp_path / "none.ini")]) == 3
    fx = tmp_path / "fx"
    shutil.copytree(small_fixture, fx)
    (fx / "prices.csv").unlink()
    assert main(["pipeline", "--config", str(fx / "pipeline.ini")]) == 3
    # numeric: a crisis window too short for its own slope
    fx2 = tmp_path / "fx2"
    shutil.copytree(small_fixture, fx2)
    ini = (fx2 / "pipeline.ini").read_text().replace("2007-07..2009-03", "2008-01..2008-03")
    (fx2 / "pipeline.ini").write_text(ini)
    assert main(["pipeline", "--config", str(fx2 / "pipeline.ini"), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "[regimes]" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "spreadrisk", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "spreadrisk" in out.stdout
