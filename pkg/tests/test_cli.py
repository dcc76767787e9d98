import csv
import json

import pytest

from conftest import RAIN_MODEL, RAIN_PHI
from linear_treeshap.cli import main, parse_args


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_explain(tmp_path, capsys):
    data = tmp_path / "x.csv"
    data.write_text("temperature,cloudy,wind_speed\n20,0,6\n10,1,0\n")
    out = tmp_path / "phi.csv"
    assert main(["explain", "--model", str(RAIN_MODEL), "--data", str(data), "--output", str(out)]) == 0
    rows = _read(out)
    assert rows[0] == ["phi_temperature", "phi_cloudy", "phi_wind_speed", "base_value", "prediction"]
    assert [float(v) for v in rows[1][:3]] == pytest.approx(RAIN_PHI, abs=1e-12)
    assert float(rows[1][3]) == pytest.approx(0.552)
    assert float(rows[2][4]) == 0.5


def test_explain_header_only(tmp_path):
    data = tmp_path / "x.csv"
    data.write_text("temperature,cloudy,wind_speed\n")
    out = tmp_path / "phi.csv"
    assert main(["explain", "--model", str(RAIN_MODEL), "--data", str(data), "--output", str(out)]) == 0
    assert len(_read(out)) == 1


def test_explain_bad_rows(tmp_path, capsys):
    data = tmp_path / "x.csv"
    data.write_text("20,0,6\n20,0\n20,,6\n")
    out = tmp_path / "phi.csv"
    code = main(["explain", "--model", str(RAIN_MODEL), "--data", str(data), "--output", str(out),
                 "--threads", "2"])
    assert code == 2
    err = capsys.readouterr().err
    assert "row 2:" in err and "row 3:" in err
    rows = _read(out)
    assert len(rows) == 4 and rows[2][0] == "nan"
    assert float(rows[1][4]) == pytest.approx(0.4)


def test_explain_header_mismatch(tmp_path):
    data = tmp_path / "x.csv"
    data.write_text("a,b,c\n20,0,6\n")
    assert main(["explain", "--model", str(RAIN_MODEL), "--data", str(data),
                 "--output", str(tmp_path / "o.csv")]) == 2


def test_invalid_model_exit_code(tmp_path, rain_doc):
    rain_doc["trees"][0]["nodes"][0]["left_weight"] = 0.9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(rain_doc))
    data = tmp_path / "x.csv"
    data.write_text("20,0,6\n")
    assert main(["explain", "--model", str(bad), "--data", str(data), "--output", str(tmp_path / "o.csv")]) == 2
    assert main(["explain", "--model", str(tmp_path / "missing.json"), "--data", str(data),
                 "--output", str(tmp_path / "o.csv")]) == 2


def test_check_model(capsys):
    assert main(["check", "--model", str(RAIN_MODEL), "--tolerance", "1e-10"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_check_random(capsys):
    assert main(["check", "--random-trees", "20", "--max-depth", "5", "--tolerance", "1e-8"]) == 0


@pytest.mark.parametrize("argv", [
    ["check", "--model", str(RAIN_MODEL), "--tolerance", "0"],
    ["check", "--tolerance", "1e-8"],
    ["check", "--model", str(RAIN_MODEL), "--random-trees", "3", "--tolerance", "1e-8"],
    ["explain", "--model", "m.json"],
    ["explain", "--model", "m", "--data", "d", "--output", "o", "--threads", "0"],
    ["bench", "--depths", "4,x", "--leaves", "16", "--output", "o.csv"],
    ["bench", "--depths", "4", "--leaves", "16", "--reps", "0", "--output", "o.csv"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_run_config_defaults():
    cfg = parse_args(["bench", "--depths", "4,8", "--leaves", "16", "--output", "b.csv"])
    assert cfg.depths == [4, 8] and cfg.reps == 5 and cfg.threads == 1


def test_bench_cli(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--depths", "3", "--leaves", "6", "--reps", "1", "--samples", "2",
                 "--output", str(out)]) == 0
    rows = _read(out)
    assert rows[0][0] == "depth" and rows[1][0] == "3"
