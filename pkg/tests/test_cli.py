import csv
import json
import math

import pytest

from controllers.homology.cli_controllers import exit_code_for, main


@pytest.fixture
def square_csv(tmp_path, unit_square_points):
    path = tmp_path / "square.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        csv.writer(handle).writerows(unit_square_points)
    return str(path)


def test_exit_code_mapping():
    assert [exit_code_for(code) for code in (400, 404, 500, 418)] == [2, 3, 1, 1]


def test_barcode_to_stdout(square_csv, capsys):
    assert main(["barcode", "--input", square_csv, "--points"]) == 0
    [interval] = json.loads(capsys.readouterr().out)["barcode"]
    assert interval["birth"] == 1.0
    assert interval["death_exact"] == "2"


def test_missing_input_exits_with_not_found(tmp_path, capsys):
    assert main(["barcode", "--input", str(tmp_path / "missing.csv")]) == 3
    assert "404" in capsys.readouterr().err
    assert main(["optimize", "--input", str(tmp_path / "missing.csv"), "--points"]) == 3


def test_invalid_configuration_exits_with_usage_error(square_csv):
    assert main(["optimize", "--input", square_csv, "--points", "--weights", "area"]) == 2
    assert main(["optimize", "--input", square_csv, "--program", "triangle", "--weights", "area"]) == 2
    assert main(["optimize", "--input", square_csv, "--generator", "normal"]) == 2
    assert main(["optimize"]) == 2
    assert main(["generate", "normal", "--n", "1"]) == 2


def test_unknown_choice_is_rejected_by_parser():
    with pytest.raises(SystemExit) as info:
        main(["optimize", "--program", "vertex"])
    assert info.value.code == 2


def test_generate_then_optimize(tmp_path):
    points = tmp_path / "points.csv"
    assert main(["generate", "normal", "--n", "7", "--dim", "2", "--seed", "5", "--out", str(points)]) == 0
    with open(points, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == 7 and all(len(row) == 2 for row in rows)

    out = tmp_path / "out" / "report.json"
    assert main(["optimize", "--input", str(points), "--points", "--program", "triangle", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["status"] == "ok"
    assert report["config"]["program"] == "triangle"


def test_generate_erdos_renyi_to_stdout(capsys):
    assert main(["generate", "erdos-renyi", "--n", "4", "--seed", "3"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 4
    assert [float(rows[i][i]) for i in range(4)] == [0.0] * 4
    assert rows[0][1] == rows[1][0]


def test_optimize_with_generator_and_csv(tmp_path):
    out = tmp_path / "cycles.csv"
    code = main(["optimize", "--generator", "erdos-renyi", "--n", "7", "--seed", "11", "--max-eps", "0.6",
                 "--format", "csv", "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert json.loads((tmp_path / "cycles.json").read_text(encoding="utf-8"))["status"] == "ok"


def test_report_command(square_csv, tmp_path):
    out = tmp_path / "suite.json"
    assert main(["report", "--input", square_csv, "--points", "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["summary"]["failed_runs"] == []


def test_report_command_writes_csv_summary(square_csv, tmp_path):
    out = tmp_path / "suite.csv"
    assert main(["report", "--input", square_csv, "--points", "--format", "csv", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [row["run"] for row in rows] == [
        "edge-persistent/uniform/lp", "edge-persistent/uniform/mip", "edge-persistent/length/lp",
        "edge-persistent/length/mip", "edge-filtered/uniform/lp", "triangle/uniform/lp",
    ]
    assert all(row["failed"] == "False" and row["count"] == "1" for row in rows)
    assert json.loads((tmp_path / "suite.json").read_text(encoding="utf-8"))["status"] == "ok"


def test_barcode_with_float_distances(square_csv, capsys):
    assert main(["barcode", "--input", square_csv, "--points", "--float-distances"]) == 0
    [interval] = json.loads(capsys.readouterr().out)["barcode"]
    assert interval["birth_exact"] == "1"
    assert interval["death"] == pytest.approx(math.sqrt(2))
    assert interval["death_exact"] != "2"
    assert main(["barcode", "--generator", "erdos-renyi", "--n", "4", "--float-distances"]) == 2
