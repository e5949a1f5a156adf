import csv
import json
import math

import pytest

from models.reports.run_config import GeneratorSpec, RunConfig
from models.reports.cycle_stats import ReportModelException
from services.homology.pipeline_services import (
    CSV_FIELDS,
    PipelineServiceException,
    barcode_of,
    load_complex,
    run,
    run_report_suite,
)


def _write_rows(path, rows, header=None):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if header:
            writer.writerow(header)
        writer.writerows(rows)
    return str(path)


@pytest.fixture
def square_csv(tmp_path, unit_square_points):
    return _write_rows(tmp_path / "square.csv", unit_square_points, header=["x", "y"])


def test_unit_square_points_run(square_csv):
    report = run(RunConfig.parse(points_path=square_csv))
    assert report["status"] == "ok"
    assert report["complex"] == {"num_vertices": 4, "num_edges": 6, "num_triangles": 4, "scale": "squared"}
    [interval] = report["barcode"]
    assert interval["birth"] == 1.0
    assert interval["death"] == pytest.approx(math.sqrt(2))
    assert interval["birth_exact"] == "1" and interval["death_exact"] == "2"
    [cycle] = report["cycles"]
    assert cycle["cost_before"] == "4" and cycle["cost_after"] == "4"
    assert cycle["num_loops"] == 1
    assert cycle["surveyor_area"] == 1.0
    assert report["summary"]["count"] == 1


def test_fan_triangle_run(tmp_path, fan_distances):
    path = _write_rows(tmp_path / "fan.csv", fan_distances)
    report = run(RunConfig.parse(distances_path=path, max_eps=5.0, program="triangle"))
    [cycle] = report["cycles"]
    assert cycle["cost_after"] == "3"
    assert sorted(term[0] for term in cycle["volume"]) == [[0, 1, 4], [0, 3, 4], [1, 2, 4]]
    assert cycle["optimized_lifespan"] == [2.0, 4.0]
    assert len(cycle["optimized"]) == 5


def test_equidistant_points_have_no_intervals(tmp_path):
    path = _write_rows(tmp_path / "equal.csv", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    report = run(RunConfig.parse(distances_path=path))
    assert report["status"] == "ok"
    assert report["barcode"] == [] and report["cycles"] == []
    assert report["summary"]["count"] == 0


def test_json_report_is_reproducible(tmp_path):
    out = tmp_path / "report.json"
    config = RunConfig.parse(generator=GeneratorSpec(kind="normal", n=8, dim=2, seed=99), out=str(out))
    run(config)
    first = out.read_bytes()
    run(config)
    assert out.read_bytes() == first
    assert json.loads(first)["status"] == "ok"


def test_csv_output_writes_companion_json(tmp_path, square_csv):
    out = tmp_path / "nested" / "cycles.csv"
    run(RunConfig.parse(points_path=square_csv, out=str(out), format="csv", compare_mip=True))
    with open(out, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0].keys()) == CSV_FIELDS
    assert rows[0]["cost_after"] == "4"
    assert rows[0]["lp_vs_mip_cost_equal"] == "True"
    assert json.loads((tmp_path / "nested" / "cycles.json").read_text(encoding="utf-8"))["status"] == "ok"


def test_failed_run_writes_marker(tmp_path):
    out = tmp_path / "failed.json"
    config = RunConfig.parse(points_path=str(tmp_path / "missing.csv"), out=str(out))
    with pytest.raises(PipelineServiceException) as info:
        run(config)
    assert info.value.code == 404
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["status"] == "failed"
    assert report["error"]["code"] == 404


def test_run_accepts_prebuilt_complex(triple_loop_complex):
    config = RunConfig.parse(inline_input="distances")
    report = run(config, triple_loop_complex)
    assert [c["cost_after"] for c in report["cycles"]] == ["3", "3", "3"]
    assert [(b["birth"], b["death"]) for b in report["barcode"]] == [(1.0, 2.0), (2.0, None), (3.0, None)]
    with pytest.raises(PipelineServiceException) as info:
        load_complex(config)
    assert info.value.code == 400


def test_barcode_of(unit_square_complex):
    assert [interval["birth_edge"] for interval in barcode_of(unit_square_complex)] == [[2, 3]]


@pytest.mark.parametrize("values", [
    {},
    {"points_path": "a.csv", "distances_path": "b.csv"},
    {"distances_path": "d.csv", "program": "triangle", "weight_mode": "area"},
    {"points_path": "p.csv", "weight_mode": "area"},
    {"points_path": "p.csv", "program": "triangle", "weight_mode": "length"},
    {"points_path": "p.csv", "max_eps": -1},
    {"points_path": "p.csv", "slicing_strategy": "diagonal"},
    {"distances_path": "d.csv", "float_distances": True},
    {"points_path": "p.csv", "float_distances": True, "program": "triangle", "weight_mode": "area"},
])
def test_run_config_rejects(values):
    with pytest.raises(ReportModelException) as info:
        RunConfig.parse(**values)
    assert info.value.code == 400


def test_report_suite(square_csv, tmp_path):
    out = tmp_path / "suite.json"
    report = run_report_suite(RunConfig.parse(points_path=square_csv, out=str(out)))
    summary = report["summary"]
    assert summary["failed_runs"] == []
    assert len(summary["runs"]) == 6
    assert summary["length_also_uniform"] == 1.0
    assert summary["uniform_also_length"] == 1.0
    assert summary["persistent_filtered_agreement"] == 1.0
    assert set(summary["lp_mip_agreement"].values()) == {1.0}
    written = json.loads(out.read_text(encoding="utf-8"))
    assert written["status"] == "ok"
    assert written["summary"]["failed_runs"] == []
