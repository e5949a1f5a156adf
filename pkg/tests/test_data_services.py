import math

import numpy as np
import pytest

from models.reports.run_config import GeneratorSpec
from models.topology.complex import FilteredComplex
from services.homology.data_services import (
    DataServiceException,
    dedupe_points,
    generate,
    ingest,
    points_to_distances,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_ingest_distance_matrix(tmp_path):
    path = _write(tmp_path / "d.csv", "0,1,2\n1,0,1.5\n2,1.5,0\n")
    matrix = ingest(path, "distances")
    assert matrix.shape == (3, 3)
    assert matrix[1, 2] == 1.5
    complex_ = FilteredComplex.build_vr(matrix)
    assert complex_.count(1) == 3 and complex_.count(2) == 1


def test_ingest_skips_header_row(tmp_path):
    path = _write(tmp_path / "p.csv", "x,y\n0,0\n1,0\n")
    assert ingest(path, "points").tolist() == [[0.0, 0.0], [1.0, 0.0]]


@pytest.mark.parametrize("text", [
    "0,1\n2,0\n",
    "0,-1\n-1,0\n",
    "1,1\n1,0\n",
    "0,1,2\n1,0,1\n",
])
def test_ingest_rejects_invalid_matrices(tmp_path, text):
    with pytest.raises(DataServiceException) as info:
        ingest(_write(tmp_path / "bad.csv", text), "distances")
    assert info.value.code == 400


def test_ingest_rejects_ragged_and_unparsable_rows(tmp_path):
    with pytest.raises(DataServiceException):
        ingest(_write(tmp_path / "ragged.csv", "0,0\n1\n"), "points")
    with pytest.raises(DataServiceException) as info:
        ingest(_write(tmp_path / "text.csv", "0,0\nfoo,1\n"), "points")
    assert "第 2 行" in info.value.message


def test_ingest_missing_file(tmp_path):
    with pytest.raises(DataServiceException) as info:
        ingest(str(tmp_path / "missing.csv"), "distances")
    assert info.value.code == 404


def test_unit_square_distances(unit_square_points):
    distances = points_to_distances(np.asarray(unit_square_points))
    off_diagonal = {round(float(value), 12) for value in distances[~np.eye(4, dtype=bool)]}
    assert off_diagonal == {1.0, round(math.sqrt(2), 12)}


def test_dedupe_points_keeps_first_occurrence():
    points, kept = dedupe_points([[0, 0], [1, 1], [0, 0], [2, 2]])
    assert kept == [0, 1, 3]
    assert points.tolist() == [[0, 0], [1, 1], [2, 2]]


@pytest.mark.parametrize("kind", ["normal", "gamma", "logistic", "exponential"])
def test_generate_is_deterministic(kind):
    spec = GeneratorSpec(kind=kind, n=20, dim=3, seed=12345)
    first, second = generate(spec), generate(spec)
    assert first.shape == (20, 3)
    assert np.array_equal(first, second)
    assert np.all(np.isfinite(first))
    assert not np.array_equal(first, generate(GeneratorSpec(kind=kind, n=20, dim=3, seed=12346)))


def test_generate_positive_distributions():
    assert np.all(generate(GeneratorSpec(kind="exponential", n=50, dim=2, seed=7)) > 0)
    assert np.all(generate(GeneratorSpec(kind="gamma", n=50, dim=2, seed=7)) > 0)


def test_generate_erdos_renyi_matrix():
    matrix = generate(GeneratorSpec(kind="erdos-renyi", n=100, seed=1))
    assert matrix.shape == (100, 100)
    assert np.array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0)
    upper = matrix[np.triu_indices(100, k=1)]
    assert upper.size == 4950
    assert np.all((upper > 0) & (upper < 1))


def test_generator_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(kind="cauchy", n=10)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="normal", n=1)
    with pytest.raises(ValueError):
        GeneratorSpec(kind="normal", n=10, seed=2 ** 64)
