from fractions import Fraction

import pytest

from core.rational import SparseRationalMatrix
from models.topology.complex import FilteredComplex
from services.homology.persistence_services import decompose_complex, extract_barcode, initial_cycle_basis


def _symmetric(size, entries, default):
    matrix = [[0.0 if i == j else default for j in range(size)] for i in range(size)]
    for (u, v), value in entries.items():
        matrix[u][v] = matrix[v][u] = value
    return matrix


@pytest.fixture
def fan_distances():
    # a..e = 0..4
    entries = {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (2, 4): 1.0, (3, 4): 1.0,
               (0, 3): 2.0, (0, 4): 3.0, (1, 4): 4.0, (0, 2): 10.0, (1, 3): 10.0}
    return _symmetric(5, entries, 10.0)


@pytest.fixture
def fan_complex(fan_distances):
    return FilteredComplex.build_vr(fan_distances, max_eps=5.0)


@pytest.fixture
def triple_loop_complex():
    entries = [((v,), 0) for v in range(7)]
    entries += [((0, 1), 1), ((0, 2), 1), ((1, 2), 1), ((0, 1, 2), 2)]
    entries += [((3, 4), 2), ((3, 5), 2), ((4, 5), 2)]
    entries += [((4, 6), 3), ((5, 6), 3)]
    return FilteredComplex.from_simplices(entries)


@pytest.fixture
def pentagon_hub_complex():
    entries = [((v,), 0) for v in range(6)]
    entries += [((0, 1), 0), ((1, 2), 0), ((2, 3), 0), ((3, 4), 0), ((0, 4), 0)]
    entries += [((0, 5), 1), ((2, 5), 1)]
    entries += [((3, 5), 2), ((4, 5), 2), ((0, 4, 5), 2), ((2, 3, 5), 2), ((3, 4, 5), 2)]
    return FilteredComplex.from_simplices(entries)


@pytest.fixture
def pentagon_chord_distances():
    entries = {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (3, 4): 1.0, (0, 4): 1.0, (1, 4): 1.0}
    return _symmetric(5, entries, 2.0)


@pytest.fixture
def pentagon_chord_complex(pentagon_chord_distances):
    return FilteredComplex.build_vr(pentagon_chord_distances, max_eps=1.0)


@pytest.fixture
def unit_square_points():
    return [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


@pytest.fixture
def unit_square_complex(unit_square_points):
    return FilteredComplex.from_points(unit_square_points)


@pytest.fixture
def golden_complexes(fan_complex, triple_loop_complex, pentagon_hub_complex, pentagon_chord_complex, unit_square_complex):
    return {"fan": fan_complex, "triple_loop": triple_loop_complex, "pentagon_hub": pentagon_hub_complex,
            "pentagon_chord": pentagon_chord_complex, "unit-square": unit_square_complex}


def persistence_of(complex_):
    decomps = decompose_complex(complex_)
    return decomps, extract_barcode(decomps, complex_), initial_cycle_basis(decomps, complex_)


def edge_chain(complex_, terms):
    """{(u, v): 系数} → 以边下标为键的系数字典。"""
    return {complex_.index_of(edge): Fraction(value) for edge, value in terms.items()}


def dense_matrix(rows):
    """按行给出的稠密矩阵 → SparseRationalMatrix。"""
    num_cols = len(rows[0]) if rows else 0
    return SparseRationalMatrix.from_columns(len(rows), [{i: row[j] for i, row in enumerate(rows)} for j in range(num_cols)])
