from fractions import Fraction

import pytest

from models.optimization.program_specs import WeightMode
from models.reports.cycle_stats import CoefficientClass, StatSummary
from models.topology.chain import Chain
from models.topology.complex import FilteredComplex
from services.homology.edge_optimization_services import optimize_basis_persistent
from services.homology.metrics_services import (
    MetricsServiceException,
    aggregate_report,
    build_cycle_stats,
    classify_coefficients,
    cost_agreement,
    cross_weight_optimality,
    loop_count,
    loss,
    segments_intersect,
    surveyor_area,
)
from services.homology.triangle_optimization_services import optimize_basis_triangle

from conftest import persistence_of


def _cycle(complex_, vertices):
    """沿顶点序列闭合的 1 维链，系数按边的方向取 ±1。"""
    terms = {}
    for u, v in zip(vertices, vertices[1:] + vertices[:1]):
        terms[complex_.index_of((u, v))] = 1 if u < v else -1
    return Chain.from_mapping(1, terms)


@pytest.fixture
def figure_eight():
    points = [[0, 0], [1, 0], [1, 1], [0, 1], [-1, 0], [-1, -1], [0, -1]]
    return FilteredComplex.from_points(points)


def test_square_losses(unit_square_complex):
    chain = _cycle(unit_square_complex, [0, 1, 2, 3])
    assert loss(chain, "edge-unif", unit_square_complex) == 4
    assert loss(chain, "edge-len", unit_square_complex) == 4.0
    assert loop_count(chain, unit_square_complex) == 1
    assert surveyor_area(chain, unit_square_complex).area == 1.0


def test_two_disjoint_squares():
    points = [[0, 0], [1, 0], [1, 1], [0, 1], [5, 0], [6, 0], [6, 1], [5, 1]]
    complex_ = FilteredComplex.from_points(points)
    chain = _cycle(complex_, [0, 1, 2, 3]).combine(_cycle(complex_, [4, 5, 6, 7]))
    assert loop_count(chain, complex_) == 2
    assert surveyor_area(chain, complex_).reason == "not-single-cycle"


def test_figure_eight(figure_eight):
    chain = _cycle(figure_eight, [0, 1, 2, 3]).combine(_cycle(figure_eight, [0, 4, 5, 6]))
    assert loss(chain, "edge-unif", figure_eight) == 8
    assert loop_count(chain, figure_eight) == 2
    result = surveyor_area(chain, figure_eight)
    assert result.area is None
    assert result.reason == "not-single-cycle"


def test_right_triangle_area():
    complex_ = FilteredComplex.from_points([[0, 0], [1, 0], [0, 1]])
    result = surveyor_area(_cycle(complex_, [0, 1, 2]), complex_)
    assert result.is_defined
    assert result.area == 0.5


def test_self_intersecting_polygon():
    complex_ = FilteredComplex.from_points([[0, 0], [1, 1], [1, 0], [0, 1]])
    result = surveyor_area(_cycle(complex_, [0, 1, 2, 3]), complex_)
    assert result.reason == "self-intersecting"


def test_surveyor_area_reasons(fan_complex):
    assert surveyor_area(Chain.zero(1), fan_complex).reason == "empty"
    _, _, basis = persistence_of(fan_complex)
    assert surveyor_area(basis[0].chain, fan_complex).reason == "not-planar"
    spatial = FilteredComplex.from_points([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert surveyor_area(_cycle(spatial, [0, 1, 2]), spatial).reason == "not-planar"


def test_segments_intersect_touching_and_collinear():
    F = Fraction
    assert segments_intersect((F(0), F(0)), (F(2), F(0)), (F(1), F(0)), (F(1), F(1)))
    assert segments_intersect((F(0), F(0)), (F(2), F(0)), (F(1), F(0)), (F(3), F(0)))
    assert not segments_intersect((F(0), F(0)), (F(1), F(0)), (F(2), F(0)), (F(3), F(0)))
    assert not segments_intersect((F(0), F(0)), (F(1), F(1)), (F(0), F(1)), (F(1, 3), F(2)))


def test_classify_coefficients():
    assert classify_coefficients(Chain.from_mapping(1, {0: 1, 1: -1})) == CoefficientClass.PM1_ZERO
    assert classify_coefficients(Chain.from_mapping(1, {0: 2, 1: -1})) == CoefficientClass.INTEGRAL
    assert classify_coefficients(Chain.from_mapping(1, {0: Fraction(1, 2)})) == CoefficientClass.FRACTIONAL
    assert classify_coefficients(Chain.zero(1)) == CoefficientClass.PM1_ZERO


def test_loss_errors(fan_complex):
    chain = Chain.from_mapping(1, {0: 1})
    with pytest.raises(MetricsServiceException) as info:
        loss(chain, "vertex", fan_complex)
    assert info.value.code == 400
    with pytest.raises(MetricsServiceException):
        loss(chain, "tri-unif", fan_complex)
    with pytest.raises(MetricsServiceException):
        loss(Chain.from_mapping(2, {0: 1}), "tri-area", fan_complex)
    assert loop_count(Chain.zero(1), fan_complex) == 0


def test_cycle_stats_and_summary(fan_complex):
    decomps, _, basis = persistence_of(fan_complex)
    optimized, records = optimize_basis_persistent(basis, fan_complex, decomps=decomps)
    stats = build_cycle_stats(0, basis[0], optimized[0], fan_complex, records[0])
    assert stats.program == "edge-persistent"
    assert stats.loss_edge_unif == 4
    assert stats.cost_ratio_vs_original == Fraction(4, 5)
    assert stats.coeff_class == CoefficientClass.PM1_ZERO
    assert stats.surveyor_reason == "not-planar"
    summary = aggregate_report([stats])
    assert summary.count == 1
    assert summary.cost_ratio.mean == pytest.approx(0.8)
    assert summary.one_loop_fraction == 1.0
    assert summary.loop_histogram == {1: 1}
    assert summary.optimized_class_fractions["pm1-zero"] == 1.0


def test_triangle_stats_carry_volume(unit_square_complex):
    optimized, records = optimize_basis_triangle(unit_square_complex)
    _, _, basis = persistence_of(unit_square_complex)
    stats = build_cycle_stats(0, basis[0], optimized[0], unit_square_complex, records[0])
    assert stats.loss_tri_unif == 2
    assert stats.loss_tri_area == pytest.approx(1.0)
    assert stats.cost_ratio_vs_original is None
    assert stats.surveyor_area == 1.0


def test_initial_stats_and_empty_summary(pentagon_chord_complex):
    _, _, basis = persistence_of(pentagon_chord_complex)
    stats = build_cycle_stats(0, basis[0], basis[0], pentagon_chord_complex)
    assert stats.program == "initial"
    assert stats.cost_after is None
    assert aggregate_report([]).count == 0
    assert StatSummary.of_values([None]) == StatSummary()


def test_cross_weight_optimality(unit_square_complex):
    decomps, _, basis = persistence_of(unit_square_complex)
    stats = {}
    for mode in ("uniform", "length"):
        optimized, records = optimize_basis_persistent(basis, unit_square_complex, weight_mode=WeightMode(mode), decomps=decomps)
        stats[mode] = [build_cycle_stats(0, basis[0], optimized[0], unit_square_complex, records[0])]
    assert cross_weight_optimality(stats["uniform"], stats["length"]) == (1.0, 1.0)
    assert cost_agreement(stats["uniform"], stats["uniform"]) == 1.0
