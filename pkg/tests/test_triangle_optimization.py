import pytest

from models.optimization.program_specs import SlicingStrategy, VolumeProgramSpec, WeightMode
from services.homology.triangle_optimization_services import (
    TriangleOptimizationServiceException,
    build_triangle_program,
    chain_boundary,
    compute_f_sets,
    optimize_basis_triangle,
    slice_boundary,
)

from conftest import persistence_of


def test_fan_f_sets(fan_complex):
    _, barcode, _ = persistence_of(fan_complex)
    f_edges, f_triangles = compute_f_sets(barcode[0], fan_complex)
    assert [fan_complex.simplex(1, e) for e in f_edges] == [(0, 4), (1, 4)]
    assert [fan_complex.simplex(2, t) for t in f_triangles] == [(0, 3, 4), (0, 1, 4), (1, 2, 4)]


def test_fan_triangle_loss_volume(fan_complex):
    optimized, records = optimize_basis_triangle(fan_complex)
    record = records[0]
    assert record.cost_after == 3
    assert record.cost_before is None
    # (a,b,e) + (b,c,e) - (a,d,e)
    volume = {fan_complex.simplex(2, t): v for t, v in record.volume.coefficients.items()}
    assert volume == {(0, 1, 4): 1, (1, 2, 4): 1, (0, 3, 4): -1}
    assert len(optimized[0].chain.coefficients) == 5
    assert optimized[0].chain == chain_boundary(record.volume, fan_complex)
    assert record.optimized_lifespan == [2, 4]


def _costs(records):
    return [None if r is None else r.cost_after for r in records]


@pytest.mark.parametrize("strategy", list(SlicingStrategy))
def test_strategies_agree(golden_complexes, strategy):
    for complex_ in golden_complexes.values():
        _, reference = optimize_basis_triangle(complex_, strategy=SlicingStrategy.BUILD_PART)
        _, records = optimize_basis_triangle(complex_, strategy=strategy)
        assert _costs(records) == _costs(reference)


def test_zero_out_keeps_full_shape(fan_complex):
    _, barcode, _ = persistence_of(fan_complex)
    f_edges, f_triangles = compute_f_sets(barcode[0], fan_complex)
    spec = VolumeProgramSpec(pair=barcode[0], f_edges=f_edges, f_triangles=f_triangles,
                             slicing_strategy=SlicingStrategy.ZERO_OUT)
    sliced = slice_boundary(SlicingStrategy.ZERO_OUT, fan_complex, spec)
    assert sliced.matrix.shape == (8, 4)
    assert sliced.matrix.is_zero_column(0)
    part = slice_boundary(SlicingStrategy.BUILD_PART, fan_complex, spec)
    assert part.matrix.shape == (2, 3)
    assert part.matrix == slice_boundary(SlicingStrategy.BUILD_ALL, fan_complex, spec).matrix


def test_fan_program_substitutes_death_triangle(fan_complex):
    _, barcode, _ = persistence_of(fan_complex)
    f_edges, f_triangles = compute_f_sets(barcode[0], fan_complex)
    spec = VolumeProgramSpec(pair=barcode[0], f_edges=f_edges, f_triangles=f_triangles)
    program, variables = build_triangle_program(spec, fan_complex)
    assert program.objective_offset == 1
    assert program.num_variables == 4
    assert variables.column_labels == [1, 2]


def test_unit_square_triangle_and_area_weights(unit_square_complex):
    _, records = optimize_basis_triangle(unit_square_complex)
    assert records[0].cost_after == 2
    assert len(records[0].optimized.chain.coefficients) == 4
    _, weighted = optimize_basis_triangle(unit_square_complex, weight_mode=WeightMode.AREA)
    assert float(weighted[0].cost_after) == pytest.approx(1.0)


def test_area_weights_need_points(fan_complex):
    with pytest.raises(TriangleOptimizationServiceException) as info:
        optimize_basis_triangle(fan_complex, weight_mode=WeightMode.AREA)
    assert info.value.code == 400


def test_infinite_bars_keep_initial_representative(triple_loop_complex):
    _, _, basis = persistence_of(triple_loop_complex)
    optimized, records = optimize_basis_triangle(triple_loop_complex)
    assert records[1] is None and records[2] is None
    assert optimized[1] == basis[1]
    assert records[0].cost_after == 1


def test_integral_volume_matches_relaxation(golden_complexes):
    for complex_ in golden_complexes.values():
        _, relaxed = optimize_basis_triangle(complex_, compare_mip=True)
        _, integral = optimize_basis_triangle(complex_, integral=True)
        assert [r.cost_after for r in relaxed if r is not None] == [r.cost_after for r in integral if r is not None]
        assert all(r.lp_cost == r.mip_cost for r in relaxed if r is not None)


def test_unknown_strategy_and_infinite_pair(triple_loop_complex):
    with pytest.raises(TriangleOptimizationServiceException) as info:
        optimize_basis_triangle(triple_loop_complex, strategy="diagonal")
    assert info.value.code == 400
    _, barcode, _ = persistence_of(triple_loop_complex)
    with pytest.raises(TriangleOptimizationServiceException):
        compute_f_sets(barcode[1], triple_loop_complex)


def test_volume_program_spec_requires_death_triangle(fan_complex):
    _, barcode, _ = persistence_of(fan_complex)
    with pytest.raises(ValueError):
        VolumeProgramSpec(pair=barcode[0], f_edges=[6, 7], f_triangles=[1, 2])
