from fractions import Fraction

import pytest

from core.lp import solve_lp
from core.rational import SparseRationalMatrix, smat_rank
from models.optimization.program_specs import EdgeProgramSpec, ProgramModelException, WeightMode
from models.topology.chain import Chain
from models.topology.complex import FilteredComplex
from services.homology.edge_optimization_services import (
    EdgeOptimizationServiceException,
    build_edge_program,
    edge_weights,
    optimize_basis_filtered,
    optimize_basis_persistent,
)
from services.homology.persistence_services import chain_lifespan, column_basis_indices, is_persistent_basis

from conftest import edge_chain, persistence_of


def test_fan_uniform_edge_loss_finds_four_cycle(fan_complex):
    decomps, _, basis = persistence_of(fan_complex)
    optimized, records = optimize_basis_persistent(basis, fan_complex, decomps=decomps)
    assert records[0].cost_before == 5
    assert records[0].cost_after == 4
    # a-b-c-d-a
    expected = edge_chain(fan_complex, {(0, 1): 1, (1, 2): 1, (2, 3): 1, (0, 3): -1})
    assert optimized[0].chain.coefficients == expected
    assert optimized[0].lifespan == (2, 4)
    assert records[0].optimized_lifespan == [2, 4]


def test_fan_edge_program_shape(fan_complex):
    decomps, _, basis = persistence_of(fan_complex)
    spec = EdgeProgramSpec.for_target(basis, 0, fan_complex, column_basis=column_basis_indices(decomps[2].R))
    assert spec.admissible_edges == [0, 1, 2, 3, 4, 5]
    assert spec.admissible_triangles == [0]
    assert spec.admissible_cycles == []
    program = build_edge_program(spec, fan_complex)
    assert program.num_constraints == 6
    assert program.num_variables == 2 * 6 + 2
    assert program.has_nonnegative_objective()
    assert solve_lp(program).cost == 4


def test_triple_loop_replaces_last_cycle(triple_loop_complex):
    decomps, _, basis = persistence_of(triple_loop_complex)
    optimized, records = optimize_basis_persistent(basis, triple_loop_complex, decomps=decomps)
    assert [r.cost_after for r in records] == [3, 3, 3]
    assert records[2].cost_before == 4
    # 最后两个环之和的支撑：(4,5) - (4,6) + (5,6)
    expected = edge_chain(triple_loop_complex, {(4, 5): 1, (4, 6): -1, (5, 6): 1})
    assert optimized[2].chain.coefficients == expected
    assert [rep.lifespan for rep in optimized] == [rep.lifespan for rep in basis]
    assert is_persistent_basis(optimized, triple_loop_complex)


def test_pentagon_hub_persistent_keeps_five_edges_filtered_finds_four(pentagon_hub_complex):
    decomps, _, basis = persistence_of(pentagon_hub_complex)
    persistent, _ = optimize_basis_persistent(basis, pentagon_hub_complex, decomps=decomps)
    assert len(persistent[1].chain.coefficients) == 5

    filtered, records = optimize_basis_filtered(basis, pentagon_hub_complex, decomps=decomps)
    assert len(filtered[1].chain.coefficients) == 4
    assert filtered[1].lifespan == (1, None)
    assert records[1].lifespan_changed
    assert not records[0].lifespan_changed


def test_filtered_basis_keeps_same_birth_twins_independent():
    # 三条 0-7 路径，所有边同时出生：两个 [1, ∞) 区间只靠出生边的先后区分
    entries = [((v,), 0) for v in range(8)]
    entries += [(edge, 1) for edge in [(0, 1), (1, 2), (2, 3), (3, 7), (0, 5), (5, 7), (0, 6), (6, 7)]]
    complex_ = FilteredComplex.from_simplices(entries)
    decomps, barcode, basis = persistence_of(complex_)
    assert [(p.birth_value, p.death_value) for p in barcode] == [(1, None), (1, None)]

    assert basis[0].birth_simplex < basis[1].birth_simplex
    assert EdgeProgramSpec.for_target(basis, 0, complex_, cycle_rule="filtered").admissible_cycles == []
    later = EdgeProgramSpec.for_target(basis, 1, complex_, cycle_rule="filtered")
    assert later.admissible_cycles == [0]
    assert later.admissible_edges == list(range(basis[1].birth_simplex + 1))

    optimized, records = optimize_basis_filtered(basis, complex_, decomps=decomps)
    assert all(record.status == "optimal" for record in records)
    chains = SparseRationalMatrix.zeros(complex_.count(1), 0).hstack(rep.chain.coefficients for rep in optimized)
    assert smat_rank(chains) == 2
    assert is_persistent_basis(optimized, complex_)


def test_pentagon_chord_essential_cycle_shrinks(pentagon_chord_complex):
    _, barcode, basis = persistence_of(pentagon_chord_complex)
    assert [(p.birth_value, p.death_value) for p in barcode] == [(1, None)]
    optimized, records = optimize_basis_persistent(basis, pentagon_chord_complex)
    assert records[0].cost_before == 5
    assert records[0].cost_after == 4
    assert optimized[0].lifespan == (1, None)


def test_column_basis_is_cost_neutral(golden_complexes):
    for complex_ in golden_complexes.values():
        decomps, _, basis = persistence_of(complex_)
        _, reduced = optimize_basis_persistent(basis, complex_, decomps=decomps, use_column_basis=True)
        _, full = optimize_basis_persistent(basis, complex_, decomps=decomps, use_column_basis=False)
        assert [r.cost_after for r in reduced] == [r.cost_after for r in full]


def test_costs_never_increase_and_lifespans_hold(golden_complexes):
    for complex_ in golden_complexes.values():
        decomps, _, basis = persistence_of(complex_)
        for weight_mode in (WeightMode.UNIFORM, WeightMode.LENGTH):
            optimized, records = optimize_basis_persistent(basis, complex_, weight_mode=weight_mode, decomps=decomps)
            for rep, record in zip(optimized, records):
                assert record.cost_after <= record.cost_before
                assert record.cost_ratio <= 1
                assert chain_lifespan(rep.chain, complex_, decomps[2]) == rep.lifespan
            assert is_persistent_basis(optimized, complex_)


def test_integral_program_matches_relaxation_on_golden_complexes(golden_complexes):
    for complex_ in golden_complexes.values():
        decomps, _, basis = persistence_of(complex_)
        _, relaxed = optimize_basis_persistent(basis, complex_, decomps=decomps, compare_mip=True)
        _, integral = optimize_basis_persistent(basis, complex_, decomps=decomps, integral=True)
        assert [r.cost_after for r in relaxed] == [r.cost_after for r in integral]
        assert all(r.lp_cost == r.mip_cost for r in relaxed)


def test_no_replacement_mode(triple_loop_complex):
    decomps, _, basis = persistence_of(triple_loop_complex)
    optimized, records = optimize_basis_persistent(basis, triple_loop_complex, decomps=decomps, replace=False)
    assert [r.cost_after for r in records] == [3, 3, 3]
    assert len(optimized) == 3


def test_integral_infeasible_keeps_original(triple_loop_complex):
    decomps, _, basis = persistence_of(triple_loop_complex)
    halved = [rep.with_chain(Chain.from_mapping(1, {k: v / 2 for k, v in rep.chain.coefficients.items()}))
              for rep in basis]
    optimized, records = optimize_basis_persistent(halved, triple_loop_complex, decomps=decomps, integral=True)
    assert records[0].status == "integral-infeasible"
    assert optimized[0] == halved[0]
    assert records[0].cost_after == records[0].cost_before == Fraction(3, 2)


def test_length_weights_are_exact(unit_square_complex):
    weights = edge_weights(unit_square_complex, WeightMode.LENGTH, [4])
    assert float(weights[4]) == unit_square_complex.edge_length(4)
    with pytest.raises(EdgeOptimizationServiceException):
        edge_weights(unit_square_complex, WeightMode.AREA, [0])


def test_edge_spec_rejects_area_weights(fan_complex):
    _, _, basis = persistence_of(fan_complex)
    with pytest.raises(ProgramModelException) as info:
        EdgeProgramSpec.for_target(basis, 0, fan_complex, weight_mode=WeightMode.AREA)
    assert info.value.code == 400
    with pytest.raises(ProgramModelException):
        EdgeProgramSpec.for_target(basis, 3, fan_complex)


def test_on_record_reports_each_cycle(triple_loop_complex):
    seen = []
    optimize_basis_persistent(persistence_of(triple_loop_complex)[2], triple_loop_complex, on_record=seen.append)
    assert [record.index for record in seen] == [0, 1, 2]


def test_independent_programs_run_in_parallel(triple_loop_complex):
    decomps, _, basis = persistence_of(triple_loop_complex)
    _, sequential = optimize_basis_persistent(basis, triple_loop_complex, decomps=decomps, replace=False)
    _, parallel = optimize_basis_persistent(basis, triple_loop_complex, decomps=decomps, replace=False, max_workers=3)
    assert [r.cost_after for r in parallel] == [r.cost_after for r in sequential]
    _, filtered = optimize_basis_filtered(basis, triple_loop_complex, decomps=decomps, max_workers=2)
    assert [r.index for r in filtered] == [0, 1, 2]
