import logging
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.configs import DEBUG_MODE, homology_config
from core.lp import LinearProgram, LPSolverException, Solution, SolveStatus, dump_lp, solve_lp, solve_mip
from core.rational import RationalException, SparseRationalMatrix, rat_from_float
from models.optimization.program_specs import EdgeProgramSpec, OptimizationRecord, ProgramModelException, WeightMode
from models.topology.chain import Chain
from models.topology.complex import ComplexModelException, FilteredComplex
from models.topology.persistence import CycleRepresentative
from services.homology.persistence_services import (
    Decompositions,
    PersistenceServiceException,
    chain_lifespan,
    column_basis_indices,
    decompose_complex,
)

logger = logging.getLogger(__name__)

Solver = Callable[[LinearProgram], Solution]
RecordCallback = Callable[[OptimizationRecord], None]


class EdgeOptimizationServiceException(Exception):
    """边损失优化服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def default_solver(integral: bool) -> Solver:
    return solve_mip if integral else solve_lp


def edge_weights(complex_: FilteredComplex, weight_mode: WeightMode, edges: Sequence[int]) -> Dict[int, Fraction]:
    """uniform 取 1，length 取边长 binary64 值的精确有理数。"""
    if weight_mode == WeightMode.UNIFORM:
        return {e: Fraction(1) for e in edges}
    if weight_mode == WeightMode.LENGTH:
        return {e: rat_from_float(complex_.edge_length(e)) for e in edges}
    raise EdgeOptimizationServiceException(code=400, message=f"边损失不支持权重模式 {weight_mode}")


def build_edge_program(spec: EdgeProgramSpec, complex_: FilteredComplex) -> LinearProgram:
    """构造一般边损失程序。

    变量依次为 x⁺, x⁻（可用边上）、q⁺, q⁻（可用三角形上）、p⁺, p⁻（可用循环上），约束
    (x⁺ - x⁻) - ∂₂(q⁺ - q⁻) - A(p⁺ - p⁻) = 原代表元，
    目标 Σ W[i,i](xᵢ⁺ + xᵢ⁻)。q、p 是自由有理变量，拆成两个非负变量。

    Args:
        spec (EdgeProgramSpec): 下标集合与权重模式
        complex_ (FilteredComplex): 过滤复形

    Returns:
        LinearProgram: 整数掩码只作用在 x⁺, x⁻ 上

    Raises:
        EdgeOptimizationServiceException: 目标循环或可用循环的边超出可用边时抛出
    """
    edges = spec.admissible_edges
    row_of = {edge: row for row, edge in enumerate(edges)}
    target = spec.target.chain
    for index in target.coefficients:
        if index not in row_of:
            raise EdgeOptimizationServiceException(code=400, message=f"目标循环的边 {index} 不在可用边中")
    weights = edge_weights(complex_, spec.weight_mode, edges)

    columns: List[Dict[int, Fraction]] = []
    objective: List[Fraction] = []
    names: List[str] = []
    for sign, prefix in ((1, "xp"), (-1, "xm")):
        for edge in edges:
            columns.append({row_of[edge]: Fraction(sign)})
            objective.append(weights[edge])
            names.append(f"{prefix}_{edge}")
    for triangle in spec.admissible_triangles:
        boundary = complex_.boundary_column(2, triangle)
        for sign, prefix in ((-1, "qp"), (1, "qm")):
            columns.append({row_of[e]: sign * v for e, v in boundary.items()})
            objective.append(Fraction(0))
            names.append(f"{prefix}_{triangle}")
    for i in spec.admissible_cycles:
        cycle = spec.basis[i].chain.coefficients
        for edge in cycle:
            if edge not in row_of:
                raise EdgeOptimizationServiceException(code=400, message=f"可用循环 {i} 的边 {edge} 不在可用边中")
        for sign, prefix in ((-1, "pp"), (1, "pm")):
            columns.append({row_of[e]: sign * v for e, v in cycle.items()})
            objective.append(Fraction(0))
            names.append(f"{prefix}_{i}")

    split = 2 * len(edges)
    mask = [spec.integral and j < split for j in range(len(columns))]
    rhs = [target.coefficients.get(edge, Fraction(0)) for edge in edges]
    matrix = SparseRationalMatrix.from_columns(len(edges), columns) if columns else SparseRationalMatrix.zeros(len(edges), 0)
    return LinearProgram(objective=objective, constraint_matrix=matrix, rhs=rhs, integrality_mask=mask,
                         variable_names=names)


def chain_from_edge_solution(spec: EdgeProgramSpec, solution: Solution) -> Chain:
    edges = spec.admissible_edges
    count = len(edges)
    return Chain.from_mapping(1, {edge: solution.x[k] - solution.x[count + k] for k, edge in enumerate(edges)})


def _solve_target(spec: EdgeProgramSpec, complex_: FilteredComplex, solver: Solver, program_kind: str,
                  compare_mip: bool) -> Tuple[CycleRepresentative, OptimizationRecord]:
    started = time.perf_counter()
    program = build_edge_program(spec, complex_)
    solution = solver(program)
    lp_cost = mip_cost = None
    if compare_mip:
        relaxed = solution if not spec.integral else solve_lp(program)
        integral = solution if spec.integral else solve_mip(program)
        lp_cost = relaxed.cost if relaxed.is_optimal else None
        mip_cost = integral.cost if integral.is_optimal else None
        if lp_cost != mip_cost:
            logger.warning("循环 %d 的 LP 与 MIP 最优值不同: %s vs %s\n%s", spec.target_index, lp_cost, mip_cost,
                           dump_lp(program, name=f"{program_kind}-{spec.target_index}"))
    elapsed = time.perf_counter() - started

    original = spec.target
    weights = edge_weights(complex_, spec.weight_mode, spec.admissible_edges)
    cost_before = original.chain.l1_norm(weights)
    if solution.status == SolveStatus.INFEASIBLE and spec.integral and \
            any(v.denominator != 1 for v in original.chain.coefficients.values()):
        # 原代表元含分数系数时整数程序可能无解，保留原代表元
        logger.info("循环 %d 没有整数最优解，保留原代表元", spec.target_index)
        status, optimized, cost_after = "integral-infeasible", original, cost_before
    elif not solution.is_optimal:
        raise EdgeOptimizationServiceException(code=500, message=f"循环 {spec.target_index} 的边损失程序求解状态为 {solution.status.value}，原代表元本应可行")
    else:
        status = solution.status.value
        optimized = original.with_chain(chain_from_edge_solution(spec, solution))
        cost_after = solution.cost
    record = OptimizationRecord(
        index=spec.target_index, program=program_kind, weight_mode=spec.weight_mode, integral=spec.integral,
        status=status, original=original, optimized=optimized, cost_before=cost_before, cost_after=cost_after,
        pivots=solution.pivots, branch_nodes=solution.branch_nodes, num_variables=program.num_variables,
        num_constraints=program.num_constraints, solve_time=elapsed, lp_cost=lp_cost, mip_cost=mip_cost,
    )
    logger.info("%s 循环 %d: 代价 %s -> %s (%d 次主元)", program_kind, spec.target_index, cost_before, cost_after,
                solution.pivots)
    return optimized, record


def map_in_order(function, items: Sequence[int], max_workers: Optional[int]) -> list:
    workers = max_workers if max_workers is not None else homology_config["max_workers"]
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, items))


def optimize_basis_persistent(basis: Sequence[CycleRepresentative], complex_: FilteredComplex,
                              weight_mode: WeightMode = WeightMode.UNIFORM, integral: bool = False,
                              solver: Optional[Solver] = None, decomps: Optional[Decompositions] = None,
                              replace: bool = True, use_column_basis: bool = True, compare_mip: bool = False,
                              max_workers: Optional[int] = None,
                              on_record: Optional[RecordCallback] = None) -> Tuple[List[CycleRepresentative], List[OptimizationRecord]]:
    """边损失的持续循环基最小化。

    按基的顺序（条形码顺序：出生、死亡）依次对第 j 个元素求解一般边损失程序，
    可用循环取自当前已部分优化的基，求得的解立即替换该元素。

    Args:
        basis: initial_cycle_basis 给出的初始基
        complex_ (FilteredComplex): 过滤复形
        weight_mode (WeightMode): uniform 或 length
        integral (bool): 是否要求 x⁺, x⁻ 为整数
        solver: 求解函数，默认按 integral 选择 solve_lp 或 solve_mip
        replace (bool): False 时每个程序都针对输入基求解（不替换模式，结果不保证是基）
        use_column_basis (bool): 是否只用约化非零列对应的三角形

    Returns:
        (优化后的基, 每个循环的求解记录)

    Raises:
        EdgeOptimizationServiceException: 程序不可行或寿命区间未保持时抛出
    """
    try:
        solver = solver or default_solver(integral)
        decomps = decomps or decompose_complex(complex_)
        column_basis = column_basis_indices(decomps[2].R)
        current = list(basis)

        def solve_one(j: int, reference: Sequence[CycleRepresentative]) -> Tuple[CycleRepresentative, OptimizationRecord]:
            spec = EdgeProgramSpec.for_target(reference, j, complex_, column_basis=column_basis, weight_mode=weight_mode,
                                              integral=integral, use_column_basis=use_column_basis)
            optimized, record = _solve_target(spec, complex_, solver, "edge-persistent", compare_mip)
            if replace and record.status == SolveStatus.OPTIMAL.value:
                lifespan = chain_lifespan(optimized.chain, complex_, decomps[2])
                if lifespan != optimized.lifespan:
                    raise EdgeOptimizationServiceException(code=500, message=f"循环 {j} 的寿命区间未保持: {optimized.lifespan} -> {lifespan}")
                record.optimized_lifespan = list(lifespan)
            if on_record is not None:
                on_record(record)
            return optimized, record

        if replace:
            records = []
            for j in range(len(current)):
                optimized, record = solve_one(j, current)
                current[j] = optimized
                records.append(record)
            return current, records
        results = map_in_order(lambda j: solve_one(j, basis), list(range(len(basis))), max_workers)
        return [optimized for optimized, _ in results], [record for _, record in results]
    except EdgeOptimizationServiceException as e:
        raise e
    except (ProgramModelException, PersistenceServiceException, LPSolverException, RationalException,
            ComplexModelException) as e:
        raise EdgeOptimizationServiceException(code=e.code, message=e.message)
    except Exception as e:
        if DEBUG_MODE:
            raise EdgeOptimizationServiceException(code=500, message=f"持续循环基优化失败: {e}")
        else:
            raise EdgeOptimizationServiceException(code=500, message="持续循环基优化失败")


def optimize_basis_filtered(basis: Sequence[CycleRepresentative], complex_: FilteredComplex,
                            weight_mode: WeightMode = WeightMode.UNIFORM, integral: bool = False,
                            solver: Optional[Solver] = None, decomps: Optional[Decompositions] = None,
                            compare_mip: bool = False,
                            max_workers: Optional[int] = None,
                            on_record: Optional[RecordCallback] = None) -> Tuple[List[CycleRepresentative], List[OptimizationRecord]]:
    """过滤循环基的边损失优化。

    每个循环独立求解：允许方向为单形全序中排在原代表元出生边之前的三角形边界，以及输入基中
    出生边排在其前的其余循环（不论死亡时间）。出生值相同的循环也按出生边先后区分，
    因而输出仍是过滤循环基，但死亡时间可能推迟。

    Returns:
        (寿命区间按实际重新计算的代表元, 每个循环的求解记录)
    """
    try:
        solver = solver or default_solver(integral)
        decomps = decomps or decompose_complex(complex_)
        column_basis = column_basis_indices(decomps[2].R)

        def solve_one(j: int) -> Tuple[CycleRepresentative, OptimizationRecord]:
            spec = EdgeProgramSpec.for_target(basis, j, complex_, column_basis=column_basis, weight_mode=weight_mode,
                                              integral=integral, cycle_rule="filtered")
            optimized, record = _solve_target(spec, complex_, solver, "edge-filtered", compare_mip)
            birth, death = chain_lifespan(optimized.chain, complex_, decomps[2])
            record.optimized_lifespan = [birth, death]
            optimized = CycleRepresentative(chain=optimized.chain, birth=birth, death=death,
                                            source_pair=optimized.source_pair)
            record.optimized = optimized
            if record.lifespan_changed:
                logger.info("过滤基循环 %d 的寿命区间由 %s 变为 %s", j, basis[j].lifespan, (birth, death))
            if on_record is not None:
                on_record(record)
            return optimized, record

        results = map_in_order(solve_one, list(range(len(basis))), max_workers)
        return [optimized for optimized, _ in results], [record for _, record in results]
    except EdgeOptimizationServiceException as e:
        raise e
    except (ProgramModelException, PersistenceServiceException, LPSolverException, RationalException,
            ComplexModelException) as e:
        raise EdgeOptimizationServiceException(code=e.code, message=e.message)
    except Exception as e:
        if DEBUG_MODE:
            raise EdgeOptimizationServiceException(code=500, message=f"过滤循环基优化失败: {e}")
        else:
            raise EdgeOptimizationServiceException(code=500, message="过滤循环基优化失败")
