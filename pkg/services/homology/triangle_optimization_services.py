import logging
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.configs import DEBUG_MODE, homology_config
from core.lp import LinearProgram, LPSolverException, dump_lp, solve_lp, solve_mip
from core.rational import RationalException, SparseRationalMatrix, rat_from_float, smat_slice
from models.optimization.program_specs import (
    BoundarySlice,
    OptimizationRecord,
    ProgramModelException,
    SlicingStrategy,
    VolumeProgramSpec,
    WeightMode,
)
from models.topology.chain import Chain
from models.topology.complex import ComplexModelException, FilteredComplex
from models.topology.persistence import CycleRepresentative, IntervalPair
from services.homology.edge_optimization_services import RecordCallback, Solver, map_in_order
from services.homology.persistence_services import (
    Decompositions,
    PersistenceServiceException,
    chain_lifespan,
    decompose_complex,
    extract_barcode,
    initial_cycle_basis,
)

logger = logging.getLogger(__name__)


class TriangleOptimizationServiceException(Exception):
    """三角形损失优化服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def compute_f_sets(pair: IntervalPair, complex_: FilteredComplex) -> Tuple[List[int], List[int]]:
    """按全序计算 f_edges 与 f_triangles。

    f_edges：出生不晚于 τ、且在 1 维全序中严格位于 σ 之后的边。
    f_triangles：出生不早于 σ、且在 2 维全序中严格位于 τ 之前的三角形，再加上 τ。

    Raises:
        TriangleOptimizationServiceException: 区间无限或出生值等于死亡值时抛出
    """
    if not pair.is_finite or pair.is_degenerate:
        raise TriangleOptimizationServiceException(code=400, message="三角形损失程序需要出生值严格小于死亡值的有限区间")
    sigma, tau = pair.birth_simplex, pair.death_simplex
    edge_limit = complex_.prefix_length(1, pair.death_value)
    f_edges = list(range(sigma + 1, edge_limit))
    f_triangles = [t for t in range(tau) if complex_.birth(2, t) >= pair.birth_value]
    f_triangles.append(tau)
    return f_edges, f_triangles


def slice_boundary(strategy: SlicingStrategy, complex_: FilteredComplex, spec: VolumeProgramSpec,
                   boundary: Optional[SparseRationalMatrix] = None) -> BoundarySlice:
    """得到约束矩阵 ∂₂[f_edges, f_triangles]。

    zero-out 保留 |S₁|×|S₂| 的完整形状，把 f_edges 以外的行与 f_triangles 以外的列置零；
    build-all 从预先组装好的完整 ∂₂ 中切片；build-part 只从复形组装 f_triangles 中的列并限制到 f_edges 行。
    三种方式得到的程序可行集相同。
    """
    if strategy == SlicingStrategy.BUILD_PART:
        row_of = {edge: row for row, edge in enumerate(spec.f_edges)}
        columns = []
        for triangle in spec.f_triangles:
            column = complex_.boundary_column(2, triangle)
            columns.append({row_of[e]: v for e, v in column.items() if e in row_of})
        matrix = SparseRationalMatrix.from_columns(len(spec.f_edges), columns)
        return BoundarySlice(matrix=matrix, row_labels=list(spec.f_edges), column_labels=list(spec.f_triangles),
                             strategy=strategy)

    full = boundary if boundary is not None else complex_.boundary_matrix(2)
    if strategy == SlicingStrategy.BUILD_ALL:
        return BoundarySlice(matrix=smat_slice(full, spec.f_edges, spec.f_triangles), row_labels=list(spec.f_edges),
                             column_labels=list(spec.f_triangles), strategy=strategy)

    kept_rows, kept_cols = set(spec.f_edges), set(spec.f_triangles)
    columns = []
    for j in range(full.num_cols):
        if j in kept_cols:
            columns.append({i: v for i, v in full.column(j) if i in kept_rows})
        else:
            columns.append({})
    matrix = SparseRationalMatrix.from_columns(full.num_rows, columns) if columns else \
        SparseRationalMatrix.zeros(full.num_rows, 0)
    return BoundarySlice(matrix=matrix, row_labels=list(range(full.num_rows)), column_labels=list(range(full.num_cols)),
                         strategy=strategy)


def triangle_weights(complex_: FilteredComplex, weight_mode: WeightMode, triangles: Sequence[int]) -> Dict[int, Fraction]:
    if weight_mode == WeightMode.UNIFORM:
        return {t: Fraction(1) for t in triangles}
    if weight_mode == WeightMode.AREA:
        if not complex_.is_euclidean:
            raise TriangleOptimizationServiceException(code=400, message="面积权重只适用于欧氏点云构造的复形")
        return {t: rat_from_float(complex_.triangle_area(t)) for t in triangles}
    raise TriangleOptimizationServiceException(code=400, message=f"三角形损失不支持权重模式 {weight_mode}")


def build_triangle_program(spec: VolumeProgramSpec, complex_: FilteredComplex,
                           boundary: Optional[SparseRationalMatrix] = None) -> Tuple[LinearProgram, BoundarySlice]:
    """构造三角形损失程序。

    v_τ = 1 被代换掉：∂₂[f_edges, τ] 移到右端，W[τ,τ] 计入 objective_offset。
    剩余变量为 v⁺, v⁻（按切片的列），约束 ∂₂[f_edges, ·](v⁺ - v⁻) = -∂₂[f_edges, τ]。
    (∂₂v)_σ ≠ 0 不是线性约束，求解后再检查。

    Returns:
        (程序, 切片)
    """
    sliced = slice_boundary(spec.slicing_strategy, complex_, spec, boundary)
    tau = spec.death_triangle
    tau_position = sliced.column_labels.index(tau)
    labels = [label for k, label in enumerate(sliced.column_labels) if k != tau_position]
    weights = triangle_weights(complex_, spec.weight_mode, sliced.column_labels)

    tau_column = sliced.matrix.column_dict(tau_position)
    rhs = [-tau_column.get(i, Fraction(0)) for i in range(sliced.matrix.num_rows)]
    columns: List[Dict[int, Fraction]] = []
    objective: List[Fraction] = []
    names: List[str] = []
    for sign, prefix in ((1, "vp"), (-1, "vm")):
        for k, label in enumerate(sliced.column_labels):
            if k == tau_position:
                continue
            columns.append({i: sign * v for i, v in sliced.matrix.column(k)})
            objective.append(weights[label])
            names.append(f"{prefix}_{label}")
    matrix = SparseRationalMatrix.from_columns(sliced.matrix.num_rows, columns) if columns else \
        SparseRationalMatrix.zeros(sliced.matrix.num_rows, 0)
    program = LinearProgram(objective=objective, constraint_matrix=matrix, rhs=rhs,
                            integrality_mask=[spec.integral] * len(columns), objective_offset=weights[tau],
                            variable_names=names)
    logger.debug("三角形程序 τ=%d: %d 个变量, %d 行, 切片方式 %s", tau, len(columns), len(rhs), sliced.strategy.value)
    return program, BoundarySlice(matrix=sliced.matrix, row_labels=sliced.row_labels, column_labels=labels,
                                  strategy=sliced.strategy)


def volume_from_solution(spec: VolumeProgramSpec, variables: BoundarySlice, x: List[Fraction]) -> Chain:
    count = len(variables.column_labels)
    values = {spec.death_triangle: Fraction(1)}
    for k, label in enumerate(variables.column_labels):
        value = x[k] - x[count + k]
        if value:
            values[label] = value
    return Chain.from_mapping(2, values)


def chain_boundary(chain: Chain, complex_: FilteredComplex) -> Chain:
    result: Dict[int, Fraction] = {}
    for index, value in chain.coefficients.items():
        for face, sign in complex_.boundary_column(chain.dimension, index).items():
            result[face] = result.get(face, Fraction(0)) + sign * value
    return Chain.from_mapping(chain.dimension - 1, result)


def _solve_pair(pair: IntervalPair, original: CycleRepresentative, complex_: FilteredComplex, decomps: Decompositions,
                weight_mode: WeightMode, integral: bool, strategy: SlicingStrategy, solver: Solver,
                boundary: Optional[SparseRationalMatrix], compare_mip: bool, index: int) -> Tuple[CycleRepresentative, OptimizationRecord]:
    started = time.perf_counter()
    f_edges, f_triangles = compute_f_sets(pair, complex_)
    try:
        spec = VolumeProgramSpec(pair=pair, f_edges=f_edges, f_triangles=f_triangles, weight_mode=weight_mode,
                                 integral=integral, slicing_strategy=strategy)
    except ValueError as e:
        raise TriangleOptimizationServiceException(code=400, message=f"三角形损失程序参数无效: {e}")
    program, variables = build_triangle_program(spec, complex_, boundary)
    solution = solver(program)
    lp_cost = mip_cost = None
    if compare_mip:
        relaxed = solution if not integral else solve_lp(program)
        rounded = solution if integral else solve_mip(program)
        lp_cost = relaxed.cost if relaxed.is_optimal else None
        mip_cost = rounded.cost if rounded.is_optimal else None
        if lp_cost != mip_cost:
            logger.warning("区间 %d 的三角形 LP 与 MIP 最优值不同: %s vs %s\n%s", index, lp_cost, mip_cost,
                           dump_lp(program, name=f"triangle-{index}"))
    elapsed = time.perf_counter() - started
    if not solution.is_optimal:
        # 持续体积总是存在
        raise TriangleOptimizationServiceException(code=500, message=f"区间 {index} 的三角形程序求解状态为 {solution.status.value}")

    volume = volume_from_solution(spec, variables, solution.x)
    cycle = chain_boundary(volume, complex_)
    if not chain_boundary(cycle, complex_).is_zero():
        raise TriangleOptimizationServiceException(code=500, message=f"区间 {index} 的优化结果不是循环")
    if pair.birth_simplex not in cycle.coefficients:
        raise TriangleOptimizationServiceException(code=500, message=f"区间 {index} 的优化结果在 σ 上系数为 0")
    lifespan = chain_lifespan(cycle, complex_, decomps[2])
    if lifespan != (pair.birth_value, pair.death_value):
        raise TriangleOptimizationServiceException(code=500, message=f"区间 {index} 的寿命区间未保持: {lifespan}")

    optimized = original.with_chain(cycle)
    record = OptimizationRecord(
        index=index, program="triangle", weight_mode=weight_mode, integral=integral, status=solution.status.value,
        original=original, optimized=optimized, cost_before=None, cost_after=solution.cost,
        optimized_lifespan=list(lifespan), volume=volume, pivots=solution.pivots, branch_nodes=solution.branch_nodes,
        num_variables=program.num_variables, num_constraints=program.num_constraints, solve_time=elapsed,
        lp_cost=lp_cost, mip_cost=mip_cost,
    )
    logger.info("三角形区间 %d: 体积代价 %s, 循环 %d 条边", index, solution.cost, len(cycle.coefficients))
    return optimized, record


def optimize_basis_triangle(complex_: FilteredComplex, barcode: Optional[Sequence[IntervalPair]] = None,
                            decomps: Optional[Decompositions] = None, weight_mode: WeightMode = WeightMode.UNIFORM,
                            integral: bool = False, strategy: Optional[SlicingStrategy] = None,
                            solver: Optional[Solver] = None, compare_mip: bool = False,
                            max_workers: Optional[int] = None,
                            on_record: Optional[RecordCallback] = None) -> Tuple[List[CycleRepresentative], List[Optional[OptimizationRecord]]]:
    """三角形损失的持续循环最小化。

    每个有限区间独立求解体积程序，以 ∂₂v 作为代表元；无限区间保留 R=DV 给出的代表元。

    Args:
        complex_ (FilteredComplex): 过滤复形
        barcode: 条形码，默认由分解计算
        decomps: ∂₁、∂₂ 的分解，默认现算
        weight_mode (WeightMode): uniform 或 area
        integral (bool): 是否要求 v 为整数
        strategy (SlicingStrategy): 切片方式，默认取配置 default_strategy
        solver: 求解函数，默认按 integral 选择

    Returns:
        (与条形码同序的代表元, 求解记录；无限区间对应 None)

    Raises:
        TriangleOptimizationServiceException: 参数无效（400）或结果违反理论性质（500）时抛出
    """
    try:
        try:
            strategy = SlicingStrategy(strategy or homology_config["default_strategy"])
        except ValueError:
            raise TriangleOptimizationServiceException(code=400, message=f"未知的切片方式: {strategy}")
        solver = solver or (solve_mip if integral else solve_lp)
        decomps = decomps or decompose_complex(complex_)
        pairs = list(barcode) if barcode is not None else extract_barcode(decomps, complex_)
        originals = {(rep.source_pair.birth_simplex, rep.source_pair.death_simplex): rep
                     for rep in initial_cycle_basis(decomps, complex_)}
        boundary = complex_.boundary_matrix(2) if strategy != SlicingStrategy.BUILD_PART and complex_.max_dim >= 2 else None

        def solve_one(index: int) -> Tuple[CycleRepresentative, Optional[OptimizationRecord]]:
            pair = pairs[index]
            original = originals[(pair.birth_simplex, pair.death_simplex)]
            if not pair.is_finite:
                return original, None
            optimized, record = _solve_pair(pair, original, complex_, decomps, weight_mode, integral, strategy, solver,
                                            boundary, compare_mip, index)
            if on_record is not None:
                on_record(record)
            return optimized, record

        results = map_in_order(solve_one, list(range(len(pairs))), max_workers)
        return [rep for rep, _ in results], [record for _, record in results]
    except TriangleOptimizationServiceException as e:
        raise e
    except (ProgramModelException, PersistenceServiceException, LPSolverException, RationalException,
            ComplexModelException) as e:
        raise TriangleOptimizationServiceException(code=e.code, message=e.message)
    except Exception as e:
        if DEBUG_MODE:
            raise TriangleOptimizationServiceException(code=500, message=f"三角形损失优化失败: {e}")
        else:
            raise TriangleOptimizationServiceException(code=500, message="三角形损失优化失败")
