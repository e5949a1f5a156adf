"""
基于精确单纯形法的分支定界混合整数规划
"""

import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from core.configs import homology_config
from core.rational import SparseRationalMatrix

from .program import LinearProgram, LPSolverException, Solution, SolveStatus
from .simplex import solve_lp

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

Bounds = Tuple[Dict[int, int], Dict[int, int]]


def _with_bounds(program: LinearProgram, lower: Dict[int, int], upper: Dict[int, int]) -> LinearProgram:
    """为节点的变量上下界追加等式行与松弛变量，仍保持标准形。"""
    matrix = program.constraint_matrix
    base_rows = matrix.num_rows
    columns = [matrix.column_dict(j) for j in range(matrix.num_cols)]
    rhs = list(program.rhs)
    objective = list(program.objective)
    mask = list(program.integrality_mask)
    row = base_rows
    for variable, value in sorted(upper.items()):
        # x_j + s = u
        columns[variable][row] = Fraction(1)
        columns.append({row: Fraction(1)})
        rhs.append(Fraction(value))
        row += 1
    for variable, value in sorted(lower.items()):
        # x_j - s = l
        columns[variable][row] = Fraction(1)
        columns.append({row: Fraction(-1)})
        rhs.append(Fraction(value))
        row += 1
    extra = len(columns) - matrix.num_cols
    objective.extend([Fraction(0)] * extra)
    mask.extend([False] * extra)
    return LinearProgram(
        objective=objective,
        constraint_matrix=SparseRationalMatrix.from_columns(row, columns),
        rhs=rhs,
        integrality_mask=mask,
        objective_offset=program.objective_offset,
    )


def _branching_variable(program: LinearProgram, x: List[Fraction]) -> Optional[int]:
    """选择小数部分最接近 1/2 的整数变量，距离相同取下标最小者。"""
    best: Optional[Tuple[Fraction, int]] = None
    for j, integral in enumerate(program.integrality_mask):
        if not integral or x[j].denominator == 1:
            continue
        fractional = x[j] - math.floor(x[j])
        key = (abs(fractional - HALF), j)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def _integer_infeasible_row(program: LinearProgram) -> Optional[int]:
    """返回一个无整数解的行：该行变量全为整数变量、系数全为整数，且右端项不是系数 gcd 的倍数。"""
    divisors = [0] * program.num_constraints
    mixed = [False] * program.num_constraints
    matrix = program.constraint_matrix
    for j in range(matrix.num_cols):
        for i, value in matrix.column(j):
            if not program.integrality_mask[j] or value.denominator != 1:
                mixed[i] = True
            else:
                divisors[i] = math.gcd(divisors[i], value.numerator)
    for i, rhs in enumerate(program.rhs):
        if mixed[i] or not divisors[i]:
            continue
        if (rhs / divisors[i]).denominator != 1:
            return i
    return None


def solve_mip(program: LinearProgram, node_limit: Optional[int] = None) -> Solution:
    """分支定界求解带整数掩码的线性规划。

    先解线性松弛；若被标记的变量全为整数即返回，否则在小数部分最接近 1/2 的变量上分支，
    深度优先搜索，并以精确的有理数目标值剪枝。

    Args:
        program (LinearProgram): 带 integrality_mask 的程序
        node_limit (Optional[int]): 最多求解的节点数，默认取配置 mip_node_limit

    Returns:
        Solution: 精确的整数最优解（branch_nodes 为求解过的节点数），或 infeasible / unbounded

    Raises:
        LPSolverException: 维度不一致或超出节点上限时抛出
    """
    limit = node_limit if node_limit is not None else homology_config["mip_node_limit"]
    row = _integer_infeasible_row(program)
    if row is not None:
        logger.debug("第 %d 行只含整数系数的整数变量，右端项不是系数最大公约数的倍数", row)
        return Solution(status=SolveStatus.INFEASIBLE)
    root = solve_lp(program)
    nodes = 1
    pivots = root.pivots
    if not root.is_optimal:
        root.branch_nodes = nodes
        return root
    if _branching_variable(program, root.x) is None:
        root.branch_nodes = nodes
        return root

    incumbent: Optional[Solution] = None
    stack: List[Tuple[Bounds, Solution]] = [(({}, {}), root)]
    logger.debug("分支定界开始: 根松弛目标值 %s, 整数变量 %d 个, 节点上限 %d",
                 root.cost, sum(program.integrality_mask), limit)
    while stack:
        (lower, upper), relaxed = stack.pop()
        if incumbent is not None and relaxed.cost >= incumbent.cost:
            continue
        j = _branching_variable(program, relaxed.x)
        if j is None:
            incumbent = Solution(status=SolveStatus.OPTIMAL, x=relaxed.x[:program.num_variables], cost=relaxed.cost)
            logger.debug("分支定界找到整数解，目标值 %s", relaxed.cost)
            continue
        logger.debug("已求解 %d 个节点, 在变量 %d = %s 上分支, 下界 %s", nodes, j, relaxed.x[j], relaxed.cost)
        floor_value = math.floor(relaxed.x[j])
        children = []
        # 先压入上分支，使下分支先被探索
        for child_lower, child_upper in (
            ({**lower, j: floor_value + 1}, upper),
            (lower, {**upper, j: floor_value}),
        ):
            if child_lower.get(j, 0) > child_upper.get(j, math.inf):
                continue
            if nodes >= limit:
                raise LPSolverException(code=500, message=f"分支定界节点数超过上限 {limit}")
            solution = solve_lp(_with_bounds(program, child_lower, child_upper))
            nodes += 1
            pivots += solution.pivots
            if solution.status == SolveStatus.OPTIMAL:
                children.append(((child_lower, child_upper), solution))
        stack.extend(children)

    if incumbent is None:
        logger.debug("分支定界完成，无整数可行解，节点数 %d", nodes)
        return Solution(status=SolveStatus.INFEASIBLE, pivots=pivots, branch_nodes=nodes)
    incumbent.pivots = pivots
    incumbent.branch_nodes = nodes
    return incumbent
