"""
精确有理数两阶段单纯形法
使用 Bland 规则防止循环，全部运算在 Fraction 上进行，不引入任何容差
"""

import logging
from fractions import Fraction
from typing import List, Optional, Tuple

from .program import LinearProgram, LPSolverException, Solution, SolveStatus

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class SimplexTableau:
    """稠密单纯形表。

    rows[i] 是 B⁻¹A 的第 i 行，rhs[i] 是对应的基变量取值，basis[i] 是第 i 行的基变量下标。
    列号同时就是 Bland 规则使用的变量顺序。
    """

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.num_columns = len(rows[0]) if rows else 0
        self.pivots = 0

    def reduced_costs(self, costs: List[Fraction]) -> Tuple[List[Fraction], Fraction]:
        """计算 d = c - c_Bᵀ B⁻¹A 以及当前目标值。"""
        reduced = list(costs)
        value = ZERO
        for i, row in enumerate(self.rows):
            weight = costs[self.basis[i]]
            if not weight:
                continue
            value += weight * self.rhs[i]
            for j, entry in enumerate(row):
                if entry:
                    reduced[j] -= weight * entry
        return reduced, value

    def pivot(self, r: int, k: int, reduced: List[Fraction]) -> None:
        pivot_row = self.rows[r]
        scale = pivot_row[k]
        if scale != ONE:
            for j in range(self.num_columns):
                if pivot_row[j]:
                    pivot_row[j] /= scale
            self.rhs[r] /= scale
        support = [j for j in range(self.num_columns) if pivot_row[j]]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            factor = row[k]
            if factor:
                for j in support:
                    row[j] -= factor * pivot_row[j]
                self.rhs[i] -= factor * self.rhs[r]
        factor = reduced[k]
        if factor:
            for j in support:
                reduced[j] -= factor * pivot_row[j]
        self.basis[r] = k
        self.pivots += 1

    def run(self, reduced: List[Fraction], allowed: List[bool]) -> SolveStatus:
        """以 Bland 规则迭代至最优或判定无界。"""
        while True:
            entering = -1
            for j in range(self.num_columns):
                if allowed[j] and reduced[j] < 0:
                    entering = j
                    break
            if entering < 0:
                return SolveStatus.OPTIMAL
            leaving = -1
            best: Optional[Tuple[Fraction, int]] = None
            for i, row in enumerate(self.rows):
                entry = row[entering]
                if entry > 0:
                    key = (self.rhs[i] / entry, self.basis[i])
                    if best is None or key < best:
                        best = key
                        leaving = i
            if leaving < 0:
                return SolveStatus.UNBOUNDED
            self.pivot(leaving, entering, reduced)

    def remove_row(self, r: int) -> None:
        del self.rows[r]
        del self.rhs[r]
        del self.basis[r]


def _presolve(program: LinearProgram) -> Tuple[Optional[SolveStatus], List[int], List[int]]:
    """删除全零行与全零列。

    Returns:
        (提前判定的状态或 None, 保留的列, 保留的行)
    """
    matrix = program.constraint_matrix
    active_columns = []
    for j in range(matrix.num_cols):
        if matrix.is_zero_column(j):
            # 全零列只影响目标，负系数意味着可以无限下降
            if program.objective[j] < 0:
                return SolveStatus.UNBOUNDED, [], []
            continue
        active_columns.append(j)
    row_used = [False] * matrix.num_rows
    for j in active_columns:
        for row, _ in matrix.column(j):
            row_used[row] = True
    active_rows = []
    for i in range(matrix.num_rows):
        if row_used[i]:
            active_rows.append(i)
        elif program.rhs[i]:
            return SolveStatus.INFEASIBLE, [], []
    return None, active_columns, active_rows


def solve_lp(program: LinearProgram) -> Solution:
    """两阶段原始单纯形法求解标准形线性规划（忽略整数掩码）。

    Args:
        program (LinearProgram): min cᵀx, Ax = b, x ≥ 0

    Returns:
        Solution: 最优基本解，或 infeasible / unbounded 状态

    Raises:
        LPSolverException: 维度不一致（400）或求得的解未通过精确可行性复核（500）时抛出

    Note:
        - 单位列（只有一个正元素的列）直接作为初始基，其余行才引入人工变量
        - 返回的最优解满足 Ax = b 的精确等式
    """
    program.check_dimensions()
    n = program.num_variables
    status, columns, rows = _presolve(program)
    if status is not None:
        logger.debug("预处理判定状态: %s", status.value)
        return Solution(status=status)
    if not rows:
        x = [ZERO] * n
        return Solution(status=SolveStatus.OPTIMAL, x=x, cost=program.evaluate(x))

    row_position = {row: position for position, row in enumerate(rows)}
    m = len(rows)
    width = len(columns)
    dense = [[ZERO] * width for _ in range(m)]
    for position, j in enumerate(columns):
        for row, value in program.constraint_matrix.column(j):
            dense[row_position[row]][position] = value
    rhs = [program.rhs[row] for row in rows]
    for i in range(m):
        if rhs[i] < 0:
            rhs[i] = -rhs[i]
            dense[i] = [-value for value in dense[i]]

    # 寻找可直接作为初始基的单位列
    basis: List[Optional[int]] = [None] * m
    for position in range(width):
        nonzero = [(i, dense[i][position]) for i in range(m) if dense[i][position]]
        if len(nonzero) == 1:
            i, value = nonzero[0]
            if value > 0 and basis[i] is None:
                basis[i] = position
    for i, position in enumerate(basis):
        if position is not None:
            scale = dense[i][position]
            if scale != ONE:
                dense[i] = [value / scale for value in dense[i]]
                rhs[i] /= scale

    artificial_rows = [i for i in range(m) if basis[i] is None]
    total = width + len(artificial_rows)
    for i in range(m):
        dense[i].extend([ZERO] * len(artificial_rows))
    for offset, i in enumerate(artificial_rows):
        dense[i][width + offset] = ONE
        basis[i] = width + offset

    tableau = SimplexTableau(dense, rhs, basis)
    structural = [True] * width + [False] * len(artificial_rows)

    if artificial_rows:
        phase_one_costs = [ZERO] * width + [ONE] * len(artificial_rows)
        reduced, _ = tableau.reduced_costs(phase_one_costs)
        tableau.run(reduced, [True] * total)
        _, infeasibility = tableau.reduced_costs(phase_one_costs)
        if infeasibility > 0:
            logger.debug("第一阶段最优值 %s > 0，问题不可行", infeasibility)
            return Solution(status=SolveStatus.INFEASIBLE, pivots=tableau.pivots)
        # 把仍在基中的人工变量换出，换不出的行是冗余行
        r = 0
        while r < len(tableau.rows):
            if tableau.basis[r] >= width:
                row = tableau.rows[r]
                replacement = next((j for j in range(width) if row[j]), None)
                if replacement is None:
                    tableau.remove_row(r)
                    continue
                tableau.pivot(r, replacement, [ZERO] * total)
            r += 1

    costs = [program.objective[j] for j in columns] + [ZERO] * len(artificial_rows)
    reduced, _ = tableau.reduced_costs(costs)
    status = tableau.run(reduced, structural)
    if status == SolveStatus.UNBOUNDED:
        logger.debug("第二阶段判定无界，主元次数 %d", tableau.pivots)
        return Solution(status=status, pivots=tableau.pivots)

    x = [ZERO] * n
    for i, position in enumerate(tableau.basis):
        if position < width:
            x[columns[position]] = tableau.rhs[i]
    cost = program.evaluate(x)
    if not check_feasible(program, x):
        raise LPSolverException(code=500, message="单纯形返回的基本解不满足 Ax = b, x ≥ 0")
    logger.debug("单纯形求解完成: %d 个变量, %d 个约束, %d 次主元, 目标值 %s", n, m, tableau.pivots, cost)
    return Solution(status=SolveStatus.OPTIMAL, x=x, cost=cost, pivots=tableau.pivots)


def check_feasible(program: LinearProgram, x: List[Fraction]) -> bool:
    """精确检查 Ax = b 且 x ≥ 0。"""
    if len(x) != program.num_variables:
        raise LPSolverException(code=400, message="解向量长度与变量个数不一致")
    return all(v >= 0 for v in x) and not any(program.residual(x))

