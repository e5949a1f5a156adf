"""
标准形线性规划：min cᵀx  s.t.  Ax = b, x ≥ 0（可选整数约束）
"""

from enum import Enum
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.rational import SparseRationalMatrix


class LPSolverException(Exception):
    """线性规划求解异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _as_fractions(values) -> List[Fraction]:
    return [value if isinstance(value, Fraction) else Fraction(value) for value in values]


class LinearProgram(BaseModel):
    """等式约束的标准形线性规划。

    Attributes:
        objective: 目标系数 c
        constraint_matrix: 约束矩阵 A
        rhs: 右端项 b
        integrality_mask: 每个变量是否要求取整数，缺省为全 False
        objective_offset: 目标函数中的常数项（被代换掉的固定变量贡献）
        variable_names: 导出 LP 文本时使用的变量名
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    objective: List[Fraction]
    constraint_matrix: SparseRationalMatrix
    rhs: List[Fraction]
    integrality_mask: List[bool] = Field(default_factory=list)
    objective_offset: Fraction = Fraction(0)
    variable_names: Optional[List[str]] = None

    @field_validator("objective", "rhs", mode="before")
    @classmethod
    def _exact(cls, values):
        return _as_fractions(values)

    @field_validator("objective_offset", mode="before")
    @classmethod
    def _exact_offset(cls, value):
        return value if isinstance(value, Fraction) else Fraction(value)

    @model_validator(mode="before")
    @classmethod
    def _default_mask(cls, data):
        if isinstance(data, dict) and not data.get("integrality_mask"):
            data = {**data, "integrality_mask": [False] * len(data.get("objective") or [])}
        return data

    def model_post_init(self, __context) -> None:
        self.check_dimensions()

    @property
    def num_variables(self) -> int:
        return len(self.objective)

    @property
    def num_constraints(self) -> int:
        return len(self.rhs)

    def check_dimensions(self) -> None:
        """检查维度一致性。

        Raises:
            LPSolverException: |c| ≠ A 的列数、|b| ≠ A 的行数或整数掩码长度不符时抛出
        """
        if len(self.objective) != self.constraint_matrix.num_cols:
            raise LPSolverException(code=400, message=f"目标向量长度 {len(self.objective)} 与约束矩阵列数 {self.constraint_matrix.num_cols} 不一致")
        if len(self.rhs) != self.constraint_matrix.num_rows:
            raise LPSolverException(code=400, message=f"右端项长度 {len(self.rhs)} 与约束矩阵行数 {self.constraint_matrix.num_rows} 不一致")
        if len(self.integrality_mask) != len(self.objective):
            raise LPSolverException(code=400, message="整数掩码长度与变量个数不一致")
        if self.variable_names is not None and len(self.variable_names) != len(self.objective):
            raise LPSolverException(code=400, message="变量名个数与变量个数不一致")

    def has_nonnegative_objective(self) -> bool:
        return all(c >= 0 for c in self.objective)

    def residual(self, x: List[Fraction]) -> List[Fraction]:
        """返回 Ax - b，用于精确可行性检查。"""
        product = self.constraint_matrix.multiply_chain({j: v for j, v in enumerate(x) if v})
        return [product.get(i, Fraction(0)) - self.rhs[i] for i in range(self.num_constraints)]

    def evaluate(self, x: List[Fraction]) -> Fraction:
        return self.objective_offset + sum((c * v for c, v in zip(self.objective, x) if v), Fraction(0))


class Solution(BaseModel):
    """求解结果：status 非 optimal 时 x 为空、cost 为 None。"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: SolveStatus
    x: List[Fraction] = Field(default_factory=list)
    cost: Optional[Fraction] = None
    pivots: int = 0
    branch_nodes: int = 0

    @field_validator("x", mode="before")
    @classmethod
    def _exact(cls, values):
        return _as_fractions(values)

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL
