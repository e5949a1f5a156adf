from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from core.rational import SparseRationalMatrix
from models.topology.chain import Chain
from models.topology.complex import FilteredComplex
from models.topology.persistence import CycleRepresentative, IntervalPair, PersistenceModelException


class ProgramModelException(Exception):
    """优化程序模型异常类"""
    def __init__(self, code: int, message: str):
        self.message = message
        self.code = code


class WeightMode(str, Enum):
    UNIFORM = "uniform"
    LENGTH = "length"
    AREA = "area"


class SlicingStrategy(str, Enum):
    ZERO_OUT = "zero-out"
    BUILD_ALL = "build-all"
    BUILD_PART = "build-part"


class EdgeProgramSpec(BaseModel):
    """边损失程序的下标集合。

    admissible_cycles 为可参与组合的其他循环，admissible_triangles 为可用三角形（全部，或只取约化非零列），admissible_edges 为可用边。
    cycle_rule 为 "persistent" 时按出生值比较，可用循环要求出生与死亡都不晚于目标；为 "filtered" 时按单形全序比较，
    可用循环与三角形都必须排在目标出生边之前。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    target_index: int
    basis: List[CycleRepresentative]
    weight_mode: WeightMode = WeightMode.UNIFORM
    integral: bool = False
    admissible_cycles: List[int]
    admissible_triangles: List[int]
    admissible_edges: List[int]
    use_column_basis: bool = True
    cycle_rule: Literal["persistent", "filtered"] = "persistent"

    @model_validator(mode="after")
    def _check(self) -> "EdgeProgramSpec":
        if not 0 <= self.target_index < len(self.basis):
            raise ValueError(f"目标下标 {self.target_index} 超出基的范围 [0, {len(self.basis)})")
        if self.weight_mode == WeightMode.AREA:
            raise ValueError("边损失程序只支持 uniform 或 length 权重")
        return self

    @property
    def target(self) -> CycleRepresentative:
        return self.basis[self.target_index]

    @classmethod
    def for_target(cls, basis: Sequence[CycleRepresentative], target_index: int, complex_: FilteredComplex,
                   column_basis: Optional[Sequence[int]] = None, weight_mode: WeightMode = WeightMode.UNIFORM,
                   integral: bool = False, use_column_basis: bool = True,
                   cycle_rule: str = "persistent") -> "EdgeProgramSpec":
        """按当前基计算可用循环、可用三角形与可用边。

        Args:
            basis: 当前（可能已部分优化的）循环基
            target_index (int): 待优化元素 j
            complex_ (FilteredComplex): 过滤复形
            column_basis: R₂ 非零列下标；use_column_basis 为 True 时只保留这些列对应的三角形

        Raises:
            ProgramModelException: 下标越界或权重模式无效时抛出
        """
        if not 0 <= target_index < len(basis):
            raise ProgramModelException(code=400, message=f"目标下标 {target_index} 超出基的范围")
        target = basis[target_index]
        try:
            if cycle_rule == "persistent":
                cycles = [i for i, z in enumerate(basis)
                          if i != target_index and z.birth <= target.birth and z.dies_no_later_than(target)]
                triangle_count = complex_.prefix_length(2, target.birth) if complex_.max_dim >= 2 else 0
                edges = list(range(complex_.prefix_length(1, target.birth)))
            else:
                # 过滤基按单形全序比较：只取出生边排在目标出生边之前的循环和三角形
                birth_edge = target.birth_simplex
                cycles = [i for i, z in enumerate(basis) if i != target_index and z.birth_simplex < birth_edge]
                triangle_count = complex_.count_born_before(2, target.birth) if complex_.max_dim >= 2 else 0
                edges = list(range(birth_edge + 1))
        except PersistenceModelException as e:
            raise ProgramModelException(code=e.code, message=e.message)
        if use_column_basis and column_basis is not None:
            triangles = [t for t in column_basis if t < triangle_count]
        else:
            triangles = list(range(triangle_count))
        try:
            return cls(target_index=target_index, basis=list(basis), weight_mode=weight_mode, integral=integral,
                       admissible_cycles=cycles, admissible_triangles=triangles, admissible_edges=edges,
                       use_column_basis=use_column_basis, cycle_rule=cycle_rule)
        except ValidationError as e:
            raise ProgramModelException(code=400, message=f"边损失程序参数无效: {e.errors()[0]['msg']}")


class VolumeProgramSpec(BaseModel):
    """三角形损失程序：f_edges 为 σ 之后且出生不晚于 τ 的边，f_triangles 为出生不早于 σ、在 τ 之前的三角形再加上 τ。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pair: IntervalPair
    f_edges: List[int]
    f_triangles: List[int]
    weight_mode: WeightMode = WeightMode.UNIFORM
    integral: bool = False
    slicing_strategy: SlicingStrategy = SlicingStrategy.BUILD_PART

    @model_validator(mode="after")
    def _check(self) -> "VolumeProgramSpec":
        if not self.pair.is_finite or self.pair.is_degenerate:
            raise ValueError("三角形损失程序只适用于出生值严格小于死亡值的有限区间")
        if self.pair.death_simplex not in self.f_triangles:
            raise ValueError("f_triangles 必须包含死亡三角形 τ")
        if self.pair.birth_simplex in self.f_edges:
            raise ValueError("f_edges 不能包含出生边 σ")
        if self.weight_mode == WeightMode.LENGTH:
            raise ValueError("三角形损失程序只支持 uniform 或 area 权重")
        return self

    @property
    def death_triangle(self) -> int:
        return self.pair.death_simplex


class BoundarySlice(BaseModel):
    """切片后的约束矩阵 ∂₂[f_edges, f_triangles] 及其行列对应的边、三角形下标。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: SparseRationalMatrix
    row_labels: List[int]
    column_labels: List[int]
    strategy: SlicingStrategy


class OptimizationRecord(BaseModel):
    """单个循环的一次求解记录。"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    program: Literal["edge-persistent", "edge-filtered", "triangle"]
    weight_mode: WeightMode
    integral: bool
    status: str
    original: CycleRepresentative
    optimized: CycleRepresentative
    cost_before: Optional[Fraction] = None
    cost_after: Fraction = Fraction(0)
    optimized_lifespan: Optional[List[Optional[Fraction]]] = None
    volume: Optional[Chain] = None
    pivots: int = 0
    branch_nodes: int = 0
    num_variables: int = 0
    num_constraints: int = 0
    solve_time: float = 0.0
    lp_cost: Optional[Fraction] = None
    mip_cost: Optional[Fraction] = None

    @property
    def cost_ratio(self) -> Optional[Fraction]:
        # 三角形损失没有原始代表元的对应代价
        if self.cost_before is None:
            return None
        if not self.cost_before:
            return Fraction(1)
        return self.cost_after / self.cost_before

    @property
    def lifespan_changed(self) -> bool:
        if self.optimized_lifespan is None:
            return False
        return tuple(self.optimized_lifespan) != (self.original.birth, self.original.death)

    def extras(self) -> Dict[str, object]:
        return {"pivots": self.pivots, "branch_nodes": self.branch_nodes,
                "num_variables": self.num_variables, "num_constraints": self.num_constraints}
