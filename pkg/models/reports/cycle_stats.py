import statistics
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict


class ReportModelException(Exception):
    """报告模型异常类"""
    def __init__(self, code: int, message: str):
        self.message = message
        self.code = code


class CoefficientClass(str, Enum):
    PM1_ZERO = "pm1-zero"
    INTEGRAL = "integral"
    FRACTIONAL = "fractional"


SurveyorReason = Literal["not-planar", "not-single-cycle", "self-intersecting", "empty"]


class SurveyorArea(BaseModel):
    """鞋带公式面积；不满足条件时 area 为 None 并给出原因。"""
    model_config = ConfigDict(frozen=True)

    area: Optional[float] = None
    reason: Optional[SurveyorReason] = None

    @property
    def is_defined(self) -> bool:
        return self.area is not None


class CycleStats(BaseModel):
    """单个代表元的统计量。

    精确的 l1_uniform / l1_length 用于“长度最优是否也是均匀最优”这类相等性统计，
    loss_* 为报告用的 ℓ₀ 损失。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    program: str
    status: str
    birth: Fraction
    death: Optional[Fraction] = None
    loss_edge_unif: int
    loss_edge_len: float
    loss_tri_unif: Optional[int] = None
    loss_tri_area: Optional[float] = None
    l1_uniform: Fraction
    l1_length: Fraction
    surveyor_area: Optional[float] = None
    surveyor_reason: Optional[str] = None
    num_loops: int
    coeff_class: CoefficientClass
    original_coeff_class: CoefficientClass
    cost_before: Optional[Fraction] = None
    cost_after: Optional[Fraction] = None
    cost_ratio_vs_original: Optional[Fraction] = None
    solve_time: float = 0.0
    lp_vs_mip_cost_equal: Optional[bool] = None
    lifespan_changed: bool = False


class StatSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    min: Optional[float] = None
    median: Optional[float] = None
    mean: Optional[float] = None
    max: Optional[float] = None

    @classmethod
    def of_values(cls, values: Sequence) -> "StatSummary":
        """空序列返回全空；Fraction 序列的均值与中位数先精确计算再转为浮点数。"""
        values = [v for v in values if v is not None]
        if not values:
            return cls()
        return cls(min=float(min(values)), median=float(statistics.median(values)),
                   mean=float(statistics.mean(values)), max=float(max(values)))


class ReportSummary(BaseModel):
    """一次运行的汇总：比值分布、系数类别比例、LP=MIP 比例与环数直方图。"""
    count: int = 0
    cost_ratio: StatSummary = StatSummary()
    loss_edge_unif: StatSummary = StatSummary()
    loss_edge_len: StatSummary = StatSummary()
    loss_tri_unif: StatSummary = StatSummary()
    surveyor_area: StatSummary = StatSummary()
    num_loops: StatSummary = StatSummary()
    one_loop_fraction: Optional[float] = None
    lifespan_changed_fraction: Optional[float] = None
    lp_mip_equal_fraction: Optional[float] = None
    original_class_fractions: Dict[str, float] = {}
    optimized_class_fractions: Dict[str, float] = {}
    loop_histogram: Dict[int, int] = {}


class ComparisonSummary(BaseModel):
    """多次运行之间的一致性统计。"""
    length_also_uniform: Optional[float] = None
    uniform_also_length: Optional[float] = None
    persistent_filtered_agreement: Optional[float] = None
    lp_mip_agreement: Dict[str, Optional[float]] = {}
    runs: Dict[str, ReportSummary] = {}
    failed_runs: List[str] = []
