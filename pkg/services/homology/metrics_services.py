import logging
from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from core.configs import DEBUG_MODE
from core.rational import RationalException, SparseRationalMatrix, rat_from_float, smat_rank
from models.optimization.program_specs import OptimizationRecord
from models.reports.cycle_stats import CoefficientClass, CycleStats, ReportSummary, StatSummary, SurveyorArea
from models.topology.chain import Chain
from models.topology.complex import ComplexModelException, FilteredComplex
from models.topology.persistence import CycleRepresentative

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, Fraction]

LOSS_DIMENSIONS = {"edge-unif": 1, "edge-len": 1, "tri-unif": 2, "tri-area": 2}


class MetricsServiceException(Exception):
    """统计指标服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def loss(chain: Chain, mode: str, complex_: FilteredComplex):
    """支撑上的加权 ℓ₀ 损失。

    edge-unif / tri-unif 返回支撑大小（int），edge-len / tri-area 返回边长或面积之和（float，
    先按精确有理数求和）。

    Raises:
        MetricsServiceException: 模式未知、链维数不符或缺少有效面积时抛出
    """
    if mode not in LOSS_DIMENSIONS:
        raise MetricsServiceException(code=400, message=f"未知的损失模式: {mode}")
    if chain.dimension != LOSS_DIMENSIONS[mode]:
        raise MetricsServiceException(code=400, message=f"损失 {mode} 需要 {LOSS_DIMENSIONS[mode]} 维链，实际为 {chain.dimension} 维")
    if mode in ("edge-unif", "tri-unif"):
        return len(chain.coefficients)
    try:
        if mode == "edge-len":
            total = sum((rat_from_float(complex_.edge_length(e)) for e in chain.coefficients), Fraction(0))
        else:
            if not complex_.is_euclidean:
                raise MetricsServiceException(code=400, message="tri-area 损失只适用于欧氏点云构造的复形")
            total = sum((rat_from_float(complex_.triangle_area(t)) for t in chain.coefficients), Fraction(0))
    except (RationalException, ComplexModelException) as e:
        raise MetricsServiceException(code=e.code, message=e.message)
    return float(total)


def loop_count(chain: Chain, complex_: FilteredComplex) -> int:
    """∂₁ 限制到支撑列上的零空间维数。"""
    if chain.is_zero():
        return 0
    columns = [complex_.boundary_column(1, e) for e in chain.support()]
    restricted = SparseRationalMatrix.from_columns(complex_.count(0), columns)
    return len(columns) - smat_rank(restricted)


def _orientation(a: Point, b: Point, c: Point) -> int:
    area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    return (area2 > 0) - (area2 < 0)


def _on_segment(p: Point, q: Point, r: Point) -> bool:
    # q 与 p、r 共线时是否落在闭线段 pr 上
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """闭线段 p1p2 与 q1q2 是否相交，精确有理数方向判定。"""
    o1, o2 = _orientation(p1, p2, q1), _orientation(p1, p2, q2)
    o3, o4 = _orientation(q1, q2, p1), _orientation(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _on_segment(p1, q1, p2):
        return True
    if o2 == 0 and _on_segment(p1, q2, p2):
        return True
    if o3 == 0 and _on_segment(q1, p1, q2):
        return True
    if o4 == 0 and _on_segment(q1, p2, q2):
        return True
    return False


def _adjacent_overlap(shared: Point, a: Point, b: Point) -> bool:
    """共享端点的两条线段除该端点外是否还有公共点（共线且同向重叠）。"""
    if _orientation(shared, a, b) != 0:
        return False
    return (a[0] - shared[0]) * (b[0] - shared[0]) + (a[1] - shared[1]) * (b[1] - shared[1]) > 0


def surveyor_area(chain: Chain, complex_: FilteredComplex,
                  points: Optional[Sequence[Sequence[float]]] = None) -> SurveyorArea:
    """鞋带公式面积 ½|Σ pⁱq⁽ⁱ⁺¹⁾ - p⁽ⁱ⁺¹⁾qⁱ|。

    仅当顶点在 ℝ² 中、支撑恰为一个图论意义上的环、且任意两条不同的闭线段互不相交
    （相邻线段只在公共端点相交）时有定义；否则返回带原因的空值。
    """
    if chain.is_zero():
        return SurveyorArea(reason="empty")
    points = points if points is not None else complex_.points
    if points is None or any(len(p) != 2 for p in points):
        return SurveyorArea(reason="not-planar")

    graph = nx.Graph()
    graph.add_edges_from(complex_.simplex(1, e) for e in chain.support())
    if not nx.is_connected(graph) or any(degree != 2 for _, degree in graph.degree()):
        return SurveyorArea(reason="not-single-cycle")

    exact = {v: (rat_from_float(points[v][0]), rat_from_float(points[v][1])) for v in graph.nodes}
    segments = list(graph.edges())
    for i, (u1, v1) in enumerate(segments):
        for u2, v2 in segments[i + 1:]:
            shared = {u1, v1} & {u2, v2}
            if shared:
                (s,) = shared
                a = v1 if u1 == s else u1
                b = v2 if u2 == s else u2
                if _adjacent_overlap(exact[s], exact[a], exact[b]):
                    return SurveyorArea(reason="self-intersecting")
            elif segments_intersect(exact[u1], exact[v1], exact[u2], exact[v2]):
                return SurveyorArea(reason="self-intersecting")

    order = [u for u, _ in nx.find_cycle(graph)]
    twice = Fraction(0)
    for k, u in enumerate(order):
        v = order[(k + 1) % len(order)]
        twice += exact[u][0] * exact[v][1] - exact[v][0] * exact[u][1]
    return SurveyorArea(area=float(abs(twice) / 2))


def classify_coefficients(chain: Chain) -> CoefficientClass:
    values = chain.coefficients.values()
    if all(abs(v) <= 1 and v.denominator == 1 for v in values):
        return CoefficientClass.PM1_ZERO
    if all(v.denominator == 1 for v in values):
        return CoefficientClass.INTEGRAL
    return CoefficientClass.FRACTIONAL


def build_cycle_stats(index: int, original: CycleRepresentative, optimized: CycleRepresentative,
                      complex_: FilteredComplex, record: Optional[OptimizationRecord] = None,
                      program: str = "initial") -> CycleStats:
    """由原代表元、优化后代表元与求解记录汇总一条 CycleStats。"""
    try:
        chain = optimized.chain
        lengths = {e: rat_from_float(complex_.edge_length(e)) for e in chain.coefficients}
        area = surveyor_area(chain, complex_)
        volume = record.volume if record is not None else None
        tri_area = None
        if volume is not None and complex_.is_euclidean:
            tri_area = loss(volume, "tri-area", complex_)
        lp_equal = None
        if record is not None and (record.lp_cost is not None or record.mip_cost is not None):
            lp_equal = record.lp_cost == record.mip_cost
        return CycleStats(
            index=index,
            program=record.program if record is not None else program,
            status=record.status if record is not None else "initial",
            birth=optimized.birth,
            death=optimized.death,
            loss_edge_unif=loss(chain, "edge-unif", complex_),
            loss_edge_len=loss(chain, "edge-len", complex_),
            loss_tri_unif=loss(volume, "tri-unif", complex_) if volume is not None else None,
            loss_tri_area=tri_area,
            l1_uniform=chain.l1_norm(),
            l1_length=chain.l1_norm(lengths),
            surveyor_area=area.area,
            surveyor_reason=area.reason,
            num_loops=loop_count(chain, complex_),
            coeff_class=classify_coefficients(chain),
            original_coeff_class=classify_coefficients(original.chain),
            cost_before=record.cost_before if record is not None else None,
            cost_after=record.cost_after if record is not None else None,
            cost_ratio_vs_original=record.cost_ratio if record is not None else None,
            solve_time=record.solve_time if record is not None else 0.0,
            lp_vs_mip_cost_equal=lp_equal,
            lifespan_changed=record.lifespan_changed if record is not None else False,
        )
    except MetricsServiceException as e:
        raise e
    except (RationalException, ComplexModelException) as e:
        raise MetricsServiceException(code=e.code, message=e.message)
    except Exception as e:
        if DEBUG_MODE:
            raise MetricsServiceException(code=500, message=f"统计代表元失败: {e}")
        else:
            raise MetricsServiceException(code=500, message="统计代表元失败")


def _fraction_of(flags: Sequence[bool]) -> Optional[float]:
    if not flags:
        return None
    return sum(1 for flag in flags if flag) / len(flags)


def _class_fractions(classes: Sequence[CoefficientClass]) -> Dict[str, float]:
    if not classes:
        return {}
    counts = Counter(classes)
    return {c.value: counts.get(c, 0) / len(classes) for c in CoefficientClass}


def aggregate_report(stats: Sequence[CycleStats]) -> ReportSummary:
    """确定性的汇总：各统计量的最小/中位/均值/最大，类别比例与一致性比例。"""
    if not stats:
        return ReportSummary()
    comparisons = [s.lp_vs_mip_cost_equal for s in stats if s.lp_vs_mip_cost_equal is not None]
    histogram = Counter(s.num_loops for s in stats)
    return ReportSummary(
        count=len(stats),
        cost_ratio=StatSummary.of_values([s.cost_ratio_vs_original for s in stats]),
        loss_edge_unif=StatSummary.of_values([s.loss_edge_unif for s in stats]),
        loss_edge_len=StatSummary.of_values([s.loss_edge_len for s in stats]),
        loss_tri_unif=StatSummary.of_values([s.loss_tri_unif for s in stats]),
        surveyor_area=StatSummary.of_values([s.surveyor_area for s in stats]),
        num_loops=StatSummary.of_values([s.num_loops for s in stats]),
        one_loop_fraction=_fraction_of([s.num_loops == 1 for s in stats]),
        lifespan_changed_fraction=_fraction_of([s.lifespan_changed for s in stats]),
        lp_mip_equal_fraction=_fraction_of(comparisons),
        original_class_fractions=_class_fractions([s.original_coeff_class for s in stats]),
        optimized_class_fractions=_class_fractions([s.coeff_class for s in stats]),
        loop_histogram=dict(sorted(histogram.items())),
    )


def cross_weight_optimality(uniform: Sequence[CycleStats], length: Sequence[CycleStats]) -> Tuple[Optional[float], Optional[float]]:
    """按区间对齐两组结果，返回 (长度最优也是均匀最优的比例, 均匀最优也是长度最优的比例)，精确比较。"""
    pairs = [(u, l) for u, l in zip(uniform, length) if u.cost_after is not None and l.cost_after is not None]
    length_also_uniform = _fraction_of([l.l1_uniform == u.cost_after for u, l in pairs])
    uniform_also_length = _fraction_of([u.l1_length == l.cost_after for u, l in pairs])
    return length_also_uniform, uniform_also_length


def cost_agreement(first: Sequence[CycleStats], second: Sequence[CycleStats]) -> Optional[float]:
    """两组结果按区间对齐后最优代价相等的比例。"""
    return _fraction_of([a.cost_after == b.cost_after for a, b in zip(first, second)
                         if a.cost_after is not None and b.cost_after is not None])
