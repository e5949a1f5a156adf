import csv
import json
import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.configs import DEBUG_MODE
from core.rational import format_fraction
from models.optimization.program_specs import OptimizationRecord, WeightMode
from models.reports.cycle_stats import ComparisonSummary, CycleStats, ReportModelException
from models.reports.run_config import RunConfig
from models.topology.complex import ComplexModelException, FilteredComplex
from models.topology.persistence import CycleRepresentative, IntervalPair
from services.homology.data_services import DataServiceException, dedupe_points, generate, ingest, points_to_distances
from services.homology.edge_optimization_services import (
    EdgeOptimizationServiceException,
    optimize_basis_filtered,
    optimize_basis_persistent,
)
from services.homology.metrics_services import (
    MetricsServiceException,
    aggregate_report,
    build_cycle_stats,
    cost_agreement,
    cross_weight_optimality,
)
from services.homology.persistence_services import (
    PersistenceServiceException,
    decompose_complex,
    extract_barcode,
    initial_cycle_basis,
)
from services.homology.triangle_optimization_services import (
    TriangleOptimizationServiceException,
    optimize_basis_triangle,
)

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "index", "birth", "death", "status", "cost_before", "cost_after", "cost_ratio", "coeff_class",
    "original_coeff_class", "num_loops", "loss_edge_unif", "loss_edge_len", "loss_tri_unif", "loss_tri_area",
    "surveyor_area", "pivots", "branch_nodes", "num_variables", "num_constraints", "lp_vs_mip_cost_equal",
    "solve_time",
]

SUITE_VARIANTS: List[Tuple[str, str, WeightMode, bool]] = [
    ("edge-persistent/uniform/lp", "edge-persistent", WeightMode.UNIFORM, False),
    ("edge-persistent/uniform/mip", "edge-persistent", WeightMode.UNIFORM, True),
    ("edge-persistent/length/lp", "edge-persistent", WeightMode.LENGTH, False),
    ("edge-persistent/length/mip", "edge-persistent", WeightMode.LENGTH, True),
    ("edge-filtered/uniform/lp", "edge-filtered", WeightMode.UNIFORM, False),
    ("triangle/uniform/lp", "triangle", WeightMode.UNIFORM, False),
]

SUITE_CSV_FIELDS = [
    "run", "failed", "count", "cost_ratio_mean", "cost_ratio_median", "loss_edge_unif_mean", "num_loops_mean",
    "one_loop_fraction", "lifespan_changed_fraction",
]


class PipelineServiceException(Exception):
    """流水线服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


_LOWER_LAYER = (DataServiceException, ComplexModelException, PersistenceServiceException,
                EdgeOptimizationServiceException, TriangleOptimizationServiceException, MetricsServiceException,
                ReportModelException)


def load_complex(config: RunConfig) -> FilteredComplex:
    """按输入源构造过滤复形：距离矩阵与 Erdős-Rényi 走 build_vr，点云走 from_points。

    float_distances 为 True 时点云先转成浮点欧氏距离矩阵，再与距离矩阵输入一样走 build_vr。
    """
    if config.inline_input is not None:
        raise PipelineServiceException(code=400, message="请求体输入需要直接传入已构造的复形")
    if config.distances_path is not None:
        return FilteredComplex.build_vr(ingest(config.distances_path, "distances"), config.max_eps)
    if config.points_path is not None:
        points = ingest(config.points_path, "points")
    else:
        data = generate(config.generator)
        if config.generator.yields_distances:
            return FilteredComplex.build_vr(data, config.max_eps)
        points = data
    if config.dedupe:
        points, _ = dedupe_points(points)
    if config.float_distances:
        return FilteredComplex.build_vr(points_to_distances(points), config.max_eps)
    return FilteredComplex.from_points(points, config.max_eps)


def _fraction_or_none(value) -> Optional[str]:
    return None if value is None else format_fraction(value)


def serialize_interval(pair: IntervalPair, complex_: FilteredComplex) -> Dict:
    return {
        "birth": complex_.display_value(pair.birth_value),
        "death": complex_.display_value(pair.death_value),
        "birth_exact": format_fraction(pair.birth_value),
        "death_exact": _fraction_or_none(pair.death_value),
        "birth_edge": list(complex_.simplex(1, pair.birth_simplex)),
        "death_triangle": list(complex_.simplex(2, pair.death_simplex)) if pair.is_finite else None,
    }


def serialize_cycle(stats: CycleStats, original: CycleRepresentative, optimized: CycleRepresentative,
                    record: Optional[OptimizationRecord], complex_: FilteredComplex) -> Dict:
    """单个代表元的报告条目，链按 [顶点列表, 分子, 分母] 精确输出，不含耗时。"""
    entry = {
        "index": stats.index,
        "status": stats.status,
        "birth": complex_.display_value(optimized.birth),
        "death": complex_.display_value(optimized.death),
        "original": original.chain.as_vertex_terms(complex_),
        "optimized": optimized.chain.as_vertex_terms(complex_),
        "volume": record.volume.as_vertex_terms(complex_) if record is not None and record.volume is not None else None,
        "cost_before": _fraction_or_none(stats.cost_before),
        "cost_after": _fraction_or_none(stats.cost_after),
        "cost_ratio": _fraction_or_none(stats.cost_ratio_vs_original),
        "optimized_lifespan": None,
        "coeff_class": stats.coeff_class.value,
        "original_coeff_class": stats.original_coeff_class.value,
        "num_loops": stats.num_loops,
        "loss_edge_unif": stats.loss_edge_unif,
        "loss_edge_len": stats.loss_edge_len,
        "loss_tri_unif": stats.loss_tri_unif,
        "loss_tri_area": stats.loss_tri_area,
        "surveyor_area": stats.surveyor_area,
        "surveyor_reason": stats.surveyor_reason,
        "solver": None,
    }
    if record is not None:
        if record.optimized_lifespan is not None:
            entry["optimized_lifespan"] = [complex_.display_value(v) for v in record.optimized_lifespan]
        entry["solver"] = {
            **record.extras(),
            "lp_cost": _fraction_or_none(record.lp_cost),
            "mip_cost": _fraction_or_none(record.mip_cost),
            "lp_vs_mip_cost_equal": stats.lp_vs_mip_cost_equal,
        }
    return entry


def _csv_row(stats: CycleStats, record: Optional[OptimizationRecord], complex_: FilteredComplex) -> Dict:
    row = {
        "index": stats.index,
        "birth": complex_.display_value(stats.birth),
        "death": complex_.display_value(stats.death),
        "status": stats.status,
        "cost_before": _fraction_or_none(stats.cost_before),
        "cost_after": _fraction_or_none(stats.cost_after),
        "cost_ratio": _fraction_or_none(stats.cost_ratio_vs_original),
        "coeff_class": stats.coeff_class.value,
        "original_coeff_class": stats.original_coeff_class.value,
        "num_loops": stats.num_loops,
        "loss_edge_unif": stats.loss_edge_unif,
        "loss_edge_len": stats.loss_edge_len,
        "loss_tri_unif": stats.loss_tri_unif,
        "loss_tri_area": stats.loss_tri_area,
        "surveyor_area": stats.surveyor_area,
        "lp_vs_mip_cost_equal": stats.lp_vs_mip_cost_equal,
        "solve_time": stats.solve_time,
    }
    row.update(record.extras() if record is not None else {})
    return row


def optimize(config: RunConfig, complex_: FilteredComplex, on_record=None):
    """按 config.program 调用对应的优化服务。

    Returns:
        (条形码, 初始基, 优化后的基, 求解记录)
    """
    decomps = decompose_complex(complex_)
    barcode = extract_barcode(decomps, complex_)
    basis = initial_cycle_basis(decomps, complex_)
    if config.program == "edge-persistent":
        optimized, records = optimize_basis_persistent(basis, complex_, weight_mode=config.weight_mode,
                                                       integral=config.integral, decomps=decomps,
                                                       replace=config.replace, compare_mip=config.compare_mip,
                                                       on_record=on_record)
    elif config.program == "edge-filtered":
        optimized, records = optimize_basis_filtered(basis, complex_, weight_mode=config.weight_mode,
                                                     integral=config.integral, decomps=decomps,
                                                     compare_mip=config.compare_mip, on_record=on_record)
    else:
        optimized, records = optimize_basis_triangle(complex_, barcode, decomps, weight_mode=config.weight_mode,
                                                     integral=config.integral, strategy=config.slicing_strategy,
                                                     compare_mip=config.compare_mip, on_record=on_record)
    return barcode, basis, optimized, records


def collect_stats(complex_: FilteredComplex, basis: List[CycleRepresentative],
                  optimized: List[CycleRepresentative], records: List[Optional[OptimizationRecord]]) -> List[CycleStats]:
    return [build_cycle_stats(index, basis[index], optimized[index], complex_, records[index])
            for index in range(len(basis))]


def _write_outputs(config: RunConfig, report: Dict, csv_rows: List[Dict], fields: List[str] = CSV_FIELDS) -> None:
    if config.out is None:
        return
    directory = os.path.dirname(os.path.abspath(config.out))
    os.makedirs(directory, exist_ok=True)
    json_path = config.out if config.format == "json" else os.path.splitext(config.out)[0] + ".json"
    with open(json_path, "w", encoding="utf-8") as handle:
        handle.write(render_report(report))
    if config.format == "csv":
        with open(config.out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=fields)
            writer.writeheader()
            writer.writerows(csv_rows)


def render_report(report: Dict) -> str:
    return json.dumps(report, ensure_ascii=False, indent=2) + "\n"


def run(config: RunConfig, complex_: Optional[FilteredComplex] = None) -> Dict:
    """完整流水线：读入/生成 → Vietoris-Rips → R=DV → 条形码与初始基 → 所选优化 → 统计。

    JSON 报告不含耗时，同一配置与种子得到逐字节相同的报告；耗时只写入 CSV。
    失败时仍写出报告，status 为 "failed"，并带上已完成的循环。

    Returns:
        Dict: 报告内容

    Raises:
        PipelineServiceException: 任一环节失败时抛出，错误码沿用下层异常
    """
    report: Dict = {"status": "running", "config": config.model_dump(mode="json"), "complex": None,
                    "barcode": [], "cycles": [], "summary": None}
    finished: List[OptimizationRecord] = []
    try:
        if complex_ is None:
            complex_ = load_complex(config)
        report["complex"] = {"num_vertices": complex_.num_vertices, "num_edges": complex_.count(1),
                             "num_triangles": complex_.count(2), "scale": complex_.scale}
        barcode, basis, optimized, records = optimize(config, complex_, on_record=finished.append)
        stats = collect_stats(complex_, basis, optimized, records)
        report["barcode"] = [serialize_interval(pair, complex_) for pair in barcode]
        report["cycles"] = [serialize_cycle(stats[k], basis[k], optimized[k], records[k], complex_)
                            for k in range(len(stats))]
        report["summary"] = aggregate_report(stats).model_dump(mode="json")
        report["status"] = "ok"
        _write_outputs(config, report, [_csv_row(stats[k], records[k], complex_) for k in range(len(stats))])
        logger.info("运行完成: %d 个区间, 程序 %s", len(barcode), config.program)
        return report
    except PipelineServiceException as e:
        failure = e
    except _LOWER_LAYER as e:
        failure = PipelineServiceException(code=e.code, message=e.message)
    except OSError as e:
        failure = PipelineServiceException(code=500, message=f"写出报告失败: {e}" if DEBUG_MODE else "写出报告失败")
    except Exception as e:
        failure = PipelineServiceException(code=500, message=f"运行失败: {e}" if DEBUG_MODE else "运行失败")

    report["status"] = "failed"
    report["error"] = {"code": failure.code, "message": failure.message}
    try:
        if complex_ is not None:
            finished.sort(key=lambda record: record.index)
            report["cycles"] = [
                serialize_cycle(build_cycle_stats(r.index, r.original, r.optimized, complex_, r), r.original,
                                r.optimized, r, complex_)
                for r in finished
            ]
        _write_outputs(config, report, [])
    except (OSError, MetricsServiceException):
        logger.exception("写出失败报告时出错")
    logger.error("运行失败: %s", failure.message)
    raise failure


def run_report_suite(config: RunConfig) -> Dict:
    """在同一输入上运行对比组合（持续基 uniform/length 的 LP 与 MIP、过滤基 uniform、三角形 uniform），
    汇总每组统计与组间一致性。"""
    try:
        complex_ = load_complex(config)
    except _LOWER_LAYER as e:
        raise PipelineServiceException(code=e.code, message=e.message)
    runs: Dict[str, List[CycleStats]] = {}
    summary = ComparisonSummary()
    for name, program, weight_mode, integral in SUITE_VARIANTS:
        variant = config.model_copy(update={"program": program, "weight_mode": weight_mode, "integral": integral,
                                            "compare_mip": False})
        try:
            _, basis, optimized, records = optimize(variant, complex_)
            runs[name] = collect_stats(complex_, basis, optimized, records)
        except _LOWER_LAYER as e:
            logger.warning("对比组合 %s 失败: %s", name, e.message)
            summary.failed_runs.append(name)
    summary.runs = {name: aggregate_report(stats) for name, stats in runs.items()}
    uniform, length = runs.get("edge-persistent/uniform/lp"), runs.get("edge-persistent/length/lp")
    if uniform is not None and length is not None:
        summary.length_also_uniform, summary.uniform_also_length = cross_weight_optimality(uniform, length)
    filtered = runs.get("edge-filtered/uniform/lp")
    if uniform is not None and filtered is not None:
        summary.persistent_filtered_agreement = cost_agreement(uniform, filtered)
    for prefix in ("edge-persistent/uniform", "edge-persistent/length"):
        lp, mip = runs.get(f"{prefix}/lp"), runs.get(f"{prefix}/mip")
        if lp is not None and mip is not None:
            summary.lp_mip_agreement[prefix] = cost_agreement(lp, mip)
    report = {"status": "ok", "config": config.model_dump(mode="json"), "summary": summary.model_dump(mode="json")}
    try:
        _write_outputs(config, report, _suite_rows(summary), fields=SUITE_CSV_FIELDS)
    except OSError as e:
        raise PipelineServiceException(code=500, message=f"写出报告失败: {e}" if DEBUG_MODE else "写出报告失败")
    return report


def _suite_rows(summary: ComparisonSummary) -> List[Dict]:
    """每个对比组合一行；失败的组合只填 run 与 failed。"""
    rows = []
    for name, _, _, _ in SUITE_VARIANTS:
        stats = summary.runs.get(name)
        if stats is None:
            rows.append({"run": name, "failed": name in summary.failed_runs})
            continue
        rows.append({
            "run": name,
            "failed": False,
            "count": stats.count,
            "cost_ratio_mean": stats.cost_ratio.mean,
            "cost_ratio_median": stats.cost_ratio.median,
            "loss_edge_unif_mean": stats.loss_edge_unif.mean,
            "num_loops_mean": stats.num_loops.mean,
            "one_loop_fraction": stats.one_loop_fraction,
            "lifespan_changed_fraction": stats.lifespan_changed_fraction,
        })
    return rows


def barcode_of(complex_: FilteredComplex) -> List[Dict]:
    decomps = decompose_complex(complex_)
    return [serialize_interval(pair, complex_) for pair in extract_barcode(decomps, complex_)]


def describe_generated(data: np.ndarray, distances: bool) -> Dict:
    key = "distances" if distances else "points"
    return {key: data.tolist()}
