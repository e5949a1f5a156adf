from flask import Blueprint, request, jsonify

from core.configs import DEBUG_MODE
from models.reports.cycle_stats import ReportModelException
from models.reports.run_config import GeneratorSpec, RunConfig
from models.topology.complex import ComplexModelException, FilteredComplex
import services.homology.data_services as data_services
import services.homology.persistence_services as persistence_services
import services.homology.pipeline_services as pipeline_services

homology_blueprint = Blueprint('homology', __name__, url_prefix='/api/homology')


def _complex_from_body(data: dict) -> FilteredComplex:
    """请求体中 distances 与 points 二选一。"""
    if ("distances" in data) == ("points" in data):
        raise ReportModelException(code=400, message="distances 与 points 必须且只能提供一个")
    max_eps = data.get("max_eps")
    if "distances" in data:
        return FilteredComplex.build_vr(data["distances"], max_eps)
    points = data["points"]
    if data.get("dedupe", False):
        points, _ = data_services.dedupe_points(points)
    return FilteredComplex.from_points(points, max_eps)


@homology_blueprint.route('/barcode', methods=['POST'])
def barcode():
    """计算 1 维条形码"""
    data = request.get_json(silent=True) or {}
    try:
        complex_ = _complex_from_body(data)
        result = pipeline_services.barcode_of(complex_)
        return jsonify({"code": 200, "message": "计算条形码成功", "data": result}), 200
    except (ReportModelException, ComplexModelException, persistence_services.PersistenceServiceException) as e:
        return jsonify({"code": e.code, "message": e.message}), e.code
    except Exception as e:
        if DEBUG_MODE:
            return jsonify({"code": 500, "message": str(e)}), 500
        else:
            return jsonify({"code": 500, "message": "未知错误导致计算条形码失败"}), 500


@homology_blueprint.route('/optimize', methods=['POST'])
def optimize():
    """优化循环代表元，返回与命令行相同的报告"""
    data = request.get_json(silent=True) or {}
    try:
        complex_ = _complex_from_body(data)
        config = RunConfig.parse(
            inline_input="points" if "points" in data else "distances",
            program=data.get("program", "edge-persistent"),
            weight_mode=data.get("weights", "uniform"),
            integral=bool(data.get("integral", False)),
            slicing_strategy=data.get("strategy", "build-part"),
            max_eps=data.get("max_eps"),
            dedupe=bool(data.get("dedupe", False)),
            compare_mip=bool(data.get("compare_mip", False)),
        )
        report = pipeline_services.run(config, complex_)
        return jsonify({"code": 200, "message": "优化成功", "data": report}), 200
    except (ReportModelException, ComplexModelException, pipeline_services.PipelineServiceException) as e:
        return jsonify({"code": e.code, "message": e.message}), e.code
    except Exception as e:
        if DEBUG_MODE:
            return jsonify({"code": 500, "message": str(e)}), 500
        else:
            return jsonify({"code": 500, "message": "未知错误导致优化失败"}), 500


@homology_blueprint.route('/generate', methods=['POST'])
def generate():
    """生成随机点云或相异度矩阵"""
    data = request.get_json(silent=True) or {}
    try:
        spec = GeneratorSpec(**data)
    except ValueError as e:
        return jsonify({"code": 400, "message": f"生成参数无效: {e}"}), 400
    try:
        generated = data_services.generate(spec)
        result = pipeline_services.describe_generated(generated, spec.yields_distances)
        return jsonify({"code": 200, "message": "生成成功", "data": result}), 200
    except data_services.DataServiceException as e:
        return jsonify({"code": e.code, "message": e.message}), e.code
    except Exception as e:
        if DEBUG_MODE:
            return jsonify({"code": 500, "message": str(e)}), 500
        else:
            return jsonify({"code": 500, "message": "未知错误导致生成数据失败"}), 500
