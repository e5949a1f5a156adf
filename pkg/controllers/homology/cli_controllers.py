"""
命令行入口：barcode / optimize / generate / report / serve

异常按错误码映射为退出码：400 → 2，404 → 3，500 → 1。
"""

import argparse
import csv
import logging
import sys
from typing import List, Optional

from core.configs import DEBUG_MODE, generator_config, homology_config, server_config, setup_logging
from models.reports.cycle_stats import ReportModelException
from models.reports.run_config import GeneratorSpec, RunConfig
from models.topology.complex import ComplexModelException
import services.homology.data_services as data_services
import services.homology.persistence_services as persistence_services
import services.homology.pipeline_services as pipeline_services

logger = logging.getLogger(__name__)

EXIT_CODES = {400: 2, 404: 3, 500: 1}

HANDLED = (ReportModelException, ComplexModelException, data_services.DataServiceException,
           persistence_services.PersistenceServiceException, pipeline_services.PipelineServiceException)


def exit_code_for(code: int) -> int:
    return EXIT_CODES.get(code, 1)


def _add_input_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="输入 CSV 文件")
    kind = parser.add_mutually_exclusive_group()
    kind.add_argument("--points", dest="kind", action="store_const", const="points", help="输入为点云（每行一个点）")
    kind.add_argument("--distances", dest="kind", action="store_const", const="distances", help="输入为距离矩阵（默认）")
    parser.add_argument("--generator", choices=["normal", "gamma", "logistic", "exponential", "erdos-renyi"],
                        help="不读文件，改用随机生成器")
    parser.add_argument("--n", type=int, default=30, help="生成的点数或矩阵阶数")
    parser.add_argument("--dim", type=int, default=2, help="生成点云的维数")
    parser.add_argument("--seed", type=int, default=generator_config["default_seed"], help="64 位随机种子")
    parser.add_argument("--max-eps", type=float, default=None, help="过滤阈值")
    parser.add_argument("--dedupe", action="store_true", help="去除重复点")
    parser.add_argument("--float-distances", action="store_true", help="点云先转成浮点距离矩阵，不用精确平方距离")


def _add_program_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--program", choices=["edge-persistent", "edge-filtered", "triangle"], default="edge-persistent")
    parser.add_argument("--weights", choices=["uniform", "length", "area"], default="uniform")
    parser.add_argument("--integral", action="store_true", help="求整数解（分支定界）")
    parser.add_argument("--strategy", choices=["zero-out", "build-all", "build-part"],
                        default=homology_config["default_strategy"])
    parser.add_argument("--compare-mip", action="store_true", help="同时求解 LP 与 MIP 并记录两者是否相等")
    parser.add_argument("--no-replace", action="store_true", help="持续基优化时每个程序都针对输入基求解")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homology", description="精确有理数持续同调与最优循环代表元")
    parser.add_argument("-d", "--debug", action="store_true", help="输出 DEBUG 级别日志")
    commands = parser.add_subparsers(dest="command", required=True)

    barcode = commands.add_parser("barcode", help="计算 1 维条形码")
    _add_input_arguments(barcode)
    barcode.add_argument("--out", help="输出 JSON 路径，默认打印到标准输出")

    optimize = commands.add_parser("optimize", help="优化循环代表元并写出报告")
    _add_input_arguments(optimize)
    _add_program_arguments(optimize)
    optimize.add_argument("--out", help="输出路径，默认打印 JSON 到标准输出")
    optimize.add_argument("--format", choices=["json", "csv"], default="json")

    generate = commands.add_parser("generate", help="生成随机点云或相异度矩阵（CSV）")
    generate.add_argument("kind", choices=["normal", "gamma", "logistic", "exponential", "erdos-renyi"])
    generate.add_argument("--n", type=int, default=100)
    generate.add_argument("--dim", type=int, default=2)
    generate.add_argument("--seed", type=int, default=generator_config["default_seed"])
    generate.add_argument("--out", help="输出 CSV 路径，默认打印到标准输出")

    report = commands.add_parser("report", help="在同一输入上运行全部对比组合")
    _add_input_arguments(report)
    report.add_argument("--strategy", choices=["zero-out", "build-all", "build-part"],
                        default=homology_config["default_strategy"])
    report.add_argument("--out", help="输出路径，默认打印 JSON 到标准输出")
    report.add_argument("--format", choices=["json", "csv"], default="json",
                        help="csv 时每个对比组合一行，并在同名 .json 中写出完整汇总")

    serve = commands.add_parser("serve", help="启动 HTTP 服务")
    serve.add_argument("--host", default=server_config["host"])
    serve.add_argument("--port", type=int, default=server_config["port"])
    return parser


def _config_from_args(args: argparse.Namespace, **extra) -> RunConfig:
    values = {"max_eps": args.max_eps, "dedupe": args.dedupe, "float_distances": args.float_distances, **extra}
    if args.input is not None:
        if args.generator is not None:
            raise ReportModelException(code=400, message="--input 与 --generator 不能同时使用")
        key = "points_path" if args.kind == "points" else "distances_path"
        values[key] = args.input
    elif args.generator is not None:
        values["generator"] = {"kind": args.generator, "n": args.n, "dim": args.dim, "seed": args.seed}
    return RunConfig.parse(**values)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _command_barcode(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    complex_ = pipeline_services.load_complex(config)
    _emit(pipeline_services.render_report({"barcode": pipeline_services.barcode_of(complex_)}), args.out)
    return 0


def _command_optimize(args: argparse.Namespace) -> int:
    config = _config_from_args(
        args, program=args.program, weight_mode=args.weights, integral=args.integral,
        slicing_strategy=args.strategy, out=args.out, format=args.format, compare_mip=args.compare_mip,
        replace=not args.no_replace,
    )
    report = pipeline_services.run(config)
    if args.out is None:
        sys.stdout.write(pipeline_services.render_report(report))
    return 0


def _command_generate(args: argparse.Namespace) -> int:
    try:
        spec = GeneratorSpec(kind=args.kind, n=args.n, dim=args.dim, seed=args.seed)
    except ValueError as e:
        raise ReportModelException(code=400, message=f"生成参数无效: {e}")
    data = data_services.generate(spec)
    handle = sys.stdout if args.out is None else open(args.out, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(handle)
        for row in data.tolist():
            writer.writerow([repr(value) for value in row])
    finally:
        if handle is not sys.stdout:
            handle.close()
    return 0


def _command_report(args: argparse.Namespace) -> int:
    config = _config_from_args(args, slicing_strategy=args.strategy, out=args.out, format=args.format)
    report = pipeline_services.run_report_suite(config)
    if args.out is None:
        sys.stdout.write(pipeline_services.render_report(report))
    return 0


def _command_serve(args: argparse.Namespace) -> int:
    from main import create_app
    create_app().run(host=args.host, port=args.port, debug=False)
    return 0


COMMANDS = {
    "barcode": _command_barcode,
    "optimize": _command_optimize,
    "generate": _command_generate,
    "report": _command_report,
    "serve": _command_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行子命令，返回进程退出码。"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging("DEBUG" if args.debug else None)
    try:
        return COMMANDS[args.command](args)
    except HANDLED as e:
        sys.stderr.write(f"错误 ({e.code}): {e.message}\n")
        return exit_code_for(e.code)
    except OSError as e:
        sys.stderr.write(f"错误: 文件读写失败: {e}\n")
        return 1
    except Exception as e:
        logger.exception("未处理的异常")
        if DEBUG_MODE:
            sys.stderr.write(f"错误: {e}\n")
        else:
            sys.stderr.write("错误: 未知错误导致运行失败\n")
        return 1
