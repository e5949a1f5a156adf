"""
数据读入与随机数据生成

随机数统一由 numpy 的 PCG64 位生成器产生 53 位均匀数，再用显式变换得到各分布：
Box-Muller（正态）、逆分布函数（logistic、指数）、Marsaglia-Tsang（gamma）。
"""

import csv
import logging
import math
import os
from typing import List, Literal, Tuple

import numpy as np

from core.configs import DEBUG_MODE, generator_config
from models.reports.run_config import GeneratorSpec

logger = logging.getLogger(__name__)

InputKind = Literal["distances", "points"]


class DataServiceException(Exception):
    """数据服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _read_rows(path: str) -> List[List[float]]:
    if not os.path.isfile(path):
        raise DataServiceException(code=404, message=f"输入文件不存在: {path}")
    rows: List[List[float]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line_number, record in enumerate(csv.reader(handle), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                rows.append([float(cell) for cell in record])
            except ValueError:
                # 只有第一行允许是表头
                if line_number == 1 and not rows:
                    continue
                raise DataServiceException(code=400, message=f"{path} 第 {line_number} 行含有无法解析的数值: {record}")
    if not rows:
        raise DataServiceException(code=400, message=f"{path} 中没有数据")
    width = len(rows[0])
    for k, row in enumerate(rows):
        if len(row) != width:
            raise DataServiceException(code=400, message=f"{path} 第 {k + 1} 个数据行有 {len(row)} 列，应为 {width} 列")
    return rows


def check_distance_matrix(matrix: np.ndarray) -> np.ndarray:
    """校验对称、零对角、非负、有限，出错时给出行列位置。"""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DataServiceException(code=400, message=f"距离矩阵必须是方阵，实际形状 {matrix.shape}")
    bad = np.argwhere(~np.isfinite(matrix))
    if len(bad):
        i, j = map(int, bad[0])
        raise DataServiceException(code=400, message=f"距离矩阵在第 {i} 行第 {j} 列不是有限数")
    bad = np.argwhere(matrix < 0)
    if len(bad):
        i, j = map(int, bad[0])
        raise DataServiceException(code=400, message=f"距离矩阵在第 {i} 行第 {j} 列为负数 {matrix[i, j]}")
    bad = np.argwhere(np.diag(matrix) != 0)
    if len(bad):
        i = int(bad[0][0])
        raise DataServiceException(code=400, message=f"距离矩阵对角线第 {i} 个元素不为 0")
    bad = np.argwhere(matrix != matrix.T)
    if len(bad):
        i, j = map(int, bad[0])
        raise DataServiceException(code=400, message=f"距离矩阵不对称: ({i}, {j})={matrix[i, j]}，({j}, {i})={matrix[j, i]}")
    return matrix


def ingest(path: str, kind: InputKind) -> np.ndarray:
    """读入逗号分隔的距离矩阵或点云（可带一行表头）。

    Args:
        path (str): CSV 文件路径
        kind (str): "distances" 或 "points"

    Returns:
        np.ndarray: 校验后的距离矩阵，或每行一个点的坐标数组

    Raises:
        DataServiceException: 文件不存在（404）或格式、数值无效（400）时抛出
    """
    try:
        rows = np.asarray(_read_rows(path), dtype=float)
        if kind == "distances":
            return check_distance_matrix(rows)
        if kind == "points":
            if not np.all(np.isfinite(rows)):
                i, j = map(int, np.argwhere(~np.isfinite(rows))[0])
                raise DataServiceException(code=400, message=f"点云第 {i} 行第 {j} 列不是有限数")
            return rows
        raise DataServiceException(code=400, message=f"未知的输入类型: {kind}")
    except DataServiceException as e:
        raise e
    except Exception as e:
        if DEBUG_MODE:
            raise DataServiceException(code=500, message=f"读取输入失败: {e}")
        else:
            raise DataServiceException(code=500, message="读取输入失败")


def points_to_distances(points: np.ndarray) -> np.ndarray:
    """点云的欧氏距离矩阵。"""
    points = np.asarray(points, dtype=float)
    differences = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.sum(differences * differences, axis=-1))


def dedupe_points(points: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """去除完全相同的点，保留第一次出现的那个。

    Returns:
        (去重后的点, 保留下来的原始行号)
    """
    seen = set()
    kept: List[int] = []
    for index, row in enumerate(np.asarray(points, dtype=float)):
        key = tuple(row.tolist())
        if key in seen:
            continue
        seen.add(key)
        kept.append(index)
    if len(kept) != len(points):
        logger.info("去除了 %d 个重复点", len(points) - len(kept))
    return np.asarray(points, dtype=float)[kept], kept


class UniformSource:
    """PCG64 上的 (0,1) 开区间均匀数：取 53 位整数 k，返回 (k + 0.5) / 2^53。"""

    SCALE = float(2 ** 53)

    def __init__(self, seed: int):
        self._generator = np.random.Generator(np.random.PCG64(seed))

    def draw(self, size: int) -> np.ndarray:
        return (self._generator.integers(0, 2 ** 53, size=size, dtype=np.int64) + 0.5) / self.SCALE

    def one(self) -> float:
        return float(self.draw(1)[0])


def _normal(source: UniformSource, size: int) -> np.ndarray:
    pairs = (size + 1) // 2
    u1, u2 = source.draw(pairs), source.draw(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    values = np.concatenate([radius * np.cos(2.0 * np.pi * u2), radius * np.sin(2.0 * np.pi * u2)])
    return values[:size]


def _gamma_one(source: UniformSource, shape: float) -> float:
    if shape < 1.0:
        return _gamma_one(source, shape + 1.0) * source.one() ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = float(_normal(source, 1)[0])
        v = (1.0 + c * x) ** 3
        if v <= 0:
            continue
        u = source.one()
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return d * v


def generate(spec: GeneratorSpec) -> np.ndarray:
    """按种子确定性地生成点云（n×dim）或 Erdős-Rényi 相异度矩阵（n×n）。

    erdos-renyi 的非对角元素独立取自 (0,1) 均匀分布，不满足三角不等式。

    Raises:
        DataServiceException: 分布类型未知时抛出
    """
    source = UniformSource(spec.seed)
    if spec.kind == "erdos-renyi":
        matrix = np.zeros((spec.n, spec.n))
        upper = np.triu_indices(spec.n, k=1)
        matrix[upper] = source.draw(len(upper[0]))
        return matrix + matrix.T

    size = spec.n * spec.dim
    if spec.kind == "normal":
        values = _normal(source, size)
    elif spec.kind == "logistic":
        u = source.draw(size)
        values = np.log(u / (1.0 - u))
    elif spec.kind == "exponential":
        values = -np.log(source.draw(size))
    elif spec.kind == "gamma":
        shape, scale = generator_config["gamma_shape"], generator_config["gamma_scale"]
        values = np.asarray([_gamma_one(source, shape) for _ in range(size)]) * scale
    else:
        raise DataServiceException(code=400, message=f"未知的分布类型: {spec.kind}")
    logger.debug("生成 %s 点云: %d 个点, %d 维, 种子 %d", spec.kind, spec.n, spec.dim, spec.seed)
    return values.reshape(spec.n, spec.dim)
