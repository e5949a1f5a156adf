import bisect
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr

from core.configs import DEBUG_MODE, homology_config
from core.rational import RationalException, SparseRationalMatrix, rat_from_float
from models.topology.simplex import Simplex, make_simplex, simplex_faces

logger = logging.getLogger(__name__)

MAX_SUPPORTED_DIM = 2


class ComplexModelException(Exception):
    """过滤复形模型异常类。

    用于表示复形构造、边界矩阵与面积计算中的异常情况。"""
    def __init__(self, code: int, message: str):
        self.message = message
        self.code = code


class FilteredComplex(BaseModel):
    """带过滤值与全序的单纯复形。

    simplices[n] 与 births[n] 按单形全序排列：先按出生值，再按维数，最后按顶点字典序。
    由于每一维内部已按出生值排序，任一出生值阈值下的子复形在每一维都是前缀。

    scale 为 "squared" 时过滤键是平方欧氏距离，报告时取平方根。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_vertices: int
    max_dim: int
    simplices: Dict[int, List[Simplex]]
    births: Dict[int, List[Fraction]]
    edge_lengths: List[float]
    points: Optional[List[List[float]]] = None
    scale: Literal["raw", "squared"] = "raw"

    _index: Dict[Simplex, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        index: Dict[Simplex, int] = {}
        for dim in range(self.max_dim + 1):
            for position, simplex in enumerate(self.simplices.get(dim, [])):
                index[simplex] = position
        self._index = index

    # ---------------------------------------------------------------- 构造

    @classmethod
    def build_vr(cls, distances: Union[Sequence[Sequence[float]], np.ndarray], max_eps: Optional[float] = None,
                 max_dim: int = 2) -> "FilteredComplex":
        """由相异度矩阵构造 Vietoris-Rips 过滤。

        Args:
            distances: 对称、零对角、非负的方阵
            max_eps (Optional[float]): 过滤阈值，None 或 inf 表示不截断
            max_dim (int): 最高维数，不超过 2

        Returns:
            FilteredComplex: 边 {u,v} 出生于 D[u,v]，三角形出生于三条边的最大值，顶点出生于 0

        Raises:
            ComplexModelException: 输入不对称、为负、非有限或维数越界时抛出
        """
        try:
            matrix = np.asarray(distances, dtype=float)
        except (TypeError, ValueError) as e:
            raise ComplexModelException(code=400, message=f"相异度矩阵无法解析: {e}" if DEBUG_MODE else "相异度矩阵无法解析")
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ComplexModelException(code=400, message=f"相异度矩阵必须是方阵，实际形状 {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ComplexModelException(code=400, message="相异度矩阵含有非有限值")
        if np.any(matrix < 0):
            i, j = map(int, np.argwhere(matrix < 0)[0])
            raise ComplexModelException(code=400, message=f"相异度矩阵在 ({i}, {j}) 处为负")
        if np.any(np.diag(matrix) != 0):
            raise ComplexModelException(code=400, message="相异度矩阵对角线必须为 0")
        if not np.array_equal(matrix, matrix.T):
            i, j = map(int, np.argwhere(matrix != matrix.T)[0])
            raise ComplexModelException(code=400, message=f"相异度矩阵在 ({i}, {j}) 与 ({j}, {i}) 处不对称")
        threshold = cls._threshold(max_eps)
        size = matrix.shape[0]
        edges: Dict[Simplex, Fraction] = {}
        lengths: Dict[Simplex, float] = {}
        for u in range(size):
            for v in range(u + 1, size):
                birth = rat_from_float(matrix[u, v])
                if threshold is None or birth <= threshold:
                    edges[(u, v)] = birth
                    lengths[(u, v)] = float(matrix[u, v])
        return cls._assemble(size, edges, lengths, max_dim, points=None, scale="raw")

    @classmethod
    def from_points(cls, points: Union[Sequence[Sequence[float]], np.ndarray], max_eps: Optional[float] = None,
                    max_dim: int = 2) -> "FilteredComplex":
        """由欧氏点云构造 Vietoris-Rips 过滤，过滤键为精确的平方距离。

        Raises:
            ComplexModelException: 坐标非有限或维数不一致时抛出
        """
        coordinates = np.asarray(points, dtype=float)
        if coordinates.ndim != 2:
            raise ComplexModelException(code=400, message="点云必须是二维数组（每行一个点）")
        if not np.all(np.isfinite(coordinates)):
            raise ComplexModelException(code=400, message="点云坐标含有非有限值")
        threshold = cls._threshold(max_eps)
        if threshold is not None:
            threshold = threshold * threshold
        exact = [[Fraction(float(value)) for value in row] for row in coordinates]
        size = len(exact)
        edges: Dict[Simplex, Fraction] = {}
        lengths: Dict[Simplex, float] = {}
        for u in range(size):
            for v in range(u + 1, size):
                squared = sum(((a - b) * (a - b) for a, b in zip(exact[u], exact[v])), Fraction(0))
                if threshold is None or squared <= threshold:
                    edges[(u, v)] = squared
                    lengths[(u, v)] = math.dist(coordinates[u], coordinates[v])
        return cls._assemble(size, edges, lengths, max_dim, points=coordinates.tolist(), scale="squared")

    @classmethod
    def from_simplices(cls, entries: Iterable[Tuple[Sequence[int], object]],
                       edge_lengths: Optional[Mapping[Tuple[int, int], float]] = None) -> "FilteredComplex":
        """由显式给出的 (顶点列表, 出生值) 构造过滤复形。

        Note:
            - 每个单形的所有面都必须给出，且出生值不晚于单形本身
            - 未给出边长时以出生值作为边长
        """
        births: Dict[int, Dict[Simplex, Fraction]] = {0: {}, 1: {}, 2: {}}
        try:
            for vertices, birth in entries:
                simplex = make_simplex(vertices)
                dim = len(simplex) - 1
                if dim < 0 or dim > MAX_SUPPORTED_DIM:
                    raise ComplexModelException(code=400, message=f"不支持的单形维数: {simplex}")
                births[dim][simplex] = rat_from_float(birth) if not isinstance(birth, Fraction) else birth
        except ValueError as e:
            raise ComplexModelException(code=400, message=str(e))
        except RationalException as e:
            raise ComplexModelException(code=e.code, message=e.message)
        for dim in (1, 2):
            for simplex, birth in births[dim].items():
                for _, face in simplex_faces(simplex):
                    if face not in births[dim - 1]:
                        raise ComplexModelException(code=400, message=f"单形 {simplex} 的面 {face} 不存在")
                    if births[dim - 1][face] > birth:
                        raise ComplexModelException(code=400, message=f"单形 {simplex} 早于其面 {face} 出生，违反过滤性质")
        vertices = sorted(v for (v,) in births[0])
        if vertices != list(range(len(vertices))):
            raise ComplexModelException(code=400, message="顶点必须编号为 0..n-1")
        max_dim = max((d for d in (0, 1, 2) if births[d]), default=0)
        return cls._from_birth_maps(len(vertices), births, max_dim, edge_lengths, points=None, scale="raw")

    @staticmethod
    def _threshold(max_eps: Optional[float]) -> Optional[Fraction]:
        if max_eps is None or (isinstance(max_eps, float) and math.isinf(max_eps) and max_eps > 0):
            return None
        if max_eps < 0:
            raise ComplexModelException(code=400, message=f"max_eps 不能为负: {max_eps}")
        try:
            return rat_from_float(max_eps)
        except RationalException as e:
            raise ComplexModelException(code=e.code, message=e.message)

    @classmethod
    def _assemble(cls, size: int, edges: Dict[Simplex, Fraction], lengths: Dict[Simplex, float], max_dim: int,
                  points: Optional[List[List[float]]], scale: str) -> "FilteredComplex":
        if max_dim < 0 or max_dim > MAX_SUPPORTED_DIM:
            raise ComplexModelException(code=400, message=f"max_dim 必须在 0..{MAX_SUPPORTED_DIM} 之间")
        births: Dict[int, Dict[Simplex, Fraction]] = {0: {(v,): Fraction(0) for v in range(size)}, 1: {}, 2: {}}
        if max_dim >= 1:
            births[1] = dict(edges)
        if max_dim >= 2:
            # 团规则：三角形出生于三条边出生值的最大值
            neighbours: Dict[int, set] = {v: set() for v in range(size)}
            for u, v in edges:
                neighbours[u].add(v)
                neighbours[v].add(u)
            for (u, v), birth_uv in edges.items():
                for w in neighbours[u] & neighbours[v]:
                    if w > v:
                        births[2][(u, v, w)] = max(birth_uv, edges[(u, w)], edges[(v, w)])
        complex_ = cls._from_birth_maps(size, births, max_dim, lengths, points=points, scale=scale)
        logger.debug("构造复形: %d 个顶点, %d 条边, %d 个三角形", size, len(births[1]), len(births[2]))
        return complex_

    @classmethod
    def _from_birth_maps(cls, size: int, births: Dict[int, Dict[Simplex, Fraction]], max_dim: int,
                         lengths: Optional[Mapping[Tuple[int, int], float]], points, scale: str) -> "FilteredComplex":
        simplices: Dict[int, List[Simplex]] = {}
        ordered_births: Dict[int, List[Fraction]] = {}
        for dim in range(max_dim + 1):
            ordered = sorted(births[dim].items(), key=lambda item: (item[1], item[0]))
            simplices[dim] = [simplex for simplex, _ in ordered]
            ordered_births[dim] = [birth for _, birth in ordered]
        edge_lengths: List[float] = []
        for edge, birth in zip(simplices.get(1, []), ordered_births.get(1, [])):
            if lengths is not None and edge in lengths:
                edge_lengths.append(float(lengths[edge]))
            else:
                edge_lengths.append(math.sqrt(float(birth)) if scale == "squared" else float(birth))
        return cls(num_vertices=size, max_dim=max_dim, simplices=simplices, births=ordered_births,
                   edge_lengths=edge_lengths, points=points, scale=scale)

    # ---------------------------------------------------------------- 查询

    @property
    def is_euclidean(self) -> bool:
        return self.points is not None

    def count(self, dim: int) -> int:
        return len(self.simplices.get(dim, []))

    def simplex(self, dim: int, index: int) -> Simplex:
        return self.simplices[dim][index]

    def birth(self, dim: int, index: int) -> Fraction:
        return self.births[dim][index]

    def index_of(self, simplex: Sequence[int]) -> int:
        key = tuple(sorted(simplex))
        if key not in self._index:
            raise ComplexModelException(code=404, message=f"复形中不存在单形 {key}")
        return self._index[key]

    def prefix_length(self, dim: int, value: Optional[Fraction]) -> int:
        """出生值 ≤ value 的 dim 维单形个数（value 为 None 表示 ∞）。"""
        if value is None:
            return self.count(dim)
        return bisect.bisect_right(self.births.get(dim, []), value)

    def count_born_before(self, dim: int, value: Fraction) -> int:
        """出生值严格小于 value 的 dim 维单形个数。"""
        return bisect.bisect_left(self.births.get(dim, []), value)

    def filtration_values(self) -> List[Fraction]:
        values = set()
        for dim in range(self.max_dim + 1):
            values.update(self.births.get(dim, []))
        return sorted(values)

    def total_order(self) -> List[Tuple[int, int]]:
        """返回全体单形的全序 (维数, 维内下标)：出生值、维数、顶点字典序。"""
        keyed = []
        for dim in range(self.max_dim + 1):
            for index, simplex in enumerate(self.simplices.get(dim, [])):
                keyed.append(((self.births[dim][index], dim, simplex), (dim, index)))
        keyed.sort(key=lambda item: item[0])
        return [position for _, position in keyed]

    def display_value(self, value: Optional[Fraction]) -> Optional[float]:
        """把过滤键换算为报告用的浮点数（平方距离取平方根），∞ 返回 None。"""
        if value is None:
            return None
        if self.scale == "squared":
            return math.sqrt(float(value))
        return float(value)

    def edge_length(self, index: int) -> float:
        return self.edge_lengths[index]

    # ---------------------------------------------------------------- 边界

    def boundary_column(self, dim: int, index: int) -> Dict[int, Fraction]:
        """∂_dim 的第 index 列：删去第 i 个顶点得到的面上系数为 (-1)^i。"""
        column: Dict[int, Fraction] = {}
        for i, face in simplex_faces(self.simplices[dim][index]):
            column[self._index[face]] = Fraction(-1 if i % 2 else 1)
        return column

    def boundary_matrix(self, dim: int) -> SparseRationalMatrix:
        """组装 ∂_dim：列按 S_dim 全序，行按 S_{dim-1} 全序。

        Raises:
            ComplexModelException: dim 不在 1..max_dim 内时抛出
        """
        if dim < 1 or dim > self.max_dim:
            raise ComplexModelException(code=400, message=f"边界矩阵维数 {dim} 超出 1..{self.max_dim}")
        columns = [self.boundary_column(dim, index) for index in range(self.count(dim))]
        return SparseRationalMatrix.from_columns(self.count(dim - 1), columns) if columns else \
            SparseRationalMatrix.zeros(self.count(dim - 1), 0)

    def triangle_area(self, triangle: Union[int, Sequence[int]]) -> float:
        """用数值稳定的海伦公式计算三角形面积。

        Args:
            triangle: 三角形在 S₂ 中的下标，或其三个顶点

        Returns:
            float: 非负面积

        Raises:
            ComplexModelException: 三边违反三角不等式（超出容差）时抛出
        """
        vertices = self.simplices[2][triangle] if isinstance(triangle, int) else tuple(sorted(triangle))
        if len(vertices) != 3:
            raise ComplexModelException(code=400, message=f"{vertices} 不是三角形")
        sides = sorted((self.edge_lengths[self.index_of(edge)] for _, edge in simplex_faces(vertices)), reverse=True)
        return heron_area(*sides)


def heron_area(a: float, b: float, c: float) -> float:
    """海伦公式（Kahan 稳定形式），要求 a ≥ b ≥ c。"""
    a, b, c = sorted((a, b, c), reverse=True)
    violation = a - (b + c)
    tolerance = homology_config["triangle_inequality_tolerance"] * max(a, 1.0)
    if violation > tolerance:
        raise ComplexModelException(code=400, message=f"边长 ({a}, {b}, {c}) 不满足三角不等式，面积无定义")
    product = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if product <= 0:
        return 0.0
    return 0.25 * math.sqrt(product)
