"""
ℚ 上的列主序稀疏矩阵
用于承载边界矩阵 ∂ₙ、约化矩阵 R、V 以及线性规划的约束矩阵
"""

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact import RationalException, as_fraction

Column = Tuple[Tuple[int, Fraction], ...]


def lowest_row(column: Mapping[int, Fraction]) -> Optional[int]:
    """返回列中最大的非零行号（low 函数），零列返回 None。"""
    if not column:
        return None
    return max(column)


def axpy_column(target: Dict[int, Fraction], factor: Fraction, source: Mapping[int, Fraction]) -> None:
    """原地执行 target += factor * source，并删除抵消为零的元素。"""
    if not factor:
        return
    for row, value in source.items():
        updated = target.get(row, 0) + factor * value
        if updated:
            target[row] = updated
        else:
            target.pop(row, None)


class SparseRationalMatrix:
    """列主序的稀疏有理数矩阵，构造后不可变。

    每列保存为按行号严格递增、且不含零元素的 (行号, 值) 元组序列。
    """

    __slots__ = ("_num_rows", "_num_cols", "_columns")

    def __init__(self, num_rows: int, num_cols: int, columns: Sequence[Column]):
        self._num_rows = num_rows
        self._num_cols = num_cols
        self._columns = tuple(columns)

    @property
    def num_rows(self) -> int:
        return self._num_rows

    @property
    def num_cols(self) -> int:
        return self._num_cols

    @property
    def shape(self) -> Tuple[int, int]:
        return self._num_rows, self._num_cols

    @classmethod
    def from_columns(cls, num_rows: int, columns: Iterable[Mapping[int, object]]) -> "SparseRationalMatrix":
        """由每列的 {行号: 值} 映射构造矩阵，自动排序并丢弃零元素。

        Raises:
            RationalException: 行号越界或行数为负时抛出
        """
        if num_rows < 0:
            raise RationalException(code=400, message="矩阵行数不能为负")
        built: List[Column] = []
        for column in columns:
            entries = []
            for row, value in sorted(column.items()):
                if row < 0 or row >= num_rows:
                    raise RationalException(code=400, message=f"行号 {row} 超出范围 [0, {num_rows})")
                value = as_fraction(value)
                if value:
                    entries.append((row, value))
            built.append(tuple(entries))
        return cls(num_rows, len(built), built)

    @classmethod
    def zeros(cls, num_rows: int, num_cols: int) -> "SparseRationalMatrix":
        return cls(num_rows, num_cols, [()] * num_cols)

    @classmethod
    def identity(cls, size: int) -> "SparseRationalMatrix":
        return cls(size, size, [((j, Fraction(1)),) for j in range(size)])

    def column(self, j: int) -> Column:
        return self._columns[j]

    def column_dict(self, j: int) -> Dict[int, Fraction]:
        return dict(self._columns[j])

    def columns(self) -> Tuple[Column, ...]:
        return self._columns

    def entry(self, i: int, j: int) -> Fraction:
        for row, value in self._columns[j]:
            if row == i:
                return value
            if row > i:
                break
        return Fraction(0)

    def nnz(self) -> int:
        return sum(len(column) for column in self._columns)

    def is_zero_column(self, j: int) -> bool:
        return not self._columns[j]

    def multiply_chain(self, chain: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        """计算矩阵与稀疏列向量 {列号: 系数} 的乘积，返回 {行号: 值}。"""
        result: Dict[int, Fraction] = {}
        for j, coefficient in chain.items():
            if coefficient:
                axpy_column(result, coefficient, dict(self._columns[j]))
        return result

    def matmul(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if self._num_cols != other.num_rows:
            raise RationalException(code=400, message=f"矩阵维度不匹配: {self.shape} × {other.shape}")
        columns = [self.multiply_chain(dict(other.column(j))) for j in range(other.num_cols)]
        return SparseRationalMatrix.from_columns(self._num_rows, columns) if columns else \
            SparseRationalMatrix.zeros(self._num_rows, 0)

    def hstack(self, columns: Iterable[Mapping[int, Fraction]]) -> "SparseRationalMatrix":
        """在右侧追加若干列。"""
        extra = SparseRationalMatrix.from_columns(self._num_rows, columns)
        return SparseRationalMatrix(self._num_rows, self._num_cols + extra.num_cols,
                                    self._columns + extra.columns())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseRationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._columns == other.columns()

    def __hash__(self) -> int:
        return hash((self._num_rows, self._num_cols, self._columns))

    def __repr__(self) -> str:
        return f"SparseRationalMatrix({self._num_rows}x{self._num_cols}, nnz={self.nnz()})"


def smat_rank(matrix: SparseRationalMatrix) -> int:
    """精确计算矩阵在 ℚ 上的秩。

    对列做从左到右的消元：每列用已有主元列消去其最低非零行，
    剩下的非零列两两 low 不同，因而线性无关。

    Args:
        matrix (SparseRationalMatrix): 任意稀疏矩阵

    Returns:
        int: 矩阵的秩，零化度为 num_cols - rank
    """
    pivots: Dict[int, Dict[int, Fraction]] = {}
    for j in range(matrix.num_cols):
        column = matrix.column_dict(j)
        low = lowest_row(column)
        while low is not None and low in pivots:
            pivot = pivots[low]
            axpy_column(column, -column[low] / pivot[low], pivot)
            low = lowest_row(column)
        if low is not None:
            pivots[low] = column
    return len(pivots)


def smat_slice(matrix: SparseRationalMatrix, rows: Sequence[int], cols: Sequence[int]) -> SparseRationalMatrix:
    """取出指定行列组成的子矩阵，按给定顺序重新编号，元素精确保留。

    Raises:
        RationalException: 行或列下标越界、行下标重复时抛出
    """
    row_position: Dict[int, int] = {}
    for position, row in enumerate(rows):
        if row < 0 or row >= matrix.num_rows:
            raise RationalException(code=400, message=f"行下标 {row} 越界")
        if row in row_position:
            raise RationalException(code=400, message=f"行下标 {row} 重复")
        row_position[row] = position
    columns = []
    for col in cols:
        if col < 0 or col >= matrix.num_cols:
            raise RationalException(code=400, message=f"列下标 {col} 越界")
        entries = sorted((row_position[row], value) for row, value in matrix.column(col) if row in row_position)
        columns.append(tuple(entries))
    return SparseRationalMatrix(len(row_position), len(columns), columns)
