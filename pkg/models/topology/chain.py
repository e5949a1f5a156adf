from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from pydantic import BaseModel, ConfigDict

from models.topology.complex import FilteredComplex


class Chain(BaseModel):
    """某一维单形上的稀疏有理系数向量，键为该维全序中的下标。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dimension: int
    coefficients: Dict[int, Fraction]

    @classmethod
    def from_mapping(cls, dimension: int, coefficients: Mapping[int, object]) -> "Chain":
        cleaned = {int(k): Fraction(v) for k, v in coefficients.items() if v}
        return cls(dimension=dimension, coefficients=dict(sorted(cleaned.items())))

    @classmethod
    def zero(cls, dimension: int) -> "Chain":
        return cls(dimension=dimension, coefficients={})

    def support(self) -> List[int]:
        return sorted(self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients

    def combine(self, other: "Chain", factor: Fraction = Fraction(1)) -> "Chain":
        """返回 self + factor * other。"""
        if other.dimension != self.dimension:
            raise ValueError("不同维数的链不能相加")
        result = dict(self.coefficients)
        for index, value in other.coefficients.items():
            updated = result.get(index, 0) + factor * value
            if updated:
                result[index] = updated
            else:
                result.pop(index, None)
        return Chain.from_mapping(self.dimension, result)

    def l1_norm(self, weights: Mapping[int, Fraction] = None) -> Fraction:
        if weights is None:
            return sum((abs(v) for v in self.coefficients.values()), Fraction(0))
        return sum((weights[k] * abs(v) for k, v in self.coefficients.items()), Fraction(0))

    def as_vertex_terms(self, complex_: FilteredComplex) -> List[Tuple[List[int], int, int]]:
        """序列化为 [顶点列表, 分子, 分母] 列表，按单形全序排列。"""
        return [
            [list(complex_.simplex(self.dimension, index)), value.numerator, value.denominator]
            for index, value in sorted(self.coefficients.items())
        ]
