from fractions import Fraction
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from core.rational import SparseRationalMatrix
from models.topology.chain import Chain


class PersistenceModelException(Exception):
    """持续同调模型异常类"""
    def __init__(self, code: int, message: str):
        self.message = message
        self.code = code


class Decomposition(BaseModel):
    """R = D·V 分解，low 为 R 非零列到其最低非零行的映射。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    R: SparseRationalMatrix
    V: SparseRationalMatrix
    low: Dict[int, int]

    def pivot_columns(self) -> Dict[int, int]:
        """low 的逆映射：行号 → 以该行为 low 的列。"""
        return {row: column for column, row in self.low.items()}

    def is_reduced(self) -> bool:
        return len(set(self.low.values())) == len(self.low)

    def satisfies(self, boundary: SparseRationalMatrix) -> bool:
        """精确检查 R = D·V。"""
        return boundary.matmul(self.V) == self.R


class IntervalPair(BaseModel):
    """条形码中的一个区间 [birth_value, death_value)，death_value 为 None 表示 ∞。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    birth_simplex: int
    death_simplex: Optional[int] = None
    birth_value: Fraction
    death_value: Optional[Fraction] = None
    dimension: int = 1

    @model_validator(mode="after")
    def _check_order(self) -> "IntervalPair":
        if self.death_value is not None and self.death_value < self.birth_value:
            raise ValueError("区间的死亡值早于出生值")
        if (self.death_simplex is None) != (self.death_value is None):
            raise ValueError("死亡单形与死亡值必须同时给出")
        return self

    @property
    def is_finite(self) -> bool:
        return self.death_value is not None

    @property
    def is_degenerate(self) -> bool:
        return self.death_value is not None and self.death_value == self.birth_value

    def sort_key(self) -> Tuple:
        # 出生值、死亡值（∞ 最后）、出生单形
        return (self.birth_value, self.death_value is None, self.death_value or 0, self.birth_simplex)


class CycleRepresentative(BaseModel):
    """1 维循环代表元及其寿命区间 [birth, death)。"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    chain: Chain
    birth: Fraction
    death: Optional[Fraction] = None
    source_pair: Optional[IntervalPair] = None

    @property
    def lifespan(self) -> Tuple[Fraction, Optional[Fraction]]:
        return self.birth, self.death

    def with_chain(self, chain: Chain) -> "CycleRepresentative":
        return CycleRepresentative(chain=chain, birth=self.birth, death=self.death, source_pair=self.source_pair)

    @property
    def birth_simplex(self) -> int:
        """全序中使该循环出现的边：优先取配对给出的出生边，否则取链的最大边下标。"""
        if self.source_pair is not None:
            return self.source_pair.birth_simplex
        if not self.chain.coefficients:
            raise PersistenceModelException(code=400, message="零链没有出生边")
        return max(self.chain.coefficients)

    def dies_no_later_than(self, other: "CycleRepresentative") -> bool:
        """Death(self) ≤ Death(other)，∞ 只不晚于 ∞。"""
        if other.death is None:
            return True
        return self.death is not None and self.death <= other.death
