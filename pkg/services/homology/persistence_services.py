import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.configs import DEBUG_MODE, homology_config
from core.rational import RationalException, SparseRationalMatrix, axpy_column, lowest_row, smat_rank, smat_slice
from models.topology.chain import Chain
from models.topology.complex import ComplexModelException, FilteredComplex
from models.topology.persistence import CycleRepresentative, Decomposition, IntervalPair

logger = logging.getLogger(__name__)

Decompositions = Dict[int, Decomposition]


class PersistenceServiceException(Exception):
    """持续同调服务异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def rdv_decompose(boundary: SparseRationalMatrix) -> Decomposition:
    """标准的从左到右列约化，得到 R = D·V。

    Args:
        boundary (SparseRationalMatrix): 列已按过滤全序排列的边界矩阵 D

    Returns:
        Decomposition: R 约化（low 在非零列上单射），V 为单位上三角可逆矩阵

    Note:
        - 只用更早的列消去，因此 V 的对角线恒为 1
        - 没有 clearing / twist 优化
    """
    reduced: List[Dict[int, Fraction]] = []
    transforms: List[Dict[int, Fraction]] = []
    pivots: Dict[int, int] = {}
    low: Dict[int, int] = {}
    for j in range(boundary.num_cols):
        column = boundary.column_dict(j)
        transform = {j: Fraction(1)}
        row = lowest_row(column)
        while row is not None and row in pivots:
            k = pivots[row]
            factor = -column[row] / reduced[k][row]
            axpy_column(column, factor, reduced[k])
            axpy_column(transform, factor, transforms[k])
            row = lowest_row(column)
        if row is not None:
            pivots[row] = j
            low[j] = row
        reduced.append(column)
        transforms.append(transform)
    R = SparseRationalMatrix.from_columns(boundary.num_rows, reduced) if reduced else \
        SparseRationalMatrix.zeros(boundary.num_rows, 0)
    V = SparseRationalMatrix.from_columns(boundary.num_cols, transforms) if transforms else \
        SparseRationalMatrix.zeros(0, 0)
    logger.debug("R=DV 分解完成: %s, 主元列 %d 个", boundary, len(low))
    return Decomposition(R=R, V=V, low=low)


def decompose_complex(complex_: FilteredComplex) -> Decompositions:
    """对 ∂₁ 与 ∂₂ 分别做 R=DV 分解；没有三角形时 ∂₂ 为零列矩阵。

    homology_config["verify_decomposition"] 打开时逐个精确复核 R = D·V 且 R 已约化，不成立则抛出 500。
    """
    try:
        boundaries = {
            1: complex_.boundary_matrix(1) if complex_.max_dim >= 1 else SparseRationalMatrix.zeros(complex_.count(0), 0),
            2: complex_.boundary_matrix(2) if complex_.max_dim >= 2 else SparseRationalMatrix.zeros(complex_.count(1), 0),
        }
        decomps = {dim: rdv_decompose(boundary) for dim, boundary in boundaries.items()}
    except ComplexModelException as e:
        raise PersistenceServiceException(code=e.code, message=e.message)
    if homology_config["verify_decomposition"]:
        for dim, decomp in decomps.items():
            if not decomp.is_reduced() or not decomp.satisfies(boundaries[dim]):
                raise PersistenceServiceException(code=500, message=f"∂{dim} 的 R=DV 分解复核失败")
        logger.debug("R=DV 分解复核通过")
    return decomps


def _check_decomps(decomps: Decompositions) -> None:
    if 1 not in decomps or 2 not in decomps:
        raise PersistenceServiceException(code=400, message="需要 ∂₁ 与 ∂₂ 两个分解")


def persistence_pairs(decomps: Decompositions, complex_: FilteredComplex) -> List[IntervalPair]:
    """返回 1 维的全部出生/死亡配对，包括零长度配对与本质类。"""
    _check_decomps(decomps)
    pairs: List[IntervalPair] = []
    paired_edges = set()
    for triangle, edge in decomps[2].low.items():
        paired_edges.add(edge)
        pairs.append(IntervalPair(
            birth_simplex=edge,
            death_simplex=triangle,
            birth_value=complex_.birth(1, edge),
            death_value=complex_.birth(2, triangle),
        ))
    for edge in range(complex_.count(1)):
        # R₁ 为零列的边产生循环；既不被配对也就是本质类
        if edge in decomps[1].low or edge in paired_edges:
            continue
        pairs.append(IntervalPair(birth_simplex=edge, birth_value=complex_.birth(1, edge)))
    pairs.sort(key=lambda pair: pair.sort_key())
    return pairs


def extract_barcode(decomps: Decompositions, complex_: FilteredComplex) -> List[IntervalPair]:
    """1 维条形码：丢弃出生值等于死亡值的零长度配对，按出生、死亡排序。"""
    return [pair for pair in persistence_pairs(decomps, complex_) if not pair.is_degenerate]


def initial_cycle_basis(decomps: Decompositions, complex_: FilteredComplex) -> List[CycleRepresentative]:
    """由分解得到初始的持续同调循环基。

    有限区间取 R₂[:, τ]，本质区间取 V₁[:, σ]，系数保持约化输出原样不做缩放。

    Returns:
        List[CycleRepresentative]: 与条形码同序的代表元
    """
    basis: List[CycleRepresentative] = []
    for pair in extract_barcode(decomps, complex_):
        if pair.is_finite:
            column = decomps[2].R.column_dict(pair.death_simplex)
        else:
            column = decomps[1].V.column_dict(pair.birth_simplex)
        basis.append(CycleRepresentative(
            chain=Chain.from_mapping(1, column),
            birth=pair.birth_value,
            death=pair.death_value,
            source_pair=pair,
        ))
    return basis


def column_basis_indices(reduced: SparseRationalMatrix) -> List[int]:
    """约化矩阵的非零列下标，∂₂ 在这些列上的列空间与整体相同。"""
    return [j for j in range(reduced.num_cols) if not reduced.is_zero_column(j)]


def chain_birth(chain: Chain, complex_: FilteredComplex) -> Fraction:
    if chain.is_zero():
        raise PersistenceServiceException(code=400, message="零链没有寿命区间")
    return max(complex_.birth(chain.dimension, index) for index in chain.coefficients)


def chain_lifespan(chain: Chain, complex_: FilteredComplex, decomp: Decomposition) -> Tuple[Fraction, Optional[Fraction]]:
    """独立计算 1 维循环的寿命区间 [Birth, Death)。

    出生值为支撑中边出生值的最大值；死亡值为用 R₂ 的非零列（low 互不相同，构成阶梯基）
    表示该链时用到的最晚三角形的出生值，不是边界时为 ∞（None）。

    Raises:
        PersistenceServiceException: 零链或非 1 维链时抛出
    """
    if chain.dimension != 1:
        raise PersistenceServiceException(code=400, message="只能计算 1 维链的寿命区间")
    birth = chain_birth(chain, complex_)
    pivots = decomp.pivot_columns()
    remainder = dict(chain.coefficients)
    latest: Optional[int] = None
    row = lowest_row(remainder)
    while row is not None:
        if row not in pivots:
            return birth, None
        k = pivots[row]
        column = decomp.R.column_dict(k)
        axpy_column(remainder, -remainder[row] / column[row], column)
        latest = k if latest is None else max(latest, k)
        row = lowest_row(remainder)
    death = complex_.birth(2, latest)
    return birth, max(birth, death)


def betti_one(complex_: FilteredComplex, value: Optional[Fraction],
              boundaries: Optional[Dict[int, SparseRationalMatrix]] = None) -> int:
    """β₁(K_ε) = nullity(∂₁ε) - rank(∂₂ε)，直接由秩计算，不依赖约化结果。"""
    try:
        if boundaries is None:
            boundaries = {1: complex_.boundary_matrix(1)}
            if complex_.max_dim >= 2:
                boundaries[2] = complex_.boundary_matrix(2)
        n0, n1, n2 = (complex_.prefix_length(dim, value) for dim in (0, 1, 2))
        rank_one = smat_rank(smat_slice(boundaries[1], range(n0), range(n1)))
        rank_two = smat_rank(smat_slice(boundaries[2], range(n1), range(n2))) if 2 in boundaries else 0
        return (n1 - rank_one) - rank_two
    except (RationalException, ComplexModelException) as e:
        raise PersistenceServiceException(code=e.code, message=e.message)


def is_persistent_basis(representatives: Sequence[CycleRepresentative], complex_: FilteredComplex) -> bool:
    """在每个寿命端点 ε 检查：存活代表元模边界线性无关，且个数等于 β₁(K_ε)。"""
    try:
        boundaries = {1: complex_.boundary_matrix(1)}
        if complex_.max_dim >= 2:
            boundaries[2] = complex_.boundary_matrix(2)
        values = set()
        for rep in representatives:
            values.add(rep.birth)
            if rep.death is not None:
                values.add(rep.death)
        for value in sorted(values):
            alive = [rep for rep in representatives
                     if rep.birth <= value and (rep.death is None or value < rep.death)]
            n1, n2 = complex_.prefix_length(1, value), complex_.prefix_length(2, value)
            if any(index >= n1 for rep in alive for index in rep.chain.coefficients):
                return False
            if len(alive) != betti_one(complex_, value, boundaries):
                logger.debug("ε=%s 处存活代表元 %d 个，β₁ 不符", value, len(alive))
                return False
            boundary = smat_slice(boundaries[2], range(n1), range(n2)) if 2 in boundaries else \
                SparseRationalMatrix.zeros(n1, 0)
            extended = boundary.hstack(rep.chain.coefficients for rep in alive)
            if smat_rank(extended) - smat_rank(boundary) != len(alive):
                logger.debug("ε=%s 处存活代表元模边界线性相关", value)
                return False
        return True
    except PersistenceServiceException as e:
        raise e
    except (RationalException, ComplexModelException) as e:
        raise PersistenceServiceException(code=e.code, message=e.message)
    except Exception as e:
        if DEBUG_MODE:
            raise PersistenceServiceException(code=500, message=f"持续基检查失败: {e}")
        else:
            raise PersistenceServiceException(code=500, message="持续基检查失败")
