from .exact import RationalException, rat_from_float, as_fraction, fraction_pair, format_fraction, is_integral
from .sparse_matrix import SparseRationalMatrix, smat_rank, smat_slice, lowest_row, axpy_column

__all__ = [
    "RationalException",
    "rat_from_float",
    "as_fraction",
    "fraction_pair",
    "format_fraction",
    "is_integral",
    "SparseRationalMatrix",
    "smat_rank",
    "smat_slice",
    "lowest_row",
    "axpy_column",
]
