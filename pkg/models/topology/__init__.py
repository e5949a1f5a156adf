from .simplex import Simplex, make_simplex
from .complex import FilteredComplex, ComplexModelException
from .chain import Chain
from .persistence import Decomposition, IntervalPair, CycleRepresentative, PersistenceModelException

__all__ = [
    "Simplex",
    "make_simplex",
    "FilteredComplex",
    "ComplexModelException",
    "Chain",
    "Decomposition",
    "IntervalPair",
    "CycleRepresentative",
    "PersistenceModelException",
]
