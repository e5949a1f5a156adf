from .program import LinearProgram, LPSolverException, Solution, SolveStatus
from .simplex import solve_lp, check_feasible
from .branch_bound import solve_mip
from .lp_format import dump_lp

__all__ = [
    "LinearProgram",
    "LPSolverException",
    "Solution",
    "SolveStatus",
    "solve_lp",
    "check_feasible",
    "solve_mip",
    "dump_lp",
]
