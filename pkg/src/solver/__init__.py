"""
Solver - sparse direct solves, damped Newton and continuation.
"""

from .linalg import sparse_lu_solve
from .newton import continuation_ramp, continuation_solve, newton_solve, solve_kl_bending, solve_kl_membrane

__all__ = [
    "sparse_lu_solve",
    "newton_solve",
    "continuation_solve",
    "continuation_ramp",
    "solve_kl_membrane",
    "solve_kl_bending",
]
