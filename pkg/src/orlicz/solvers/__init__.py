"""Solvers for the discrete energy: minimisation, mountain pass, concave-convex pairs."""
from ._common import Armijo, LambdaSweep, Solution, SolverConfig
from .two_solutions import PairResult, concave_convex, estimate_mp_ring, solve_pair
from .minimize import global_minimize, local_minimize_ball, small_t_probe
from .minimax import find_e_point, mountain_pass

__all__ = [
    "Armijo", "LambdaSweep", "Solution", "SolverConfig", "PairResult", "concave_convex",
    "estimate_mp_ring", "solve_pair", "global_minimize", "local_minimize_ball",
    "small_t_probe", "find_e_point", "mountain_pass",
]
