"""Exact minimax patrol schedules for zero-sum security games on a line.

Typical use::

    from patrolgame import make_instance, solve, check_equilibrium

    inst = make_instance(T=1, M=2, K=1, D=0, R=0, positions=[[0], [2]])
    result = solve(inst)          # result.value == Fraction(1, 2)
    assert check_equilibrium(inst, result).passed
"""

from .continuous import ScaleFactor, scale_instance, solve_continuous
from .core import (
    CONTINUOUS,
    DISCRETE,
    MixedStrategy,
    ProblemInstance,
    PureStrategy,
    TargetTrack,
    make_instance,
    validate_instance,
)
from .equilibrium import EquilibriumResult, assemble_lp, solve
from .partition import build_partitions
from .daygraph import build_day_graphs
from .verify import attacker_best_response, check_equilibrium, enumerate_pure_strategies, matrix_game_value

__all__ = [
    "CONTINUOUS",
    "DISCRETE",
    "EquilibriumResult",
    "MixedStrategy",
    "ProblemInstance",
    "PureStrategy",
    "ScaleFactor",
    "TargetTrack",
    "assemble_lp",
    "attacker_best_response",
    "build_day_graphs",
    "build_partitions",
    "check_equilibrium",
    "enumerate_pure_strategies",
    "make_instance",
    "matrix_game_value",
    "scale_instance",
    "solve",
    "solve_continuous",
    "validate_instance",
]
