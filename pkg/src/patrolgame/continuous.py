"""Continuous positions via rescaling.

When targets, speed, radius and space size are arbitrary rationals, multiply
every spatial quantity by the least common multiple ``m`` of their
denominators.  The scaled game is a discrete one, and flooring any
fractional patrol path there never loses protection, so solving it on the
integer grid and dividing the positions by ``m`` again is optimal for the
original game.  Weights are not touched, hence the value is the same.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import DISCRETE, MixedStrategy, ProblemInstance, PureStrategy, TargetTrack
from .equilibrium import EquilibriumResult, solve


@dataclass(frozen=True)
class ScaleFactor:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"scale factor must be a positive integer, got {self.m}")

    def up(self, x) -> Fraction:
        return Fraction(x) * self.m

    def down(self, x) -> Fraction:
        return Fraction(x) / self.m


def scale_factor(instance: ProblemInstance) -> ScaleFactor:
    dens = [Fraction(instance.M).denominator, instance.D.denominator, instance.R.denominator]
    for track in instance.targets:
        dens.extend(x.denominator for x in track.positions)
    return ScaleFactor(math.lcm(*dens))


def scale_instance(instance: ProblemInstance) -> tuple[ProblemInstance, ScaleFactor]:
    """Return the equivalent discrete instance and the factor used."""
    sf = scale_factor(instance)
    targets = tuple(
        TargetTrack(tr.id, tuple(sf.up(x) for x in tr.positions), tr.weights) for tr in instance.targets
    )
    scaled = ProblemInstance(
        T=instance.T,
        M=sf.up(instance.M),
        K=instance.K,
        D=sf.up(instance.D),
        R=sf.up(instance.R),
        targets=targets,
        mode=DISCRETE,
    )
    return scaled, sf


def unscale_strategy(strategy: MixedStrategy, sf: ScaleFactor) -> MixedStrategy:
    support = tuple(
        (PureStrategy(tuple(tuple(sf.down(m) for m in path) for path in pure.paths)), p)
        for pure, p in strategy.support
    )
    return MixedStrategy(support)


def solve_continuous(instance: ProblemInstance, **options) -> EquilibriumResult:
    """Solve a continuous-mode instance; ``options`` go to :func:`equilibrium.solve`.

    Partitions, graphs and flows in the result live in the scaled space;
    only ``strategy`` is mapped back to original coordinates.
    """
    scaled, sf = scale_instance(instance)
    result = solve(scaled, **options)
    return dataclasses.replace(result, strategy=unscale_strategy(result.strategy, sf), scale=sf.m)
