"""Game instances, strategies and the protection predicate.

All spatial quantities and weights are :class:`fractions.Fraction` values so
the whole pipeline stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import (
    NegativeParameter,
    NegativeWeight,
    TrackLengthMismatch,
    ZeroHorizon,
)

RationalLike = Union[int, Fraction, str]

DISCRETE = "discrete"
CONTINUOUS = "continuous"


def as_rational(value, field_name="value") -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Accepts ints, Fractions and strings such as ``"3"``, ``"-0.25"`` or
    ``"7/3"``.  Non-integral floats are refused: they would smuggle binary
    rounding into an exact pipeline.
    """
    if isinstance(value, bool):
        raise TypeError(f"{field_name}: booleans are not numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value.is_integer():
            return Fraction(int(value))
        raise TypeError(f"{field_name}: pass {value!r} as a string to keep it exact")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{field_name}: cannot parse {value!r} as a rational") from exc
    raise TypeError(f"{field_name}: unsupported type {type(value).__name__}")


def protects(m, pos, R) -> bool:
    """A patrol at ``m`` protects a target at ``pos`` iff ``|pos - m| <= R``."""
    return abs(Fraction(pos) - m) <= R


def effective_patrol_count(K: int, n: int, T: int) -> int:
    """Patrols beyond ``n * T`` are useless: one still patrol per (target, round) already covers everything."""
    return min(K, n * T)


@dataclass(frozen=True)
class TargetTrack:
    id: int
    positions: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]


@dataclass(frozen=True)
class ProblemInstance:
    T: int
    M: Fraction
    K: int
    D: Fraction
    R: Fraction
    targets: tuple[TargetTrack, ...]
    mode: str = DISCRETE
    patrol_count: int = field(default=0)

    def __post_init__(self):
        if self.patrol_count == 0:
            object.__setattr__(
                self, "patrol_count", effective_patrol_count(self.K, len(self.targets), self.T)
            )

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def speed(self) -> int:
        """Largest integer step a patrol can take between rounds."""
        return math.floor(self.D)

    @property
    def space_max(self) -> int:
        if self.M.denominator != 1:
            raise ValueError("space size is not integral; scale the instance first")
        return int(self.M)

    def position(self, a: int, t: int) -> Fraction:
        """Position of target ``a`` at round ``t`` (1-based)."""
        return self.targets[a].positions[t - 1]

    def weight(self, a: int, t: int) -> Fraction:
        return self.targets[a].weights[t - 1]


@dataclass(frozen=True)
class PureStrategy:
    """One path per patrol; ``paths[k][t-1]`` is patrol k's position at round t."""

    paths: tuple[tuple, ...]

    def positions_at(self, t: int) -> tuple:
        return tuple(path[t - 1] for path in self.paths)


@dataclass(frozen=True)
class MixedStrategy:
    support: tuple[tuple[PureStrategy, Union[Fraction, float]], ...]

    def total_probability(self):
        return sum((p for _, p in self.support), Fraction(0) if self.is_exact else 0.0)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for _, p in self.support)


def path_is_feasible(path: Sequence, instance: ProblemInstance) -> bool:
    """Check bounds and speed for a single patrol path."""
    if len(path) != instance.T:
        return False
    if instance.mode == DISCRETE:
        if any(Fraction(m).denominator != 1 for m in path):
            return False
        step = instance.speed
    else:
        step = instance.D
    if any(m < 0 or m > instance.M for m in path):
        return False
    return all(abs(path[i + 1] - path[i]) <= step for i in range(len(path) - 1))


def _require_int(raw, key, minimum):
    value = raw[key]
    if isinstance(value, str):
        try:
            value = Fraction(value)
        except ValueError:
            raise NegativeParameter(key, f"expected an integer, got {raw[key]!r}") from None
    if isinstance(value, bool) or Fraction(value).denominator != 1:
        raise NegativeParameter(key, f"expected an integer, got {raw[key]!r}")
    value = int(value)
    if value < minimum:
        if key == "T":
            raise ZeroHorizon(key, f"horizon must be positive, got {value}")
        raise NegativeParameter(key, f"must be >= {minimum}, got {value}")
    return value


def validate_instance(raw: Mapping) -> ProblemInstance:
    """Build a normalized :class:`ProblemInstance` from a plain mapping.

    ``raw`` carries keys ``T, M, K, D, R, targets`` and optionally ``mode``.
    Each target is a mapping with ``positions`` and ``weights`` (and an
    optional ``id``) or a ``(positions, weights)`` pair.
    """
    mode = raw.get("mode", DISCRETE)
    if mode not in (DISCRETE, CONTINUOUS):
        raise NegativeParameter("mode", f"unknown mode {mode!r}")
    T = _require_int(raw, "T", 1)
    K = _require_int(raw, "K", 1)
    if mode == DISCRETE:
        M = Fraction(_require_int(raw, "M", 0))
    else:
        M = as_rational(raw["M"], "M")
        if M < 0:
            raise NegativeParameter("M", f"must be >= 0, got {M}")
    D = as_rational(raw["D"], "D")
    R = as_rational(raw["R"], "R")
    if D < 0:
        raise NegativeParameter("D", f"speed must be >= 0, got {D}")
    if R < 0:
        raise NegativeParameter("R", f"radius must be >= 0, got {R}")

    targets = []
    raw_targets = list(raw["targets"])
    if not raw_targets:
        raise NegativeParameter("targets", "at least one target is required")
    for a, entry in enumerate(raw_targets):
        if isinstance(entry, Mapping):
            positions, weights = entry["positions"], entry["weights"]
            tid = entry.get("id", a)
        else:
            positions, weights = entry
            tid = a
        where = f"targets[{a}]"
        if len(positions) != T:
            raise TrackLengthMismatch(
                f"{where}.positions", f"expected {T} entries, got {len(positions)}"
            )
        if len(weights) != T:
            raise TrackLengthMismatch(f"{where}.weights", f"expected {T} entries, got {len(weights)}")
        pos = tuple(as_rational(p, f"{where}.positions[{i}]") for i, p in enumerate(positions))
        wts = tuple(as_rational(w, f"{where}.weights[{i}]") for i, w in enumerate(weights))
        for i, w in enumerate(wts):
            if w < 0:
                raise NegativeWeight(f"{where}.weights[{i}]", f"weight must be >= 0, got {w}")
        targets.append(TargetTrack(int(tid), pos, wts))

    return ProblemInstance(T=T, M=M, K=K, D=D, R=R, targets=tuple(targets), mode=mode)


def make_instance(T, M, K, D, R, positions, weights=None, mode=DISCRETE) -> ProblemInstance:
    """Convenience constructor: ``positions[a][t-1]``; unit weights by default."""
    if weights is None:
        weights = [[1] * T for _ in positions]
    return validate_instance(
        {
            "mode": mode,
            "T": T,
            "M": M,
            "K": K,
            "D": D,
            "R": R,
            "targets": [{"positions": p, "weights": w} for p, w in zip(positions, weights)],
        }
    )
