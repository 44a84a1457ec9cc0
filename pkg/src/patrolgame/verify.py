"""Independent checks: the attacker's best response to any mixed strategy and
a brute-force matrix-game oracle over every pure defender strategy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product

from .core import DISCRETE, MixedStrategy, ProblemInstance, PureStrategy, protects
from .errors import TooLarge
from .lp import LE, EQ, LPModel, minimize

DEFAULT_CAP = 50_000


@dataclass
class BestResponseReport:
    value: object
    argmax: tuple  # (target index, round)
    payoffs: dict  # (a, t) -> expected payoff


def attacker_best_response(instance: ProblemInstance, strategy: MixedStrategy) -> BestResponseReport:
    exact = strategy.is_exact
    miss = {}
    R = instance.R
    for pure, p in strategy.support:
        for t in range(1, instance.T + 1):
            spots = pure.positions_at(t)
            for a in range(instance.n):
                x = instance.position(a, t)
                if not any(protects(m, x, R) for m in spots):
                    miss[(a, t)] = miss.get((a, t), 0) + p
    payoffs = {}
    for t in range(1, instance.T + 1):
        for a in range(instance.n):
            w = instance.weight(a, t)
            payoffs[(a, t)] = w * miss.get((a, t), 0) if exact else float(w) * miss.get((a, t), 0.0)
    argmax = max(payoffs, key=lambda k: (payoffs[k], -k[1], -k[0]))
    return BestResponseReport(payoffs[argmax], argmax, payoffs)


def _sorted_states(M: int, K: int):
    return list(combinations_with_replacement(range(M + 1), K))


def _successors(state, d, M):
    ranges = [range(max(0, m - d), min(M, m + d) + 1) for m in state]
    for nxt in product(*ranges):
        if all(nxt[i] <= nxt[i + 1] for i in range(len(nxt) - 1)):
            yield nxt


def _state_graph(instance: ProblemInstance, cap: int):
    """Sorted placements and their feasible transitions, refusing anything over ``cap`` strategies."""
    M, K, d, T = instance.space_max, instance.patrol_count, instance.speed, instance.T
    if math.comb(M + K, K) > cap:
        raise TooLarge(f"{math.comb(M + K, K)} placements per round exceed cap {cap}")
    states = _sorted_states(M, K)
    succ = {}
    count = {s: 1 for s in states}
    work = 0
    for _ in range(T - 1):
        nxt_count: dict = {}
        for s in states:
            if s not in succ:
                succ[s] = list(_successors(s, d, M))
                work += len(succ[s])
            for s2 in succ[s]:
                nxt_count[s2] = nxt_count.get(s2, 0) + count[s]
            if work > cap * math.factorial(K) * 4:
                raise TooLarge(f"transition enumeration exceeds cap {cap}")
        count = nxt_count
        if sum(count.values()) > cap:
            raise TooLarge(f"more than {cap} pure strategies")
    if sum(count.values()) > cap:
        raise TooLarge(f"more than {cap} pure strategies")
    return states, succ


def _walk(instance, cap):
    states, succ = _state_graph(instance, cap)
    T = instance.T

    def rec(seq):
        if len(seq) == T:
            yield seq
            return
        for s2 in succ[seq[-1]]:
            yield from rec(seq + [s2])

    for s in states:
        yield from rec([s])


def enumerate_pure_strategies(instance: ProblemInstance, cap: int = DEFAULT_CAP) -> list:
    """Every pure strategy up to relabelling patrols (per-round sorted placements)."""
    if instance.mode != DISCRETE:
        raise ValueError("enumeration needs a discrete instance")
    K = instance.patrol_count
    return [
        PureStrategy(tuple(tuple(s[k] for s in seq) for k in range(K))) for seq in _walk(instance, cap)
    ]


def _covered_mask(instance, t, state):
    mask = 0
    for a in range(instance.n):
        x = instance.position(a, t)
        if any(protects(m, x, instance.R) for m in state):
            mask |= 1 << ((t - 1) * instance.n + a)
    return mask


def matrix_game_value(instance: ProblemInstance, cap: int = DEFAULT_CAP) -> Fraction:
    """Exact game value by solving the full matrix game as an LP.

    Strategies with identical coverage are merged and strictly larger
    uncovered sets dropped; neither changes the value.
    """
    if instance.mode != DISCRETE:
        raise ValueError("the oracle needs a discrete instance")
    n, T = instance.n, instance.T
    masks = set()
    cache: dict = {}
    for seq in _walk(instance, cap):
        mask = 0
        for t, s in enumerate(seq, start=1):
            key = (t, s)
            if key not in cache:
                cache[key] = _covered_mask(instance, t, s)
            mask |= cache[key]
        masks.add(mask)
    full = (1 << (n * T)) - 1
    if full in masks:
        return Fraction(0)
    maximal = [m for m in masks if not any(o != m and o & m == m for o in masks)]
    maximal.sort()

    lp = LPModel()
    xs = [lp.add_variable(f"p{i}") for i in range(len(maximal))]
    u = lp.add_variable("u", free=True)
    lp.add_constraint([(x, 1) for x in xs], EQ, 1)
    for t in range(1, T + 1):
        for a in range(n):
            bit = 1 << ((t - 1) * n + a)
            w = instance.weight(a, t)
            terms = [(x, w) for x, m in zip(xs, maximal) if w and not m & bit]
            lp.add_constraint(terms + [(u, -1)], LE, 0)
    lp.set_objective({u: 1})
    return minimize(lp, exact=True, warm_start=False).objective


@dataclass
class Check:
    name: str
    passed: bool
    magnitude: object = 0
    detail: str = ""


@dataclass
class EquilibriumReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        return next(c for c in self.checks if c.name == name)


def check_equilibrium(instance: ProblemInstance, result, cap: int = DEFAULT_CAP, tol: float = 1e-6) -> EquilibriumReport:
    """Audit a claimed equilibrium (anything with ``value`` and ``strategy``).

    Exact strategies are held to exact equality; float ones to ``tol``.
    """
    strategy, value = result.strategy, result.value
    exact = strategy.is_exact and isinstance(value, (int, Fraction))
    report = EquilibriumReport()

    total = strategy.total_probability()
    deficit = 1 - total
    ok = deficit == 0 if exact else abs(deficit) <= 1e-9
    ok = ok and all(p > 0 for _, p in strategy.support)
    report.checks.append(Check("probability_sum", ok, deficit, f"probabilities sum to {total}"))

    problems = []
    step = instance.speed if instance.mode == DISCRETE else instance.D
    for s_idx, (pure, _) in enumerate(strategy.support):
        if len(pure.paths) != instance.patrol_count:
            problems.append(f"support {s_idx}: {len(pure.paths)} patrols, expected {instance.patrol_count}")
        for k, path in enumerate(pure.paths):
            if len(path) != instance.T:
                problems.append(f"support {s_idx} patrol {k}: {len(path)} rounds")
                continue
            for t, m in enumerate(path, start=1):
                if m < 0 or m > instance.M or (instance.mode == DISCRETE and Fraction(m).denominator != 1):
                    problems.append(f"support {s_idx} patrol {k} round {t}: position {m} out of bounds")
                if t < instance.T and abs(path[t] - m) > step:
                    problems.append(
                        f"support {s_idx} patrol {k} round {t}: move {m}->{path[t]} exceeds speed {step}"
                    )
    report.checks.append(Check("speed_feasibility", not problems, len(problems), "; ".join(problems)))

    br = attacker_best_response(instance, strategy)
    gap = abs(br.value - value)
    report.checks.append(
        Check("best_response", gap == 0 if exact else gap <= tol, gap, f"best response {br.value} at {br.argmax}")
    )

    if instance.mode == DISCRETE:
        try:
            oracle = matrix_game_value(instance, cap)
        except TooLarge as exc:
            report.checks.append(Check("oracle", True, None, f"skipped: {exc}"))
        else:
            gap = abs(oracle - value)
            report.checks.append(
                Check("oracle", gap == 0 if exact else gap <= tol, gap, f"matrix game value {oracle}")
            )
    return report
