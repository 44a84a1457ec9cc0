"""Acceptance suite: one test, and one PASS/FAIL line, per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import functools
import os
import random
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

from patrolgame.continuous import scale_instance, solve_continuous  # noqa: E402
from patrolgame.core import make_instance, path_is_feasible  # noqa: E402
from patrolgame.daygraph import build_day_graphs  # noqa: E402
from patrolgame.equilibrium import find_next_cross, solve, uncross  # noqa: E402
from patrolgame.partition import build_partitions  # noqa: E402
from patrolgame.verify import attacker_best_response, matrix_game_value  # noqa: E402

from checks import (  # noqa: E402
    daygraph_problems,
    decomposition_problems,
    partition_problems,
    random_crossing_flow,
    uncross_problems,
)
from conftest import random_continuous_instance, random_instance  # noqa: E402


def emit(capsys, number, ok, detail):
    line = f"ACCEPTANCE criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


# -- instance families -------------------------------------------------------


def oracle_family():
    rng = random.Random(2024)
    out = []
    for _ in range(80):
        # Tilted toward fewer patrols than targets and a slow, short-sighted
        # defender; otherwise most games on such a short line have value 0.
        T, M = rng.randint(1, 3), rng.randint(0, 6)
        n = rng.choice((1, 2, 2, 2))
        K = rng.choice((1, 1, 2)) if n == 2 else 1
        inst = random_instance(rng, T, M, K, n, weights=(1, 2, 3), max_D=rng.choice((0, 1, 1, 2)), max_R=rng.choice((0, 0, 1)))
        out.append(inst)
    return out


def certificate_family():
    rng = random.Random(31337)
    out = []
    for i in range(110):
        if i % 10 == 0:  # keep the largest allowed size well represented
            T, M, K, n = 6, 50, 3, 4
        else:
            T, M, K, n = rng.randint(1, 6), rng.randint(0, 50), rng.randint(1, 3), rng.randint(1, 4)
        out.append(random_instance(rng, T, M, K, n, max_D=rng.choice((0, 1, 2, 5)), max_R=rng.choice((0, 1, 2))))
    return out


@functools.lru_cache(maxsize=None)
def certificate_results():
    start = time.time()
    results = [(inst, solve(inst)) for inst in certificate_family()]
    return results, time.time() - start


# -- criteria ----------------------------------------------------------------


def criterion_1():
    start = time.time()
    mismatches, nonzero = [], 0
    instances = oracle_family()
    for k, inst in enumerate(instances):
        value, oracle = solve(inst).value, matrix_game_value(inst)
        nonzero += oracle != 0
        if value != oracle:
            mismatches.append((k, value, oracle))
    elapsed = time.time() - start
    ok = not mismatches and elapsed < 120 and len(instances) >= 50
    return ok, (
        f"{len(instances)} instances ({nonzero} with nonzero value), "
        f"{len(mismatches)} oracle mismatches, {elapsed:.1f}s (limit 120s)"
    )


def criterion_2():
    results, elapsed = certificate_results()
    bad = []
    for k, (inst, res) in enumerate(results):
        if attacker_best_response(inst, res.strategy).value != res.value:
            bad.append((k, "best response"))
        if res.strategy.total_probability() != 1:
            bad.append((k, "probability sum"))
        for pure, _ in res.strategy.support:
            if len(pure.paths) != inst.patrol_count or not all(path_is_feasible(p, inst) for p in pure.paths):
                bad.append((k, "infeasible path"))
                break
    ok = not bad and len(results) >= 100
    nonzero = sum(1 for _, res in results if res.value != 0)
    return ok, (
        f"{len(results)} exact solves ({nonzero} with nonzero value) in {elapsed:.1f}s, "
        f"{len(bad)} certificate failures {bad[:3]}"
    )


def criterion_3():
    rng = random.Random(99)
    M, T, n, K = 10**9, 5, 3, 2
    inst = make_instance(
        T,
        M,
        K,
        10**8,
        rng.randint(0, 10**7),
        [[rng.randint(0, M) for _ in range(T)] for _ in range(n)],
        [[rng.randint(1, 5) for _ in range(T)] for _ in range(n)],
    )
    start = time.time()
    res = solve(inst)
    elapsed = time.time() - start
    total, bound = res.partitions.total_intervals(), 8 * n * T**3 + 2 * T
    certified = attacker_best_response(inst, res.strategy).value == res.value
    ok = elapsed < 30 and total <= bound and certified
    return ok, f"M=10^9 solved exactly in {elapsed:.2f}s (limit 30s); {total} intervals <= bound {bound}; value {res.value}"


def criterion_4():
    problems = []
    results, _ = certificate_results()
    solved = 0
    for inst, res in results:
        for raw, out, it in zip(res.raw_flows, res.flows, res.uncross_iterations):
            problems += uncross_problems(raw, out, it)
        solved += 1
    rng = random.Random(4)
    synthetic = 0
    while synthetic < 120:
        inst = random_instance(rng, T=1, M=rng.randint(2, 15), K=rng.randint(2, 4), n=rng.randint(1, 4))
        g = build_day_graphs(inst, build_partitions(inst))[0]
        f = random_crossing_flow(g, rng, rng.randint(2, 6))
        if find_next_cross(g, f) is None:
            continue
        out, it = uncross(f)
        problems += uncross_problems(f, out, it)
        synthetic += 1
    ok = not problems
    return ok, f"{solved} solved instances and {synthetic} synthetic crossing flows, {len(problems)} violations {problems[:2]}"


def criterion_5():
    rng = random.Random(5)
    problems, count = [], 0
    for _ in range(55):
        inst = random_instance(
            rng, T=rng.randint(1, 4), M=rng.randint(0, 200), K=1, n=rng.randint(1, 3),
            max_D=rng.choice((0, 1, 3, 10, 40)), max_R=rng.choice((0, 2, 15)),
        )
        problems += partition_problems(inst, build_partitions(inst))
        count += 1
    return not problems and count >= 50, f"{count} instances (M<=200) brute-forced, {len(problems)} violations {problems[:2]}"


def criterion_6():
    rng = random.Random(6)
    problems, count = [], 0
    for _ in range(55):
        inst = random_instance(rng, T=rng.randint(1, 3), M=rng.randint(0, 15), K=rng.randint(1, 3), n=rng.randint(1, 3))
        parts = build_partitions(inst)
        problems += daygraph_problems(inst, parts, build_day_graphs(inst, parts), rng, samples=15)
        count += 1
    return not problems and count >= 50, f"{count} instances, {len(problems)} path/flow cost mismatches {problems[:2]}"


def criterion_7():
    results, _ = certificate_results()
    problems = []
    for inst, res in results:
        problems += decomposition_problems(res)
    return not problems, f"{len(results)} solved instances, {len(problems)} decomposition violations {problems[:2]}"


def criterion_8():
    rng = random.Random(8)
    bad, count = [], 0
    for k in range(35):
        inst = random_continuous_instance(rng, T=rng.randint(1, 3), n=rng.randint(1, 3), K=rng.randint(1, 2))
        scaled, sf = scale_instance(inst)
        res = solve_continuous(inst)
        if res.value != solve(scaled).value:
            bad.append((k, "value"))
        for pure, _ in res.strategy.support:
            for path in pure.paths:
                if not all((p * sf.m).denominator == 1 and 0 <= p <= inst.M for p in path):
                    bad.append((k, "grid"))
        if attacker_best_response(inst, res.strategy).value != res.value:
            bad.append((k, "best response"))
        count += 1
    return not bad and count >= 30, f"{count} continuous instances, {len(bad)} failures {bad[:3]}"


def criterion_9():
    rng = random.Random(9)
    nonzero = []
    for k in range(30):
        T, n = rng.randint(1, 3), rng.randint(1, 3)
        M = rng.choice((5, 50, 10**6))
        inst = random_instance(rng, T, M, n * T, n, max_D=M // 10, max_R=2)
        value = solve(inst).value
        if value != 0:
            nonzero.append((k, value))
    return not nonzero, f"30 instances with K = n*T, {len(nonzero)} with nonzero value"


# -- pytest entry points -----------------------------------------------------


def _run(capsys, number, fn):
    ok, detail = fn()
    emit(capsys, number, ok, detail)
    assert ok, detail


def test_criterion_1_oracle_equivalence(capsys):
    _run(capsys, 1, criterion_1)


def test_criterion_2_minimax_certificate(capsys):
    _run(capsys, 2, criterion_2)


def test_criterion_3_huge_space(capsys):
    _run(capsys, 3, criterion_3)


def test_criterion_4_uncrossing(capsys):
    _run(capsys, 4, criterion_4)


def test_criterion_5_partition_lemmas(capsys):
    _run(capsys, 5, criterion_5)


def test_criterion_6_daygraph_lemmas(capsys):
    _run(capsys, 6, criterion_6)


def test_criterion_7_decomposition(capsys):
    _run(capsys, 7, criterion_7)


def test_criterion_8_continuous(capsys):
    _run(capsys, 8, criterion_8)


def test_criterion_9_full_coverage(capsys):
    _run(capsys, 9, criterion_9)


if __name__ == "__main__":
    failed = 0
    for number, fn in enumerate(
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9],
        start=1,
    ):
        ok, detail = fn()
        emit(None, number, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
