import random
from fractions import Fraction

import pytest

from patrolgame.core import PureStrategy, make_instance
from patrolgame.daygraph import CanonicalFlow, build_day_graphs, mixed_to_flow, snapshot_to_path
from patrolgame.equilibrium import (
    FORMULATIONS,
    IntervalStrategy,
    assemble_lp,
    concretize_strategy,
    decompose_flows,
    find_next_cross,
    solve,
    solve_lp,
    top_most_flow_path,
    uncross,
)
from patrolgame.errors import ExhaustedFlow
from patrolgame.partition import EndPoint, Interval, PartitionSet, TimePartition, build_partitions
from patrolgame.verify import matrix_game_value

from checks import decomposition_problems, uncross_problems
from conftest import instance_a, random_fractional_instance, random_instance

HALF = Fraction(1, 2)


def pipeline(inst, formulation="ranges"):
    parts = build_partitions(inst)
    graphs = build_day_graphs(inst, parts)
    return parts, graphs, assemble_lp(inst, parts, graphs, formulation)


def edge(g, tail, head):
    return g.edge_between(tail, head)


def test_lp_shape_instance_a():
    _, _, lp = pipeline(instance_a())
    assert lp.num_vars == 7
    names = [c.name for c in lp.constraints]
    assert sum(n.startswith("cons") for n in names) == 3
    assert sum(n.startswith("src") for n in names) == 1
    assert sum(n.startswith("snk") for n in names) == 1
    assert sum(n.startswith("cost") for n in names) == 2
    assert len(names) == 7


def test_lp_compatibility_rows_two_identical_rounds():
    inst = make_instance(2, 2, 1, 0, 0, [[0, 0], [2, 2]])
    parts, _, lp = pipeline(inst)
    assert parts[1].size == parts[2].size == 3
    compat = [c for c in lp.constraints if c.name.startswith("compat")]
    assert len(compat) == 6 and all(c.name.startswith("compat1_") for c in compat)


def test_lp_instance_a_value_and_flows():
    parts, graphs, lp = pipeline(instance_a())
    u, flows = solve_lp(lp)
    g = graphs[0]
    assert u == HALF
    assert flows[0].values == mixed_to_flow(g, [((1,), HALF), ((3,), HALF)]).values


def test_lp_zero_weights():
    inst = make_instance(2, 5, 1, 1, 0, [[0, 5], [2, 3]], [[0, 0], [0, 0]])
    assert solve_lp(pipeline(inst)[2])[0] == 0


@pytest.mark.parametrize("formulation", FORMULATIONS)
def test_lp_formulations_agree(formulation):
    rng = random.Random(5)
    for _ in range(8):
        inst = random_instance(rng, T=3, M=8, K=2, n=2)
        assert solve_lp(pipeline(inst, formulation)[2])[0] == matrix_game_value(inst)


def crossing_graph(K=2):
    inst = make_instance(1, 4, K, 0, 0, [[0], [2], [4]])
    return build_day_graphs(inst, build_partitions(inst))[0]


def test_find_next_cross_single_pair():
    g = crossing_graph()
    f = mixed_to_flow(g, [((1, 3), HALF), ((2, 2), HALF)])
    pair = find_next_cross(g, f)
    assert (pair.lower, pair.upper) == (edge(g, (1, 1), (2, 3)), edge(g, (1, 2), (2, 2)))


def test_find_next_cross_none_when_nested():
    g = crossing_graph()
    f = mixed_to_flow(g, [((1, 2), HALF), ((2, 3), HALF)])
    assert find_next_cross(g, f) is None


def test_find_next_cross_prefers_lowest_column():
    g = crossing_graph(K=3)
    q = Fraction(1, 4)
    f = mixed_to_flow(g, [((1, 3, 3), q), ((2, 2, 2), q), ((1, 1, 3), q), ((1, 2, 2), q)])
    pair = find_next_cross(g, f)
    assert g.edges[pair.lower].layer == 1
    assert (pair.lower, pair.upper) == (edge(g, (1, 1), (2, 3)), edge(g, (1, 2), (2, 2)))


def test_uncross_even_split():
    g = crossing_graph()
    f = mixed_to_flow(g, [((1, 3), HALF), ((2, 2), HALF)])
    out, it = uncross(f)
    assert it == 1
    assert out[edge(g, (1, 1), (2, 2))] == HALF and out[edge(g, (1, 2), (2, 3))] == HALF
    assert out[edge(g, (1, 1), (2, 3))] == 0 and out[edge(g, (1, 2), (2, 2))] == 0
    assert uncross_problems(f, out, it) == []


def test_uncross_uneven_split():
    g = crossing_graph()
    f = mixed_to_flow(g, [((1, 3), Fraction(3, 10)), ((2, 2), Fraction(7, 10))])
    out, it = uncross(f)
    assert it == 1
    assert out[edge(g, (1, 2), (2, 2))] == Fraction(2, 5)
    assert out[edge(g, (1, 1), (2, 2))] == Fraction(3, 10)
    assert out[edge(g, (1, 2), (2, 3))] == Fraction(3, 10)


def test_uncross_noop():
    g = crossing_graph()
    f = mixed_to_flow(g, [((1, 2), HALF), ((2, 3), HALF)])
    out, it = uncross(f)
    assert it == 0 and out.values == f.values


def test_top_most_flow_path():
    _, graphs, lp = pipeline(instance_a())
    g = graphs[0]
    _, flows = solve_lp(lp)
    path, size = top_most_flow_path(g, flows[0])
    assert path == snapshot_to_path(g, (3,)) and size == HALF
    single = mixed_to_flow(g, [((2,), 1)])
    assert top_most_flow_path(g, single) == (snapshot_to_path(g, (2,)), 1)
    with pytest.raises(ExhaustedFlow):
        top_most_flow_path(g, CanonicalFlow(g, {}))


def test_decompose_instance_a():
    parts, graphs, lp = pipeline(instance_a())
    _, flows = solve_lp(lp)
    support = decompose_flows(parts, flows)
    assert sorted((s.rows, q) for s, q in support) == [(((1,),), HALF), (((3,),), HALF)]


def test_decompose_single_compatible_path():
    inst = make_instance(2, 4, 1, 1, 0, [[0, 4]])
    parts = build_partitions(inst)
    graphs = build_day_graphs(inst, parts)
    flows = [mixed_to_flow(g, [((1,), 1)]) for g in graphs]
    support = decompose_flows(parts, flows)
    assert len(support) == 1 and support[0][1] == 1


def test_decompose_binding_compatibility():
    inst = make_instance(2, 4, 1, 1, 0, [[0, 4]])
    result = solve(inst)
    assert len(result.interval_support) == 2
    assert all(q == HALF for _, q in result.interval_support)
    assert decomposition_problems(result) == []


def handmade(rounds, speed):
    parts = []
    for t, bounds in enumerate(rounds, start=1):
        ivs = tuple(
            Interval(i, EndPoint(Fraction(lo)), EndPoint(Fraction(hi), 1), lo, hi)
            for i, (lo, hi) in enumerate(bounds, start=1)
        )
        parts.append(TimePartition(t, (), ivs))
    return PartitionSet(tuple(parts), speed)


def test_concretize_examples():
    parts = handmade([[(0, 3), (4, 6)], [(0, 3), (4, 6)]], 4)
    assert concretize_strategy(IntervalStrategy(((1, 2),)), parts) == PureStrategy(((0, 4),))
    assert concretize_strategy(IntervalStrategy(((2, 2),)), parts) == PureStrategy(((4, 4),))
    parts = handmade([[(4, 6), (7, 10)], [(4, 6), (7, 10)]], 3)
    assert concretize_strategy(IntervalStrategy(((2, 1),)), parts) == PureStrategy(((7, 6),))


def test_solve_instance_a():
    result = solve(instance_a())
    assert result.value == HALF
    assert sorted((pure.paths, p) for pure, p in result.strategy.support) == [
        (((0,),), HALF),
        (((2,),), HALF),
    ]


def test_solve_guarded_stationary_target():
    assert solve(make_instance(3, 5, 1, 0, 0, [[2, 2, 2]])).value == 0


def test_solve_hopping_target_matches_oracle():
    inst = make_instance(2, 4, 1, 1, 0, [[0, 4]])
    assert solve(inst).value == matrix_game_value(inst) == HALF


def test_single_target_wide_radius():
    assert solve(make_instance(2, 6, 1, 0, 6, [[0, 6]])).value == 0


def test_full_coverage():
    rng = random.Random(9)
    for _ in range(5):
        inst = random_instance(rng, T=2, M=20, K=4, n=2)
        assert solve(inst).value == 0


def test_continuous_instance_rejected():
    inst = make_instance(1, "3/2", 1, 0, 0, [["1/2"]], mode="continuous")
    with pytest.raises(ValueError):
        solve(inst)


@pytest.mark.parametrize("seed", range(20))
def test_solve_matches_oracle_fractional(seed):
    rng = random.Random(seed)
    inst = random_fractional_instance(rng, T=rng.randint(1, 3), M=rng.randint(0, 6), K=rng.randint(1, 2), n=2)
    result = solve(inst)
    assert result.value == matrix_game_value(inst)
    assert decomposition_problems(result) == []
    for raw, out, it in zip(result.raw_flows, result.flows, result.uncross_iterations):
        assert uncross_problems(raw, out, it) == []


@pytest.mark.parametrize("seed", range(6))
def test_float_mode_close_to_exact(seed):
    rng = random.Random(50 + seed)
    inst = random_instance(rng, T=3, M=15, K=2, n=3)
    exact = solve(inst)
    approx = solve(inst, exact=False)
    assert abs(float(exact.value) - approx.value) < 1e-6
    assert abs(approx.strategy.total_probability() - 1) < 1e-9


def test_warm_and_cold_start_agree():
    rng = random.Random(77)
    for _ in range(5):
        inst = random_instance(rng, T=3, M=10, K=2, n=2)
        assert solve(inst, warm_start=False).value == solve(inst).value
