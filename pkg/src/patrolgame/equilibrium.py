"""Minimax defender strategy for the discrete game.

Pipeline: partitions -> day graphs -> one LP over all rounds' canonical flows
-> uncross each round's flow -> peel off top-most flow paths round by round
-> turn every interval path into an integer patrol path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import DISCRETE, MixedStrategy, ProblemInstance, PureStrategy
from .daygraph import SOURCE, CanonicalFlow, DayGraph, build_day_graphs, path_rows
from .errors import ExhaustedFlow, IncompatibleTopPaths
from .lp import EQ, LE, LPModel, minimize
from .partition import PartitionSet, build_partitions, feasible_set

FLOAT_TOL = 1e-9


@dataclass
class EquilibriumLP(LPModel):
    """The all-rounds LP plus the bookkeeping needed to read flows back out."""

    graphs: list = field(default_factory=list)
    edge_offset: list = field(default_factory=list)
    u_index: int = -1
    formulation: str = "ranges"

    def edge_var(self, t: int, e: int) -> int:
        return self.edge_offset[t - 1] + e


def _outflow_terms(lp: EquilibriumLP, t: int, vertex):
    g = lp.graphs[t - 1]
    return [(lp.edge_var(t, e), 1) for e in g.out_edges.get(vertex, ())]


FORMULATIONS = ("ranges", "prefix", "transport")


def assemble_lp(
    instance: ProblemInstance, partitions: PartitionSet, graphs, formulation: str = "ranges"
) -> EquilibriumLP:
    """Build the LP over all rounds.

    The compatibility requirement between consecutive rounds can be written
    three equivalent ways (same feasible set once projected onto the edge
    flows and ``u``):

    ``ranges``
        one row per round ``t < T``, column ``k`` and row range ``i..j``:
        outflow of rows ``i..j`` <= outflow of their feasible set at ``t + 1``.
    ``prefix``
        the same rows written over prefix-sum variables
        ``S[t,k,y] = outflow of rows 1..y``, four entries per row.
    ``transport``
        arc variables from every row ``y`` to each row of its feasible set,
        with supplies and demands equal to the vertex outflows.  Feasible
        sets are monotone intervals, so Hall's condition on contiguous ranges
        is exactly transport feasibility.  Far sparser than the others.
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}")
    lp = EquilibriumLP(graphs=list(graphs), formulation=formulation)
    T, K = instance.T, instance.patrol_count
    for t, g in enumerate(graphs, start=1):
        lp.edge_offset.append(lp.num_vars)
        for e, edge in enumerate(g.edges):
            lp.add_variable(f"f{t}_{edge.tail[0]}_{edge.tail[1]}_{edge.head[0]}_{edge.head[1]}")
    lp.u_index = lp.add_variable("u", free=True)
    u = lp.u_index
    lp.set_objective({u: 1})

    for t, g in enumerate(graphs, start=1):
        for v in g.grid_vertices():
            terms = [(lp.edge_var(t, e), 1) for e in g.in_edges[v]]
            terms += [(lp.edge_var(t, e), -1) for e in g.out_edges[v]]
            lp.add_constraint(terms, EQ, 0, f"cons{t}_{v[0]}_{v[1]}")
        lp.add_constraint([(lp.edge_var(t, e), 1) for e in g.out_edges[SOURCE]], EQ, 1, f"src{t}")
        lp.add_constraint([(lp.edge_var(t, e), 1) for e in g.in_edges[g.sink]], EQ, 1, f"snk{t}")
        for a, w in enumerate(g.weights):
            terms = [(lp.edge_var(t, e), w) for e, edge in enumerate(g.edges) if w and a in edge.uncovered]
            terms.append((u, -1))
            lp.add_constraint(terms, LE, 0, f"cost{t}_{a}")

    if T < 2:
        return lp
    if formulation == "transport":
        _add_transport_rows(lp, partitions, K)
        return lp

    prefix = {}
    if formulation == "prefix":
        for t in range(1, T + 1):
            P = graphs[t - 1].rows
            for k in range(1, K + 1):
                for y in range(1, P + 1):
                    s = lp.add_variable(f"S{t}_{k}_{y}")
                    prefix[(t, k, y)] = s
                    terms = [(s, 1)] + [(j, -c) for j, c in _outflow_terms(lp, t, (k, y))]
                    if y > 1:
                        terms.append((prefix[(t, k, y - 1)], -1))
                    lp.add_constraint(terms, EQ, 0, f"pre{t}_{k}_{y}")

    def range_terms(t, k, i, j, sign):
        if prefix:
            terms = [(prefix[(t, k, j)], sign)]
            if i > 1:
                terms.append((prefix[(t, k, i - 1)], -sign))
            return terms
        return [(var, sign * c) for y in range(i, j + 1) for var, c in _outflow_terms(lp, t, (k, y))]

    for t in range(1, T):
        P = graphs[t - 1].rows
        for k in range(1, K + 1):
            for i in range(1, P + 1):
                for j in range(i, P + 1):
                    i2, j2 = feasible_set(partitions, t, i, j)
                    terms = range_terms(t, k, i, j, 1) + range_terms(t + 1, k, i2, j2, -1)
                    lp.add_constraint(terms, LE, 0, f"compat{t}_{k}_{i}_{j}")
    return lp


def _add_transport_rows(lp: EquilibriumLP, partitions: PartitionSet, K: int):
    for t in range(1, partitions.T):
        P, P2 = partitions[t].size, partitions[t + 1].size
        for k in range(1, K + 1):
            into: dict = {y2: [] for y2 in range(1, P2 + 1)}
            for y in range(1, P + 1):
                lo, hi = feasible_set(partitions, t, y, y)
                arcs = []
                for y2 in range(lo, hi + 1):
                    var = lp.add_variable(f"g{t}_{k}_{y}_{y2}")
                    arcs.append((var, 1))
                    into[y2].append((var, 1))
                terms = arcs + [(j, -c) for j, c in _outflow_terms(lp, t, (k, y))]
                lp.add_constraint(terms, EQ, 0, f"supply{t}_{k}_{y}")
            for y2 in range(1, P2 + 1):
                terms = into[y2] + [(j, -c) for j, c in _outflow_terms(lp, t + 1, (k, y2))]
                lp.add_constraint(terms, EQ, 0, f"demand{t}_{k}_{y2}")


def solve_lp(lp: EquilibriumLP, exact: bool = True, warm_start: bool = True, tol: float = FLOAT_TOL):
    """Optimal value ``u`` and the per-round canonical flows."""
    sol = minimize(lp, exact=exact, warm_start=warm_start, tol=tol)
    flows = []
    for t, g in enumerate(lp.graphs, start=1):
        values = {}
        for e in range(len(g.edges)):
            v = sol.values[lp.edge_var(t, e)]
            if v > (0 if exact else tol):
                values[e] = v
        flows.append(CanonicalFlow(g, values))
    return sol.values[lp.u_index], flows


# ---------------------------------------------------------------------------
# uncrossing


@dataclass(frozen=True)
class CrossingPair:
    t: int
    lower: int  # edge leaving the lower row
    upper: int  # edge leaving the higher row, landing lower


def _crossing_key(g: DayGraph, pair: CrossingPair):
    e, e2 = g.edges[pair.lower], g.edges[pair.upper]
    return (e.layer, e.tail[1], e.head[1], e2.head[1], e2.tail[1])


def find_next_cross(g: DayGraph, f: CanonicalFlow, tol=0) -> Optional[CrossingPair]:
    """Smallest crossing flow: by column, then lower edge's start and end,
    then the upper edge's end and start."""
    by_layer: dict = {}
    for e in f.positive_edges(tol):
        edge = g.edges[e]
        if 1 <= edge.layer < g.columns:
            by_layer.setdefault(edge.layer, []).append((edge.tail[1], edge.head[1], e))
    for x in sorted(by_layer):
        items = sorted(by_layer[x])
        for y1, y2, e in items:
            best = None
            for z1, z2, e2 in items:
                if z1 > y1 and z2 < y2 and (best is None or (z2, z1) < best[0]):
                    best = ((z2, z1), e2)
            if best is not None:
                return CrossingPair(g.t, e, best[1])
    return None


def uncross(f: CanonicalFlow, tol=0):
    """Remove every crossing flow from one round.  Returns (flow, iterations)."""
    g = f.graph
    f = f.copy()
    iterations = 0
    while True:
        pair = find_next_cross(g, f, tol)
        if pair is None:
            return f, iterations
        e, e2 = g.edges[pair.lower], g.edges[pair.upper]
        fm = min(f[pair.lower], f[pair.upper])
        for idx in (pair.lower, pair.upper):
            rest = f.values[idx] - fm
            if rest > tol:
                f.values[idx] = rest
            else:
                del f.values[idx]
        for tail, head in ((e.tail, e2.head), (e2.tail, e.head)):
            idx = g.edge_between(tail, head)
            f.values[idx] = f.values.get(idx, 0) + fm
        iterations += 1


def resolve_crosses(flows, tol=0):
    return [uncross(f, tol)[0] for f in flows]


# ---------------------------------------------------------------------------
# decomposition


def top_most_flow_path(g: DayGraph, f: CanonicalFlow, tol=0):
    """Highest positive-flow path and its bottleneck size."""
    vertex, path = SOURCE, []
    while vertex != g.sink:
        best = None
        for e in g.out_edges.get(vertex, ()):
            if f[e] > tol:
                row = g.edges[e].head[1]
                if best is None or row > best[0]:
                    best = (row, e)
        if best is None:
            if vertex == SOURCE:
                raise ExhaustedFlow(f"round {g.t} has no flow left")
            raise ExhaustedFlow(f"flow stops at vertex {vertex} in round {g.t}")
        path.append(best[1])
        vertex = g.edges[best[1]].head
    return tuple(path), min(f[e] for e in path)


@dataclass(frozen=True)
class IntervalStrategy:
    """``rows[k][t-1]``: interval index (1-based) of patrol k at round t."""

    rows: tuple[tuple[int, ...], ...]


def _check_compatible(partitions: PartitionSet, per_round_rows):
    for t in range(1, len(per_round_rows)):
        here, nxt = per_round_rows[t - 1], per_round_rows[t]
        for k, (y, y2) in enumerate(zip(here, nxt), start=1):
            lo, hi = feasible_set(partitions, t, y, y)
            if not lo <= y2 <= hi:
                raise IncompatibleTopPaths(
                    f"patrol {k}: interval {y} at round {t} cannot reach interval {y2} at round {t + 1}"
                )


def decompose_flows(partitions: PartitionSet, flows, tol=0):
    """Peel the flows into weighted interval strategies.

    Each step takes every round's top-most flow path, emits them as one pure
    strategy with probability equal to the smallest bottleneck, and subtracts
    that amount along all of them.
    """
    work = [f.copy() for f in flows]
    support = []
    while True:
        masses = [f.mass() for f in work]
        if all(m <= tol for m in masses):
            break
        if any(m <= tol for m in masses):
            if tol == 0:
                raise IncompatibleTopPaths(f"rounds ran out of flow unevenly: {masses}")
            break
        tops = [top_most_flow_path(f.graph, f, tol) for f in work]
        per_round_rows = [path_rows(f.graph, path) for f, (path, _) in zip(work, tops)]
        _check_compatible(partitions, per_round_rows)
        q = min(size for _, size in tops)
        for f, (path, _) in zip(work, tops):
            for e in path:
                rest = f.values[e] - q
                if rest > tol:
                    f.values[e] = rest
                else:
                    del f.values[e]
        K = len(per_round_rows[0])
        rows = tuple(tuple(r[k] for r in per_round_rows) for k in range(K))
        support.append((IntervalStrategy(rows), q))
    if tol and support:
        total = sum(q for _, q in support)
        support = [(s, q / total) for s, q in support]
    return support


def concretize_strategy(strategy: IntervalStrategy, partitions: PartitionSet) -> PureStrategy:
    """Walk each interval path: start at the lowest integer of the first
    interval, then move to the nearest integer of each next interval."""
    d = partitions.speed
    paths = []
    for rows in strategy.rows:
        first = partitions[1].interval(rows[0])
        m = first.lo
        path = [m]
        for t in range(2, len(rows) + 1):
            iv = partitions[t].interval(rows[t - 1])
            nm = min(iv.hi, max(iv.lo, m))
            if abs(nm - m) > d:
                raise IncompatibleTopPaths(f"round {t}: step {m}->{nm} exceeds speed {d}")
            m = nm
            path.append(m)
        paths.append(tuple(path))
    return PureStrategy(tuple(paths))


@dataclass
class EquilibriumResult:
    value: object
    flows: list
    strategy: MixedStrategy
    interval_support: list
    partitions: PartitionSet
    graphs: list
    lp: EquilibriumLP
    raw_flows: list
    uncross_iterations: list
    exact: bool = True
    scale: int = 1  # positions in ``strategy`` are multiples of 1/scale


def solve(
    instance: ProblemInstance,
    exact: bool = True,
    formulation: str = "transport",
    warm_start: bool = True,
    tol: float = FLOAT_TOL,
) -> EquilibriumResult:
    """Minimax strategy for a discrete instance.

    ``exact=False`` solves the LP in floating point and peels flows with
    tolerance ``tol``; the value is then only accurate to about ``tol``.
    """
    if instance.mode != DISCRETE:
        raise ValueError("solve() handles discrete instances; use solve_continuous()")
    zero = 0 if exact else tol
    partitions = build_partitions(instance)
    graphs = build_day_graphs(instance, partitions)
    lp = assemble_lp(instance, partitions, graphs, formulation)
    value, raw = solve_lp(lp, exact=exact, warm_start=warm_start, tol=tol)
    flows, iterations = [], []
    for f in raw:
        g, it = uncross(f, zero)
        flows.append(g)
        iterations.append(it)
    support = decompose_flows(partitions, flows, zero)
    mixed = MixedStrategy(tuple((concretize_strategy(s, partitions), q) for s, q in support))
    if not exact:
        value = max(float(value), 0.0)
    return EquilibriumResult(value, flows, mixed, support, partitions, graphs, lp, raw, iterations, exact)
