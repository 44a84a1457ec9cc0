"""Day graphs: one layered DAG per round whose source-to-sink paths are the
sorted placements (snapshots) of all patrols into that round's intervals.

Vertices are ``(x, y)`` tuples: grid vertex column ``x`` in ``1..K`` and row
``y`` in ``1..P``.  The source is ``(0, 0)`` and the sink ``(K + 1, 0)``.
Every edge records the targets left unprotected when a path uses it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import ProblemInstance
from .errors import ProbabilitySumMismatch, UnsortedSnapshot
from .partition import Interval, PartitionSet, protected_by_interval

SOURCE = (0, 0)

FLOAT_TOL = 1e-9


def sink_of(K: int):
    return (K + 1, 0)


@dataclass(frozen=True)
class Edge:
    tail: tuple[int, int]
    head: tuple[int, int]
    uncovered: frozenset = frozenset()

    @property
    def layer(self) -> int:
        """0 for source edges, ``x`` for grid edges leaving column ``x``, ``K`` for sink edges."""
        return self.tail[0]


@dataclass
class DayGraph:
    t: int
    rows: int
    columns: int
    edges: list[Edge]
    weights: tuple  # w_a(t) per target index
    index: dict = field(default_factory=dict)
    out_edges: dict = field(default_factory=dict)
    in_edges: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, e in enumerate(self.edges):
            self.index[(e.tail, e.head)] = i
            self.out_edges.setdefault(e.tail, []).append(i)
            self.in_edges.setdefault(e.head, []).append(i)

    @property
    def source(self):
        return SOURCE

    @property
    def sink(self):
        return sink_of(self.columns)

    def grid_vertices(self):
        return [(x, y) for x in range(1, self.columns + 1) for y in range(1, self.rows + 1)]

    def edge_between(self, tail, head) -> int:
        return self.index[(tail, head)]

    def expected_edge_count(self) -> int:
        P, K = self.rows, self.columns
        return 2 * P + (K - 1) * P * (P + 1) // 2


def cover_flag(instance: ProblemInstance, below: Optional[Interval], above: Optional[Interval], a: int, t: int) -> int:
    """1 iff target ``a`` sits strictly between ``below`` and ``above`` at
    round ``t`` and neither interval can protect it.  ``None`` is the border.

    "Strictly between" is judged on the intervals' integer extents, which is
    what a patrol placed there actually occupies.
    """
    if below is None and above is None:
        raise ValueError("at least one side must be an interval")
    x, R = instance.position(a, t), instance.R
    if below is not None and (x <= below.hi or protected_by_interval(below, x, R)):
        return 0
    if above is not None and (x >= above.lo or protected_by_interval(above, x, R)):
        return 0
    return 1


def _target_profile(interval_list: Sequence[Interval], x, R):
    """Return (rows with hi < x, first row with lo > x, protected row range)."""
    P = len(interval_list)
    below = sum(1 for iv in interval_list if iv.hi < x)
    above = next((iv.index for iv in interval_list if iv.lo > x), P + 1)
    prot = [iv.index for iv in interval_list if protected_by_interval(iv, x, R)]
    return below, above, (prot[0], prot[-1]) if prot else (1, 0)


def build_day_graph(instance: ProblemInstance, partitions: PartitionSet, t: int) -> DayGraph:
    part = partitions[t]
    P, K = part.size, instance.patrol_count
    R = instance.R
    profiles = [
        _target_profile(part.intervals, instance.position(a, t), R) for a in range(instance.n)
    ]

    def free(y, prot):
        return not (prot[0] <= y <= prot[1])

    def uncovered(y_lo, y_hi):
        # y_lo == 0 / y_hi == P + 1 stand for the borders.
        hit = []
        for a, (nb, first_above, prot) in enumerate(profiles):
            if y_lo and not (y_lo <= nb and free(y_lo, prot)):
                continue
            if y_hi <= P and not (y_hi >= first_above and free(y_hi, prot)):
                continue
            hit.append(a)
        return frozenset(hit)

    sink = sink_of(K)
    edges = [Edge(SOURCE, (1, y), uncovered(0, y)) for y in range(1, P + 1)]
    if K > 1:
        pair_cache = {(y, y2): uncovered(y, y2) for y in range(1, P + 1) for y2 in range(y, P + 1)}
        for x in range(1, K):
            for y in range(1, P + 1):
                for y2 in range(y, P + 1):
                    edges.append(Edge((x, y), (x + 1, y2), pair_cache[(y, y2)]))
    edges.extend(Edge((K, y), sink, uncovered(y, P + 1)) for y in range(1, P + 1))
    weights = tuple(instance.weight(a, t) for a in range(instance.n))
    return DayGraph(t, P, K, edges, weights)


def build_day_graphs(instance: ProblemInstance, partitions: PartitionSet) -> list[DayGraph]:
    return [build_day_graph(instance, partitions, t) for t in range(1, instance.T + 1)]


@dataclass
class CanonicalFlow:
    """Edge flows of one day graph, stored sparsely (missing edges carry 0)."""

    graph: DayGraph
    values: dict

    def __getitem__(self, edge: int):
        return self.values.get(edge, 0)

    def copy(self) -> "CanonicalFlow":
        return CanonicalFlow(self.graph, dict(self.values))

    def positive_edges(self, tol=0):
        return [e for e, v in self.values.items() if v > tol]

    def outflow(self, vertex):
        return sum((self.values.get(e, 0) for e in self.graph.out_edges.get(vertex, ())), 0)

    def inflow(self, vertex):
        return sum((self.values.get(e, 0) for e in self.graph.in_edges.get(vertex, ())), 0)

    def through(self):
        """Flow through every grid vertex."""
        return {v: self.outflow(v) for v in self.graph.grid_vertices()}

    def mass(self):
        return self.outflow(SOURCE)

    def cost_per_target(self):
        """Expected uncovered weight ``sum_e f(e) c(e, a) w_a(t)`` for each target ``a``."""
        g = self.graph
        totals = [0] * len(g.weights)
        for e, v in self.values.items():
            if v:
                for a in g.edges[e].uncovered:
                    totals[a] += v
        return [tot * w for tot, w in zip(totals, g.weights)]

    def conservation_violation(self):
        """Largest absolute imbalance over grid vertices and the unit source/sink requirement."""
        worst = max((abs(self.inflow(v) - self.outflow(v)) for v in self.graph.grid_vertices()), default=0)
        worst = max(worst, abs(self.outflow(SOURCE) - 1), abs(self.inflow(self.graph.sink) - 1))
        return worst

    def is_canonical(self, tol=0) -> bool:
        if any(v < -tol for v in self.values.values()):
            return False
        return self.conservation_violation() <= tol


def path_payoff(g: DayGraph, path: Sequence[int], a: int):
    """Attacker payoff for target ``a`` against the snapshot encoded by ``path``."""
    return g.weights[a] * sum(1 for e in path if a in g.edges[e].uncovered)


def flow_cost(g: DayGraph, f: CanonicalFlow):
    """Attacker's best payoff at this round against the mixed snapshot ``f`` encodes."""
    return max(f.cost_per_target(), default=0)


def snapshot_to_path(g: DayGraph, snapshot: Sequence[int]) -> tuple[int, ...]:
    """Map a sorted snapshot (1-based interval rows, one per patrol) to its edge path."""
    if len(snapshot) != g.columns:
        raise ValueError(f"snapshot needs {g.columns} rows, got {len(snapshot)}")
    if any(b < a for a, b in zip(snapshot, snapshot[1:])):
        raise UnsortedSnapshot(f"snapshot rows must be non-decreasing: {list(snapshot)}")
    verts = [SOURCE] + [(x + 1, y) for x, y in enumerate(snapshot)] + [g.sink]
    return tuple(g.edge_between(u, v) for u, v in zip(verts, verts[1:]))


def path_rows(g: DayGraph, path: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`snapshot_to_path`."""
    return tuple(g.edges[e].head[1] for e in path[:-1])


def mixed_to_flow(g: DayGraph, weighted_snapshots) -> CanonicalFlow:
    pairs = list(weighted_snapshots)
    total = sum(p for _, p in pairs)
    exact = all(isinstance(p, (int, Fraction)) for _, p in pairs)
    if (total != 1) if exact else abs(total - 1) > FLOAT_TOL:
        raise ProbabilitySumMismatch(f"snapshot probabilities sum to {total}, not 1")
    values: dict = {}
    for snapshot, p in pairs:
        for e in snapshot_to_path(g, snapshot):
            values[e] = values.get(e, 0) + p
    return CanonicalFlow(g, values)
