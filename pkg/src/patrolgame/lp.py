"""Sparse linear programs and their solvers.

Two modes share one model type:

* exact (default): a revised simplex over :class:`fractions.Fraction` with
  Bland's anti-cycling rule.  The basis is kept as a sparse LU factorization
  plus a product-form eta file.  Optionally the search starts from the
  optimal basis reported by HiGHS, in which case the exact code only has to
  verify it (and pivot onward if the floating-point basis was not optimal).
* float: HiGHS' dual/primal simplex with tolerances around 1e-9.

Every model is minimized.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import Infeasible, NumericalFailure, Unbounded

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "==", ">="

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class Constraint:
    coeffs: dict
    rel: str
    rhs: Fraction
    name: Optional[str] = None


@dataclass
class LPModel:
    """min objective . x  subject to the constraints and variable lower bounds.

    ``lower[j] is None`` marks variable ``j`` as free.
    """

    lower: list = field(default_factory=list)
    names: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.lower)

    def add_variable(self, name=None, lower=0, free=False) -> int:
        self.lower.append(None if free else Fraction(lower))
        self.names.append(name or f"x{len(self.lower) - 1}")
        return len(self.lower) - 1

    def add_constraint(self, coeffs, rel, rhs, name=None) -> int:
        if rel not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {rel!r}")
        merged: dict = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for j, v in items:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"variable index {j} out of range")
            merged[j] = merged.get(j, 0) + v
        merged = {j: v for j, v in merged.items() if v != 0}
        self.constraints.append(Constraint(merged, rel, rhs, name))
        return len(self.constraints) - 1

    def set_objective(self, coeffs) -> None:
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        self.objective = {j: v for j, v in items if v != 0}

    def objective_value(self, values):
        return sum((c * values[j] for j, c in self.objective.items()), 0)

    def max_violation(self, values):
        """Largest constraint or bound violation of ``values`` (0 when feasible)."""
        worst = 0
        for j, lo in enumerate(self.lower):
            if lo is not None and values[j] < lo:
                worst = max(worst, lo - values[j])
        for con in self.constraints:
            lhs = sum((v * values[j] for j, v in con.coeffs.items()), 0)
            if con.rel == LE:
                gap = lhs - con.rhs
            elif con.rel == GE:
                gap = con.rhs - lhs
            else:
                gap = abs(lhs - con.rhs)
            worst = max(worst, gap)
        return worst

    def to_lp_format(self) -> str:
        """CPLEX LP text.  Non-integral coefficients are written as 17-digit
        decimals, so the dump is for cross-checking, not exact round trips."""

        def num(v):
            v = Fraction(v)
            return str(v.numerator) if v.denominator == 1 else repr(float(v))

        def expr(coeffs):
            if not coeffs:
                return "0 " + self.names[0] if self.names else "0"
            parts = []
            for j in sorted(coeffs):
                v = Fraction(coeffs[j])
                parts.append(f"{'-' if v < 0 else '+'} {num(abs(v))} {self.names[j]}")
            return " ".join(parts)

        ops = {LE: "<=", GE: ">=", EQ: "="}
        lines = ["\\ patrolgame LP model", "Minimize", f" obj: {expr(self.objective)}", "Subject To"]
        for i, con in enumerate(self.constraints):
            name = con.name or f"c{i}"
            lines.append(f" {name}: {expr(con.coeffs)} {ops[con.rel]} {num(con.rhs)}")
        lines.append("Bounds")
        for j, lo in enumerate(self.lower):
            lines.append(f" {self.names[j]} free" if lo is None else f" {self.names[j]} >= {num(lo)}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPSolution:
    status: str
    values: list
    objective: object
    duals: Optional[list] = None
    iterations: int = 0
    warm_started: bool = False


# ---------------------------------------------------------------------------
# exact linear algebra


class SingularBasis(ArithmeticError):
    pass


class _LU:
    """Sparse Gaussian elimination of a square basis matrix.

    ``columns[p]`` is the sparse column (row -> value) at basis position p.
    Pivots prefer the sparsest remaining column, then the sparsest row in it.
    """

    def __init__(self, m: int, columns):
        rows: dict = {i: {} for i in range(m)}
        cols: dict = {}
        for p, col in enumerate(columns):
            cols[p] = set()
            for i, v in col.items():
                if v:
                    rows[i][p] = v
                    cols[p].add(i)
        heap = [(len(s), p) for p, s in cols.items()]
        heapq.heapify(heap)
        steps = []
        while cols:
            count, p = heapq.heappop(heap)
            if p not in cols or count != len(cols[p]):
                continue
            if count == 0:
                raise SingularBasis(f"basis column at position {p} is dependent")
            r = min(cols[p], key=lambda i: (len(rows[i]), i))
            prow = rows.pop(r)
            pv = prow.pop(p)
            touched = set(prow)
            mults = []
            for i in cols[p]:
                if i == r:
                    continue
                row = rows[i]
                l = row.pop(p) / pv
                mults.append((i, l))
                for j, v in prow.items():
                    nv = row.get(j, 0) - l * v
                    if nv:
                        if j not in row:
                            cols[j].add(i)
                        row[j] = nv
                    elif j in row:
                        del row[j]
                        cols[j].discard(i)
            del cols[p]
            for j in prow:
                cols[j].discard(r)
            for j in touched:
                heapq.heappush(heap, (len(cols[j]), j))
            steps.append((r, p, pv, tuple(prow.items()), tuple(mults)))
        self.steps = steps

    def solve(self, rhs: dict) -> dict:
        """x with B x = rhs; rhs is indexed by row, x by basis position."""
        w = dict(rhs)
        for r, _, _, _, mults in self.steps:
            wr = w.get(r)
            if wr:
                for i, l in mults:
                    w[i] = w.get(i, 0) - l * wr
        x: dict = {}
        for r, p, pv, urow, _ in reversed(self.steps):
            s = w.get(r, 0)
            for j, v in urow:
                xj = x.get(j)
                if xj:
                    s -= v * xj
            if s:
                x[p] = s / pv
        return x

    def solve_transposed(self, rhs: dict) -> dict:
        """y with B^T y = rhs; rhs is indexed by basis position, y by row."""
        acc: dict = {}
        y: dict = {}
        for r, p, pv, urow, _ in self.steps:
            val = rhs.get(p, 0) - acc.get(p, 0)
            if val:
                z = val / pv
                y[r] = z
                for j, v in urow:
                    acc[j] = acc.get(j, 0) + v * z
        for r, _, _, _, mults in reversed(self.steps):
            s = 0
            for i, l in mults:
                yi = y.get(i)
                if yi:
                    s += l * yi
            if s:
                y[r] = y.get(r, 0) - s
        return y


class _Basis:
    REFACTOR_EVERY = 60

    def __init__(self, m, columns, basis):
        self.m = m
        self.columns = columns
        self.basis = list(basis)
        self.refactor()

    def refactor(self):
        self.lu = _LU(self.m, [self.columns[c] for c in self.basis])
        self.etas = []

    def ftran(self, rhs: dict) -> dict:
        x = self.lu.solve(rhs)
        for p, alpha, ap in self.etas:
            xp = x.get(p)
            if xp:
                xp = xp / ap
                for i, a in alpha.items():
                    if i != p:
                        x[i] = x.get(i, 0) - a * xp
                x[p] = xp
        return x

    def btran(self, rhs: dict) -> dict:
        d = dict(rhs)
        for p, alpha, ap in reversed(self.etas):
            s = d.get(p, 0)
            for i, a in alpha.items():
                if i != p:
                    di = d.get(i)
                    if di:
                        s -= a * di
            d[p] = s / ap
        return self.lu.solve_transposed(d)

    def replace(self, p, col, alpha):
        self.basis[p] = col
        self.etas.append((p, alpha, alpha[p]))
        if len(self.etas) >= self.REFACTOR_EVERY:
            self.refactor()


class _StandardForm:
    """min c.z  s.t.  A z = b, z >= 0, b >= 0, built from an :class:`LPModel`."""

    def __init__(self, model: LPModel):
        self.model = model
        self.col_of_var = []  # var -> (plus column, minus column or None)
        cost: list = []
        columns: list = []
        for j, lo in enumerate(model.lower):
            c = Fraction(model.objective.get(j, 0))
            plus = len(columns)
            columns.append({})
            cost.append(c)
            minus = None
            if lo is None:
                minus = len(columns)
                columns.append({})
                cost.append(-c)
            self.col_of_var.append((plus, minus))
        self.num_structural = len(columns)

        self.row_of_constraint = {}
        self.row_sign = []
        self.slack_of_row = []
        rhs = []
        for ci, con in enumerate(model.constraints):
            b = Fraction(con.rhs) - sum(
                (Fraction(v) * model.lower[j] for j, v in con.coeffs.items() if model.lower[j]), Fraction(0)
            )
            if not con.coeffs:
                ok = (b >= 0) if con.rel == LE else (b <= 0) if con.rel == GE else (b == 0)
                if not ok:
                    raise Infeasible(f"constraint {con.name or ci} reads 0 {con.rel} {b}")
                continue
            sign = -1 if b < 0 else 1
            i = len(rhs)
            self.row_of_constraint[ci] = i
            self.row_sign.append(sign)
            rhs.append(sign * b)
            for j, v in con.coeffs.items():
                plus, minus = self.col_of_var[j]
                columns[plus][i] = sign * Fraction(v)
                if minus is not None:
                    columns[minus][i] = -sign * Fraction(v)
            slack = None
            if con.rel != EQ:
                slack = len(columns)
                columns.append({i: Fraction(sign if con.rel == LE else -sign)})
                cost.append(Fraction(0))
            self.slack_of_row.append(slack)
        self.m = len(rhs)
        self.rhs = rhs
        self.num_real = len(columns)
        # one artificial per row, appended last so Bland's rule prefers real columns
        for i in range(self.m):
            columns.append({i: Fraction(1)})
            cost.append(Fraction(0))
        self.columns = columns
        self.cost = cost

    def artificial(self, i):
        return self.num_real + i

    def is_artificial(self, col):
        return col >= self.num_real

    def recover(self, z: dict):
        values = []
        for j, lo in enumerate(self.model.lower):
            plus, minus = self.col_of_var[j]
            v = z.get(plus, Fraction(0))
            if minus is not None:
                v -= z.get(minus, Fraction(0))
            elif lo:
                v += lo
            values.append(v)
        return values


class _Simplex:
    def __init__(self, sf: _StandardForm, basis):
        self.sf = sf
        self.B = _Basis(sf.m, sf.columns, basis)
        self.iterations = 0
        x = self.B.ftran({i: b for i, b in enumerate(sf.rhs) if b})
        self.x = [x.get(p, Fraction(0)) for p in range(sf.m)]

    def reduced_cost(self, y, j, cost):
        col = self.sf.columns[j]
        return cost[j] - sum((y[i] * v for i, v in col.items() if i in y), Fraction(0))

    def pivot(self, q, p, alpha):
        theta = self.x[p] / alpha[p]
        if theta:
            for i, a in alpha.items():
                self.x[i] -= theta * a
        self.x[p] = theta
        self.B.replace(p, q, alpha)
        self.iterations += 1

    def run(self, cost, allowed, pin_artificials=False):
        """Bland's rule until optimal.  ``allowed(j)`` filters entering columns.

        With ``pin_artificials`` any artificial still basic (at level zero)
        is treated as fixed at zero: it leaves as soon as the entering column
        touches its row, whatever the sign.
        """
        sf = self.sf
        while True:
            cb = {p: cost[c] for p, c in enumerate(self.B.basis) if cost[c]}
            y = self.B.btran(cb)
            in_basis = set(self.B.basis)
            q = None
            for j in range(len(sf.columns)):
                if j in in_basis or not allowed(j):
                    continue
                if self.reduced_cost(y, j, cost) < 0:
                    q = j
                    break
            if q is None:
                return y
            alpha = self.B.ftran(sf.columns[q])
            best = None
            for p, a in alpha.items():
                c = self.B.basis[p]
                if a > 0:
                    key = (self.x[p] / a, c)
                elif a and pin_artificials and sf.is_artificial(c):
                    key = (Fraction(0), c)
                else:
                    continue
                if best is None or key < best[0]:
                    best = (key, p)
            if best is None:
                raise Unbounded("objective is unbounded below")
            self.pivot(q, best[1], alpha)

    def artificial_level(self):
        return sum((self.x[p] for p, c in enumerate(self.B.basis) if self.sf.is_artificial(c)), Fraction(0))

    def values(self):
        return {c: self.x[p] for p, c in enumerate(self.B.basis) if self.x[p]}


def _initial_basis(sf: _StandardForm):
    basis = []
    for i in range(sf.m):
        s = sf.slack_of_row[i]
        if s is not None and sf.columns[s][i] == 1:
            basis.append(s)
        else:
            basis.append(sf.artificial(i))
    return basis


def _highs_basis(sf: _StandardForm):
    """Optimal basis of the standard form according to HiGHS, or None."""
    try:
        import highspy
        import numpy as np
    except ImportError:  # pragma: no cover - highspy is a declared dependency
        return None
    n = sf.num_real
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    lp = highspy.HighsLp()
    lp.num_col_ = n
    lp.num_row_ = sf.m
    lp.col_cost_ = np.array([float(c) for c in sf.cost[:n]])
    lp.col_lower_ = np.zeros(n)
    lp.col_upper_ = np.full(n, highspy.kHighsInf)
    b = np.array([float(v) for v in sf.rhs])
    lp.row_lower_ = b
    lp.row_upper_ = b
    starts, index, value = [0], [], []
    for j in range(n):
        for i, v in sorted(sf.columns[j].items()):
            index.append(i)
            value.append(float(v))
        starts.append(len(index))
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.array(starts, dtype=np.int32)
    lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    lp.a_matrix_.value_ = np.array(value)
    lp.a_matrix_.num_col_ = n
    lp.a_matrix_.num_row_ = sf.m
    h.passModel(lp)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    hb = h.getBasis()
    if not hb.valid:
        return None
    kbasic = highspy.HighsBasisStatus.kBasic
    col_status, row_status = list(hb.col_status), list(hb.row_status)
    basis = [j for j in range(n) if col_status[j] == kbasic]
    basis += [sf.artificial(i) for i in range(sf.m) if row_status[i] == kbasic]
    if len(basis) != sf.m:
        return None
    return basis


def _solve_exact(model: LPModel, warm_start: bool) -> LPSolution:
    sf = _StandardForm(model)
    if sf.m == 0:
        if any(c < 0 for c in sf.cost[: sf.num_real]):
            raise Unbounded("objective is unbounded below")
        values = sf.recover({})
        return LPSolution(OPTIMAL, values, model.objective_value(values), [None] * len(model.constraints))

    sx = None
    warm = False
    if warm_start:
        basis = _highs_basis(sf)
        if basis is not None:
            try:
                cand = _Simplex(sf, basis)
            except SingularBasis:
                cand = None
            if cand is not None and all(v >= 0 for v in cand.x) and cand.artificial_level() == 0:
                sx, warm = cand, True
            else:
                log.debug("HiGHS basis rejected by exact check; cold start")

    if sx is None:
        sx = _Simplex(sf, _initial_basis(sf))
        phase1 = [Fraction(0)] * len(sf.columns)
        for i in range(sf.m):
            phase1[sf.artificial(i)] = Fraction(1)
        sx.run(phase1, lambda j: True)
        infeas = sx.artificial_level()
        if infeas > 0:
            raise Infeasible(f"no feasible point (phase-1 residual {infeas})")

    y = sx.run(sf.cost, lambda j: not sf.is_artificial(j), pin_artificials=True)
    values = sf.recover(sx.values())
    duals = []
    for ci in range(len(model.constraints)):
        i = sf.row_of_constraint.get(ci)
        duals.append(Fraction(0) if i is None else sf.row_sign[i] * y.get(i, Fraction(0)))
    return LPSolution(
        OPTIMAL, values, model.objective_value(values), duals, sx.iterations, warm
    )


def _solve_float(model: LPModel, tol: float) -> LPSolution:
    import highspy
    import numpy as np

    n, m = model.num_vars, len(model.constraints)
    inf = highspy.kHighsInf
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("primal_feasibility_tolerance", tol)
    h.setOptionValue("dual_feasibility_tolerance", tol)
    lp = highspy.HighsLp()
    lp.num_col_ = n
    lp.num_row_ = m
    lp.col_cost_ = np.array([float(model.objective.get(j, 0)) for j in range(n)])
    lp.col_lower_ = np.array([-inf if lo is None else float(lo) for lo in model.lower])
    lp.col_upper_ = np.full(n, inf)
    lower, upper = [], []
    for con in model.constraints:
        b = float(con.rhs)
        lower.append(-inf if con.rel == LE else b)
        upper.append(inf if con.rel == GE else b)
    lp.row_lower_ = np.array(lower)
    lp.row_upper_ = np.array(upper)
    per_col: list = [[] for _ in range(n)]
    for i, con in enumerate(model.constraints):
        for j, v in con.coeffs.items():
            per_col[j].append((i, float(v)))
    starts, index, value = [0], [], []
    for entries in per_col:
        for i, v in entries:
            index.append(i)
            value.append(v)
        starts.append(len(index))
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.array(starts, dtype=np.int32)
    lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    lp.a_matrix_.value_ = np.array(value)
    lp.a_matrix_.num_col_ = n
    lp.a_matrix_.num_row_ = m
    h.passModel(lp)
    h.run()
    status = h.getModelStatus()
    S = highspy.HighsModelStatus
    if status == S.kInfeasible:
        raise Infeasible("HiGHS reports the model infeasible")
    if status in (S.kUnbounded, S.kUnboundedOrInfeasible):
        raise Unbounded("HiGHS reports the model unbounded")
    if status != S.kOptimal:
        raise NumericalFailure(f"HiGHS stopped with status {h.modelStatusToString(status)}")
    sol = h.getSolution()
    values = [float(v) for v in sol.col_value]
    duals = [float(v) for v in sol.row_dual]
    return LPSolution(OPTIMAL, values, model.objective_value(values), duals, int(h.getInfo().simplex_iteration_count))


def minimize(model: LPModel, exact: bool = True, warm_start: bool = True, tol: float = 1e-9) -> LPSolution:
    """Solve ``model``.  Raises :class:`Infeasible` or :class:`Unbounded`.

    In exact mode the returned solution is an optimal basic solution in
    Fractions.  ``warm_start`` lets HiGHS propose the starting basis; set it
    to False for a pure two-phase Bland simplex.
    """
    if exact:
        return _solve_exact(model, warm_start)
    return _solve_float(model, tol)
