"""Instance documents, random instances, the ASCII timeline and the
``patrolgame`` command line.

An instance document is JSON::

    {"mode": "discrete", "T": 1, "M": "2", "K": 1, "D": "0", "R": "0",
     "targets": [{"positions": ["0"], "weights": ["1"]}, ...]}

Numbers may be JSON integers, decimal strings ("0.25") or fractions
("1/4"); they are always parsed exactly.  We always write them as strings.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .continuous import scale_instance, solve_continuous
from .core import CONTINUOUS, DISCRETE, MixedStrategy, ProblemInstance, PureStrategy, validate_instance
from .equilibrium import EquilibriumResult, solve
from .errors import InstanceError, LPError, ParseError, PatrolGameError, TooLarge
from .verify import DEFAULT_CAP, check_equilibrium, matrix_game_value

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


# ---------------------------------------------------------------------------
# parsing and serialization


def _number(value, location) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(location, "expected a number, got a boolean")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(location, f"cannot read {value!r} as a rational number") from None
    raise ParseError(location, f"expected a number or numeric string, got {type(value).__name__}")


def _load_json(text: str, what: str):
    try:
        # parse_float hands us the literal text, so decimals stay exact
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}:{exc.lineno}:{exc.colno}", exc.msg) from None


def parse_instance(document) -> ProblemInstance:
    """Read an instance from JSON text or an already decoded mapping."""
    raw = _load_json(document, "document") if isinstance(document, (str, bytes)) else document
    if not isinstance(raw, Mapping):
        raise ParseError("$", "the document must be an object")
    for key in ("T", "M", "K", "D", "R", "targets"):
        if key not in raw:
            raise ParseError(f"$.{key}", "missing field")
    mode = raw.get("mode", DISCRETE)
    if mode not in (DISCRETE, CONTINUOUS):
        raise ParseError("$.mode", f"expected 'discrete' or 'continuous', got {mode!r}")
    if not isinstance(raw["targets"], list):
        raise ParseError("$.targets", "expected a list")
    targets = []
    for a, entry in enumerate(raw["targets"]):
        where = f"$.targets[{a}]"
        if not isinstance(entry, Mapping):
            raise ParseError(where, "expected an object with positions and weights")
        for key in ("positions", "weights"):
            if not isinstance(entry.get(key), list):
                raise ParseError(f"{where}.{key}", "expected a list")
        targets.append(
            {
                "id": entry.get("id", a),
                "positions": [_number(x, f"{where}.positions[{i}]") for i, x in enumerate(entry["positions"])],
                "weights": [_number(w, f"{where}.weights[{i}]") for i, w in enumerate(entry["weights"])],
            }
        )
    scalars = {key: _number(raw[key], f"$.{key}") for key in ("T", "M", "K", "D", "R")}
    return validate_instance({"mode": mode, **scalars, "targets": targets})


def _fmt(x) -> str:
    return str(Fraction(x)) if isinstance(x, (int, Fraction)) else repr(float(x))


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "mode": instance.mode,
        "T": instance.T,
        "M": _fmt(instance.M),
        "K": instance.K,
        "D": _fmt(instance.D),
        "R": _fmt(instance.R),
        "targets": [
            {
                "id": tr.id,
                "positions": [_fmt(x) for x in tr.positions],
                "weights": [_fmt(w) for w in tr.weights],
            }
            for tr in instance.targets
        ],
    }


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def serialize_instance(instance: ProblemInstance) -> str:
    return _dumps(instance_to_dict(instance))


def generate_instance(seed: int, T: int, M: int, K: int, n: int, D=None, R=None) -> ProblemInstance:
    """A reproducible random discrete instance (same arguments, same instance)."""
    rng = random.Random(seed)
    if D is None:
        D = rng.randint(0, max(1, M // 4))
    if R is None:
        R = rng.randint(0, max(0, min(2, M // 4)))
    positions = [[rng.randint(0, M) for _ in range(T)] for _ in range(n)]
    weights = [[rng.randint(1, 5) for _ in range(T)] for _ in range(n)]
    return validate_instance(
        {
            "T": T,
            "M": M,
            "K": K,
            "D": D,
            "R": R,
            "targets": [{"positions": p, "weights": w} for p, w in zip(positions, weights)],
        }
    )


def result_to_dict(result: EquilibriumResult, flows: bool = False) -> dict:
    doc = {
        "value": _fmt(result.value),
        "exact": result.exact,
        "support": [
            {"probability": _fmt(p), "paths": [[_fmt(m) for m in path] for path in pure.paths]}
            for pure, p in result.strategy.support
        ],
    }
    if flows:
        doc["flows"] = [
            {
                "round": g.t,
                "edges": [
                    {"tail": list(g.edges[e].tail), "head": list(g.edges[e].head), "flow": _fmt(v)}
                    for e, v in sorted(f.values.items())
                    if v
                ],
            }
            for g, f in zip(result.graphs, result.flows)
        ]
    return doc


class ClaimedEquilibrium:
    """A value and strategy read from a file, for auditing with ``verify``."""

    def __init__(self, value, strategy: MixedStrategy):
        self.value = value
        self.strategy = strategy


def parse_strategy(document) -> ClaimedEquilibrium:
    """Read a ``solve`` output document back (``value`` plus ``support``)."""
    raw = _load_json(document, "strategy") if isinstance(document, (str, bytes)) else document
    if not isinstance(raw, Mapping) or "support" not in raw or "value" not in raw:
        raise ParseError("$", "expected an object with 'value' and 'support'")
    if not isinstance(raw["support"], list):
        raise ParseError("$.support", "expected a list")
    support = []
    for s, entry in enumerate(raw["support"]):
        where = f"$.support[{s}]"
        if not isinstance(entry, Mapping) or not isinstance(entry.get("paths"), list):
            raise ParseError(where, "expected an object with 'probability' and 'paths'")
        paths = []
        for k, path in enumerate(entry["paths"]):
            if not isinstance(path, list):
                raise ParseError(f"{where}.paths[{k}]", "expected a list of positions")
            paths.append(tuple(_number(m, f"{where}.paths[{k}][{i}]") for i, m in enumerate(path)))
        support.append((PureStrategy(tuple(paths)), _number(entry.get("probability"), f"{where}.probability")))
    return ClaimedEquilibrium(_number(raw["value"], "$.value"), MixedStrategy(tuple(support)))


# ---------------------------------------------------------------------------
# rendering


def render_timeline(instance: ProblemInstance, result: EquilibriumResult, max_support: int = 12) -> str:
    """ASCII chart: one column per round, one row per interesting position.

    Rows are the interval starts of every round plus every target and patrol
    position, so the chart stays small even when M is huge.  In a cell,
    ``|`` marks an interval start in that round, ``xA`` target A and ``sN``
    the patrols of support strategy N.
    """
    support = list(result.strategy.support)
    if not support:
        return "(empty support: nothing to render)\n"
    shown = support[:max_support]
    scale = getattr(result, "scale", 1) or 1
    T = instance.T

    starts = {t: {Fraction(iv.lo, scale) for iv in result.partitions[t].intervals} for t in range(1, T + 1)}
    rows = set().union(*starts.values())
    marks: dict = {}
    for t in range(1, T + 1):
        for a in range(instance.n):
            x = instance.position(a, t)
            if 0 <= x <= instance.M:
                rows.add(x)
                marks.setdefault((x, t), []).append(f"x{a}")
        for s, (pure, _) in enumerate(shown, start=1):
            for m in sorted(set(pure.positions_at(t))):
                m = Fraction(m)
                rows.add(m)
                marks.setdefault((m, t), []).append(f"s{s}")

    labels = {x: str(x) for x in rows}
    lw = max(len("position"), *(len(v) for v in labels.values()))
    cells = {
        (x, t): ("|" if x in starts[t] else " ") + " ".join(marks.get((x, t), []))
        for x in rows
        for t in range(1, T + 1)
    }
    cw = max(6, *(len(c) for c in cells.values())) + 1
    out = ["position".rjust(lw) + " | " + "".join(f"t={t}".ljust(cw) for t in range(1, T + 1))]
    out.append("-" * lw + "-+-" + "-" * (cw * T))
    for x in sorted(rows, reverse=True):
        out.append(labels[x].rjust(lw) + " | " + "".join(cells[(x, t)].ljust(cw) for t in range(1, T + 1)).rstrip())
    out.append("")
    out.append(f"value {_fmt(result.value)}")
    for s, (_, p) in enumerate(shown, start=1):
        out.append(f"  s{s}: p={_fmt(p)}")
    if len(support) > len(shown):
        out.append(f"  ... {len(support) - len(shown)} more support strategies not drawn")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# command dispatch


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="patrolgame", description="Exact equilibria of patrol games on a line.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p):
        p.add_argument("file", help="instance document (JSON)")
        p.add_argument("--float", dest="use_float", action="store_true", help="use the floating-point LP")
        p.add_argument("--tolerance", type=float, default=1e-9, help="float-mode tolerance")
        p.add_argument("--dump-lp", metavar="PATH", help="write the equilibrium LP in CPLEX LP format")
        p.add_argument("--flows", action="store_true", help="include per-round edge flows")

    solver_flags(sub.add_parser("solve", help="solve an instance"))
    p = sub.add_parser("verify", help="solve (or load a strategy) and audit it")
    solver_flags(p)
    p.add_argument("--strategy", metavar="PATH", help="audit this solve output instead of solving")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="oracle enumeration cap")
    p = sub.add_parser("oracle", help="brute-force matrix game value")
    p.add_argument("file")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p = sub.add_parser("gen", help="random instance")
    for name in ("seed", "T", "M", "K", "n"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--D", type=int, default=None)
    p.add_argument("--R", type=int, default=None)
    p.add_argument("-o", "--output", metavar="PATH")
    solver_flags(sub.add_parser("render", help="ASCII timeline of the equilibrium"))
    return parser


def _read_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _solve(instance: ProblemInstance, args) -> EquilibriumResult:
    options = {"exact": not args.use_float, "tol": args.tolerance}
    if instance.mode == CONTINUOUS:
        result = solve_continuous(instance, **options)
    else:
        result = solve(instance, **options)
    if args.dump_lp:
        with open(args.dump_lp, "w", encoding="utf-8") as fh:
            fh.write(result.lp.to_lp_format())
    return result


def _report_to_dict(report) -> dict:
    return {
        "passed": report.passed,
        "checks": [
            {"name": c.name, "passed": c.passed, "magnitude": None if c.magnitude is None else _fmt(c.magnitude), "detail": c.detail}
            for c in report.checks
        ],
    }


def run_command(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Run one CLI command and return its exit code (0 ok, 1 usage, 2 failure)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "gen":
            text = serialize_instance(generate_instance(args.seed, args.T, args.M, args.K, args.n, args.D, args.R))
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                stdout.write(text)
            return EXIT_OK
        instance = _read_instance(args.file)
    except (OSError, ParseError, InstanceError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE

    try:
        if args.command == "oracle":
            inst = scale_instance(instance)[0] if instance.mode == CONTINUOUS else instance
            stdout.write(_fmt(matrix_game_value(inst, args.cap)) + "\n")
            return EXIT_OK
        if args.command == "verify" and args.strategy:
            with open(args.strategy, encoding="utf-8") as fh:
                claimed = parse_strategy(fh.read())
        else:
            claimed = _solve(instance, args)
        if args.command == "solve":
            stdout.write(_dumps(result_to_dict(claimed, args.flows)))
            return EXIT_OK
        if args.command == "render":
            stdout.write(render_timeline(instance, claimed))
            return EXIT_OK
        tol = 1e-6 if args.use_float else args.tolerance
        report = check_equilibrium(instance, claimed, args.cap, tol=max(tol, 1e-9))
        stdout.write(_dumps(_report_to_dict(report)))
        return EXIT_OK if report.passed else EXIT_FAILURE
    except (TooLarge, LPError, PatrolGameError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_FAILURE


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(run_command())


if __name__ == "__main__":  # pragma: no cover
    main()
