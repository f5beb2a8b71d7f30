"""Reading a satisfying assignment off a feasible system.

Extraction maximizes a growing sum of single-literal marginals, one variable
at a time. If the polytope contains a deterministic point consistent with the
choices so far, some sign of the next variable lets the sum reach ``k`` at
step ``k``. Separability checks whether a point's pair and triple marginals
factor into products of single marginals.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .builder import LinearSystem, Mode, Tag, format_rational, triple_marginal
from .errors import ExtractionFailed, FreeVariable, InconsistentPoint
from .exact import Solver
from .marginals import RelevantSet, sign_patterns


class Value(str, enum.Enum):
    TRUE = "T"
    FALSE = "F"
    FREE = "free"


@dataclass(frozen=True)
class TraceStep:
    variable: int
    sign: int
    value: Fraction
    # optimum for each sign tried at this step
    candidates: dict[int, Fraction] = field(default_factory=dict)


@dataclass(frozen=True)
class AssignmentCertificate:
    assignment: dict[int, Value]
    trace: tuple[TraceStep, ...]

    def as_bools(self) -> dict[int, bool]:
        """Assignment with FREE variables set FALSE."""
        return {v: a is Value.TRUE for v, a in self.assignment.items()}

    def as_tuple(self) -> tuple[bool, ...]:
        b = self.as_bools()
        return tuple(b[v] for v in sorted(b))

    def to_dict(self) -> dict:
        return {
            "assignment": {str(v): a.value for v, a in sorted(self.assignment.items())},
            "trace": [
                {"variable": s.variable, "sign": "+" if s.sign > 0 else "-", "value": format_rational(s.value)}
                for s in self.trace
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _relevant(sys: LinearSystem) -> RelevantSet:
    if sys.relevant is None:
        raise ValueError(f"a {sys.mode.value} system carries no relevant set")
    return sys.relevant


def marginal_expression(sys: LinearSystem, v: int, sign: int) -> dict[int, Fraction]:
    """Sparse row whose value at a feasible point is P(sign * v).

    In full mode this is the single unknown itself. In reduced mode it sums the
    four unknowns of the lexicographically smallest triple containing ``v``.
    """
    rs = _relevant(sys)
    lit = v if sign > 0 else -v
    if v not in rs.singles:
        raise FreeVariable(v)
    if sys.mode is Mode.FULL:
        return {sys.unknowns[(lit,)]: Fraction(1)}
    triple = rs.triples_containing(v)[0]
    return {j: Fraction(1) for j in triple_marginal(sys.unknowns, triple, (lit,))}


def clauses_of(sys: LinearSystem) -> list[tuple[int, ...]]:
    """Recover the clauses from the SPECIFIC rows (each zeroes a clause's complement)."""
    out = []
    for r in sys.rows:
        if r.tag is Tag.SPECIFIC:
            (j,) = r.coeffs
            out.append(tuple(-l for l in sys.unknowns.requirement(j)))
    return out


def extract_deterministic(sys: LinearSystem, solver: Solver | None = None) -> AssignmentCertificate:
    """Fix variables one at a time by maximizing the accumulated marginal sum.

    Raises ExtractionFailed when neither sign of some variable reaches the
    step target. ``solver`` may be passed to reuse an existing phase 1.
    """
    rs = _relevant(sys)
    solver = solver or Solver(sys)
    acc: dict[int, Fraction] = {}
    chosen: dict[int, int] = {}
    trace: list[TraceStep] = []
    for k, v in enumerate(rs.singles, 1):
        best = {}
        for s in (1, -1):
            obj = dict(acc)
            for j, q in marginal_expression(sys, v, s).items():
                obj[j] = obj.get(j, Fraction(0)) + q
            best[s] = solver.maximize(obj).value
        hits = [s for s in (1, -1) if best[s] == k]
        if not hits:
            raise ExtractionFailed(k, v, {"+": best[1], "-": best[-1]}, trace)
        s = -1 if -1 in hits else 1
        chosen[v] = s
        for j, q in marginal_expression(sys, v, s).items():
            acc[j] = acc.get(j, Fraction(0)) + q
        trace.append(TraceStep(v, s, best[s], best))
    assignment = {v: Value.FREE for v in range(1, sys.num_vars + 1)}
    for v, s in chosen.items():
        assignment[v] = Value.TRUE if s > 0 else Value.FALSE
    for c in clauses_of(sys):
        if not any(chosen[abs(l)] * l > 0 for l in c):
            raise AssertionError(f"extracted assignment falsifies clause {c}")
    return AssignmentCertificate(assignment, tuple(trace))


def _marginals(point: Mapping[int, Fraction], sys: LinearSystem):
    """Single, pair and triple marginals keyed by literal tuples."""
    rs = _relevant(sys)
    idx = sys.unknowns
    val = lambda cols: sum((Fraction(point.get(j, 0)) for j in cols), Fraction(0))
    if sys.mode is Mode.FULL:
        singles = {r: val([idx[r]]) for v in rs.singles for r in sign_patterns((v,))}
        pairs = {r: val([idx[r]]) for p in rs.pairs for r in sign_patterns(p)}
        triples = {r: val([idx[r]]) for t in rs.triples for r in sign_patterns(t)}
        return singles, pairs, triples
    triples = {r: val([idx[r]]) for t in rs.triples for r in sign_patterns(t)}
    lower: dict[tuple[int, ...], Fraction] = {}
    for t in rs.triples:
        for size in (1, 2):
            for vs in combinations(t, size):
                for pat in sign_patterns(vs):
                    q = val(triple_marginal(idx, t, pat))
                    if lower.setdefault(pat, q) != q:
                        raise InconsistentPoint(f"marginal of {pat} differs across triples")
    singles = {r: q for r, q in lower.items() if len(r) == 1}
    pairs = {r: q for r, q in lower.items() if len(r) == 2}
    return singles, pairs, triples


def is_separable(point: Mapping[int, Fraction], sys: LinearSystem) -> bool:
    """True iff every pair and triple marginal is the product of its singles."""
    singles, pairs, triples = _marginals(point, sys)
    for group in (pairs, triples):
        for req, q in group.items():
            prod = Fraction(1)
            for lit in req:
                prod *= singles[(lit,)]
            if prod != q:
                return False
    return True


__all__ = [
    "AssignmentCertificate",
    "TraceStep",
    "Value",
    "clauses_of",
    "extract_deterministic",
    "is_separable",
    "marginal_expression",
]
