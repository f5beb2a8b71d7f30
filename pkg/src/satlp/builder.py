"""Construction of the auxiliary Bayes system for a 3-CNF instance.

Two shapes are produced:

* ``FULL``: unknowns for every relevant single, pair and triple, with the
  normalization and marginalization identities linking them.
* ``REDUCED``: only the 8 three-literal unknowns of each relevant triple.
  Lower-order marginals are implicit sums, and triples that overlap are tied
  together by consistency rows.

Every unknown is implicitly nonnegative. Each clause adds one row forcing the
probability of its falsifying pattern to zero.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .cnf import CnfInstance
from .errors import EmptyInstance, IndexOutOfRange
from .marginals import (
    SIGNS,
    Requirement,
    RelevantSet,
    UnknownIndex,
    VarSet,
    all_triples_set,
    canonicalize,
    clause_complement,
    relevant_set,
    render,
    sign_patterns,
)


class Tag(str, enum.Enum):
    NORMALIZATION = "NORMALIZATION"
    SINGLE_MARGINAL = "SINGLE_MARGINAL"
    PAIR_MARGINAL = "PAIR_MARGINAL"
    TRIPLE_NORMALIZATION = "TRIPLE_NORMALIZATION"
    CROSS_SINGLE = "CROSS_SINGLE"
    CROSS_PAIR = "CROSS_PAIR"
    SPECIFIC = "SPECIFIC"


class Mode(str, enum.Enum):
    FULL = "full"
    REDUCED = "reduced"
    CUSTOM = "custom"


class Rule(str, enum.Enum):
    """Which consistency rows tie overlapping triples together (reduced mode).

    VERBOSE and MINIMAL compare every pair of overlapping triples. VERBOSE
    emits single-variable rows for every shared variable, MINIMAL only when
    the two triples share exactly one variable. CHAIN links, for each
    variable and each variable pair, consecutive triples (lexicographic
    order) that contain it, i.e. a spanning path instead of all pairs.
    All three describe the same feasible set.
    """

    VERBOSE = "verbose"
    MINIMAL = "minimal"
    CHAIN = "chain"


FULL_TAGS = (Tag.NORMALIZATION, Tag.SINGLE_MARGINAL, Tag.PAIR_MARGINAL, Tag.SPECIFIC)
REDUCED_TAGS = (Tag.TRIPLE_NORMALIZATION, Tag.CROSS_SINGLE, Tag.CROSS_PAIR, Tag.SPECIFIC)


@dataclass(frozen=True)
class Row:
    """One equation ``sum(coeffs[j] * x_j) == constant``."""

    coeffs: Mapping[int, Fraction]
    constant: Fraction
    tag: Tag

    def __post_init__(self):
        clean = {int(j): Fraction(q) for j, q in self.coeffs.items() if q != 0}
        if not clean:
            raise ValueError("a row needs at least one nonzero coefficient")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))
        object.__setattr__(self, "constant", Fraction(self.constant))

    def evaluate(self, point: Mapping[int, Fraction]) -> Fraction:
        return sum((q * point.get(j, 0) for j, q in self.coeffs.items()), Fraction(0))

    def holds_at(self, point: Mapping[int, Fraction]) -> bool:
        return self.evaluate(point) == self.constant


def _row(pos: Iterable[int], neg: Iterable[int], constant, tag: Tag) -> Row:
    coeffs: Counter = Counter()
    for j in pos:
        coeffs[j] += 1
    for j in neg:
        coeffs[j] -= 1
    return Row({j: Fraction(q) for j, q in coeffs.items()}, Fraction(constant), tag)


@dataclass(frozen=True)
class LinearSystem:
    unknowns: UnknownIndex
    rows: tuple[Row, ...]
    mode: Mode
    rule: Rule | None = None
    relevant: RelevantSet | None = None
    num_vars: int = 0
    free_variables: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = len(self.unknowns)
        for i, r in enumerate(self.rows):
            for j in r.coeffs:
                if not 0 <= j < n:
                    raise IndexOutOfRange(f"row {i} references unknown {j} of {n}")

    @classmethod
    def custom(cls, requirements: Sequence[Sequence[int]], equations) -> "LinearSystem":
        """Ad hoc system from ``(coeffs-by-requirement, constant[, tag])`` tuples."""
        idx = UnknownIndex(requirements)
        rows = []
        for eq in equations:
            coeffs, constant = eq[0], eq[1]
            tag = eq[2] if len(eq) > 2 else Tag.SPECIFIC
            rows.append(Row({idx[r]: Fraction(q) for r, q in coeffs.items()}, constant, tag))
        return cls(idx, tuple(rows), Mode.CUSTOM)

    @property
    def num_unknowns(self) -> int:
        return len(self.unknowns)

    def is_satisfied_by(self, point: Mapping[int, Fraction]) -> bool:
        """Exact check of every row plus nonnegativity."""
        if any(v < 0 for v in point.values()):
            return False
        return all(r.holds_at(point) for r in self.rows)

    def point_from_requirements(self, values: Mapping[Requirement, Fraction]) -> dict[int, Fraction]:
        return {self.unknowns[r]: Fraction(v) for r, v in values.items()}

    def named(self, point: Mapping[int, Fraction]) -> dict[str, Fraction]:
        return {render(self.unknowns.requirement(j)): v for j, v in sorted(point.items())}


def _require_clauses(inst: CnfInstance) -> RelevantSet:
    if not inst.clauses:
        raise EmptyInstance("instance has no clauses, so there are no relevant unknowns")
    return relevant_set(inst)


def _free_vars(inst: CnfInstance, rs: RelevantSet) -> tuple[int, ...]:
    used = set(rs.singles)
    return tuple(v for v in range(1, inst.num_vars + 1) if v not in used)


def _specific_rows(inst: CnfInstance, idx: UnknownIndex) -> list[Row]:
    return [_row([idx[clause_complement(c)]], [], 0, Tag.SPECIFIC) for c in inst.clauses]


def _universal_full_rows(rs: RelevantSet, idx: UnknownIndex) -> list[Row]:
    rows = []
    for v in rs.singles:
        rows.append(_row([idx[(v,)], idx[(-v,)]], [], 1, Tag.NORMALIZATION))
    for a, b in rs.pairs:
        for x, y in ((a, b), (b, a)):
            for s in SIGNS:
                lit = s * x
                rows.append(
                    _row([idx[(lit,)]], [idx[(lit, y)], idx[(lit, -y)]], 0, Tag.SINGLE_MARGINAL)
                )
    for t in rs.triples:
        for z in reversed(t):
            rest = tuple(v for v in t if v != z)
            for base in sign_patterns(rest):
                rows.append(
                    _row([idx[base]], [idx[base + (z,)], idx[base + (-z,)]], 0, Tag.PAIR_MARGINAL)
                )
    return rows


def build_full(inst: CnfInstance) -> LinearSystem:
    rs = _require_clauses(inst)
    idx = UnknownIndex.full(rs)
    rows = _universal_full_rows(rs, idx) + _specific_rows(inst, idx)
    return LinearSystem(idx, tuple(rows), Mode.FULL, None, rs, inst.num_vars, _free_vars(inst, rs))


def build_universal(n: int) -> LinearSystem:
    """Full-mode universal rows over every triple of ``n`` variables, no clauses."""
    if n < 3:
        raise ValueError("need at least 3 variables for a triple")
    rs = all_triples_set(n)
    idx = UnknownIndex.full(rs)
    return LinearSystem(idx, tuple(_universal_full_rows(rs, idx)), Mode.FULL, None, rs, n)


def triple_marginal(idx: UnknownIndex, triple: VarSet, lits: Sequence[int]) -> list[int]:
    """Columns of ``triple``'s unknowns that agree with the partial pattern ``lits``."""
    want = set(lits)
    return [idx[r] for r in sign_patterns(triple) if want.issubset(r)]


def build_reduced(inst: CnfInstance, rule: Rule | str = Rule.MINIMAL) -> LinearSystem:
    rule = Rule(rule)
    rs = _require_clauses(inst)
    idx = UnknownIndex.reduced(rs)
    norms = [_row([idx[r] for r in sign_patterns(t)], [], 1, Tag.TRIPLE_NORMALIZATION) for t in rs.triples]
    singles: list[Row] = []
    pairs: list[Row] = []

    def link_single(t1, t2, v):
        for s in SIGNS:
            singles.append(
                _row(triple_marginal(idx, t1, (s * v,)), triple_marginal(idx, t2, (s * v,)), 0, Tag.CROSS_SINGLE)
            )

    def link_pair(t1, t2, pair):
        for pat in sign_patterns(pair):
            pairs.append(_row(triple_marginal(idx, t1, pat), triple_marginal(idx, t2, pat), 0, Tag.CROSS_PAIR))

    if rule is Rule.CHAIN:
        for v in rs.singles:
            ts = rs.triples_containing(v)
            for t1, t2 in zip(ts, ts[1:]):
                link_single(t1, t2, v)
        for pair in rs.pairs:
            ts = [t for t in rs.triples if pair[0] in t and pair[1] in t]
            for t1, t2 in zip(ts, ts[1:]):
                link_pair(t1, t2, pair)
    else:
        for t1, t2 in combinations(rs.triples, 2):
            shared = tuple(v for v in t1 if v in t2)
            if not shared:
                continue
            if len(shared) == 2:
                link_pair(t1, t2, shared)
            if rule is Rule.VERBOSE or len(shared) == 1:
                for v in shared:
                    link_single(t1, t2, v)
    rows = norms + singles + pairs + _specific_rows(inst, idx)
    return LinearSystem(idx, tuple(rows), Mode.REDUCED, rule, rs, inst.num_vars, _free_vars(inst, rs))


def build(inst: CnfInstance, mode: Mode | str = Mode.REDUCED, rule: Rule | str = Rule.MINIMAL) -> LinearSystem:
    if Mode(mode) is Mode.FULL:
        return build_full(inst)
    return build_reduced(inst, rule)


@dataclass(frozen=True)
class SystemStats:
    mode: Mode
    rule: Rule | None
    unknown_count: int
    rows_by_tag: dict[str, int]

    @property
    def total_rows(self) -> int:
        return sum(self.rows_by_tag.values())

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "rule": self.rule.value if self.rule else None,
            "unknowns": self.unknown_count,
            "rows_by_tag": dict(self.rows_by_tag),
            "total_rows": self.total_rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def stats(sys: LinearSystem) -> SystemStats:
    counts = Counter(r.tag for r in sys.rows)
    if sys.mode is Mode.FULL:
        tags = FULL_TAGS
    elif sys.mode is Mode.REDUCED:
        tags = REDUCED_TAGS
    else:
        tags = tuple(t for t in Tag if counts[t])
    return SystemStats(sys.mode, sys.rule, sys.num_unknowns, {t.value: counts[t] for t in tags})


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_row(sys: LinearSystem, row: Row) -> str:
    parts = []
    for j, q in row.coeffs.items():
        term = f"{format_rational(abs(q))}*{render(sys.unknowns.requirement(j))}"
        if not parts:
            parts.append(term if q > 0 else f"-{term}")
        else:
            parts.append(("+ " if q > 0 else "- ") + term)
    return f"{row.tag.value}: {' '.join(parts)} = {format_rational(row.constant)}"


def dump_lp(sys: LinearSystem) -> bytes:
    st = stats(sys)
    lines = [
        f"# mode: {sys.mode.value}",
        f"# rule: {sys.rule.value if sys.rule else '-'}",
        f"# variables: {sys.num_vars}",
        f"# free: {' '.join(map(str, sys.free_variables)) or '-'}",
        f"# unknowns: {st.unknown_count}",
        f"# rows: {st.total_rows} " + " ".join(f"{k}={v}" for k, v in st.rows_by_tag.items()),
    ]
    lines += [f"# x{j} {render(r)}" for j, r in enumerate(sys.unknowns)]
    lines += [format_row(sys, r) for r in sys.rows]
    return ("\n".join(lines) + "\n").encode("ascii")


def point_from_distribution(sys: LinearSystem, weights: Mapping[tuple[bool, ...], Fraction]) -> dict[int, Fraction]:
    """Marginalize a distribution over complete assignments onto every unknown.

    ``weights`` maps an assignment tuple (index ``v - 1`` holds variable v) to
    its probability.
    """
    point = {}
    for j, req in enumerate(sys.unknowns):
        total = Fraction(0)
        for a, w in weights.items():
            if all(a[abs(l) - 1] == (l > 0) for l in req):
                total += w
        point[j] = total
    return point


def point_from_assignment(sys: LinearSystem, assignment: Sequence[bool]) -> dict[int, Fraction]:
    return point_from_distribution(sys, {tuple(assignment): Fraction(1)})


__all__ = [
    "Tag",
    "Mode",
    "Rule",
    "Row",
    "LinearSystem",
    "SystemStats",
    "build",
    "build_full",
    "build_reduced",
    "build_universal",
    "canonicalize",
    "dump_lp",
    "stats",
    "triple_marginal",
    "point_from_distribution",
    "point_from_assignment",
]
