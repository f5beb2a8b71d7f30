"""3-CNF instances: model, DIMACS I/O and a seeded random generator.

Literals are signed integers: ``+i`` is variable *i* TRUE, ``-i`` is FALSE.
A clause holds exactly three literals over distinct variables and is stored
sorted by magnitude, so ``(X3, X2, X1)`` and ``(X1, X2, X3)`` are the same
clause.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Iterable, Sequence

from .errors import (
    ClauseNotThreeDistinctVars,
    LiteralOutOfRange,
    MalformedHeader,
    TooManyClauses,
    TruncatedClause,
)

Clause = tuple[int, int, int]


def make_clause(lits: Iterable[int], num_vars: int | None = None) -> Clause:
    """Validate three literals and return them sorted by magnitude."""
    lits = tuple(int(x) for x in lits)
    if len(lits) != 3:
        raise ClauseNotThreeDistinctVars(f"clause {lits} does not have exactly 3 literals")
    for lit in lits:
        if lit == 0:
            raise LiteralOutOfRange("literal 0 is not a variable")
        if num_vars is not None and abs(lit) > num_vars:
            raise LiteralOutOfRange(f"literal {lit} exceeds variable count {num_vars}")
    if len({abs(x) for x in lits}) != 3:
        raise ClauseNotThreeDistinctVars(f"clause {lits} repeats a variable")
    return tuple(sorted(lits, key=abs))  # type: ignore[return-value]


@dataclass(frozen=True)
class CnfInstance:
    num_vars: int
    clauses: tuple[Clause, ...]
    # number of duplicate clauses dropped at construction; not part of equality
    duplicates_removed: int = field(default=0, compare=False)

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]] = ()):
        if num_vars < 1:
            raise MalformedHeader(f"variable count must be positive, got {num_vars}")
        seen: dict[Clause, None] = {}
        total = 0
        for c in clauses:
            seen.setdefault(make_clause(c, num_vars), None)
            total += 1
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "clauses", tuple(seen))
        object.__setattr__(self, "duplicates_removed", total - len(seen))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def clause_set(self) -> frozenset[Clause]:
        return frozenset(self.clauses)

    def same_as(self, other: "CnfInstance") -> bool:
        """Equality up to clause order."""
        return self.num_vars == other.num_vars and self.clause_set() == other.clause_set()

    def occurring_variables(self) -> list[int]:
        return sorted({abs(lit) for c in self.clauses for lit in c})

    def satisfied_by(self, assignment) -> bool:
        """True if every clause has a true literal.

        ``assignment`` maps variable -> bool (or is indexable by variable).
        """
        for c in self.clauses:
            if not any(bool(assignment[abs(l)]) == (l > 0) for l in c):
                return False
        return True


def parse_dimacs(data: bytes | str) -> CnfInstance:
    """Parse DIMACS CNF text into an instance.

    Clauses may span lines. Everything after a ``%`` line (SATLIB trailer)
    is ignored.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise MalformedHeader(f"line {lineno}: second problem line")
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise MalformedHeader(f"line {lineno}: expected 'p cnf <n> <m>', got {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedHeader(f"line {lineno}: non-integer counts in {line!r}") from None
            if n < 1 or m < 0:
                raise MalformedHeader(f"line {lineno}: bad counts in {line!r}")
            header = (n, m)
            continue
        if header is None:
            raise MalformedHeader(f"line {lineno}: clause data before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise MalformedHeader(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                if len(current) != 3 or len({abs(x) for x in current}) != 3:
                    raise ClauseNotThreeDistinctVars(
                        f"line {lineno}: clause {current} is not 3 distinct variables"
                    )
                clauses.append(current)
                current = []
                continue
            if abs(lit) > header[0]:
                raise LiteralOutOfRange(f"line {lineno}: literal {lit} exceeds n={header[0]}")
            current.append(lit)
    if header is None:
        raise MalformedHeader("missing 'p cnf' problem line")
    if current:
        raise TruncatedClause(f"input ended inside clause {current}")
    return CnfInstance(header[0], clauses)


def emit_dimacs(inst: CnfInstance, comments: Sequence[str] = ()) -> bytes:
    lines = [f"c {c}" if c else "c" for c in comments]
    lines.append(f"p cnf {inst.num_vars} {inst.num_clauses}")
    lines.extend(" ".join(str(l) for l in c) + " 0" for c in inst.clauses)
    return ("\n".join(lines) + "\n").encode("ascii")


def max_clauses(n: int) -> int:
    return 8 * comb(n, 3)


def generate_random_3sat(n: int, m: int, seed: int) -> CnfInstance:
    """Uniform random 3-SAT with ``m`` distinct clauses over ``n`` variables.

    Uses :class:`random.Random` (Mersenne Twister) seeded with ``seed``, so
    output is reproducible for a fixed Python version. Each clause draws three
    distinct variables and independent fair signs; a draw that repeats an
    earlier clause is thrown away and redrawn. When ``m`` is more than half of
    all possible clauses, the same distribution is sampled directly from the
    full clause list to avoid long rejection runs.
    """
    if n < 3:
        raise ValueError(f"need at least 3 variables, got {n}")
    if m < 0:
        raise ValueError(f"clause count must be nonnegative, got {m}")
    limit = max_clauses(n)
    if m > limit:
        raise TooManyClauses(f"{m} clauses requested but only {limit} exist for n={n}")
    rng = random.Random(seed)
    if 2 * m > limit:
        every = [
            tuple(v * s for v, s in zip(vs, signs))
            for vs in combinations(range(1, n + 1), 3)
            for signs in product((-1, 1), repeat=3)
        ]
        return CnfInstance(n, rng.sample(every, m))
    chosen: dict[Clause, None] = {}
    variables = range(1, n + 1)
    while len(chosen) < m:
        vs = rng.sample(variables, 3)
        c = make_clause(v if rng.random() < 0.5 else -v for v in vs)
        chosen.setdefault(c, None)
    return CnfInstance(n, chosen)
