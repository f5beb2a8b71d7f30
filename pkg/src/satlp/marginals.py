"""Naming and indexing of partial-probability unknowns.

An unknown is named by a *requirement*: a conjunction of one to three
literals over distinct variables, kept as a tuple of signed ints sorted by
magnitude. ``(1, -3)`` names P(1;-3), the probability that x1 is TRUE and x3
is FALSE given the formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .cnf import Clause, CnfInstance
from .errors import DuplicateVariable, EmptyRequirement, TooManyLiterals

Requirement = tuple[int, ...]
VarSet = tuple[int, ...]

SIGNS = (-1, 1)


def canonicalize(lits: Iterable[int]) -> Requirement:
    lits = tuple(int(l) for l in lits)
    if not lits:
        raise EmptyRequirement("a requirement needs at least one literal")
    if len(lits) > 3:
        raise TooManyLiterals(f"{lits} has more than 3 literals")
    if any(l == 0 for l in lits):
        raise ValueError("literal 0 is not a variable")
    if len({abs(l) for l in lits}) != len(lits):
        raise DuplicateVariable(f"{lits} mentions a variable twice")
    return tuple(sorted(lits, key=abs))


def clause_complement(clause: Clause) -> Requirement:
    """The assignment pattern that falsifies ``clause``."""
    return canonicalize(-l for l in clause)


def render(req: Requirement) -> str:
    return "P(" + ";".join(str(l) for l in req) + ")"


def variables_of(req: Requirement) -> VarSet:
    return tuple(abs(l) for l in req)


def sign_patterns(vs: VarSet) -> Iterator[Requirement]:
    """All 2^k requirements over the variables ``vs``, negative sign first."""
    for signs in product(SIGNS, repeat=len(vs)):
        yield tuple(v * s for v, s in zip(vs, signs))


def requirement_key(req: Requirement):
    return (len(req), variables_of(req), tuple(l > 0 for l in req))


@dataclass(frozen=True)
class RelevantSet:
    """Variable sets touched by the clauses, closed downward."""

    triples: tuple[VarSet, ...]
    pairs: tuple[VarSet, ...]
    singles: tuple[int, ...]

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[int]]) -> "RelevantSet":
        ts = sorted({tuple(sorted(t)) for t in triples})
        ps = sorted({p for t in ts for p in combinations(t, 2)})
        ss = sorted({v for t in ts for v in t})
        return cls(tuple(ts), tuple(ps), tuple(ss))

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.singles), len(self.pairs), len(self.triples)

    @property
    def full_unknown_count(self) -> int:
        s, p, t = self.counts
        return 2 * s + 4 * p + 8 * t

    @property
    def reduced_unknown_count(self) -> int:
        return 8 * len(self.triples)

    def triples_containing(self, v: int) -> list[VarSet]:
        return [t for t in self.triples if v in t]


def relevant_set(inst: CnfInstance) -> RelevantSet:
    return RelevantSet.from_triples(tuple(abs(l) for l in c) for c in inst.clauses)


def all_triples_set(n: int) -> RelevantSet:
    """Relevant set with every 3-subset of ``1..n`` (the unconstrained case)."""
    return RelevantSet.from_triples(combinations(range(1, n + 1), 3))


class UnknownIndex:
    """Dense bijection between requirements and column indices."""

    def __init__(self, requirements: Iterable[Requirement]):
        reqs = sorted({canonicalize(r) for r in requirements}, key=requirement_key)
        self.requirements: tuple[Requirement, ...] = tuple(reqs)
        self._index = {r: i for i, r in enumerate(reqs)}

    @classmethod
    def full(cls, rs: RelevantSet) -> "UnknownIndex":
        reqs = [r for s in rs.singles for r in sign_patterns((s,))]
        reqs += [r for p in rs.pairs for r in sign_patterns(p)]
        reqs += [r for t in rs.triples for r in sign_patterns(t)]
        return cls(reqs)

    @classmethod
    def reduced(cls, rs: RelevantSet) -> "UnknownIndex":
        return cls(r for t in rs.triples for r in sign_patterns(t))

    def __len__(self) -> int:
        return len(self.requirements)

    def __iter__(self):
        return iter(self.requirements)

    def __contains__(self, req) -> bool:
        return tuple(req) in self._index

    def __getitem__(self, req: Sequence[int]) -> int:
        return self._index[canonicalize(req)]

    def lookup(self, req: Sequence[int]) -> int:
        return self[req]

    def requirement(self, idx: int) -> Requirement:
        return self.requirements[idx]
