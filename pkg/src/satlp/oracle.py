"""Exhaustive SAT oracle.

Every one of the 2^n assignments is evaluated, so the answer does not depend
on any search heuristic. Assignments are ordered lexicographically on
``(x1, ..., xn)`` with FALSE before TRUE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnf import CnfInstance
from .errors import InstanceTooLarge

DEFAULT_CAP = 26


@dataclass(frozen=True)
class OracleResult:
    satisfiable: bool
    model_count: int
    witness: tuple[bool, ...] | None = None

    def __post_init__(self):
        assert self.satisfiable == (self.model_count > 0)
        assert (self.witness is not None) == self.satisfiable


def _satisfying_mask(inst: CnfInstance, cap: int) -> np.ndarray:
    n = inst.num_vars
    if n > cap:
        raise InstanceTooLarge(f"{n} variables exceeds the oracle cap of {cap}")
    codes = np.arange(1 << n, dtype=np.int64)
    # variable v is the bit at position n - v, so code order is lexicographic
    bits = {v: ((codes >> (n - v)) & 1).astype(bool) for v in range(1, n + 1)}
    ok = np.ones(1 << n, dtype=bool)
    for c in inst.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in c:
            sat |= bits[lit] if lit > 0 else ~bits[-lit]
        ok &= sat
    return ok


def _decode(code: int, n: int) -> tuple[bool, ...]:
    return tuple(bool((code >> (n - v)) & 1) for v in range(1, n + 1))


def brute_force_sat(inst: CnfInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    ok = _satisfying_mask(inst, cap)
    count = int(ok.sum())
    if not count:
        return OracleResult(False, 0, None)
    witness = _decode(int(np.argmax(ok)), inst.num_vars)
    assert inst.satisfied_by(dict(enumerate(witness, 1)))
    return OracleResult(True, count, witness)


def models(inst: CnfInstance, cap: int = DEFAULT_CAP) -> list[tuple[bool, ...]]:
    """All satisfying assignments in lexicographic order."""
    ok = _satisfying_mask(inst, cap)
    return [_decode(int(c), inst.num_vars) for c in np.flatnonzero(ok)]
