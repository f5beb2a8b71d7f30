"""Exact rational LP over ``{A x = b, x >= 0}``.

All pivoting is done on integer rows. Each tableau row keeps its own positive
scale: the basic variable's coefficient is an arbitrary positive integer
rather than 1, and rows are divided by the gcd of their entries after every
update. Values are recovered as ``Fraction(rhs, scale)``. No floating point is
used anywhere.

Pivot rule is Bland's least-index rule (entering: smallest column with
negative reduced cost; leaving: minimum ratio, ties to the smallest basic
column), which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, gcd, lcm
from typing import Mapping, Sequence

from .builder import LinearSystem, Row, format_rational
from .errors import IndexOutOfRange, InfeasibleSystem, TooLarge, UnboundedObjective

Point = dict[int, Fraction]

# consecutive degenerate pivots tolerated before falling back to Bland
STALL = 50


def _integer_row(row: Row) -> tuple[dict[int, int], int, int]:
    """Scale a rational row to integers; returns (coeffs, rhs, scale)."""
    scale = lcm(*(q.denominator for q in row.coeffs.values()), row.constant.denominator)
    coeffs = {j: int(q * scale) for j, q in row.coeffs.items()}
    return coeffs, int(row.constant * scale), scale


def _normalize(coeffs: dict[int, int], *extra: int) -> tuple[dict[int, int], list[int]]:
    g = gcd(*coeffs.values(), *extra)
    if g > 1:
        return {j: v // g for j, v in coeffs.items()}, [e // g for e in extra]
    return coeffs, list(extra)


def _combine(a: dict[int, int], ka: int, b: dict[int, int], kb: int) -> dict[int, int]:
    """``ka*a - kb*b`` with zeros dropped."""
    out = {j: ka * v for j, v in a.items()} if ka != 1 else dict(a)
    for j, v in b.items():
        w = out.get(j, 0) - kb * v
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    return out


# ---------------------------------------------------------------------------
# rank


def _eliminate_rows(rows, with_rhs: bool = False):
    """Fraction-free sparse row echelon form.

    ``rows`` yields ``(coeffs, rhs)`` integer pairs. Returns the pivot table
    ``{pivot_col: (coeffs, rhs)}`` in insertion order, and a flag telling
    whether some row reduced to ``0 = nonzero``.
    """
    pivots: dict[int, tuple[dict[int, int], int]] = {}
    order: dict[int, int] = {}
    inconsistent = False
    for coeffs, rhs in rows:
        coeffs = dict(coeffs)
        while True:
            hits = [c for c in coeffs if c in order]
            if not hits:
                break
            c = min(hits, key=order.__getitem__)
            prow, prhs = pivots[c]
            p, f = prow[c], coeffs[c]
            g = gcd(p, f)
            coeffs = _combine(coeffs, p // g, prow, f // g)
            rhs = (p // g) * rhs - (f // g) * prhs
            if coeffs:
                coeffs, (rhs,) = _normalize(coeffs, rhs)
        if not coeffs:
            if with_rhs and rhs != 0:
                inconsistent = True
            continue
        c = min(coeffs)
        order[c] = len(order)
        pivots[c] = (coeffs, rhs)
    return pivots, inconsistent


def rank(sys: LinearSystem) -> int:
    """Rank of the coefficient matrix (constants ignored)."""
    pivots, _ = _eliminate_rows((_integer_row(r)[:2] for r in sys.rows))
    return len(pivots)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class FarkasCertificate:
    """Row multipliers ``y`` with ``y^T A >= 0`` and ``y^T b < 0``."""

    multipliers: dict[int, Fraction]

    def to_json(self) -> dict[str, str]:
        return {str(i): format_rational(q) for i, q in sorted(self.multipliers.items())}


@dataclass(frozen=True)
class Feasible:
    point: Point
    feasible = True

    def to_json(self) -> dict:
        return {"verdict": "feasible", "point": {str(j): format_rational(v) for j, v in sorted(self.point.items())}}


@dataclass(frozen=True)
class Infeasible:
    certificate: FarkasCertificate
    feasible = False

    def to_json(self) -> dict:
        return {"verdict": "infeasible", "certificate": self.certificate.to_json()}


FeasibilityVerdict = Feasible | Infeasible


@dataclass(frozen=True)
class Optimum:
    value: Fraction
    point: Point


def combine_rows(sys: LinearSystem, multipliers: Mapping[int, Fraction]) -> tuple[dict[int, Fraction], Fraction]:
    coeffs: dict[int, Fraction] = {}
    const = Fraction(0)
    for i, y in multipliers.items():
        if not 0 <= i < len(sys.rows):
            raise IndexOutOfRange(f"certificate row {i} not in 0..{len(sys.rows) - 1}")
        y = Fraction(y)
        if y == 0:
            continue
        row = sys.rows[i]
        for j, q in row.coeffs.items():
            coeffs[j] = coeffs.get(j, Fraction(0)) + y * q
        const += y * row.constant
    return coeffs, const


def verify_farkas(sys: LinearSystem, cert: FarkasCertificate | Mapping[int, Fraction]) -> bool:
    """Check that the multipliers combine the rows into ``nonneg . x = negative``.

    A multiplier vector whose negation has that property is accepted too, as
    it proves infeasibility just as well.
    """
    mult = cert.multipliers if isinstance(cert, FarkasCertificate) else cert
    coeffs, const = combine_rows(sys, mult)
    if const < 0 and all(q >= 0 for q in coeffs.values()):
        return True
    return const > 0 and all(q <= 0 for q in coeffs.values())


# ---------------------------------------------------------------------------
# simplex


class Tableau:
    """Sparse integer tableau for ``min c.x  s.t.  A x = b, x >= 0``.

    Row ``i`` is the equation ``sum(rows[i][j] x_j) = rhs[i]`` where
    ``rows[i][basis[i]] > 0`` and that column is zero in every other row. The
    objective row ``z`` stores reduced costs as ``z[j] / zscale``; ``zrhs /
    zscale`` is minus the current objective value.
    """

    def __init__(self, rows: list[dict[int, int]], rhs: list[int], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.z: dict[int, int] = {}
        self.zrhs = 0
        self.zscale = 1
        self.pivots = 0

    def copy(self) -> "Tableau":
        t = Tableau([dict(r) for r in self.rows], list(self.rhs), list(self.basis))
        t.z, t.zrhs, t.zscale = dict(self.z), self.zrhs, self.zscale
        return t

    def set_objective(self, cost: Mapping[int, int]) -> None:
        """Install integer costs and price out the current basis."""
        z = {j: c for j, c in cost.items() if c}
        zrhs, zscale = 0, 1
        for i, b in enumerate(self.basis):
            f = z.get(b, 0)
            if not f:
                continue
            row, d = self.rows[i], self.rows[i][b]
            g = gcd(d, f)
            z = _combine(z, d // g, row, f // g)
            zrhs = (d // g) * zrhs - (f // g) * self.rhs[i]
            zscale *= d // g
            z, (zrhs, zscale) = _normalize(z, zrhs, zscale)
        self.z, self.zrhs, self.zscale = z, zrhs, zscale

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        p = prow[c]
        if p < 0:
            prow = {j: -v for j, v in prow.items()}
            self.rhs[r] = -self.rhs[r]
            self.rows[r] = prow
            p = -p
        prhs = self.rhs[r]
        rows, rhs = self.rows, self.rhs
        for i, row in enumerate(rows):
            f = row.get(c)
            if f is None or i == r:
                continue
            g = gcd(p, f)
            new, (rhs[i],) = _normalize(_combine(row, p // g, prow, f // g), (p // g) * rhs[i] - (f // g) * prhs)
            rows[i] = new
        f = self.z.get(c)
        if f:
            g = gcd(p, f)
            z = _combine(self.z, p // g, prow, f // g)
            zrhs = (p // g) * self.zrhs - (f // g) * prhs
            zscale = (p // g) * self.zscale
            self.z, (self.zrhs, self.zscale) = _normalize(z, zrhs, zscale)
        self.basis[r] = c
        self.pivots += 1

    def entering(self, bland: bool) -> int | None:
        best = None
        bv = 0
        for j, v in self.z.items():
            if v >= 0:
                continue
            if bland:
                if best is None or j < best:
                    best = j
            elif v < bv or (v == bv and j < best):
                best, bv = j, v
        return best

    def leaving(self, c: int) -> int | None:
        best = None
        bnum = bden = 0
        for i, row in enumerate(self.rows):
            a = row.get(c, 0)
            if a <= 0:
                continue
            num = self.rhs[i]
            if best is None:
                best, bnum, bden = i, num, a
                continue
            lhs, rhs = num * bden, bnum * a
            if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                best, bnum, bden = i, num, a
        return best

    def run(self) -> None:
        """Pivot to optimality; raises UnboundedObjective.

        Dantzig's most-negative rule while the objective moves; after
        ``STALL`` consecutive degenerate pivots switch to Bland's rule until
        the next nondegenerate pivot. Bland cannot cycle, and every exit from
        a degenerate run strictly improves the objective, so this terminates.
        """
        stall = 0
        while True:
            c = self.entering(bland=stall >= STALL)
            if c is None:
                return
            r = self.leaving(c)
            if r is None:
                raise UnboundedObjective(f"column {c} can increase without bound")
            degenerate = self.rhs[r] == 0
            self.pivot(r, c)
            stall = stall + 1 if degenerate else 0

    def objective_value(self) -> Fraction:
        return -Fraction(self.zrhs, self.zscale)

    def point(self, ncols: int) -> Point:
        pt = {j: Fraction(0) for j in range(ncols)}
        for i, b in enumerate(self.basis):
            if b < ncols:
                pt[b] = Fraction(self.rhs[i], self.rows[i][b])
        return pt


def _independent_rows(rows: list[tuple[dict[int, int], int]]):
    """Greedy maximal independent subset of ``rows``.

    Returns ``(kept, conflict)``: indices of rows whose coefficient vectors
    are independent, and, if some row's coefficients depend on earlier rows
    but its constant does not, integer multipliers (by row index) that
    combine the rows into ``0 = nonzero``.
    """
    pivots: dict[int, tuple[dict[int, int], int, dict[int, int]]] = {}
    order: dict[int, int] = {}
    kept = []
    for idx, (coeffs, rhs) in enumerate(rows):
        coeffs = dict(coeffs)
        hist = {idx: 1}
        while True:
            hits = [c for c in coeffs if c in order]
            if not hits:
                break
            c = min(hits, key=order.__getitem__)
            prow, prhs, phist = pivots[c]
            p, f = prow[c], coeffs[c]
            g = gcd(p, f)
            ka, kb = p // g, f // g
            coeffs = _combine(coeffs, ka, prow, kb)
            hist = _combine(hist, ka, phist, kb)
            rhs = ka * rhs - kb * prhs
            gg = gcd(*coeffs.values(), *hist.values(), rhs)
            if gg > 1:
                coeffs = {j: v // gg for j, v in coeffs.items()}
                hist = {j: v // gg for j, v in hist.items()}
                rhs //= gg
        if coeffs:
            c = min(coeffs)
            order[c] = len(order)
            pivots[c] = (coeffs, rhs, hist)
            kept.append(idx)
        elif rhs != 0:
            return kept, {i: (v if rhs > 0 else -v) for i, v in hist.items()}
    return kept, None


def _solve_square(eqs: list[tuple[dict[int, int], int]]) -> dict[int, Fraction]:
    """Solve a nonsingular sparse integer system exactly."""
    pivots: dict[int, tuple[dict[int, int], int]] = {}
    order: list[int] = []
    for coeffs, rhs in eqs:
        coeffs = dict(coeffs)
        while True:
            hits = [c for c in coeffs if c in pivots]
            if not hits:
                break
            c = min(hits, key=order.index)
            prow, prhs = pivots[c]
            p, f = prow[c], coeffs[c]
            g = gcd(p, f)
            coeffs = _combine(coeffs, p // g, prow, f // g)
            rhs = (p // g) * rhs - (f // g) * prhs
            if coeffs:
                coeffs, (rhs,) = _normalize(coeffs, rhs)
        if not coeffs:
            raise ArithmeticError("singular basis")
        c = min(coeffs)
        pivots[c] = (coeffs, rhs)
        order.append(c)
    sol: dict[int, Fraction] = {}
    for c in reversed(order):
        coeffs, rhs = pivots[c]
        acc = Fraction(rhs)
        for j, v in coeffs.items():
            if j != c:
                acc -= v * sol[j]
        sol[c] = acc / coeffs[c]
    return sol


class Solver:
    """Phase 1 once, then any number of objectives from the same start basis.

    Phase 1 works on a cleaned copy of the rows: forced-zero columns are
    removed, linearly dependent rows are dropped, zero-rhs rows receive a
    structural basic column by degenerate pivots, and only the remaining rows
    get artificial variables. Certificates are mapped back to the original
    rows and checked before they are returned.
    """

    def __init__(self, sys: LinearSystem):
        self.sys = sys
        self.n = sys.num_unknowns
        self._verdict: FeasibilityVerdict | None = None
        self._start: Tableau | None = None
        self._fixed: set[int] = set()
        self.pivots = 0

    def _presolve(self):
        """Integer rows with forced-zero columns removed.

        A row with zero right-hand side whose coefficients all share one sign
        forces each of its unknowns to zero; such columns are dropped, which
        can expose further such rows. Returns ``(rows, why)`` where ``rows``
        holds ``(index, coeffs, rhs, sign, scale)`` for surviving rows (sign
        flipped so ``rhs >= 0``) and ``why`` maps a removed column to
        ``(row index, sign)`` of a row proving it zero, in removal order.
        """
        ints = []
        for i, row in enumerate(self.sys.rows):
            coeffs, b, scale = _integer_row(row)
            ints.append((i, coeffs, b, scale))
        why: dict[int, tuple[int, int]] = {}
        changed = True
        while changed:
            changed = False
            for i, coeffs, b, _ in ints:
                if b != 0:
                    continue
                live = [j for j in coeffs if j not in why]
                if not live:
                    continue
                signs = {coeffs[j] > 0 for j in live}
                if len(signs) == 1:
                    s = 1 if signs.pop() else -1
                    for j in live:
                        why[j] = (i, s)
                    changed = True
        out = []
        for i, coeffs, b, scale in ints:
            live = {j: v for j, v in coeffs.items() if j not in why}
            s = -1 if b < 0 else 1
            if s < 0:
                live, b = {j: -v for j, v in live.items()}, -b
            if not live and b == 0:
                continue
            out.append((i, live, b, s, scale))
        return out, why

    def _lift(self, mult: dict[int, Fraction], why) -> dict[int, Fraction]:
        """Make removed columns nonnegative in ``y^T A`` using their proof rows.

        A proof row is one-signed only on columns still live when it fired, so
        columns are repaired newest-first.
        """
        mult = dict(mult)
        coeffs, _ = combine_rows(self.sys, mult)
        for j, (i, s) in reversed(list(why.items())):
            q = coeffs.get(j, Fraction(0))
            if q >= 0:
                continue
            t = -q / (self.sys.rows[i].coeffs[j] * s)
            mult[i] = mult.get(i, Fraction(0)) + s * t
            for k, v in self.sys.rows[i].coeffs.items():
                coeffs[k] = coeffs.get(k, Fraction(0)) + s * t * v
        return {i: y for i, y in mult.items() if y}

    def _infeasible(self, mult, why) -> Infeasible:
        cert = FarkasCertificate(_tidy(self._lift(mult, why)))
        assert verify_farkas(self.sys, cert), "phase 1 produced an invalid certificate"
        return Infeasible(cert)

    def _phase1(self) -> FeasibilityVerdict:
        n = self.n
        live, why = self._presolve()
        self._fixed = set(why)
        kept, conflict = _independent_rows([(c, b) for _, c, b, _, _ in live])
        if conflict is not None:
            # rows combine to 0 = positive; negate to get a negative constant
            mult = {}
            for k, h in conflict.items():
                i, _, _, s, scale = live[k]
                mult[i] = Fraction(-h * s * scale)
            return self._infeasible(mult, why)
        live = [live[k] for k in kept]
        m = len(live)
        rows = []
        for k, (_, coeffs, b, _, _) in enumerate(live):
            row = dict(coeffs)
            row[n + k] = 1
            rows.append(row)
        t = Tableau(rows, [b for _, _, b, _, _ in live], [n + k for k in range(m)])
        self._crash(t)
        # artificials that left the basis are never needed again
        for row in t.rows:
            for j in [j for j in row if j >= n and j not in t.basis]:
                del row[j]
        t.set_objective({b: 1 for b in t.basis if b >= n})
        t.run()
        self.pivots += t.pivots
        if t.zrhs != 0:
            u = self._phase1_duals(t, live)
            mult = {}
            for k, (i, _, _, s, scale) in enumerate(live):
                y = -s * scale * u.get(k, Fraction(0))
                if y:
                    mult[i] = y
            return self._infeasible(mult, why)
        self._drop_artificials(t)
        self._start = t
        pt = t.point(n)
        _check_point(self.sys, pt)
        return Feasible(pt)

    def _phase1_duals(self, t: Tableau, live) -> dict[int, Fraction]:
        """Solve ``B^T u = c_B`` over the sign-adjusted phase-1 rows.

        ``u^T A' <= 0`` and ``u^T b' > 0`` at a phase-1 optimum with positive
        value, which is the Farkas alternative up to sign.
        """
        n = self.n
        cols: dict[int, dict[int, int]] = {}
        for k, (_, coeffs, _, _, _) in enumerate(live):
            for j, v in coeffs.items():
                cols.setdefault(j, {})[k] = v
        eqs = []
        for b in t.basis:
            if b >= n:
                eqs.append(({b - n: 1}, 1))
            else:
                eqs.append((cols[b], 0))
        return _solve_square(eqs)

    def _crash(self, t: Tableau) -> None:
        """Give zero-rhs rows a structural basic column (degenerate pivots).

        Picks the column with the fewest nonzeros to limit fill-in.
        """
        n = self.n
        counts: dict[int, int] = {}
        for row in t.rows:
            for j in row:
                counts[j] = counts.get(j, 0) + 1
        for i in range(len(t.rows)):
            if t.rhs[i] != 0:
                continue
            cands = [j for j in t.rows[i] if j < n]
            if not cands:
                continue
            c = min(cands, key=lambda j: (counts[j], j))
            t.pivot(i, c)
        self.pivots += t.pivots
        t.pivots = 0

    def _drop_artificials(self, t: Tableau) -> None:
        n = self.n
        for i in range(len(t.rows)):
            if t.basis[i] < n:
                continue
            # artificial at level zero; rows are independent so a structural entry exists
            c = min(j for j in t.rows[i] if j < n)
            t.pivot(i, c)
        for i, row in enumerate(t.rows):
            r = {j: v for j, v in row.items() if j < n}
            t.rows[i], (t.rhs[i],) = _normalize(r, t.rhs[i])
        t.z, t.zrhs, t.zscale = {}, 0, 1

    def feasibility(self) -> FeasibilityVerdict:
        if self._verdict is None:
            self._verdict = self._phase1()
        return self._verdict

    def maximize(self, objective: Mapping[int, Fraction]) -> Optimum:
        if not self.feasibility().feasible:
            raise InfeasibleSystem("cannot optimize over an empty polytope")
        for j in objective:
            if not 0 <= j < self.n:
                raise IndexOutOfRange(f"objective references unknown {j}")
        obj = {j: Fraction(q) for j, q in objective.items() if q}
        # presolved columns are pinned at zero and absent from the tableau
        live = {j: q for j, q in obj.items() if j not in self._fixed}
        scale = lcm(*(q.denominator for q in obj.values())) if obj else 1
        t = self._start.copy()
        t.set_objective({j: -int(q * scale) for j, q in live.items()})
        t.run()
        self.pivots += t.pivots
        pt = t.point(self.n)
        _check_point(self.sys, pt)
        value = sum((q * pt[j] for j, q in obj.items()), Fraction(0))
        assert value == -t.objective_value() / scale, "objective row out of sync"
        return Optimum(value, pt)


def _tidy(mult: dict[int, Fraction]) -> dict[int, Fraction]:
    """Rescale multipliers to coprime integers (positive factor only)."""
    if not mult:
        return mult
    den = lcm(*(q.denominator for q in mult.values()))
    ints = {i: int(q * den) for i, q in mult.items()}
    g = gcd(*ints.values())
    return {i: Fraction(v // g) for i, v in ints.items()}


def _check_point(sys: LinearSystem, pt: Point) -> None:
    assert sys.is_satisfied_by(pt), "simplex returned a point violating the system"
    assert all(v <= 1 for v in pt.values()) or sys.mode.value == "custom", "coordinate above 1"


def phase1_feasibility(sys: LinearSystem) -> FeasibilityVerdict:
    return Solver(sys).feasibility()


def maximize(sys: LinearSystem, objective: Mapping[int, Fraction]) -> Optimum:
    return Solver(sys).maximize(objective)


# ---------------------------------------------------------------------------
# vertices


def _solve_basis(cols: Sequence[int], rows: list[tuple[dict[int, Fraction], Fraction]]) -> list[Fraction] | None:
    k = len(cols)
    m = [[r[0].get(c, Fraction(0)) for c in cols] + [r[1]] for r in rows]
    for c in range(k):
        p = next((i for i in range(c, k) if m[i][c] != 0), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        for i in range(k):
            if i != c and m[i][c] != 0:
                f = m[i][c] / piv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [m[i][k] / m[i][i] for i in range(k)]


def enumerate_vertices(sys: LinearSystem, max_unknowns: int = 32, max_bases: int = 5_000_000) -> list[Point]:
    """Every vertex of ``{rows hold, x >= 0}`` by trying every column basis."""
    n = sys.num_unknowns
    if n > max_unknowns:
        raise TooLarge(f"{n} unknowns exceeds the guard of {max_unknowns}")
    pivots, inconsistent = _eliminate_rows((_integer_row(r)[:2] for r in sys.rows), with_rhs=True)
    if inconsistent:
        return []
    rows = [({j: Fraction(v) for j, v in c.items()}, Fraction(b)) for c, b in pivots.values()]
    k = len(rows)
    if k == 0:
        return [{j: Fraction(0) for j in range(n)}]
    if comb(n, k) > max_bases:
        raise TooLarge(f"C({n},{k}) candidate bases exceeds {max_bases}")
    seen = set()
    out = []
    for cols in combinations(range(n), k):
        sol = _solve_basis(cols, rows)
        if sol is None or any(v < 0 for v in sol):
            continue
        pt = {j: Fraction(0) for j in range(n)}
        pt.update(zip(cols, sol))
        key = tuple(pt[j] for j in range(n))
        if key not in seen:
            seen.add(key)
            out.append(pt)
    out.sort(key=lambda p: tuple(p[j] for j in range(n)))
    return out
