"""Feasible-iff-satisfiable audit: per-instance checks, batches and reports."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .builder import LinearSystem, Mode, Rule, build, dump_lp, format_rational, stats
from .cnf import CnfInstance, emit_dimacs, generate_random_3sat, parse_dimacs
from .errors import ExtractionFailed, ForwardDirectionViolated
from .exact import Feasible, FeasibilityVerdict, Solver, rank, verify_farkas
from .extraction import AssignmentCertificate, extract_deterministic
from .oracle import DEFAULT_CAP, brute_force_sat

RECORD_FIELDS = ("name", "n", "m", "lp", "oracle", "forward_ok", "converse_ok", "extraction", "runtime_ms")


@dataclass
class ClaimRecord:
    name: str
    n: int
    m: int
    lp: str  # feasible | infeasible | skipped
    oracle: str  # SAT | UNSAT
    forward_ok: bool
    converse_ok: bool
    extraction: str  # success | failed | skipped
    runtime_ms: float
    mode: str = "reduced"
    rule: str | None = "minimal"
    seed: int | None = None
    model_count: int = 0
    # exact checks of the returned witness point or Farkas certificate
    certificate_ok: bool = True
    instance: CnfInstance | None = field(default=None, repr=False)
    verdict: FeasibilityVerdict | None = field(default=None, repr=False)
    assignment: AssignmentCertificate | None = field(default=None, repr=False)
    extraction_error: str | None = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in RECORD_FIELDS}
        d["runtime_ms"] = round(self.runtime_ms, 3)
        d.update(mode=self.mode, rule=self.rule, seed=self.seed, model_count=self.model_count)
        return d


def _system(inst: CnfInstance, mode, rule) -> LinearSystem:
    mode = Mode(mode)
    return build(inst, mode, rule) if mode is Mode.REDUCED else build(inst, mode)


def check_certificate(sys: LinearSystem, verdict: FeasibilityVerdict) -> bool:
    """Independent exact check of a verdict's witness or certificate."""
    if isinstance(verdict, Feasible):
        pt = verdict.point
        return sys.is_satisfied_by(pt) and all(0 <= v <= 1 for v in pt.values())
    return verify_farkas(sys, verdict.certificate)


def claim_check(
    inst: CnfInstance,
    mode: Mode | str = Mode.REDUCED,
    rule: Rule | str | None = Rule.MINIMAL,
    name: str = "instance",
    seed: int | None = None,
    extract: bool = True,
    cap: int = DEFAULT_CAP,
) -> ClaimRecord:
    """Solve the system, run the oracle, and compare the two verdicts.

    Raises ForwardDirectionViolated if the oracle finds a model but the LP is
    infeasible, since that can only be a bug.
    """
    mode = Mode(mode)
    rule_name = Rule(rule).value if (rule is not None and mode is Mode.REDUCED) else None
    start = time.perf_counter()
    truth = brute_force_sat(inst, cap)
    rec = ClaimRecord(
        name, inst.num_vars, inst.num_clauses, "skipped", "SAT" if truth.satisfiable else "UNSAT",
        True, True, "skipped", 0.0, mode.value, rule_name, seed, truth.model_count, instance=inst,
    )
    if not inst.clauses:
        rec.runtime_ms = (time.perf_counter() - start) * 1000
        return rec
    sys = _system(inst, mode, rule)
    solver = Solver(sys)
    verdict = solver.feasibility()
    rec.verdict = verdict
    rec.lp = "feasible" if verdict.feasible else "infeasible"
    rec.certificate_ok = check_certificate(sys, verdict)
    rec.forward_ok = verdict.feasible or not truth.satisfiable
    rec.converse_ok = truth.satisfiable or not verdict.feasible
    if not rec.forward_ok:
        raise ForwardDirectionViolated(
            f"{name}: oracle found {truth.model_count} models but the LP is infeasible"
        )
    if verdict.feasible and extract:
        try:
            cert = extract_deterministic(sys, solver)
        except ExtractionFailed as e:
            rec.extraction = "failed"
            rec.extraction_error = str(e)
        else:
            rec.assignment = cert
            ok = inst.satisfied_by(cert.as_bools())
            rec.extraction = "success" if ok else "failed"
    rec.runtime_ms = (time.perf_counter() - start) * 1000
    return rec


@dataclass
class ExperimentReport:
    meta: dict
    records: list[ClaimRecord] = field(default_factory=list)

    @property
    def converse_violations(self) -> list[ClaimRecord]:
        return [r for r in self.records if not r.converse_ok]

    def aggregates(self) -> dict:
        rs = self.records
        return {
            "sat": sum(r.oracle == "SAT" for r in rs),
            "unsat": sum(r.oracle == "UNSAT" for r in rs),
            "feasible": sum(r.lp == "feasible" for r in rs),
            "infeasible": sum(r.lp == "infeasible" for r in rs),
            "converse_violations": [r.name for r in self.converse_violations],
            "extraction_failures": [r.name for r in rs if r.extraction == "failed"],
            "total": len(rs),
            "runtime_ms": round(sum(r.runtime_ms for r in rs), 3),
        }


def _check_one(args) -> ClaimRecord:
    name, inst, seed, mode, rule, extract = args
    return claim_check(inst, mode, rule, name=name, seed=seed, extract=extract)


def archive_violation(rec: ClaimRecord, directory: Path) -> list[Path]:
    """Write DIMACS, LP dump and witness point for a feasible-but-UNSAT instance."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sys = _system(rec.instance, rec.mode, rec.rule)
    stem = f"{rec.name}-{rec.mode}" + (f"-{rec.rule}" if rec.rule else "")
    cnf = directory / f"{stem}.cnf"
    lp = directory / f"{stem}.lp"
    wit = directory / f"{stem}.witness.json"
    cnf.write_bytes(emit_dimacs(rec.instance, [f"LP feasible but oracle UNSAT ({rec.mode}, {rec.rule or '-'})"]))
    lp.write_bytes(dump_lp(sys))
    point = rec.verdict.point
    wit.write_text(
        json.dumps(
            {
                "name": rec.name,
                "dimacs": cnf.name,
                "mode": rec.mode,
                "rule": rec.rule,
                "point": {str(j): format_rational(v) for j, v in sorted(point.items())},
            },
            indent=1,
        )
        + "\n"
    )
    return [cnf, lp, wit]


def reverify_archive(directory: Path, cap: int = DEFAULT_CAP) -> dict[str, bool]:
    """Re-check every archived case: witness satisfies all rows, oracle finds no model."""
    out = {}
    for wit in sorted(Path(directory).glob("*.witness.json")):
        data = json.loads(wit.read_text())
        inst = parse_dimacs(wit.with_name(data["dimacs"]).read_bytes())
        sys = _system(inst, data["mode"], data["rule"])
        point = {int(j): Fraction(v) for j, v in data["point"].items()}
        feasible = len(point) == sys.num_unknowns and sys.is_satisfied_by(point)
        out[wit.name.removesuffix(".witness.json")] = feasible and not brute_force_sat(inst, cap).satisfiable
    return out


def run_instances(
    items: Sequence[tuple[str, CnfInstance, int | None]],
    mode: Mode | str = Mode.REDUCED,
    rule: Rule | str | None = Rule.MINIMAL,
    meta: dict | None = None,
    archive_dir: Path | None = None,
    workers: int = 1,
    extract: bool = True,
) -> ExperimentReport:
    jobs = [(name, inst, seed, mode, rule, extract) for name, inst, seed in items]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_check_one, jobs, chunksize=4))
    else:
        records = [_check_one(j) for j in jobs]
    rep = ExperimentReport(dict(meta or {}), records)
    if archive_dir is not None:
        for rec in rep.converse_violations:
            archive_violation(rec, archive_dir)
    return rep


def instance_seeds(seed: int, count: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(32) for _ in range(count)]


def run_batch(
    n: int,
    m: int,
    count: int,
    seed: int,
    mode: Mode | str = Mode.REDUCED,
    rule: Rule | str | None = Rule.MINIMAL,
    archive_dir: Path | None = None,
    workers: int = 1,
    extract: bool = True,
) -> ExperimentReport:
    """``count`` random instances with fixed ``n`` and ``m``, seeded from ``seed``."""
    items = [(f"rand-n{n}-m{m}-s{s}", generate_random_3sat(n, m, s), s) for s in instance_seeds(seed, count)]
    meta = {"n": n, "m": m, "count": count, "seed": seed, "mode": Mode(mode).value, "rule": _rule_name(mode, rule)}
    return run_instances(items, mode, rule, meta, archive_dir, workers, extract)


def random_suite(count: int, seed: int, n_range=(4, 12), max_density: int = 5) -> list[tuple[str, CnfInstance, int]]:
    """Instances with n uniform in ``n_range`` and m uniform in ``[1, max_density * n]``."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(*n_range)
        m = rng.randint(1, max_density * n)
        s = rng.getrandbits(32)
        out.append((f"rand-n{n}-m{m}-s{s}", generate_random_3sat(n, m, s), s))
    return out


def _rule_name(mode, rule) -> str | None:
    return Rule(rule).value if (rule is not None and Mode(mode) is Mode.REDUCED) else None


def emit_report(rep: ExperimentReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        body = {
            "meta": rep.meta,
            "records": [r.to_dict() for r in rep.records],
            "aggregates": rep.aggregates(),
        }
        return (json.dumps(body, indent=1) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        cols = list(RECORD_FIELDS) + ["mode", "rule", "seed", "model_count"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rep.records:
            w.writerow(r.to_dict())
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# worked examples


@dataclass(frozen=True)
class Expectation:
    quantity: str
    mode: str
    rule: str | None
    value: object
    hard: bool = True
    note: str = ""


@dataclass(frozen=True)
class Fixture:
    name: str
    instance: CnfInstance
    expected: tuple[Expectation, ...]
    note: str


def load_fixture(name: str) -> CnfInstance:
    data = resources.files("satlp").joinpath("fixtures", f"{name}.cnf").read_bytes()
    return parse_dimacs(data)


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("satlp").joinpath("fixtures", f"{name}.cnf")))


FIXTURE_NAMES = ("ex1-one-clause", "ex2-two-clauses", "ex3-unsat-n7", "ex4-sat-n10")


def paper_fixtures() -> list[Fixture]:
    E = Expectation
    comps = lambda tn, cs, cp, sp: {
        "TRIPLE_NORMALIZATION": tn, "CROSS_SINGLE": cs, "CROSS_PAIR": cp, "SPECIFIC": sp,
    }
    table = {
        "ex1-one-clause": (
            E("unknowns", "full", None, 26),
            E("rows", "full", None, 28),
            E("unknowns", "reduced", "minimal", 8),
            E("components", "reduced", "minimal", comps(1, 0, 0, 1)),
            E("lp", "reduced", "minimal", "feasible"),
            E("model_count", "-", None, 7),
        ),
        "ex2-two-clauses": (
            E("unknowns", "full", None, 44),
            E("rows", "full", None, 50),
            E("unknowns", "reduced", "verbose", 16),
            E("rows", "reduced", "verbose", 12),
            E("rank", "reduced", "verbose", 7),
            E("lp", "reduced", "verbose", "feasible"),
            E("assignment", "reduced", "verbose", "FFFF"),
        ),
        "ex3-unsat-n7": (
            E("unknowns", "reduced", "chain", 160),
            E("components", "reduced", "chain", comps(20, 126, 156, 27)),
            E("rank", "reduced", "chain", 139, hard=False),
            E("lp", "reduced", "chain", "infeasible"),
            E("model_count", "-", None, 0),
        ),
        "ex4-sat-n10": (
            E("unknowns", "reduced", "chain", 280),
            E("components", "reduced", "chain", comps(35, 190, 244, 39)),
            E("rank", "reduced", "chain", 230, hard=False),
            E("lp", "reduced", "chain", "feasible"),
            E("extraction", "reduced", "chain", "success"),
            E("model_count", "-", None, 1),
        ),
    }
    notes = {
        "ex1-one-clause": "single clause (X3, X2, X1)",
        "ex2-two-clauses": "clauses (X3, -X2, X1) and (-X4, X3, X2)",
        "ex3-unsat-n7": "27 clauses over 7 variables, unsatisfiable",
        "ex4-sat-n10": "39 clauses over 10 variables, exactly one model",
    }
    return [Fixture(name, load_fixture(name), table[name], notes[name]) for name in FIXTURE_NAMES]


@dataclass(frozen=True)
class Comparison:
    fixture: str
    expectation: Expectation
    observed: object

    @property
    def ok(self) -> bool:
        return self.observed == self.expectation.value

    def line(self) -> str:
        e = self.expectation
        where = e.mode if e.rule is None else f"{e.mode}/{e.rule}"
        status = "ok" if self.ok else ("MISMATCH" if e.hard else "differs (soft)")
        return f"{self.fixture:16} {e.quantity:11} [{where}] expected {e.value} observed {self.observed}: {status}"


def _observe(inst: CnfInstance, e: Expectation, cache: dict):
    if e.quantity == "model_count":
        return brute_force_sat(inst).model_count
    key = (e.mode, e.rule)
    if key not in cache:
        cache[key] = _system(inst, e.mode, e.rule)
    sys = cache[key]
    if e.quantity == "unknowns":
        return sys.num_unknowns
    if e.quantity == "rows":
        return len(sys.rows)
    if e.quantity == "components":
        return stats(sys).rows_by_tag
    if e.quantity == "rank":
        return rank(sys)
    solver = cache.setdefault(key + ("solver",), Solver(sys))
    verdict = solver.feasibility()
    if e.quantity == "lp":
        return "feasible" if verdict.feasible else "infeasible"
    try:
        cert = extract_deterministic(sys, solver)
    except ExtractionFailed:
        return "failed"
    if e.quantity == "assignment":
        return "".join("T" if b else "F" for b in cert.as_tuple())
    return "success" if inst.satisfied_by(cert.as_bools()) else "failed"


def reproduce(fixtures: Iterable[Fixture] | None = None) -> list[Comparison]:
    out = []
    for fx in fixtures or paper_fixtures():
        cache: dict = {}
        for e in fx.expected:
            out.append(Comparison(fx.name, e, _observe(fx.instance, e, cache)))
    return out
