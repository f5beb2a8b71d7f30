"""Command line front end.

Exit codes: 0 success, 1 component error, 2 usage error, 10 LP feasible while
the oracle says UNSAT (a converse violation).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builder import Mode, Rule, build, dump_lp, stats
from .cnf import emit_dimacs, generate_random_3sat, parse_dimacs
from .errors import ExtractionFailed, SatLPError
from .exact import Solver, rank
from .extraction import extract_deterministic
from .harness import (
    FIXTURE_NAMES,
    archive_violation,
    claim_check,
    emit_report,
    fixture_path,
    instance_seeds,
    random_suite,
    reproduce,
    run_instances,
)
from .oracle import brute_force_sat

EXIT_CONVERSE = 10


def _read_instance(path: str):
    p = Path(path)
    if not p.exists() and p.stem in FIXTURE_NAMES:
        p = fixture_path(p.stem)
    return parse_dimacs(p.read_bytes())


def _system(args):
    inst = _read_instance(args.input)
    mode = Mode(args.mode)
    return inst, (build(inst, mode, args.rule) if mode is Mode.REDUCED else build(inst, mode))


def _write(args, data: bytes) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def cmd_build_lp(args) -> int:
    _, lp = _system(args)
    _write(args, (stats(lp).to_json() + "\n").encode() if args.stats else dump_lp(lp))
    return 0


def cmd_check(args) -> int:
    inst = _read_instance(args.input)
    rec = claim_check(inst, args.mode, args.rule, name=Path(args.input).stem)
    if args.format == "json":
        print(json.dumps(rec.to_dict()))
    else:
        agree = "agree" if rec.converse_ok else "disagree (converse violation)"
        if rec.lp == "skipped":
            agree = "LP skipped for empty instance"
        print(f"LP: {rec.lp}, oracle: {rec.oracle}, {agree}")
    if not rec.converse_ok:
        if args.archive:
            archive_violation(rec, Path(args.archive))
        return EXIT_CONVERSE
    return 0


def cmd_rank(args) -> int:
    _, lp = _system(args)
    print(rank(lp))
    return 0


def cmd_extract(args) -> int:
    _, lp = _system(args)
    solver = Solver(lp)
    if not solver.feasibility().feasible:
        print("error: system is infeasible, nothing to extract", file=sys.stderr)
        return 1
    try:
        cert = extract_deterministic(lp, solver)
    except ExtractionFailed as e:
        print(json.dumps({"extraction": "failed", "step": e.step, "variable": e.variable,
                          "optima": {k: str(v) for k, v in e.best_values.items()}}))
        return 1
    print(cert.to_json())
    return 0


def cmd_oracle(args) -> int:
    res = brute_force_sat(_read_instance(args.input), args.cap)
    out = {"satisfiable": res.satisfiable, "model_count": res.model_count}
    if res.witness is not None:
        out["witness"] = [v if b else -v for v, b in enumerate(res.witness, 1)]
    print(json.dumps(out))
    return 0


def cmd_reproduce(args) -> int:
    bad = 0
    for c in reproduce():
        print(c.line())
        bad += (not c.ok) and c.expectation.hard
    print(f"{bad} hard mismatch(es)")
    return 1 if bad else 0


def cmd_random(args) -> int:
    inst = generate_random_3sat(args.n, args.m, args.seed)
    _write(args, emit_dimacs(inst, [f"random 3-SAT n={args.n} m={args.m} seed={args.seed}"]))
    return 0


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    lo_i = int(lo)
    return lo_i, int(hi) if hi else lo_i


def cmd_report(args) -> int:
    lo, hi = _parse_range(args.n)
    rule = args.rule if args.mode == "reduced" else None
    if args.m is not None and lo == hi:
        items = [(f"rand-n{lo}-m{args.m}-s{s}", generate_random_3sat(lo, args.m, s), s)
                 for s in instance_seeds(args.seed, args.count)]
    elif args.m is None:
        items = random_suite(args.count, args.seed, (lo, hi), args.max_density)
    else:
        raise SystemExit("error: -m needs a fixed -n")
    meta = {"n": args.n, "m": args.m, "count": args.count, "seed": args.seed, "mode": args.mode, "rule": rule}
    rep = run_instances(items, args.mode, rule, meta, Path(args.archive) if args.archive else None,
                        workers=args.workers, extract=not args.no_extract)
    _write(args, emit_report(rep, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satlp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def lp_opts(sp):
        sp.add_argument("--mode", choices=[m.value for m in (Mode.FULL, Mode.REDUCED)], default="reduced")
        sp.add_argument("--rule", choices=[r.value for r in Rule], default="minimal")

    sp = sub.add_parser("build-lp", help="write the linear system for a DIMACS file")
    sp.add_argument("input")
    lp_opts(sp)
    sp.add_argument("-o", "--output")
    sp.add_argument("--stats", action="store_true", help="print row counts as JSON instead of the dump")
    sp.set_defaults(func=cmd_build_lp)

    sp = sub.add_parser("check", help="compare LP feasibility with the exhaustive oracle")
    sp.add_argument("input")
    lp_opts(sp)
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.add_argument("--archive", help="directory for converse-violation artifacts")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("rank", help="exact rank of the equality rows")
    sp.add_argument("input")
    lp_opts(sp)
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("extract", help="read an assignment off a feasible system")
    sp.add_argument("input")
    lp_opts(sp)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("oracle", help="exhaustive model count")
    sp.add_argument("input")
    sp.add_argument("--cap", type=int, default=26)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("reproduce-paper", help="compare the bundled worked examples with their reference figures")
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("random", help="generate a random 3-SAT instance")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-m", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_random)

    sp = sub.add_parser("report", help="batch audit over random instances")
    sp.add_argument("-n", required=True, help="variable count, or LO:HI to draw it per instance")
    sp.add_argument("-m", type=int, help="clause count; if omitted drawn from [1, max-density * n]")
    sp.add_argument("--max-density", type=int, default=5)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    lp_opts(sp)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--archive")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--no-extract", action="store_true")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SatLPError, OSError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
