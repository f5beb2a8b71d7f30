import json
from fractions import Fraction
from itertools import product
from math import comb

import pytest
from conftest import CONFIGS, build_config, instances
from hypothesis import given, settings

from satlp.builder import (
    Mode,
    Row,
    Rule,
    Tag,
    build_full,
    build_reduced,
    build_universal,
    dump_lp,
    point_from_assignment,
    stats,
)
from satlp.cnf import CnfInstance
from satlp.errors import EmptyInstance, IndexOutOfRange
from satlp.exact import Solver

ONE = CnfInstance(3, [(3, 2, 1)])
TWO = CnfInstance(4, [(3, -2, 1), (-4, 3, 2)])


def test_full_one_clause():
    st = stats(build_full(ONE))
    assert st.unknown_count == 26
    assert st.rows_by_tag == {"NORMALIZATION": 3, "SINGLE_MARGINAL": 12, "PAIR_MARGINAL": 12, "SPECIFIC": 1}
    assert st.total_rows == 28


def test_full_two_clauses():
    st = stats(build_full(TWO))
    assert (st.unknown_count, st.total_rows) == (44, 50)
    assert st.rows_by_tag == {"NORMALIZATION": 4, "SINGLE_MARGINAL": 20, "PAIR_MARGINAL": 24, "SPECIFIC": 2}


def test_full_row_formula_when_everything_relevant():
    n = 5
    from itertools import combinations

    inst = CnfInstance(n, [t for t in combinations(range(1, n + 1), 3)])
    sys = build_full(inst)
    assert len(sys.rows) == n + 4 * comb(n, 2) + 12 * comb(n, 3) + inst.num_clauses
    assert len(build_universal(n).rows) == n + 4 * comb(n, 2) + 12 * comb(n, 3)


def test_reduced_two_clauses_verbose():
    st = stats(build_reduced(TWO, Rule.VERBOSE))
    assert st.unknown_count == 16
    assert st.rows_by_tag == {"TRIPLE_NORMALIZATION": 2, "CROSS_SINGLE": 4, "CROSS_PAIR": 4, "SPECIFIC": 2}
    assert st.total_rows == 12


def test_reduced_two_clauses_minimal():
    st = stats(build_reduced(TWO, Rule.MINIMAL))
    assert st.rows_by_tag == {"TRIPLE_NORMALIZATION": 2, "CROSS_SINGLE": 0, "CROSS_PAIR": 4, "SPECIFIC": 2}
    assert st.total_rows == 8


def test_reduced_two_clauses_chain():
    st = stats(build_reduced(TWO, Rule.CHAIN))
    assert st.total_rows == 12


def test_stats_json():
    d = json.loads(stats(build_reduced(TWO, "verbose")).to_json())
    assert d == {
        "mode": "reduced",
        "rule": "verbose",
        "unknowns": 16,
        "rows_by_tag": {"TRIPLE_NORMALIZATION": 2, "CROSS_SINGLE": 4, "CROSS_PAIR": 4, "SPECIFIC": 2},
        "total_rows": 12,
    }


def test_empty_instance_rejected():
    with pytest.raises(EmptyInstance):
        build_full(CnfInstance(3, []))
    with pytest.raises(EmptyInstance):
        build_reduced(CnfInstance(3, []))


def test_dump_specific_line():
    text = dump_lp(build_full(ONE)).decode()
    assert "SPECIFIC: 1*P(-1;-2;-3) = 0" in text.splitlines()
    assert text.startswith("# mode: full\n")


def test_dump_normalization_row():
    sys = build_reduced(ONE)
    (norm,) = [r for r in sys.rows if r.tag is Tag.TRIPLE_NORMALIZATION]
    assert len(norm.coeffs) == 8 and set(norm.coeffs.values()) == {1} and norm.constant == 1
    line = [l for l in dump_lp(sys).decode().splitlines() if l.startswith("TRIPLE_NORMALIZATION")][0]
    assert line.count("1*P(") == 8 and line.endswith("= 1")


def test_dump_negative_and_fraction_formatting():
    from satlp.builder import LinearSystem, format_row

    sys = LinearSystem.custom([(1,), (-1,)], [({(1,): Fraction(1, 2), (-1,): -3}, Fraction(-2, 3))])
    assert format_row(sys, sys.rows[0]) == "SPECIFIC: -3*P(-1) + 1/2*P(1) = -2/3"


def test_dump_deterministic():
    assert dump_lp(build_reduced(TWO)) == dump_lp(build_reduced(CnfInstance(4, [(3, -2, 1), (-4, 3, 2)])))
    assert dump_lp(build_full(TWO)) == dump_lp(build_full(TWO))


def test_free_variables_recorded():
    sys = build_reduced(CnfInstance(5, [(1, 2, 4)]))
    assert sys.free_variables == (3, 5)


def test_row_validation():
    with pytest.raises(ValueError):
        Row({0: 0}, 1, Tag.SPECIFIC)
    from satlp.builder import LinearSystem
    from satlp.marginals import UnknownIndex

    with pytest.raises(IndexOutOfRange):
        LinearSystem(UnknownIndex([(1,)]), (Row({3: 1}, 1, Tag.SPECIFIC),), Mode.CUSTOM)


@settings(max_examples=40)
@given(instances(max_n=6, max_m=10))
def test_satisfying_assignments_satisfy_rows(inst):
    systems = [build_config(inst, mode, rule) for mode, rule in CONFIGS]
    for a in product([False, True], repeat=inst.num_vars):
        sat = inst.satisfied_by(dict(enumerate(a, 1)))
        for sys in systems:
            ok = sys.is_satisfied_by(point_from_assignment(sys, a))
            # a falsifying assignment breaks exactly the specific rows
            assert ok == sat


@settings(max_examples=25)
@given(instances(max_n=6, max_m=6))
def test_rules_share_feasible_set(inst):
    """Every row of each rule is implied on the polytope of each other rule."""
    systems = {rule: build_reduced(inst, rule) for rule in Rule}
    solvers = {rule: Solver(s) for rule, s in systems.items()}
    verdicts = {rule: s.feasibility().feasible for rule, s in solvers.items()}
    assert len(set(verdicts.values())) == 1
    if not verdicts[Rule.MINIMAL]:
        return
    for a in Rule:
        for b in Rule:
            if a is b:
                continue
            for row in systems[b].rows:
                if row.tag not in (Tag.CROSS_SINGLE, Tag.CROSS_PAIR):
                    continue
                hi = solvers[a].maximize(row.coeffs).value
                lo = -solvers[a].maximize({j: -q for j, q in row.coeffs.items()}).value
                assert hi == lo == row.constant
