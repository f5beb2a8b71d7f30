import random
from fractions import Fraction

import numpy as np
import pytest
from conftest import CONFIGS, build_config, instances
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from satlp.builder import LinearSystem, Rule, build_full, build_reduced
from satlp.cnf import CnfInstance, generate_random_3sat
from satlp.errors import IndexOutOfRange, InfeasibleSystem, TooLarge, UnboundedObjective
from satlp.exact import (
    FarkasCertificate,
    Feasible,
    Infeasible,
    Solver,
    enumerate_vertices,
    maximize,
    phase1_feasibility,
    rank,
    verify_farkas,
)
from satlp.harness import load_fixture
from satlp.oracle import brute_force_sat

ONE = CnfInstance(3, [(3, 2, 1)])
TWO = CnfInstance(4, [(3, -2, 1), (-4, 3, 2)])


def test_rank_examples():
    assert rank(build_reduced(TWO, Rule.VERBOSE)) == 7
    assert rank(LinearSystem.custom([(1,), (-1,)], [({(1,): 1, (-1,): 1}, 1)])) == 1


@pytest.mark.parametrize("rule", list(Rule))
def test_rank_fixtures(rule):
    # independent of the consistency rule: all rules span the same row space
    assert rank(build_reduced(load_fixture("ex3-unsat-n7"), rule)) == 139
    assert rank(build_reduced(load_fixture("ex4-sat-n10"), rule)) == 230


def test_phase1_two_clause_vertex():
    sys = build_reduced(TWO, Rule.VERBOSE)
    v = phase1_feasibility(sys)
    assert isinstance(v, Feasible)
    nonzero = {k: x for k, x in sys.named(v.point).items() if x}
    assert nonzero == {"P(-1;-2;-3)": 1, "P(-2;-3;-4)": 1}


@pytest.mark.parametrize("mode, rule", CONFIGS)
def test_phase1_n7_infeasible(mode, rule):
    sys = build_config(load_fixture("ex3-unsat-n7"), mode, rule)
    v = phase1_feasibility(sys)
    assert isinstance(v, Infeasible)
    assert verify_farkas(sys, v.certificate)


def test_sign_contradiction_certificate():
    sys = LinearSystem.custom([(1,)], [({(1,): 1}, -1)])
    v = phase1_feasibility(sys)
    assert isinstance(v, Infeasible) and verify_farkas(sys, v.certificate)
    assert verify_farkas(sys, FarkasCertificate({0: Fraction(-1)}))
    assert verify_farkas(sys, {0: Fraction(1)})
    assert not verify_farkas(sys, {0: Fraction(0)})
    with pytest.raises(IndexOutOfRange):
        verify_farkas(sys, {1: Fraction(1)})


def test_certificate_json():
    sys = LinearSystem.custom([(1,)], [({(1,): 2}, Fraction(-1, 3))])
    v = phase1_feasibility(sys)
    assert v.to_json()["verdict"] == "infeasible"
    assert all(isinstance(x, str) for x in v.certificate.to_json().values())


def test_inconsistent_equalities_certificate():
    sys = LinearSystem.custom([(1,), (2,)], [({(1,): 1, (2,): 1}, 1), ({(1,): 1, (2,): 1}, 2)])
    v = phase1_feasibility(sys)
    assert not v.feasible and verify_farkas(sys, v.certificate)


@settings(max_examples=30)
@given(instances(max_n=6, max_m=12))
def test_certificates_never_verify_on_feasible_systems(inst):
    sys = build_reduced(inst)
    v = phase1_feasibility(sys)
    rng = random.Random(inst.num_clauses)
    if v.feasible:
        for _ in range(20):
            y = {i: Fraction(rng.randint(-3, 3)) for i in range(len(sys.rows))}
            assert not verify_farkas(sys, y)


def test_maximize_examples():
    sys = build_reduced(ONE)
    idx = sys.unknowns
    assert maximize(sys, {idx[(-1, -2, 3)]: 1}).value == 1
    assert maximize(sys, {idx[(-1, -2, -3)]: 1}).value == 0
    assert maximize(sys, {}).value == 0


def test_maximize_errors():
    n7 = build_reduced(load_fixture("ex3-unsat-n7"))
    with pytest.raises(InfeasibleSystem):
        maximize(n7, {0: 1})
    with pytest.raises(IndexOutOfRange):
        maximize(build_reduced(ONE), {99: 1})
    free = LinearSystem.custom([(1,), (2,)], [({(1,): 1}, 1)])
    with pytest.raises(UnboundedObjective):
        maximize(free, {free.unknowns[(2,)]: 1})


def test_solver_reuses_phase1():
    s = Solver(build_reduced(load_fixture("ex4-sat-n10")))
    a = s.maximize({0: 1})
    b = s.maximize({0: 1})
    assert a.value == b.value


def test_vertices_one_clause():
    vs = enumerate_vertices(build_reduced(ONE))
    assert len(vs) == 7
    assert all(set(v.values()) <= {0, 1} for v in vs)


def test_vertices_single_variable():
    sys = LinearSystem.custom([(1,), (-1,)], [({(1,): 1, (-1,): 1}, 1)])
    pts = sorted(tuple(v[j] for j in range(2)) for v in enumerate_vertices(sys))
    assert pts == [(0, 1), (1, 0)]


def test_vertices_two_complete_requirements():
    # P(a) + P(b) = 1 where a and b are the only two possible complete requirements
    sys = LinearSystem.custom([(1, 2), (-1, -2)], [({(1, 2): 1, (-1, -2): 1}, 1)])
    assert len(enumerate_vertices(sys)) == 2


def test_vertices_guard():
    with pytest.raises(TooLarge):
        enumerate_vertices(build_full(ONE), max_unknowns=20)


def test_vertices_empty_polytope():
    sys = LinearSystem.custom([(1,)], [({(1,): 1}, -1)])
    assert enumerate_vertices(sys) == []


small_systems = st.integers(1, 5).flatmap(
    lambda n: st.lists(
        st.tuples(st.lists(st.integers(-2, 2), min_size=n, max_size=n), st.integers(-2, 3)),
        min_size=1,
        max_size=4,
    )
    .filter(lambda rows: any(any(cs) for cs, _ in rows))
    .map(lambda rows: (n, rows))
)


def _custom(n, rows):
    reqs = [(v,) for v in range(1, n + 1)]
    eqs = [({(j + 1,): c for j, c in enumerate(cs) if c}, b) for cs, b in rows if any(cs)]
    return LinearSystem.custom(reqs, eqs)


@settings(max_examples=200)
@given(small_systems)
def test_phase1_agrees_with_vertex_enumeration(data):
    sys = _custom(*data)
    v = phase1_feasibility(sys)
    assert v.feasible == bool(enumerate_vertices(sys))
    if v.feasible:
        assert sys.is_satisfied_by(v.point)
    else:
        assert verify_farkas(sys, v.certificate)


@settings(max_examples=100)
@given(small_systems, st.randoms(use_true_random=False))
def test_rank_invariant_under_permutation_and_scaling(data, rnd):
    n, rows = data
    sys = _custom(n, rows)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    scaled = [([c * k for c in cs], b * k) for (cs, b), k in zip(shuffled, [rnd.choice([-3, 2, 5]) for _ in rows])]
    assert rank(sys) == rank(_custom(n, scaled)) == np.linalg.matrix_rank(
        np.array([cs for cs, _ in rows if any(cs)], dtype=float).reshape(-1, n)
    )


def _scipy_feasible(sys) -> bool:
    a = np.zeros((len(sys.rows), sys.num_unknowns))
    b = np.zeros(len(sys.rows))
    for i, row in enumerate(sys.rows):
        for j, q in row.coeffs.items():
            a[i, j] = float(q)
        b[i] = float(row.constant)
    res = linprog(np.zeros(sys.num_unknowns), A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    assert res.status in (0, 2)
    return res.status == 0


@pytest.mark.parametrize("seed", range(40))
def test_verdicts_match_float_solver(seed):
    rng = random.Random(seed)
    n = rng.randint(5, 10)
    inst = generate_random_3sat(n, rng.randint(n, 5 * n), seed)
    for mode, rule in CONFIGS:
        sys = build_config(inst, mode, rule)
        v = phase1_feasibility(sys)
        assert v.feasible == _scipy_feasible(sys)
        if v.feasible:
            assert sys.is_satisfied_by(v.point)
        else:
            assert verify_farkas(sys, v.certificate)
            assert not brute_force_sat(inst).satisfiable
