from itertools import product

import pytest
from conftest import instances
from hypothesis import given

from satlp.cnf import CnfInstance
from satlp.errors import InstanceTooLarge
from satlp.harness import load_fixture
from satlp.oracle import brute_force_sat, models


def test_one_clause():
    res = brute_force_sat(CnfInstance(3, [(3, 2, 1)]))
    assert res.model_count == 7
    assert res.witness == (False, False, True)


def test_fixture_counts():
    assert brute_force_sat(load_fixture("ex3-unsat-n7")).model_count == 0
    res = brute_force_sat(load_fixture("ex4-sat-n10"))
    assert res.model_count == 1
    assert load_fixture("ex4-sat-n10").satisfied_by(dict(enumerate(res.witness, 1)))


def test_empty_instance():
    res = brute_force_sat(CnfInstance(4, []))
    assert res.model_count == 16 and res.witness == (False,) * 4


def test_cap():
    with pytest.raises(InstanceTooLarge):
        brute_force_sat(CnfInstance(27, [(1, 2, 3)]))
    with pytest.raises(InstanceTooLarge):
        brute_force_sat(CnfInstance(5, [(1, 2, 3)]), cap=4)


@given(instances(max_n=7, max_m=20, min_m=0))
def test_matches_naive_enumeration(inst):
    naive = [a for a in product([False, True], repeat=inst.num_vars) if inst.satisfied_by(dict(enumerate(a, 1)))]
    res = brute_force_sat(inst)
    assert res.model_count == len(naive)
    assert res.witness == (naive[0] if naive else None)
    assert models(inst) == naive
