from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from satlp.builder import Mode, Rule, build
from satlp.cnf import CnfInstance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CONFIGS = [(Mode.FULL, None), (Mode.REDUCED, Rule.MINIMAL), (Mode.REDUCED, Rule.VERBOSE), (Mode.REDUCED, Rule.CHAIN)]


def build_config(inst, mode, rule):
    return build(inst, mode, rule) if mode is Mode.REDUCED else build(inst, mode)


def clause_strategy(n):
    return st.tuples(
        st.lists(st.integers(1, n), min_size=3, max_size=3, unique=True),
        st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3),
    ).map(lambda vs: tuple(v * s for v, s in zip(*vs)))


def instances(max_n=6, max_m=8, min_m=1):
    return st.integers(3, max_n).flatmap(
        lambda n: st.lists(clause_strategy(n), min_size=min_m, max_size=max_m).map(lambda cs: CnfInstance(n, cs))
    )


# acceptance results, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2}: {'PASS' if ok else 'FAIL'}  {detail}")
