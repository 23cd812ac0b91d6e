import numpy as np
import pytest

from dpii import b_of_pole, hastings_mcleod
from dpii.tronquee import family_trajectory

# acceptance criterion -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}

FAMILY_OMEGAS = (2.0, 0.5, -1.0)


def record(ac, passed, detail):
    ACCEPTANCE[ac] = (bool(passed), detail)
    print(f"{ac}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(ACCEPTANCE, key=lambda s: int(s[2:])):
        ok, detail = ACCEPTANCE[ac]
        terminalreporter.write_line(f"{ac:5s} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def hm():
    return hastings_mcleod()


@pytest.fixture(scope="session")
def family_keys():
    return {w: b_of_pole(w) for w in FAMILY_OMEGAS}


@pytest.fixture(scope="session")
def family(family_keys):
    return {w: family_trajectory(k.delta, k.x_left) for w, k in family_keys.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
