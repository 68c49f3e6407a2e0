import random
from fractions import Fraction

import numpy as np
import pytest

from su11lab.fock import SiteSpace


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


@pytest.fixture
def space3():
    return SiteSpace([Fraction(1, 2), Fraction(3, 2), Fraction(2)])


@pytest.fixture
def space2():
    return SiteSpace([Fraction(1, 2), Fraction(3, 2)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
