import math
import sys

import numpy as np
import pytest

from telesim.qcore import StateVector


@pytest.fixture
def gen():
    return np.random.default_rng(1234)


def haar_qubit(gen) -> StateVector:
    v = gen.normal(size=2) + 1j * gen.normal(size=2)
    return StateVector.normalized(v, (2,))


def brute_three_particle(a, b, alpha, beta):
    """8 amplitudes of (a,b)_1 (x) (alpha|00> + beta|11>)_23 by explicit loops."""
    inp = [a, b]
    chan = {(0, 0): alpha, (1, 1): beta}
    out = np.zeros(8, dtype=complex)
    for i1 in range(2):
        for i2 in range(2):
            for i3 in range(2):
                out[4 * i1 + 2 * i2 + i3] = inp[i1] * chan.get((i2, i3), 0.0)
    return out


R2 = 1 / math.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary():
        terminalreporter.write_line(line)
