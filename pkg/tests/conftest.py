import numpy as np
import pytest

from relex import cayley as C
from relex import tower as T


@pytest.fixture(scope="session")
def surrogate2():
    inst = T.box_family("sl2-surrogate", 2)
    idx = inst.enumerate()
    return inst, idx, C.build_cayley(idx)


@pytest.fixture(scope="session")
def wreath2():
    inst = T.box_family("sl2-wreath-haagerup", 2, lamp="z2")
    idx = inst.enumerate()
    return inst, idx, C.build_cayley(idx)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def record_check():
    """Print and remember a "[PASS]/[FAIL] #NN name" line for the end-of-run summary."""
    def record(res):
        line = res.line()
        print(line)
        ACCEPTANCE_LINES.append(line)
        return res
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split("#")[1]):
            terminalreporter.write_line(line)
