from fractions import Fraction as F
from pathlib import Path

import pytest

from minps import load_market, make_market

MARKETS = Path(__file__).resolve().parent.parent / "markets"


@pytest.fixture
def unit_caps():
    return load_market(MARKETS / "unit_caps.json")


@pytest.fixture
def no_minimums():
    return load_market(MARKETS / "no_minimums.json")


@pytest.fixture
def with_minimums():
    return load_market(MARKETS / "with_minimums.json")


@pytest.fixture
def demand2():
    return load_market(MARKETS / "demand2.json")


def matrix(rows):
    return tuple(tuple(F(x) for x in row) for row in rows)


WITH_MINIMUMS_MPS = matrix([["2/3", "1/3", 0], ["2/3", "1/3", 0], [0, "1/3", "2/3"]])
NO_MINIMUMS_MPS = matrix([["1/2", 0, "1/2", 0], ["1/2", 0, "1/2", 0],
                       [0, "1/2", 0, "1/2"], [0, "1/2", 0, "1/2"]])
NO_MINIMUMS_RSD = matrix([["5/12", "1/12", "5/12", "1/12"], ["5/12", "1/12", "5/12", "1/12"],
                       ["1/12", "5/12", "1/12", "5/12"], ["1/12", "5/12", "1/12", "5/12"]])


def two_agent_min_market():
    # Both prefer o1, o2 carries a minimum of one.
    return make_market([[0, 1], [0, 1]], [0, 1], [2, 2])


# -- acceptance report -------------------------------------------------------

_REPORT: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(name, ok, detail=""):
        line = f"{name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        _REPORT.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
