import math

import pytest

from neutronsim.message import Message


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def assert_moment(msg: Message, expected, tol=1e-12):
    from neutronsim.message import moment_of

    got = moment_of(msg).as_tuple()
    assert got == pytest.approx(expected, abs=tol)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
