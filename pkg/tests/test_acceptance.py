"""Acceptance criteria at their stated tolerances, seed fixed in advance.

Each test prints one PASS/FAIL line; the lines are also collected and shown
in the pytest terminal summary.  Oracle-first checks run before the
simulation-based criteria.
"""

import math

import numpy as np
import pytest

from neutronsim import acceptance, oracle

LINES: list[str] = []


def report(res):
    line = res.line()
    print(line)
    LINES.append(line)
    assert res.passed, line


def test_oracle_first_ground_truth():
    checks = {
        "p_O closed form": all(
            abs(oracle.mzi_probabilities(0.2, c).p_O - 2 * 0.04 * 0.8 * (1 + math.cos(c))) < 1e-12
            for c in np.linspace(0, 2 * math.pi, 16)
        ),
        "S_max = 2 sqrt 2": abs(
            sum(s * oracle.bell_E_ideal(a, c) for s, a, c in
                [(1, 0, math.pi / 4), (1, 0, -math.pi / 4), (-1, math.pi / 2, math.pi / 4),
                 (1, math.pi / 2, -math.pi / 4)]) - 2 * math.sqrt(2)) < 1e-12,
        "Ozawa bound": all(oracle.ozawa_curves(p).lhs_ozawa >= 1 - 1e-12
                           for p in np.linspace(0, math.pi / 2, 1000)),
    }
    report(acceptance._result("0 oracle ground truth", checks, "closed forms verified"))


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    report(criterion(acceptance.ACCEPTANCE_SEED, 4))
