import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neutronsim.devices import (
    DetectorCounter,
    SourceSpec,
    analyzer_along,
    analyzer_pass,
    detect,
    guide_precession,
    mu_metal,
    pass_probability,
    phase_shift,
    source_emit,
    spin_flip,
    spin_rotate_x,
)
from neutronsim.message import Message, make_message, moment_of
from neutronsim.rng import RngStream

from conftest import assert_moment, binomial_sigma

UP = Message(1 + 0j, 0j)
DOWN = Message(0j, 1 + 0j)
PLUS_X = make_message(math.pi / 2, 0, 0)
angles = st.floats(-10, 10)


def test_source_emit():
    assert source_emit(SourceSpec()).isclose(UP, 0)
    s2 = math.sqrt(2) / 2
    assert source_emit(SourceSpec(math.pi / 2, 0, 0)).isclose(Message(s2, s2), 1e-15)


def test_phase_shift():
    msg = make_message(1.0, 0.3, -0.4)
    assert phase_shift(msg, 0.0).isclose(msg, 0)
    assert phase_shift(msg, math.pi).isclose(Message(-msg.c0, -msg.c1), 1e-15)


def test_mu_metal():
    assert_moment(mu_metal(UP, "H"), (-1, 0, 0))
    assert_moment(mu_metal(UP, "O"), (1, 0, 0))
    msg = make_message(1.1, 0.4, 2.0)
    assert_moment(mu_metal(mu_metal(msg, "H"), "O"), moment_of(msg).as_tuple())
    with pytest.raises(ValueError):
        mu_metal(UP, "Q")


def test_mu_metal_x_axis_turns_about_x():
    assert_moment(mu_metal(UP, "H", "x"), (0, 1, 0))
    assert_moment(mu_metal(PLUS_X, "O", "x"), (1, 0, 0))


def test_spin_rotate_x():
    msg = make_message(0.7, 0.1, 0.2)
    assert spin_rotate_x(msg, 0.0).isclose(msg, 0)
    assert_moment(spin_rotate_x(UP, math.pi), (0, 0, -1))
    assert_moment(spin_rotate_x(UP, math.pi / 2), (0, 1, 0))


@settings(max_examples=100, deadline=None)
@given(angles, angles, angles, angles)
def test_rotate_x_inverse(th, p1, p2, alpha):
    msg = make_message(th, p1, p2)
    assert spin_rotate_x(spin_rotate_x(msg, alpha), -alpha).isclose(msg, 1e-9)


def test_spin_flip():
    assert_moment(spin_flip(UP), (0, 0, -1))


def test_guide_precession():
    msg = make_message(1.3, 0.2, 0.9)
    assert_moment(guide_precession(msg, 2 * math.pi), moment_of(msg).as_tuple())
    # the field angle turns the moment by -angle about z
    assert_moment(guide_precession(PLUS_X, math.pi / 2), (0, -1, 0))
    assert_moment(guide_precession(UP, 1.234), (0, 0, 1))


@settings(max_examples=100, deadline=None)
@given(angles, angles, angles, angles)
def test_devices_preserve_norm(th, p1, p2, a):
    msg = make_message(th, p1, p2)
    for out in (phase_shift(msg, a), mu_metal(msg, "H"), mu_metal(msg, "O", "x"),
                spin_rotate_x(msg, a), spin_flip(msg), guide_precession(msg, a)):
        assert abs(out.norm - 1) < 1e-9


def test_analyzer_extremes():
    rng = RngStream(1)
    for _ in range(1000):
        passed, out = analyzer_pass(UP, rng)
        assert passed and out.isclose(UP, 0)
        passed, out = analyzer_pass(DOWN, rng)
        assert not passed and out is None


def pass_fraction(fn, n):
    return sum(fn()[0] for _ in range(n)) / n


def test_analyzer_plus_x_half():
    rng, n = RngStream(2), 100_000
    frac = pass_fraction(lambda: analyzer_pass(PLUS_X, rng), n)
    assert abs(frac - 0.5) <= 3 * binomial_sigma(0.5, n)


def test_analyzer_output_is_eigen_message():
    rng = RngStream(3)
    msg = make_message(1.0, 0.3, 0.0)
    for _ in range(50):
        passed, out = analyzer_along(msg, (0, 1, 0), -1, rng)
        if passed:
            assert_moment(out, (0, -1, 0), tol=1e-12)


def test_analyzer_along_aligned_always_passes():
    rng = RngStream(4)
    d = (0.6, 0.0, 0.8)
    msg = make_message(math.acos(0.8), 0.0, 0.0)
    assert moment_of(msg).as_tuple() == pytest.approx(d)
    assert all(analyzer_along(msg, d, 1, rng)[0] for _ in range(1000))
    assert not any(analyzer_along(msg, d, -1, rng)[0] for _ in range(1000))


@pytest.mark.parametrize("phi", [0.0, 0.7, 2.5])
def test_analyzer_along_perpendicular_half(phi):
    rng, n = RngStream(5, int(phi * 10)), 100_000
    d = (math.cos(phi), math.sin(phi), 0.0)
    frac = pass_fraction(lambda: analyzer_along(UP, d, 1, rng), n)
    assert abs(frac - 0.5) <= 3 * binomial_sigma(0.5, n)


def test_analyzer_along_random_moments():
    rng = RngStream(6)
    gen = np.random.default_rng(6)
    n = 20_000
    for _ in range(5):
        msg = make_message(*gen.uniform(0, 2 * math.pi, 3))
        d = gen.normal(size=3)
        d = tuple(d / np.linalg.norm(d))
        sign = int(gen.choice([-1, 1]))
        p = pass_probability(msg, d, sign)
        frac = pass_fraction(lambda: analyzer_along(msg, d, sign, rng), n)
        assert abs(frac - p) <= 3.5 * binomial_sigma(p, n) + 1e-12


def test_analyzer_along_rejects_bad_sign():
    with pytest.raises(ValueError):
        analyzer_along(UP, (0, 0, 1), 0, RngStream(1))


def test_detect_counts():
    c = DetectorCounter()
    assert c.count == 0
    for _ in range(17):
        detect(c)
    assert c.count == 17
