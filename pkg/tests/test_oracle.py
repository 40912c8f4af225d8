import math

import numpy as np
import pytest

from neutronsim import oracle


def test_mzi_examples():
    p = oracle.mzi_probabilities(0.5, 0.0)
    assert (p.p_O, p.p_H) == pytest.approx((0.5, 0.0), abs=1e-12)
    p = oracle.mzi_probabilities(0.5, math.pi)
    assert (p.p_O, p.p_H) == pytest.approx((0.0, 0.5), abs=1e-12)


def test_mzi_matches_closed_form_and_conserves():
    rng = np.random.default_rng(0)
    for R, chi in zip(rng.uniform(0, 1, 1000), rng.uniform(-10, 10, 1000)):
        p = oracle.mzi_probabilities(R, chi)
        c = oracle.mzi_closed_form(R, chi)
        assert abs(p.p_O + p.p_H + p.p_loss - 1) < 1e-12
        assert abs(p.p_O + p.p_H - R) < 1e-12
        assert (p.p_O, p.p_H, p.p_loss) == pytest.approx((c.p_O, c.p_H, c.p_loss), abs=1e-12)


def test_mzi_amplitude_path_sum():
    R, chi0, chi1 = 0.3, 0.4, -0.2
    t, r = math.sqrt(1 - R), 1j * math.sqrt(R)
    a_o, _, _ = oracle.mzi_amplitudes(R, chi0, chi1)
    expected = r * r * np.exp(1j * chi0) * t + t * r * np.exp(1j * chi1) * r
    assert abs(a_o - expected) < 1e-12


def test_only_phase_difference_matters():
    a = oracle.mzi_probabilities(0.2, 0.9, 0.0)
    b = oracle.mzi_probabilities(0.2, 0.9, 2.3)
    assert a.p_O == pytest.approx(b.p_O, abs=1e-12)


def test_mzi_rejects_bad_reflectivity():
    with pytest.raises(ValueError):
        oracle.mzi_probabilities(1.5, 0.0)


def test_unitarity():
    for R in np.linspace(0, 1, 51):
        assert oracle.is_unitary(oracle.beam_splitter_matrix(R))
        assert oracle.is_unitary(oracle.CHANNEL_SWAP @ oracle.beam_splitter_matrix(R))
    for a in np.linspace(-5, 5, 21):
        assert oracle.is_unitary(oracle.phase_matrix(a, 2 * a))
        assert oracle.is_unitary(oracle.spin_rotation(np.array([0.0, 0.6, 0.8]), a))


def test_visibilities():
    vo, vh = oracle.ideal_visibilities(0.2)
    assert vo == 1.0 and vh == pytest.approx(0.32 / 0.68)


@pytest.mark.parametrize("args, E", [((0, 0, "y"), 1), ((math.pi / 2, math.pi / 2, "y"), -1),
                                     ((math.pi / 2, 0, "x"), 0)])
def test_bell_E_ideal(args, E):
    assert oracle.bell_E_ideal(*args) == pytest.approx(E, abs=1e-15)


def test_bell_E_ideal_rejects_axis():
    with pytest.raises(ValueError):
        oracle.bell_E_ideal(0, 0, "z")


@pytest.mark.parametrize("axis", ["y", "x"])
def test_bell_quantum_matches_ideal(axis):
    for a in np.linspace(0, 2 * math.pi, 9):
        for c in np.linspace(0, 2 * math.pi, 9):
            q = oracle.bell_E_quantum(0.2, a, c, axis)
            assert q == pytest.approx(oracle.bell_E_ideal(a, c, axis), abs=1e-12)


def test_ozawa_curve_limits():
    r2 = math.sqrt(2)
    c = oracle.ozawa_curves(0.0)
    assert (c.epsilon, c.eta, c.lhs_ozawa, c.lhs_heisenberg, c.rhs) == pytest.approx((0, r2, r2, 0, 1), abs=1e-12)
    c = oracle.ozawa_curves(math.pi / 2)
    assert (c.epsilon, c.eta, c.lhs_ozawa, c.lhs_heisenberg, c.rhs) == pytest.approx((r2, 0, r2, 0, 1), abs=1e-12)


def test_heisenberg_violation_at_1_2():
    c = oracle.ozawa_curves(1.2)
    assert c.lhs_heisenberg == pytest.approx(2 * math.sqrt(2) * math.sin(0.6) * math.cos(1.2), abs=1e-12)
    assert c.lhs_heisenberg == pytest.approx(0.579, abs=1e-3)
    assert c.lhs_ozawa >= 1


def test_ozawa_relation_holds_on_fine_grid():
    for phi in np.linspace(0, math.pi / 2, 1000):
        assert oracle.ozawa_curves(phi).lhs_ozawa >= 1 - 1e-12


def test_measured_operators_are_consistent():
    for phi in np.linspace(0, math.pi / 2, 7):
        o_a, o_b = oracle.measured_operators(phi)
        assert np.allclose(o_a @ o_a, np.eye(2), atol=1e-12)
        exp = oracle.ozawa_expectations(phi)
        eps2 = 2 + exp["+z"][0] + exp["-z"][0] - 2 * exp["+x"][0]
        assert eps2 == pytest.approx(oracle.ozawa_curves(phi).epsilon ** 2, abs=1e-12)
