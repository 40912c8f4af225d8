"""Closed-form quantum predictions used as ground truth.

Nothing here touches the event-based code: interferometer amplitudes are
composed from 2x2 transfer matrices along the same directed graph as the
event network, and spin operators are built with ``scipy.linalg.expm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# (port 0, port 1) amplitudes -> (channel 0, channel 1): the splitter's
# first output pair leaves on channel 1, the second on channel 0.
CHANNEL_SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class MziProbabilities:
    p_O: float
    p_H: float
    p_loss: float


@dataclass(frozen=True)
class OzawaCurve:
    epsilon: float
    eta: float
    lhs_ozawa: float
    lhs_heisenberg: float
    rhs: float


def beam_splitter_matrix(reflectivity: float) -> np.ndarray:
    t, r = math.sqrt(1.0 - reflectivity), math.sqrt(reflectivity)
    return np.array([[t, 1j * r], [1j * r, t]], dtype=complex)


def phase_matrix(chi0: float, chi1: float) -> np.ndarray:
    return np.diag([np.exp(1j * chi0), np.exp(1j * chi1)])


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=tol, rtol=0))


def _splitter(reflectivity: float, port0, port1):
    """Route amplitudes (any trailing shape, e.g. spinors) through one splitter."""
    out = CHANNEL_SWAP @ beam_splitter_matrix(reflectivity)
    return out[0, 0] * port0 + out[0, 1] * port1, out[1, 0] * port0 + out[1, 1] * port1


def mzi_amplitudes(reflectivity: float, chi0: float, chi1: float, payload=1.0 + 0j,
                   arm0=None, arm1=None):
    """Amplitudes ``(a_O, a_H, lost)`` of the four-splitter network.

    ``payload`` is the injected amplitude (scalar or spinor); ``arm0``/``arm1``
    optionally act on it right after BS0 (the mu-metal turners).
    """
    payload = np.asarray(payload, dtype=complex)
    zero = np.zeros_like(payload)
    a0, a1 = _splitter(reflectivity, payload, zero)
    if arm0 is not None:
        a0 = arm0 @ a0
    if arm1 is not None:
        a1 = arm1 @ a1
    keep0, lost1 = _splitter(reflectivity, a0, zero)  # BS1, input 0
    lost2, keep1 = _splitter(reflectivity, zero, a1)  # BS2, input 1
    keep0 = np.exp(1j * chi0) * keep0
    keep1 = np.exp(1j * chi1) * keep1
    h_beam, o_beam = _splitter(reflectivity, keep0, keep1)  # BS3
    return o_beam, h_beam, (lost1, lost2)


def mzi_probabilities(reflectivity: float, chi: float, chi1: float = 0.0) -> MziProbabilities:
    """Beam probabilities for phase difference ``chi`` (``chi0 = chi + chi1``)."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity must lie in [0, 1]")
    a_o, a_h, lost = mzi_amplitudes(reflectivity, chi + chi1, chi1)
    p_loss = sum(float(np.sum(np.abs(x) ** 2)) for x in lost)
    return MziProbabilities(float(np.abs(a_o) ** 2), float(np.abs(a_h) ** 2), p_loss)


def mzi_closed_form(reflectivity: float, chi: float) -> MziProbabilities:
    r, t = reflectivity, 1.0 - reflectivity
    return MziProbabilities(
        2 * r * r * t * (1 + math.cos(chi)),
        r * (r * r + t * t - 2 * r * t * math.cos(chi)),
        t,
    )


def ideal_visibilities(reflectivity: float) -> tuple[float, float]:
    """(O-beam, H-beam) fringe visibility of the ideal interferometer."""
    r, t = reflectivity, 1.0 - reflectivity
    return 1.0, 2 * r * t / (r * r + t * t)


def spin_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """``exp(+i angle (sigma . axis) / 2)``."""
    gen = axis[0] * SIGMA_X + axis[1] * SIGMA_Y + axis[2] * SIGMA_Z
    return expm(0.5j * angle * gen)


def bell_E_ideal(alpha: float, chi: float, mu_axis: str = "y") -> float:
    if mu_axis == "y":
        return math.cos(alpha + chi)
    if mu_axis == "x":
        return math.cos(alpha) * math.cos(chi)
    raise ValueError(f"mu_axis must be 'y' or 'x', got {mu_axis!r}")


def bell_pass_probability(reflectivity: float, alpha: float, chi: float,
                          mu_axis: str = "y") -> float:
    """Probability that a source neutron is counted behind the O-beam analyzer."""
    axis = np.array([0.0, 1.0, 0.0]) if mu_axis == "y" else np.array([1.0, 0.0, 0.0])
    spin_up = np.array([1.0, 0.0], dtype=complex)
    a_o, _, _ = mzi_amplitudes(
        reflectivity, chi, 0.0, spin_up,
        arm0=spin_rotation(axis, -0.5 * math.pi), arm1=spin_rotation(axis, 0.5 * math.pi),
    )
    rotated = spin_rotation(np.array([1.0, 0.0, 0.0]), alpha) @ a_o
    return float(abs(rotated[0]) ** 2)


def bell_E_quantum(reflectivity: float, alpha: float, chi: float, mu_axis: str = "y") -> float:
    """Correlation assembled from four quantum count rates."""
    pi = math.pi
    n = [
        bell_pass_probability(reflectivity, a, c, mu_axis)
        for a, c in ((alpha, chi), (alpha + pi, chi + pi), (alpha + pi, chi), (alpha, chi + pi))
    ]
    return (n[0] + n[1] - n[2] - n[3]) / sum(n)


STATE_VECTORS = {
    "+z": np.array([1, 0], dtype=complex),
    "-z": np.array([0, 1], dtype=complex),
    "+x": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "+y": np.array([1, 1j], dtype=complex) / math.sqrt(2),
}


def measured_operators(phi: float) -> tuple[np.ndarray, np.ndarray]:
    """``O_A = sigma^phi`` and the B readout after the O_A measurement."""
    o_a = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
    o_b = np.zeros((2, 2), dtype=complex)
    for s in (1, -1):
        proj = 0.5 * (IDENTITY + s * o_a)
        o_b += proj @ SIGMA_Y @ proj
    return o_a, o_b


def ozawa_expectations(phi: float) -> dict[str, tuple[float, float]]:
    """Exact ``(<O_A>, <O_B>)`` for the four preparation states."""
    o_a, o_b = measured_operators(phi)
    out = {}
    for label, psi in STATE_VECTORS.items():
        out[label] = (float(np.real(psi.conj() @ o_a @ psi)), float(np.real(psi.conj() @ o_b @ psi)))
    return out


def ozawa_curves(phi: float) -> OzawaCurve:
    eps = 2.0 * abs(math.sin(0.5 * phi))
    eta = math.sqrt(2.0) * abs(math.cos(phi))
    lhs = (
        2 * math.sqrt(2) * math.cos(phi) * math.sin(0.5 * phi)
        + 2 * math.sin(0.5 * phi)
        + math.sqrt(2) * math.cos(phi)
    )
    psi = STATE_VECTORS["+z"]
    commutator = SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X
    rhs = abs(psi.conj() @ commutator @ psi) / 2
    return OzawaCurve(eps, eta, lhs, eps * eta, float(rhs))
