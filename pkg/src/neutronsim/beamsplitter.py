"""Adaptive beam splitter built on a deterministic learning machine (DLM).

Per event the device

1. stores the incoming message in the register of its input channel and
   moves its internal vector ``v`` toward that channel:
   ``v <- gamma * v + (1 - gamma) * q``;
2. mixes the ``sqrt(v)``-weighted registers with the splitter matrix
   ``[[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]]`` into four amplitudes;
3. draws ``r`` in (0, 1) and emits ``(h0, h2)`` or ``(h1, h3)`` normalized,
   on the channel given by ``ROUTING``.

The whole state is ten floats, laid out as::

    [v0, v1, Re R00, Im R00, Re R10, Im R10, Re R01, Im R01, Re R11, Im R11]

where ``R_ik`` is spin component ``i`` of the register for input ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .message import Message
from .rng import RngStream, uniform_open

# Output channel for pair (h0, h2) and for pair (h1, h3).
ROUTING = (1, 0)

ROUTE_OK = 0
ROUTE_OTHER_PAIR = 1
ROUTE_REGISTER = 2
ROUTE_DEGENERATE = 3


class DegenerateAmplitudeError(ArithmeticError):
    """No output message can be normalized."""


@dataclass(frozen=True)
class AmplitudeQuad:
    h0: complex
    h1: complex
    h2: complex
    h3: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return self.h0, self.h1, self.h2, self.h3

    @property
    def total(self) -> float:
        return sum(abs(h) ** 2 for h in self.as_tuple())


@dataclass(frozen=True)
class RoutedMessage:
    channel: int
    message: Message
    fallback: int = ROUTE_OK


# -- numba kernels ------------------------------------------------------------


@njit(cache=True, nogil=True)
def _random_register(data, offset, rng_state):
    # isotropic moment direction, random phases
    cos_t = 1.0 - 2.0 * uniform_open(rng_state)
    theta = math.acos(min(1.0, max(-1.0, cos_t)))
    p1 = 2.0 * math.pi * uniform_open(rng_state)
    p2 = 2.0 * math.pi * uniform_open(rng_state)
    a = math.cos(0.5 * theta)
    b = math.sin(0.5 * theta)
    data[offset] = a * math.cos(p1)
    data[offset + 1] = a * math.sin(p1)
    data[offset + 2] = b * math.cos(p2)
    data[offset + 3] = b * math.sin(p2)


@njit(cache=True, nogil=True)
def bs_init(data, rng_state):
    r = uniform_open(rng_state)
    data[0] = r
    data[1] = 1.0 - r
    _random_register(data, 2, rng_state)
    _random_register(data, 6, rng_state)


@njit(cache=True, nogil=True)
def bs_update(data, channel, c0, c1, gamma):
    off = 2 + 4 * channel
    data[off] = c0.real
    data[off + 1] = c0.imag
    data[off + 2] = c1.real
    data[off + 3] = c1.imag
    if channel == 0:
        v0 = gamma * data[0] + (1.0 - gamma)
    else:
        v0 = gamma * data[0]
    # v1 recovered from the constraint keeps v0 + v1 == 1 exactly
    v0 = min(max(v0, 0.0), 1.0)
    data[0] = v0
    data[1] = 1.0 - v0


@njit(cache=True, nogil=True)
def bs_amplitudes(data, reflectivity):
    sv0 = math.sqrt(max(data[0], 0.0))
    sv1 = math.sqrt(max(data[1], 0.0))
    st = math.sqrt(1.0 - reflectivity)
    sr = math.sqrt(reflectivity)
    r00 = complex(data[2], data[3])
    r10 = complex(data[4], data[5])
    r01 = complex(data[6], data[7])
    r11 = complex(data[8], data[9])
    h0 = sv0 * st * r00 + 1j * sv1 * sr * r01
    h1 = 1j * sv0 * sr * r00 + sv1 * st * r01
    h2 = sv0 * st * r10 + 1j * sv1 * sr * r11
    h3 = 1j * sv0 * sr * r10 + sv1 * st * r11
    return h0, h1, h2, h3


@njit(cache=True, nogil=True)
def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@njit(cache=True, nogil=True)
def bs_route(data, h0, h1, h2, h3, r):
    """Return ``(channel, w0, w1, fallback_code)``."""
    pa = _abs2(h0) + _abs2(h2)
    pb = _abs2(h1) + _abs2(h3)
    pick_a = pa > r
    code = ROUTE_OK
    if pick_a:
        channel = ROUTING[0]
        if pa > 0.0:
            n = math.sqrt(pa)
            return channel, h0 / n, h2 / n, code
        if pb > 0.0:
            n = math.sqrt(pb)
            return channel, h1 / n, h3 / n, ROUTE_OTHER_PAIR
    else:
        channel = ROUTING[1]
        if pb > 0.0:
            n = math.sqrt(pb)
            return channel, h1 / n, h3 / n, code
        if pa > 0.0:
            n = math.sqrt(pa)
            return channel, h0 / n, h2 / n, ROUTE_OTHER_PAIR
    for off in (2, 6):
        n2 = data[off] ** 2 + data[off + 1] ** 2 + data[off + 2] ** 2 + data[off + 3] ** 2
        if n2 > 0.0:
            n = math.sqrt(n2)
            w0 = complex(data[off], data[off + 1]) / n
            w1 = complex(data[off + 2], data[off + 3]) / n
            return channel, w0, w1, ROUTE_REGISTER
    return channel, 0j, 0j, ROUTE_DEGENERATE


@njit(cache=True, nogil=True)
def bs_process(data, channel, c0, c1, gamma, reflectivity, rng_state):
    bs_update(data, channel, c0, c1, gamma)
    h0, h1, h2, h3 = bs_amplitudes(data, reflectivity)
    return bs_route(data, h0, h1, h2, h3, uniform_open(rng_state))


# -- public API ----------------------------------------------------------------


class BeamSplitterState:
    """Mutable, single-owner DLM state plus its two fixed parameters."""

    __slots__ = ("data", "gamma", "reflectivity")

    def __init__(self, gamma: float, reflectivity: float, data=None):
        _check_params(gamma, reflectivity)
        self.gamma = float(gamma)
        self.reflectivity = float(reflectivity)
        self.data = np.zeros(10) if data is None else np.array(data, dtype=np.float64)
        if self.data.shape != (10,):
            raise ValueError("beam splitter state holds exactly ten floats")

    @classmethod
    def from_parts(cls, gamma, reflectivity, v, reg0: Message, reg1: Message):
        data = [v[0], v[1]]
        for reg in (reg0, reg1):
            c0, c1 = complex(reg.c0), complex(reg.c1)
            data += [c0.real, c0.imag, c1.real, c1.imag]
        return cls(gamma, reflectivity, data)

    @property
    def transmissivity(self) -> float:
        return 1.0 - self.reflectivity

    @property
    def v(self) -> tuple[float, float]:
        return float(self.data[0]), float(self.data[1])

    def register(self, channel: int) -> Message:
        off = 2 + 4 * channel
        d = self.data
        return Message(complex(d[off], d[off + 1]), complex(d[off + 2], d[off + 3]))

    @property
    def reg0(self) -> Message:
        return self.register(0)

    @property
    def reg1(self) -> Message:
        return self.register(1)

    def snapshot(self) -> dict:
        return {
            "gamma": self.gamma,
            "reflectivity": self.reflectivity,
            "state": [float(x) for x in self.data],
        }


def _check_params(gamma: float, reflectivity: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {reflectivity!r}")


def _check_channel(channel: int) -> int:
    if channel not in (0, 1):
        raise ValueError(f"channel must be 0 or 1, got {channel!r}")
    return int(channel)


def init_state(gamma: float, reflectivity: float, rng: RngStream) -> BeamSplitterState:
    state = BeamSplitterState(gamma, reflectivity)
    bs_init(state.data, rng.state)
    return state


def update_internal(state: BeamSplitterState, channel: int, msg: Message) -> BeamSplitterState:
    bs_update(state.data, _check_channel(channel), complex(msg.c0), complex(msg.c1), state.gamma)
    return state


def compute_amplitudes(state: BeamSplitterState) -> AmplitudeQuad:
    return AmplitudeQuad(*bs_amplitudes(state.data, state.reflectivity))


def route(state: BeamSplitterState, quad: AmplitudeQuad, rng: RngStream) -> RoutedMessage:
    """Pick the output channel for ``quad`` with one uniform draw.

    If the selected pair cannot be normalized the other pair is used, then
    a stored register; ``RoutedMessage.fallback`` records which.  Raises
    ``DegenerateAmplitudeError`` when nothing can be normalized.
    """
    channel, w0, w1, code = bs_route(state.data, *quad.as_tuple(), rng.next_uniform())
    if code == ROUTE_DEGENERATE:
        raise DegenerateAmplitudeError("all amplitudes and registers are zero")
    return RoutedMessage(int(channel), Message(w0, w1), int(code))


def process_event(
    state: BeamSplitterState, channel: int, msg: Message, rng: RngStream
) -> RoutedMessage:
    update_internal(state, channel, msg)
    return route(state, compute_amplitudes(state), rng)
