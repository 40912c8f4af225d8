"""Non-adaptive devices: source, phase shifter, spin rotators, analyzer, detector.

All rotations go through ``message.precess_components`` and share its sign
convention (``exp(+i a sigma.n / 2)`` turns the moment by ``-a`` about n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from numba import njit

from .message import (
    Message,
    _unit_axis,
    make_message,
    moment_components,
    phase_components,
    precess_components,
)
from .rng import RngStream

HALF_PI = 0.5 * math.pi
MU_METAL_ANGLE = {"H": HALF_PI, "O": -HALF_PI}
MU_METAL_AXES = {"y": (0.0, 1.0, 0.0), "x": (1.0, 0.0, 0.0)}


@dataclass(frozen=True)
class SourceSpec:
    """Fixed-state coherent source: every messenger gets the same angles."""

    theta: float = 0.0
    psi1: float = 0.0
    psi2: float = 0.0


@dataclass
class DetectorCounter:
    count: int = 0


# -- numba kernels ------------------------------------------------------------


@njit(cache=True, nogil=True)
def analyzer_kernel(c0, c1, r):
    """Heusler analyzer: pass when ``r <= (1 + mz) / 2``.

    Passing messages leave as spin up, keeping the phase of ``c0``.
    """
    a0 = c0.real * c0.real + c0.imag * c0.imag
    a1 = c1.real * c1.real + c1.imag * c1.imag
    if r <= 0.5 * (1.0 + a0 - a1) and a0 > 0.0:
        return True, c0 / math.sqrt(a0), 0j
    return False, c0, c1


@njit(cache=True, nogil=True)
def alignment(dx, dy, dz):
    """Axis and field angle of the precession taking direction d onto +z."""
    # k = d x z
    kx, ky = dy, -dx
    kn = math.sqrt(kx * kx + ky * ky)
    beta = math.atan2(kn, dz)
    if kn < 1e-15:
        return 1.0, 0.0, 0.0, -beta
    return kx / kn, ky / kn, 0.0, -beta


@njit(cache=True, nogil=True)
def analyzer_along_kernel(c0, c1, dx, dy, dz, sign, r):
    kx, ky, kz, angle = alignment(dx, dy, dz)
    c0, c1 = precess_components(c0, c1, kx, ky, kz, angle)
    if sign < 0:
        c0, c1 = precess_components(c0, c1, 1.0, 0.0, 0.0, math.pi)
    passed, c0, c1 = analyzer_kernel(c0, c1, r)
    if not passed:
        return False, c0, c1
    if sign < 0:
        c0, c1 = precess_components(c0, c1, 1.0, 0.0, 0.0, -math.pi)
    c0, c1 = precess_components(c0, c1, kx, ky, kz, -angle)
    return True, c0, c1


# -- public API ----------------------------------------------------------------


def source_emit(spec: SourceSpec) -> Message:
    return make_message(spec.theta, spec.psi1, spec.psi2)


def phase_shift(msg: Message, chi: float) -> Message:
    return Message(*phase_components(complex(msg.c0), complex(msg.c1), float(chi)))


def _precess(msg: Message, axis, angle: float) -> Message:
    return Message(*precess_components(complex(msg.c0), complex(msg.c1), *axis, float(angle)))


def mu_metal(msg: Message, beam: str, axis: str = "y") -> Message:
    """Spin turner: +pi/2 field angle on the H arm, -pi/2 on the O arm."""
    if beam not in MU_METAL_ANGLE:
        raise ValueError(f"beam must be 'H' or 'O', got {beam!r}")
    if axis not in MU_METAL_AXES:
        raise ValueError(f"mu-metal axis must be 'y' or 'x', got {axis!r}")
    return _precess(msg, MU_METAL_AXES[axis], MU_METAL_ANGLE[beam])


def spin_rotate_x(msg: Message, alpha: float) -> Message:
    return _precess(msg, (1.0, 0.0, 0.0), alpha)


def spin_flip(msg: Message) -> Message:
    return spin_rotate_x(msg, math.pi)


def guide_precession(msg: Message, angle: float) -> Message:
    """Larmor precession in the guiding field along +z."""
    return _precess(msg, (0.0, 0.0, 1.0), angle)


def analyzer_pass(msg: Message, rng: RngStream) -> tuple[bool, Message | None]:
    """Returns ``(passed, outgoing message)``; the message is None when destroyed."""
    passed, w0, w1 = analyzer_kernel(complex(msg.c0), complex(msg.c1), rng.next_uniform())
    return (True, Message(w0, w1)) if passed else (False, None)


def analyzer_along(
    msg: Message, direction, sign: int, rng: RngStream
) -> tuple[bool, Message | None]:
    """Select the ``sign * direction`` moment; survivors leave in that state."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    dx, dy, dz = _unit_axis(direction)
    passed, w0, w1 = analyzer_along_kernel(
        complex(msg.c0), complex(msg.c1), dx, dy, dz, sign, rng.next_uniform()
    )
    return (True, Message(w0, w1)) if passed else (False, None)


def pass_probability(msg: Message, direction=(0.0, 0.0, 1.0), sign: int = 1) -> float:
    mx, my, mz = moment_components(complex(msg.c0), complex(msg.c1))
    dx, dy, dz = direction
    return 0.5 * (1.0 + sign * (mx * dx + my * dy + mz * dz))


def detect(counter: DetectorCounter) -> DetectorCounter:
    counter.count += 1
    return counter
