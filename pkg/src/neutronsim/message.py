"""Neutron messages and the two rules that change them in flight.

A message is a two-component complex unit vector ``(c0, c1)``.  Its moduli
encode the polar angle of the magnetic moment, the relative phase encodes
the azimuth, and the common phase encodes the time of flight.

Rotation convention
-------------------
``field_precession(msg, n, a)`` applies ``exp(+i a (sigma . n) / 2)`` to the
message.  Under the Pauli expectation ``m = u^dagger sigma u`` this turns the
magnetic moment by ``-a`` about ``n`` (right-hand rule).  Every device in the
package goes through this one function, so the sign is fixed here only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from numba import njit

NORM_TOL = 1e-12
AXIS_TOL = 1e-9


@dataclass(frozen=True)
class Message:
    c0: complex
    c1: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)

    def components(self) -> tuple[complex, complex]:
        return self.c0, self.c1

    def isclose(self, other: "Message", tol: float = 1e-9) -> bool:
        return abs(self.c0 - other.c0) <= tol and abs(self.c1 - other.c1) <= tol


@dataclass(frozen=True)
class MagneticMoment:
    mx: float
    my: float
    mz: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.mx, self.my, self.mz

    def dot(self, direction) -> float:
        dx, dy, dz = direction
        return self.mx * dx + self.my * dy + self.mz * dz


@dataclass(frozen=True)
class FlightPhase:
    """Time-of-flight bookkeeping; ``phi = nu * dt``."""

    nu: float
    dt: float
    velocity: float | None = None

    @property
    def phi(self) -> float:
        return self.nu * self.dt


# -- numba kernels ------------------------------------------------------------
# Shared by the public wrappers below and by the compiled network loops.


@njit(cache=True, nogil=True)
def precess_components(c0, c1, nx, ny, nz, angle):
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    w0 = c * c0 + 1j * s * (nz * c0 + complex(nx, -ny) * c1)
    w1 = c * c1 + 1j * s * (complex(nx, ny) * c0 - nz * c1)
    return w0, w1


@njit(cache=True, nogil=True)
def moment_components(c0, c1):
    cross = c0.conjugate() * c1
    a0 = c0.real * c0.real + c0.imag * c0.imag
    a1 = c1.real * c1.real + c1.imag * c1.imag
    return 2.0 * cross.real, 2.0 * cross.imag, a0 - a1


@njit(cache=True, nogil=True)
def phase_components(c0, c1, phi):
    z = complex(math.cos(phi), math.sin(phi))
    return z * c0, z * c1


# -- public API ----------------------------------------------------------------


def make_message(theta: float, psi1: float, psi2: float) -> Message:
    """Build ``(e^{i psi1} cos(theta/2), e^{i psi2} sin(theta/2))``."""
    return Message(
        cmath.exp(1j * psi1) * math.cos(0.5 * theta),
        cmath.exp(1j * psi2) * math.sin(0.5 * theta),
    )


def free_flight(msg: Message, phase: FlightPhase | float) -> Message:
    phi = phase.phi if isinstance(phase, FlightPhase) else float(phase)
    return Message(*phase_components(complex(msg.c0), complex(msg.c1), phi))


def _unit_axis(axis) -> tuple[float, float, float]:
    nx, ny, nz = (float(a) for a in axis)
    length = math.sqrt(nx * nx + ny * ny + nz * nz)
    if abs(length - 1.0) > AXIS_TOL:
        raise ValueError(f"axis must be a unit vector, got norm {length!r}")
    return nx, ny, nz


def field_precession(msg: Message, axis, angle: float) -> Message:
    """Precess ``msg`` in a field along ``axis`` by the consolidated ``angle``.

    ``angle`` stands for g * mu_N * |B| * T; see the module docstring for
    the sign convention.
    """
    nx, ny, nz = _unit_axis(axis)
    return Message(
        *precess_components(complex(msg.c0), complex(msg.c1), nx, ny, nz, float(angle))
    )


def moment_of(msg: Message) -> MagneticMoment:
    return MagneticMoment(*moment_components(complex(msg.c0), complex(msg.c1)))


def rotate_vector(vec, axis, angle: float) -> tuple[float, float, float]:
    """Rodrigues rotation of a 3-vector by ``angle`` about unit ``axis``."""
    kx, ky, kz = _unit_axis(axis)
    vx, vy, vz = vec
    c, s = math.cos(angle), math.sin(angle)
    dot = kx * vx + ky * vy + kz * vz
    cx, cy, cz = ky * vz - kz * vy, kz * vx - kx * vz, kx * vy - ky * vx
    return (
        vx * c + cx * s + kx * dot * (1 - c),
        vy * c + cy * s + ky * dot * (1 - c),
        vz * c + cz * s + kz * dot * (1 - c),
    )


SPIN_UP = Message(1.0 + 0j, 0j)
SPIN_DOWN = Message(0j, 1.0 + 0j)
