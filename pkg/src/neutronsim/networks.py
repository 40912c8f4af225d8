"""Event-driven executors for the three experiment networks.

One messenger is in flight at a time: the source emits particle n+1 only
after particle n has been detected, lost or destroyed.  Every sub-run owns
fresh devices and its own random stream, forked from ``(seed, stream_id)``.

Interferometer wiring (beam splitters are DLMs, see ``beamsplitter``)::

    source -> BS0[in 0] -- ch 0 -> BS1[in 0] -- ch 0 -> chi0 -> BS3[in 0]
                                           `- ch 1 -> lost
                        `- ch 1 -> BS2[in 1] -- ch 1 -> chi1 -> BS3[in 1]
                                           `- ch 0 -> lost
    BS3 -- ch 1 -> O beam,  ch 0 -> H beam

A reflected message leaves on the channel it came in on, so both paths into
the O beam see two reflections.  The Bell network adds the mu-metal spin
turner right after BS0 (arm 0 gets the O-arm turn, arm 1 the H-arm turn)
and analyzes the O beam with a spin rotator plus Heusler analyzer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .beamsplitter import ROUTE_DEGENERATE, ROUTE_OK, _check_params, bs_init, bs_process
from .devices import (
    MU_METAL_ANGLE,
    SourceSpec,
    analyzer_along_kernel,
    analyzer_kernel,
)
from .message import make_message, phase_components, precess_components
from .rng import RngStream, uniform_open

DEFAULT_WARMUP = 10_000

# counter slots shared by the interferometer and Bell kernels
I_O, I_H, I_LOST1, I_LOST2, I_BLOCKED, I_FALLBACK, I_DEGENERATE = range(7)
MZI_SLOTS = 7

# mu-metal axis codes
NO_MU_METAL, MU_Y, MU_X = 0, 1, 2
_MU_CODES = {None: NO_MU_METAL, "y": MU_Y, "x": MU_X}

# Ozawa stage-1 preparations: (SR1 angle about x, extra Larmor angle about z)
PREPARATIONS = {
    "+z": (0.0, 0.0),
    "-z": (math.pi, 0.0),
    "+y": (0.5 * math.pi, 0.0),
    "+x": (0.5 * math.pi, 0.5 * math.pi),
}
OZAWA_STATES = ("+z", "-z", "+x", "+y")
J_DETECTED, J_BLOCKED_SA1, J_BLOCKED_M1, J_BLOCKED_M2 = range(4)
OZAWA_SLOTS = 4


# -- kernels --------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _turn(c0, c1, mu_axis, angle):
    if mu_axis == MU_Y:
        return precess_components(c0, c1, 0.0, 1.0, 0.0, angle)
    if mu_axis == MU_X:
        return precess_components(c0, c1, 1.0, 0.0, 0.0, angle)
    return c0, c1


@njit(cache=True, nogil=True)
def _note(code, counts, counting):
    if counting and code != ROUTE_OK:
        if code == ROUTE_DEGENERATE:
            counts[I_DEGENERATE] += 1
        else:
            counts[I_FALLBACK] += 1


@njit(cache=True, nogil=True)
def mzi_kernel(
    n, warmup, gamma, refl, chi0, chi1, src0, src1,
    mu_axis, angle_arm0, angle_arm1, analyze, alpha, bs, fresh, rng_state, counts,
):
    if fresh:
        for k in range(4):
            bs_init(bs[k], rng_state)
    for i in range(warmup + n):
        counting = i >= warmup
        c0 = src0
        c1 = src1
        ch, c0, c1, code = bs_process(bs[0], 0, c0, c1, gamma, refl, rng_state)
        _note(code, counts, counting)
        if ch == 0:
            c0, c1 = _turn(c0, c1, mu_axis, angle_arm0)
            ch, c0, c1, code = bs_process(bs[1], 0, c0, c1, gamma, refl, rng_state)
            _note(code, counts, counting)
            if ch != 0:
                if counting:
                    counts[I_LOST1] += 1
                continue
            c0, c1 = phase_components(c0, c1, chi0)
            port = 0
        else:
            c0, c1 = _turn(c0, c1, mu_axis, angle_arm1)
            ch, c0, c1, code = bs_process(bs[2], 1, c0, c1, gamma, refl, rng_state)
            _note(code, counts, counting)
            if ch != 1:
                if counting:
                    counts[I_LOST2] += 1
                continue
            c0, c1 = phase_components(c0, c1, chi1)
            port = 1
        ch, c0, c1, code = bs_process(bs[3], port, c0, c1, gamma, refl, rng_state)
        _note(code, counts, counting)
        if ch == 1:
            if analyze:
                c0, c1 = precess_components(c0, c1, 1.0, 0.0, 0.0, alpha)
                passed, c0, c1 = analyzer_kernel(c0, c1, uniform_open(rng_state))
                if not passed:
                    if counting:
                        counts[I_BLOCKED] += 1
                    continue
            if counting:
                counts[I_O] += 1
        elif counting:
            counts[I_H] += 1


@njit(cache=True, nogil=True)
def ozawa_kernel(n, sr1_alpha, larmor, dx, dy, s1, s2, rng_state, counts):
    for _ in range(n):
        # SA1 on a spin-up source always passes but still consumes its draw
        passed, c0, c1 = analyzer_kernel(1.0 + 0j, 0j, uniform_open(rng_state))
        if not passed:
            counts[J_BLOCKED_SA1] += 1
            continue
        c0, c1 = precess_components(c0, c1, 1.0, 0.0, 0.0, sr1_alpha)
        c0, c1 = precess_components(c0, c1, 0.0, 0.0, 1.0, larmor)
        passed, c0, c1 = analyzer_along_kernel(c0, c1, dx, dy, 0.0, s1, uniform_open(rng_state))
        if not passed:
            counts[J_BLOCKED_M1] += 1
            continue
        passed, c0, c1 = analyzer_along_kernel(c0, c1, 0.0, 1.0, 0.0, s2, uniform_open(rng_state))
        if not passed:
            counts[J_BLOCKED_M2] += 1
            continue
        counts[J_DETECTED] += 1


# -- configs and results ----------------------------------------------------------


def _check_count(name: str, value: int) -> None:
    if int(value) != value or value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")


@dataclass(frozen=True)
class InterferometerConfig:
    gamma: float = 0.99
    reflectivity: float = 0.2
    chi0: float = 0.0
    chi1: float = 0.0
    n_particles: int = 10_000
    seed: int = 0
    stream_id: int = 0
    warmup: int = DEFAULT_WARMUP
    source: SourceSpec | None = None  # None: random fixed angles per sub-run

    def __post_init__(self):
        _check_params(self.gamma, self.reflectivity)
        _check_count("n_particles", self.n_particles)
        _check_count("warmup", self.warmup)


@dataclass(frozen=True)
class BellConfig:
    gamma: float = 0.99
    reflectivity: float = 0.2
    alpha: float = 0.0
    chi: float = 0.0
    mu_metal_axis: str = "y"
    n_particles: int = 10_000
    seed: int = 0
    stream_id: int = 0
    warmup: int = DEFAULT_WARMUP
    shared_devices: bool = False  # carry DLM state across the four settings (warm-up once)

    def __post_init__(self):
        _check_params(self.gamma, self.reflectivity)
        _check_count("n_particles", self.n_particles)
        _check_count("warmup", self.warmup)
        if self.mu_metal_axis not in ("x", "y"):
            raise ValueError(f"mu_metal_axis must be 'x' or 'y', got {self.mu_metal_axis!r}")


@dataclass(frozen=True)
class OzawaConfig:
    phi: float = 0.0
    initial_state: str = "+z"
    s1: int = 1
    s2: int = 1
    n_particles: int = 10_000
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        _check_count("n_particles", self.n_particles)
        if self.initial_state not in PREPARATIONS:
            raise ValueError(f"initial_state must be one of {sorted(PREPARATIONS)}")
        if self.s1 not in (1, -1) or self.s2 not in (1, -1):
            raise ValueError("analyzer settings s1, s2 must be +1 or -1")


@dataclass
class CountRecord:
    setting: tuple
    counts: dict[str, int]
    n_emitted: int
    stream_id: int
    n_warmup: int = 0
    diagnostics: dict[str, int] = field(default_factory=dict)

    @property
    def conserved(self) -> bool:
        return sum(self.counts.values()) == self.n_emitted


@dataclass
class CountTable:
    experiment: str
    setting_names: tuple[str, ...]
    records: list[CountRecord] = field(default_factory=list)

    def __getitem__(self, setting) -> CountRecord:
        for rec in self.records:
            if rec.setting == tuple(setting):
                return rec
        raise KeyError(setting)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def extend(self, other: "CountTable") -> None:
        self.records.extend(other.records)

    def conserved(self) -> bool:
        return all(rec.conserved for rec in self.records)


def _mzi_record(setting, counts, n, warmup, stream, analyze) -> CountRecord:
    tallies = {
        "O": int(counts[I_O]),
        "H": int(counts[I_H]),
        "lost": int(counts[I_LOST1] + counts[I_LOST2]),
    }
    if analyze:
        tallies["blocked"] = int(counts[I_BLOCKED])
    diag = {
        "lost_bs1": int(counts[I_LOST1]),
        "lost_bs2": int(counts[I_LOST2]),
        "route_fallbacks": int(counts[I_FALLBACK]),
        "route_degenerate": int(counts[I_DEGENERATE]),
    }
    return CountRecord(tuple(setting), tallies, int(n), stream.stream_id, int(warmup), diag)


def run_interferometer(cfg: InterferometerConfig) -> CountTable:
    stream = RngStream(cfg.seed, cfg.stream_id).fork(0)
    spec = cfg.source
    if spec is None:
        spec = SourceSpec(
            theta=math.pi * stream.next_uniform(),
            psi1=2 * math.pi * stream.next_uniform(),
            psi2=2 * math.pi * stream.next_uniform(),
        )
    src = make_message(spec.theta, spec.psi1, spec.psi2)
    counts = np.zeros(MZI_SLOTS, dtype=np.int64)
    mzi_kernel(
        int(cfg.n_particles), int(cfg.warmup), cfg.gamma, cfg.reflectivity,
        float(cfg.chi0), float(cfg.chi1), complex(src.c0), complex(src.c1),
        NO_MU_METAL, 0.0, 0.0, False, 0.0,
        np.zeros((4, 10)), True, stream.state, counts,
    )
    table = CountTable("interferometer", ("chi0", "chi1"))
    table.records.append(
        _mzi_record((cfg.chi0, cfg.chi1), counts, cfg.n_particles, cfg.warmup, stream, False)
    )
    return table


def bell_settings(alpha: float, chi: float) -> list[tuple[float, float]]:
    """The four (alpha, chi) sub-runs behind one correlation value, in E order."""
    pi = math.pi
    return [(alpha, chi), (alpha + pi, chi + pi), (alpha + pi, chi), (alpha, chi + pi)]


def run_bell(cfg: BellConfig) -> CountTable:
    root = RngStream(cfg.seed, cfg.stream_id)
    table = CountTable("bell", ("alpha", "chi"))
    mu = _MU_CODES[cfg.mu_metal_axis]
    bs = np.zeros((4, 10))
    for k, (alpha, chi) in enumerate(bell_settings(cfg.alpha, cfg.chi)):
        stream = root.fork(k)
        fresh = k == 0 or not cfg.shared_devices
        warmup = cfg.warmup if fresh else 0
        counts = np.zeros(MZI_SLOTS, dtype=np.int64)
        mzi_kernel(
            int(cfg.n_particles), int(warmup), cfg.gamma, cfg.reflectivity,
            float(chi), 0.0, 1.0 + 0j, 0j,
            mu, MU_METAL_ANGLE["O"], MU_METAL_ANGLE["H"], True, float(alpha),
            bs, fresh, stream.state, counts,
        )
        table.records.append(
            _mzi_record((alpha, chi), counts, cfg.n_particles, warmup, stream, True)
        )
    return table


def run_ozawa(cfg: OzawaConfig) -> CountTable:
    stream = RngStream(cfg.seed, cfg.stream_id).fork(0)
    alpha, larmor = PREPARATIONS[cfg.initial_state]
    counts = np.zeros(OZAWA_SLOTS, dtype=np.int64)
    ozawa_kernel(
        int(cfg.n_particles), alpha, larmor, math.cos(cfg.phi), math.sin(cfg.phi),
        int(cfg.s1), int(cfg.s2), stream.state, counts,
    )
    tallies = {
        "detected": int(counts[J_DETECTED]),
        "blocked_sa1": int(counts[J_BLOCKED_SA1]),
        "blocked_m1": int(counts[J_BLOCKED_M1]),
        "blocked_m2": int(counts[J_BLOCKED_M2]),
    }
    table = CountTable("ozawa", ("initial_state", "s1", "s2", "phi"))
    table.records.append(
        CountRecord(
            (cfg.initial_state, cfg.s1, cfg.s2, cfg.phi), tallies,
            int(cfg.n_particles), stream.stream_id,
        )
    )
    return table
