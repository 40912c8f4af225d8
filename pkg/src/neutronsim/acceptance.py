"""End-to-end acceptance checks with fixed seeds and fixed tolerances.

Each ``criterion_*`` function returns a :class:`CriterionResult`; the
``verify`` subcommand and ``tests/test_acceptance.py`` print one line per
result.  Nothing here is tuned per seed: the seed is fixed once in
``ACCEPTANCE_SEED``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import oracle
from .analysis import chsh_max, epsilon_eta, fringe_stats
from .beamsplitter import bs_init, bs_process, bs_update
from .config import RunManifest
from .devices import (
    analyzer_along_kernel, guide_precession, mu_metal, phase_shift, spin_flip, spin_rotate_x,
)
from .harness import BUILDERS
from .message import field_precession, free_flight, make_message, moment_components
from .rng import RngStream, uniform_open as uniform
from .sweep import bell_grid, interferometer_sweep, ozawa_sweep, periodic_grid

ACCEPTANCE_SEED = 12345


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    checks: dict[str, bool] = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _result(name: str, checks: dict[str, bool], detail: str) -> CriterionResult:
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        detail = f"{detail}; failing: {', '.join(failed)}"
    return CriterionResult(name, not failed, detail, checks)


# -- 1, 2: interferometer --------------------------------------------------------


def criterion_1(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    R, n = 0.2, 100_000
    chis = periodic_grid(16)
    table = interferometer_sweep(chis, gamma=0.99, reflectivity=R, n_particles=n,
                                 seed=seed, parallelism=parallelism)
    within = 0
    for chi, rec in zip(chis, table):
        p = oracle.mzi_probabilities(R, chi).p_O
        sigma = math.sqrt(max(p * (1 - p), 0.0) / n)
        if abs(rec.counts["O"] / n - p) <= 3 * sigma:
            within += 1
    vis = fringe_stats(chis, [rec.counts["O"] for rec in table]).visibility
    checks = {"points within 3 sigma >= 14/16": within >= 14, "visibility >= 0.98": vis >= 0.98}
    return _result("1 interferometer quantum limit", checks,
                   f"{within}/16 points within 3 sigma, O visibility {vis:.4f}")


def criterion_2(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    R, n = 0.22, 22_727
    chis = periodic_grid(16)
    table = interferometer_sweep(chis, gamma=0.5, reflectivity=R, n_particles=n,
                                 seed=seed, parallelism=parallelism)
    fit_o = fringe_stats(chis, [rec.counts["O"] for rec in table])
    fit_h = fringe_stats(chis, [rec.counts["H"] for rec in table])
    gap = abs((fit_o.phase - fit_h.phase + math.pi) % (2 * math.pi) - math.pi)
    ideal_h = oracle.ideal_visibilities(R)[1]
    conserved = all(sum(rec.counts.values()) == rec.n_emitted for rec in table)
    checks = {
        "counter-phased": abs(gap - math.pi) < 0.25 * math.pi,
        "H visibility below ideal": fit_h.visibility < ideal_h,
        "detected + lost == emitted": conserved,
    }
    return _result("2 imperfection knob", checks,
                   f"phase gap {gap:.3f} rad, H visibility {fit_h.visibility:.4f} < {ideal_h:.4f}, "
                   f"conservation {conserved}")


# -- 3, 4: Bell --------------------------------------------------------------------


def criterion_3(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    grid = periodic_grid(8)
    devs = {}
    for axis in ("y", "x"):
        res = bell_grid(grid, grid, gamma=0.99, reflectivity=0.2, n_particles=10_000,
                        seed=seed, mu_metal_axis=axis, parallelism=parallelism)
        devs[axis] = res.grid.max_abs_deviation(lambda a, c: oracle.bell_E_ideal(a, c, axis))
    checks = {
        "y: max|E - cos(a+x)| <= 0.06": devs["y"] <= 0.06,
        "x: max|E - cos a cos x| <= 0.06": devs["x"] <= 0.06,
    }
    return _result("3 Bell surface", checks,
                   f"max deviation y-axis {devs['y']:.4f}, x-axis {devs['x']:.4f}")


S_TARGETS = ((0.55, 2.05), (0.67, 2.30), (0.99, 2 * math.sqrt(2)))
CHSH_PARTICLES = 100_000


def criterion_4(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    grid = periodic_grid(8)
    checks, parts = {}, []
    for gamma, target in S_TARGETS:
        res = bell_grid(grid, grid, gamma=gamma, reflectivity=0.2, n_particles=CHSH_PARTICLES,
                        seed=seed, parallelism=parallelism)
        s, _ = chsh_max(res.grid)
        checks[f"gamma={gamma}: |S|={s:.3f} vs {target:.3f}"] = abs(s - target) <= 0.05
        parts.append(f"gamma {gamma}: {s:.4f}")
    return _result("4 CHSH values", checks, ", ".join(parts))


# -- 5: Ozawa ------------------------------------------------------------------------


def criterion_5(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    phis = np.linspace(0.0, 0.5 * math.pi, 13)
    res = ozawa_sweep(phis, n_particles=10_000, seed=seed, parallelism=parallelism)
    err_eps = err_eta = err_lhs = 0.0
    min_lhs = math.inf
    heis_ok = True
    for phi, pt in zip(res.phis, res.points):
        c = oracle.ozawa_curves(phi)
        err_eps = max(err_eps, abs(pt.epsilon - c.epsilon))
        err_eta = max(err_eta, abs(pt.eta - c.eta))
        err_lhs = max(err_lhs, abs(pt.lhs_ozawa - c.lhs_ozawa))
        min_lhs = min(min_lhs, pt.lhs_ozawa)
        if 1.0 <= phi <= 1.4 and not pt.lhs_heisenberg < 1.0:
            heis_ok = False
    checks = {
        "epsilon within 0.05": err_eps <= 0.05,
        "eta within 0.05": err_eta <= 0.05,
        "lhs_ozawa >= 0.97": min_lhs >= 0.97,
        "lhs_ozawa within 0.08": err_lhs <= 0.08,
        "eps*eta < 1 on [1.0, 1.4]": heis_ok,
    }
    return _result("5 Ozawa curves", checks,
                   f"max |d eps| {err_eps:.4f}, max |d eta| {err_eta:.4f}, "
                   f"max |d lhs| {err_lhs:.4f}, min lhs {min_lhs:.4f}")


# -- 6: properties -------------------------------------------------------------------


def dlm_convergence_error(gamma: float, steps: int = 200, v0: float = 0.3) -> float:
    """Largest deviation of a constant-input DLM from ``1 - (1 - v0) gamma**n``."""
    data = np.zeros(10)
    data[0], data[1] = v0, 1.0 - v0
    worst = 0.0
    for k in range(1, steps + 1):
        bs_update(data, 0, 1.0 + 0j, 0j, gamma)
        expected = 1.0 - (1.0 - v0) * gamma**k
        worst = max(worst, abs(data[0] - expected) / max(expected, 1e-300))
    return worst


@njit(cache=True, nogil=True)
def _random_dlm_events(n, gamma, reflectivity, rng_state):
    data = np.zeros(10)
    bs_init(data, rng_state)
    worst = 0.0
    for _ in range(n):
        ch = 0 if uniform(rng_state) < 0.5 else 1
        theta = math.pi * uniform(rng_state)
        p1 = 2 * math.pi * uniform(rng_state)
        p2 = 2 * math.pi * uniform(rng_state)
        c0 = math.cos(0.5 * theta) * complex(math.cos(p1), math.sin(p1))
        c1 = math.sin(0.5 * theta) * complex(math.cos(p2), math.sin(p2))
        bs_process(data, ch, c0, c1, gamma, reflectivity, rng_state)
        v0, v1 = data[0], data[1]
        dev = abs(v0 + v1 - 1.0)
        if v0 < 0.0:
            dev = max(dev, -v0)
        if v1 < 0.0:
            dev = max(dev, -v1)
        worst = max(worst, dev)
    return worst


@njit(cache=True, nogil=True)
def _analyzer_rate(c0, c1, d, sign, trials, rng_state):
    hits = 0
    for _ in range(trials):
        passed, _, _ = analyzer_along_kernel(c0, c1, d[0], d[1], d[2], sign, uniform(rng_state))
        if passed:
            hits += 1
    return hits


def device_norm_error(rng: RngStream, samples: int = 2000) -> float:
    worst = 0.0
    for _ in range(samples):
        u = rng.uniforms(5)
        msg = make_message(math.pi * u[0], 2 * math.pi * u[1], 2 * math.pi * u[2])
        angle = 2 * math.pi * u[3] - math.pi
        axis = (u[4] - 0.5, 0.3, -0.7)
        norm = math.sqrt(sum(a * a for a in axis))
        outputs = [
            free_flight(msg, angle), phase_shift(msg, angle), mu_metal(msg, "O"), mu_metal(msg, "H", "x"),
            spin_rotate_x(msg, angle), spin_flip(msg), guide_precession(msg, angle),
            field_precession(msg, tuple(a / norm for a in axis), angle),
        ]
        worst = max(worst, max(abs(m.norm - 1.0) for m in outputs))
    return worst


def analyzer_worst_z(rng: RngStream, configs: int = 20, trials: int = 100_000) -> float:
    """Largest |z-score| of the analyzer pass rate against ``(1 + s m.a) / 2``.

    Each configuration draws a random message, analyzer direction ``a`` and sign ``s``.
    """
    worst = 0.0
    for k in range(configs):
        u = rng.uniforms(6)
        msg = make_message(math.pi * u[0], 2 * math.pi * u[1], 2 * math.pi * u[2])
        cos_t, az = 1.0 - 2.0 * u[3], 2 * math.pi * u[4]
        sin_t = math.sqrt(1.0 - cos_t * cos_t)
        d = np.array([sin_t * math.cos(az), sin_t * math.sin(az), cos_t])
        sign = 1 if u[5] < 0.5 else -1
        m = moment_components(complex(msg.c0), complex(msg.c1))
        p = 0.5 * (1.0 + sign * float(np.dot(m, d)))
        hits = _analyzer_rate(complex(msg.c0), complex(msg.c1), d, sign, trials, rng.fork(k).state)
        sigma = math.sqrt(max(p * (1 - p), 1e-300) / trials)
        worst = max(worst, abs(hits / trials - p) / sigma)
    return worst


def oracle_conservation_error() -> float:
    worst = 0.0
    for R in np.linspace(0.0, 1.0, 11):
        m = oracle.CHANNEL_SWAP @ oracle.beam_splitter_matrix(R)
        worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(2)))))
        for chi in np.linspace(-math.pi, math.pi, 13):
            p = oracle.mzi_probabilities(R, chi)
            worst = max(worst, abs(p.p_O + p.p_H + p.p_loss - 1.0))
            closed = oracle.mzi_closed_form(R, chi)
            worst = max(worst, abs(p.p_O - closed.p_O), abs(p.p_H - closed.p_H))
    for phi in np.linspace(0.0, 0.5 * math.pi, 25):
        pt = epsilon_eta(oracle.ozawa_expectations(phi), phi)
        c = oracle.ozawa_curves(phi)
        worst = max(worst, abs(pt.epsilon_sq - c.epsilon**2), abs(pt.eta_sq - c.eta**2))
    return worst


def replay_manifests(seed: int) -> list[RunManifest]:
    return [
        RunManifest("interferometer", seed, n_particles=3000, warmup=500, chi=tuple(periodic_grid(8))),
        RunManifest("bell", seed, n_particles=1000, warmup=500, alpha=tuple(periodic_grid(4)),
                    chi=tuple(periodic_grid(4))),
        RunManifest("ozawa", seed, n_particles=1000, phi=tuple(np.linspace(0, 0.5 * math.pi, 4))),
    ]


def replay_identical(seed: int, parallelism: int = 4) -> bool:
    for m in replay_manifests(seed):
        texts = {BUILDERS[m.experiment](m.with_overrides(parallelism=p)).render()
                 for p in (1, parallelism, 1)}
        if len(texts) != 1:
            return False
    return True


def criterion_6(seed: int = ACCEPTANCE_SEED, parallelism: int = 4) -> CriterionResult:
    rng = RngStream(seed, 6)
    conv = max(dlm_convergence_error(g) for g in (0.5, 0.9, 0.99))
    dlm = _random_dlm_events(1_000_000, 0.9, 0.3, rng.fork(0).state)
    norm = device_norm_error(rng.fork(1))
    z = analyzer_worst_z(rng.fork(2))
    orc = oracle_conservation_error()
    replay = replay_identical(seed, parallelism)
    checks = {
        "DLM geometric convergence": conv <= 1e-12,
        "DLM constraints after 1e6 events": dlm <= 1e-12,
        "device norms": norm <= 1e-9,
        "analyzer pass rate within 3 sigma": z <= 3.0,
        "oracle unitarity/conservation": orc <= 1e-12,
        "bit-identical replay": replay,
    }
    return _result("6 property suite", checks,
                   f"convergence {conv:.1e}, constraints {dlm:.1e}, norms {norm:.1e}, "
                   f"analyzer max z {z:.2f}, oracle {orc:.1e}, replay {replay}")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6)


def run_all(seed: int = ACCEPTANCE_SEED, parallelism: int = 4, echo=print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit(seed, parallelism)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
