"""Parameter sweeps over the experiment networks.

Grid point ``g`` always runs on stream id ``g`` (Ozawa sub-experiments on
``16 * g + k``), so results do not depend on execution order or on the
number of workers.  The compiled kernels release the GIL, which lets a
thread pool run grid points concurrently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analysis import (
    CorrelationGrid,
    UncertaintyPoint,
    correlation_E,
    epsilon_eta,
    expectation_from_counts,
)
from .networks import (
    DEFAULT_WARMUP,
    OZAWA_STATES,
    BellConfig,
    CountTable,
    InterferometerConfig,
    OzawaConfig,
    bell_settings,
    run_bell,
    run_interferometer,
    run_ozawa,
)

ANALYZER_SETTINGS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
OZAWA_SUBRUNS = len(OZAWA_STATES) * len(ANALYZER_SETTINGS)


class GridPointError(RuntimeError):
    """A sub-run failed; the message names the grid point."""


def _map(fn: Callable, items: Sequence, parallelism: int, describe: Callable = repr) -> list:
    def guarded(item):
        try:
            return fn(item)
        except Exception as exc:
            raise GridPointError(f"grid point {describe(item)}: {type(exc).__name__}: {exc}") from exc

    if parallelism <= 1 or len(items) <= 1:
        return [guarded(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(guarded, items))


def _merge(experiment: str, names, parts: list[CountTable]) -> CountTable:
    table = CountTable(experiment, names)
    for part in parts:
        table.extend(part)
    return table


def interferometer_sweep(
    chis, *, gamma=0.99, reflectivity=0.2, n_particles=10_000, seed: int,
    warmup=DEFAULT_WARMUP, parallelism=1,
) -> CountTable:
    """One run per phase difference ``chi`` (``chi0 = chi``, ``chi1 = 0``)."""
    chis = [float(c) for c in chis]

    def one(g):
        cfg = InterferometerConfig(
            gamma=gamma, reflectivity=reflectivity, chi0=chis[g], chi1=0.0,
            n_particles=n_particles, seed=seed, stream_id=g, warmup=warmup,
        )
        return run_interferometer(cfg)

    parts = _map(one, range(len(chis)), parallelism, lambda g: f"{g} (chi={chis[g]:.12g})")
    return _merge("interferometer", ("chi0", "chi1"), parts)


@dataclass
class BellGridResult:
    table: CountTable
    grid: CorrelationGrid
    stream_ids: np.ndarray
    mu_metal_axis: str


def correlation_from_table(table: CountTable, alpha: float, chi: float) -> float:
    n = [table[s].counts["O"] for s in bell_settings(alpha, chi)]
    return correlation_E(*n)


def bell_grid(
    alphas, chis, *, gamma=0.99, reflectivity=0.2, n_particles=10_000, seed: int,
    mu_metal_axis="y", warmup=DEFAULT_WARMUP, parallelism=1,
) -> BellGridResult:
    alphas = [float(a) for a in alphas]
    chis = [float(c) for c in chis]
    points = [(i, j) for i in range(len(alphas)) for j in range(len(chis))]

    def one(point):
        i, j = point
        cfg = BellConfig(
            gamma=gamma, reflectivity=reflectivity, alpha=alphas[i], chi=chis[j],
            mu_metal_axis=mu_metal_axis, n_particles=n_particles, seed=seed,
            stream_id=i * len(chis) + j, warmup=warmup,
        )
        return run_bell(cfg)

    parts = _map(one, points, parallelism,
                 lambda p: f"{p[0] * len(chis) + p[1]} (alpha={alphas[p[0]]:.12g}, chi={chis[p[1]]:.12g})")
    values = np.empty((len(alphas), len(chis)))
    totals = np.empty((len(alphas), len(chis)), dtype=np.int64)
    ids = np.empty((len(alphas), len(chis)), dtype=np.int64)
    for (i, j), part in zip(points, parts):
        n = [rec.counts["O"] for rec in part.records]
        values[i, j] = correlation_E(*n)
        totals[i, j] = sum(n)
        ids[i, j] = i * len(chis) + j
    table = _merge("bell", ("alpha", "chi"), parts)
    return BellGridResult(table, CorrelationGrid(alphas, chis, values, totals), ids, mu_metal_axis)


@dataclass
class OzawaSweepResult:
    phis: list[float]
    table: CountTable
    expectations: list[dict[str, tuple[float, float]]]
    points: list[UncertaintyPoint]


def ozawa_stream_id(grid_index: int, state: str, s1: int, s2: int) -> int:
    k = OZAWA_STATES.index(state) * len(ANALYZER_SETTINGS) + ANALYZER_SETTINGS.index((s1, s2))
    return OZAWA_SUBRUNS * grid_index + k


def ozawa_counts(table: CountTable, state: str, phi: float) -> tuple[int, int, int, int]:
    return tuple(table[(state, s1, s2, phi)].counts["detected"] for s1, s2 in ANALYZER_SETTINGS)


def ozawa_sweep(phis, *, n_particles=10_000, seed: int, parallelism=1) -> OzawaSweepResult:
    phis = [float(p) for p in phis]
    jobs = [
        (g, state, s1, s2)
        for g in range(len(phis))
        for state in OZAWA_STATES
        for s1, s2 in ANALYZER_SETTINGS
    ]

    def one(job):
        g, state, s1, s2 = job
        cfg = OzawaConfig(
            phi=phis[g], initial_state=state, s1=s1, s2=s2, n_particles=n_particles,
            seed=seed, stream_id=ozawa_stream_id(g, state, s1, s2),
        )
        return run_ozawa(cfg)

    table = _merge("ozawa", ("initial_state", "s1", "s2", "phi"), _map(
        one, jobs, parallelism,
        lambda j: f"{j[0]} (phi={phis[j[0]]:.12g}, state={j[1]}, s1={j[2]}, s2={j[3]})"))
    expectations, points = [], []
    for phi in phis:
        exp = {s: expectation_from_counts(*ozawa_counts(table, s, phi)) for s in OZAWA_STATES}
        expectations.append(exp)
        points.append(epsilon_eta(exp, phi))
    return OzawaSweepResult(phis, table, expectations, points)


def periodic_grid(n: int) -> list[float]:
    """``n`` equally spaced phases on [0, 2 pi)."""
    return [2 * math.pi * k / n for k in range(n)]
