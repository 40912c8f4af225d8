"""Derived quantities from count tables: correlations, CHSH, error/disturbance, fringes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

# Standard deviations of sigma^x and sigma^y in the |+z> state.
DELTA_A = 1.0
DELTA_B = 1.0

REQUIRED_STATES = ("+z", "-z", "+x", "+y")


class UndefinedStatisticError(ZeroDivisionError):
    """A ratio statistic was requested from zero total counts."""


class IncompleteInputError(KeyError):
    pass


@dataclass
class CorrelationGrid:
    alphas: np.ndarray
    chis: np.ndarray
    values: np.ndarray  # values[i, j] = E(alphas[i], chis[j])
    totals: np.ndarray

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.chis = np.asarray(self.chis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.totals = np.asarray(self.totals)
        if self.values.shape != (self.alphas.size, self.chis.size):
            raise ValueError("values must have shape (len(alphas), len(chis))")

    def max_abs_deviation(self, reference: Callable[[float, float], float]) -> float:
        ref = np.array([[reference(a, c) for c in self.chis] for a in self.alphas])
        return float(np.max(np.abs(self.values - ref)))


@dataclass
class UncertaintyPoint:
    phi: float
    epsilon: float
    eta: float
    delta_a: float
    delta_b: float
    lhs_ozawa: float
    lhs_heisenberg: float
    epsilon_sq: float
    eta_sq: float
    clamped: list[str] = field(default_factory=list)


@dataclass
class FringeFit:
    amplitude: float
    visibility: float
    phase: float
    mean: float
    residuals: np.ndarray
    degenerate: bool = False


def correlation_E(n1: int, n2: int, n3: int, n4: int) -> float:
    """Correlation from the (a, x), (a+pi, x+pi), (a+pi, x), (a, x+pi) counts."""
    total = n1 + n2 + n3 + n4
    if total <= 0:
        raise UndefinedStatisticError("correlation undefined: no counts in any setting")
    return (n1 + n2 - n3 - n4) / total


def chsh_S(E: Callable[[float, float], float], alpha, chi, alpha_p, chi_p) -> float:
    return E(alpha, chi) + E(alpha, chi_p) - E(alpha_p, chi) + E(alpha_p, chi_p)


def chsh_max(grid: CorrelationGrid) -> tuple[float, tuple[float, float, float, float]]:
    """Largest |S| over all setting quadruples drawn from the grid.

    Returns the value and its ``(alpha, chi, alpha', chi')``.
    """
    E = grid.values
    # S[i, j, k, l] = E[i, j] + E[i, l] - E[k, j] + E[k, l]
    S = (
        E[:, :, None, None]
        + E[:, None, None, :]
        - E.T[None, :, :, None]
        + E[None, None, :, :]
    )
    flat = int(np.argmax(np.abs(S)))
    i, j, k, l = np.unravel_index(flat, S.shape)
    best = (grid.alphas[i], grid.chis[j], grid.alphas[k], grid.chis[l])
    return float(abs(S[i, j, k, l])), tuple(float(x) for x in best)


def expectation_from_counts(npp: int, npm: int, nmp: int, nmm: int) -> tuple[float, float]:
    """Estimates of <O_A> and <O_B> from the four detector tallies."""
    total = npp + npm + nmp + nmm
    if total <= 0:
        raise UndefinedStatisticError("expectation undefined: no detector clicks")
    return (npp + npm - nmp - nmm) / total, (npp + nmp - npm - nmm) / total


def epsilon_eta(
    expectations: Mapping[str, tuple[float, float]],
    phi: float,
    delta_a: float = DELTA_A,
    delta_b: float = DELTA_B,
) -> UncertaintyPoint:
    """Error of A and disturbance of B from per-state ``(<O_A>, <O_B>)``.

    Negative squared estimates (statistical noise) are clamped to zero and
    listed in ``UncertaintyPoint.clamped``.
    """
    missing = [s for s in REQUIRED_STATES if s not in expectations]
    if missing:
        raise IncompleteInputError(f"missing expectations for states {missing}")
    oa = {s: expectations[s][0] for s in REQUIRED_STATES}
    ob = {s: expectations[s][1] for s in REQUIRED_STATES}
    eps_sq = 2.0 + oa["+z"] + oa["-z"] - 2.0 * oa["+x"]
    eta_sq = 2.0 + ob["+z"] + ob["-z"] - 2.0 * ob["+y"]
    clamped = [name for name, v in (("epsilon", eps_sq), ("eta", eta_sq)) if v < 0.0]
    eps = math.sqrt(max(eps_sq, 0.0))
    eta = math.sqrt(max(eta_sq, 0.0))
    return UncertaintyPoint(
        phi=phi,
        epsilon=eps,
        eta=eta,
        delta_a=delta_a,
        delta_b=delta_b,
        lhs_ozawa=eps * eta + eps * delta_b + delta_a * eta,
        lhs_heisenberg=eps * eta,
        epsilon_sq=eps_sq,
        eta_sq=eta_sq,
        clamped=clamped,
    )


def fringe_stats(chis, counts) -> FringeFit:
    """Least-squares fit of ``A (1 + V cos(chi + phase))`` to a fringe."""
    chis = np.asarray(chis, dtype=float)
    y = np.asarray(counts, dtype=float)
    if chis.shape != y.shape:
        raise ValueError("chis and counts must have the same length")
    if np.unique(np.mod(chis, 2 * math.pi)).size < 4:
        raise ValueError("fringe fit needs at least four distinct phase settings")
    X = np.column_stack([np.ones_like(chis), np.cos(chis), np.sin(chis)])
    (a, b, c), *_ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ np.array([a, b, c])
    mean = float(y.mean())
    swing = math.hypot(b, c)
    if np.ptp(y) == 0.0 or a <= 0.0:
        return FringeFit(float(a), 0.0, 0.0, mean, residuals, degenerate=True)
    return FringeFit(float(a), swing / a, math.atan2(-c, b), mean, residuals)


def visibility_minmax(counts) -> float:
    y = np.asarray(counts, dtype=float)
    top, bottom = y.max(), y.min()
    return 0.0 if top + bottom == 0 else float((top - bottom) / (top + bottom))
