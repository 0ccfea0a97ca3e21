"""Asymptotic key-rate lower bound for the Charlie-Alice key.

The bound is evaluated from quantities Charlie can observe: the joint
statistics ``p_ij`` of Alice's bit ``i`` and Charlie's s4 bit ``j`` on
identity rounds, and the consistency probability ``pc`` of Case-3 checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cases import CaseKind
from .protocol import RoundRecord, consistency_check
from .qcore import binary_entropy, shannon_entropy

_TOL = 1e-9


@dataclass(frozen=True)
class ObservedStats:
    p00: float
    p01: float
    p10: float
    p11: float
    pc: float
    pin: float

    def __post_init__(self) -> None:
        values = (self.p00, self.p01, self.p10, self.p11, self.pc, self.pin)
        if any(not (-_TOL <= v <= 1 + _TOL) for v in values):
            raise ValueError(f"probabilities must lie in [0, 1]: {values}")
        if abs(self.p00 + self.p01 + self.p10 + self.p11 - 1.0) > _TOL:
            raise ValueError("p00 + p01 + p10 + p11 must equal 1")
        if abs(self.pc + self.pin - 1.0) > _TOL:
            raise ValueError("pc + pin must equal 1")

    @property
    def joint(self) -> tuple[float, float, float, float]:
        return (self.p00, self.p01, self.p10, self.p11)

    @property
    def correlated(self) -> float:
        return self.p00 + self.p11

    @property
    def anticorrelated(self) -> float:
        return self.p01 + self.p10

    def swapped(self) -> "ObservedStats":
        """Relabel both bits (``p00 <-> p11``, ``p01 <-> p10``)."""
        return ObservedStats(self.p11, self.p10, self.p01, self.p00, self.pc, self.pin)


@dataclass(frozen=True)
class KeyRateReport:
    H_AC: float
    S_AEF: float
    S_EF_bound: float
    B: float
    lambda_tilde: float
    r_lower: float


def stats_from_Q(q: float) -> ObservedStats:
    """Statistics of a depolarising channel with error rate ``q``."""
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"Q must lie in [0, 0.5], got {q}")
    return ObservedStats((1 - q) / 2, q / 2, q / 2, (1 - q) / 2, 1 - q, q)


def stats_from_transcript(records: Sequence[RoundRecord]) -> ObservedStats:
    """Empirical estimator: ``p_ij`` from Case-1/2 rounds, ``pc`` from Case-3 rounds."""
    counts = np.zeros((2, 2))
    consistent = total3 = 0
    for r in records:
        if r.case in (CaseKind.Case1, CaseKind.Case2):
            counts[r.mr_A, r.mr_C4] += 1
        elif r.case is CaseKind.Case3:
            total3 += 1
            consistent += consistency_check(r)
    if counts.sum() == 0:
        raise ValueError("no Case-1/Case-2 rounds: cannot estimate p_ij")
    if total3 == 0:
        raise ValueError("no Case-3 rounds: cannot estimate pc")
    p = counts / counts.sum()
    pc = consistent / total3
    return ObservedStats(p[0, 0], p[0, 1], p[1, 0], p[1, 1], pc, 1.0 - pc)


def conditional_entropy_H_AC(stats: ObservedStats) -> float:
    """``H(A|C) = H(p00, p01, p10, p11) - H(p00 + p10, p01 + p11)``."""
    return shannon_entropy(stats.joint) - shannon_entropy([stats.p00 + stats.p10, stats.p01 + stats.p11])


def bound_B(stats: ObservedStats) -> float:
    """Lower bound on ``|<e0|e3>|^2`` from the Case-3 check statistics."""
    return abs((stats.pc - stats.pin) - 2.0 * math.sqrt(stats.p01 * stats.p10)) ** 2


def lambda_tilde(stats: ObservedStats, b: float | None = None) -> float:
    xi1 = stats.correlated
    if xi1 <= 0:
        raise ValueError("p00 + p11 = 0: no correlated mass, bound undefined")
    if b is None:
        b = bound_B(stats)
    lam = 0.5 + math.sqrt((stats.p00 - stats.p11) ** 2 + b) / (2.0 * xi1)
    return min(1.0, lam)


def sigma1_matrix(stats: ObservedStats, overlap_sq: float | None = None) -> np.ndarray:
    """Normalised ``sigma_1`` in the ``{|u>, |v>}`` basis with ``|<e0|e3>|^2 = overlap_sq``.

    Uses real ``alpha, beta, gamma`` with ``|e0|^2 = 2 p00`` and ``|e3|^2 = 2 p11``.
    """
    if overlap_sq is None:
        overlap_sq = bound_B(stats)
    alpha = math.sqrt(2 * stats.p00)
    beta = math.sqrt(overlap_sq) / alpha
    gamma_sq = 2 * stats.p11 - beta**2
    if gamma_sq < -_TOL:
        raise ValueError("overlap exceeds the Cauchy-Schwarz limit for these statistics")
    gamma = math.sqrt(max(0.0, gamma_sq))
    return np.array([[alpha**2 + beta**2, beta * gamma], [beta * gamma, gamma**2]]) / (2 * stats.correlated)


def key_rate_lower(stats: ObservedStats) -> KeyRateReport:
    h_ac = conditional_entropy_H_AC(stats)
    s_aef = shannon_entropy(stats.joint)
    b = bound_B(stats)
    lam = lambda_tilde(stats, b)
    xi1, xi2 = stats.correlated, stats.anticorrelated
    s_ef = shannon_entropy([xi1, xi2]) + xi1 * binary_entropy(lam) + xi2
    # S(A|EF) - H(A|C) with S(A|EF) >= S(AEF) - S_EF_bound
    r = s_aef - s_ef - h_ac
    return KeyRateReport(h_ac, s_aef, s_ef, b, lam, min(1.0, r))


def key_rate_at(q: float) -> float:
    return key_rate_lower(stats_from_Q(q)).r_lower


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    bracket_width: float
    iterations: int


def solve_threshold(lo: float = 1e-6, hi: float = 0.25, tol: float = 1e-6) -> ThresholdResult:
    """Bisect for the noise level where the key-rate bound crosses zero."""
    f_lo, f_hi = key_rate_at(lo), key_rate_at(hi)
    if not (f_lo > 0 > f_hi):
        raise ArithmeticError(f"no sign change on [{lo}, {hi}]: r = {f_lo}, {f_hi}")
    iterations = 0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if key_rate_at(mid) > 0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return ThresholdResult(0.5 * (lo + hi), hi - lo, iterations)


def noise_threshold() -> float:
    return solve_threshold().threshold


def key_rate_curve(q_min: float, q_max: float, steps: int) -> list[tuple[float, float]]:
    if not (0.0 <= q_min < q_max <= 0.5) or steps < 2:
        raise ValueError(f"invalid curve range [{q_min}, {q_max}] with {steps} steps")
    grid = np.linspace(q_min, q_max, steps)
    return [(float(q), key_rate_at(float(q))) for q in grid]
