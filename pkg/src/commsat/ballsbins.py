"""Balls into bins: simulation and exact occupancy moments.

``X_B`` below is the number of bins holding exactly ``s`` balls.  When
``M ~ C * B**(1 - 1/s)`` it is asymptotically Poisson with mean ``C**s / s!``,
and its binomial moments have the closed form implemented in
:func:`exact_binomial_moment`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import InfeasibleParameters, ZeroBins

DENSE_LIMIT = 10**7
# exact rationals while B**M stays below this many bits
EXACT_BITS = 200_000


@dataclass
class Occupancy:
    """Bin loads after a throw.

    ``counts`` is the dense load vector for up to ``DENSE_LIMIT`` bins.  Larger
    throws keep only ``histogram`` (load -> number of bins), which is all the
    statistics below need.
    """

    bins: int
    balls: int
    counts: np.ndarray | None = None
    histogram: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.histogram and self.counts is not None:
            loads, freq = np.unique(self.counts, return_counts=True)
            self.histogram = dict(zip(loads.tolist(), freq.tolist()))


def throw(M: int, B: int, rng: np.random.Generator) -> Occupancy:
    if B < 1:
        raise ZeroBins("need at least one bin")
    if M < 0:
        raise InfeasibleParameters("negative ball count")
    placed = rng.integers(0, B, size=M)
    if B <= DENSE_LIMIT:
        counts = np.bincount(placed, minlength=B)
        return Occupancy(B, M, counts, _histogram_from_sparse(B, placed))
    return Occupancy(B, M, None, _histogram_from_sparse(B, placed))


def _histogram_from_sparse(B, placed):
    _, loads = np.unique(placed, return_counts=True)
    values, freq = np.unique(loads, return_counts=True)
    hist = dict(zip(values.tolist(), freq.tolist()))
    empty = B - loads.size
    if empty:
        hist[0] = empty
    return hist


def max_load(occ: Occupancy) -> int:
    return max((load for load, freq in occ.histogram.items() if freq), default=0)


def count_bins_with_exactly(occ: Occupancy, s: int) -> int:
    if s < 0:
        raise InfeasibleParameters("s must be nonnegative")
    return int(occ.histogram.get(s, 0))


def exact_binomial_moment(B: int, M: int, s: int, t: int):
    """E[C(X_B, t)] for M balls in B bins, X_B = #bins with exactly s balls.

    Pick the t bins, then s balls for each of them in turn, and send the rest
    to the other ``B - t`` bins:
    ``C(B,t) * prod_j C(M - j*s, s) * (B-t)**(M - t*s) / B**M``.
    Returns a :class:`~fractions.Fraction` when ``B**M`` is of moderate size,
    otherwise a float computed at 50 significant digits.
    """
    if B < 1 or M < 0 or s < 0 or t < 0 or t > B:
        raise InfeasibleParameters(f"need 0 <= t <= B, B >= 1, M >= 0, s >= 0 (B={B}, M={M}, s={s}, t={t})")
    if t * s > M:
        return Fraction(0)
    if M * math.log2(max(B, 2)) <= EXACT_BITS:
        num = math.comb(B, t) * (B - t) ** (M - t * s)
        for j in range(t):
            num *= math.comb(M - j * s, s)
        return Fraction(num, B**M)
    with mpmath.workdps(50):
        log_val = mpmath.log(mpmath.binomial(B, t))
        for j in range(t):
            log_val += mpmath.log(mpmath.binomial(M - j * s, s))
        if M - t * s:
            log_val += (M - t * s) * mpmath.log(B - t)
        log_val -= M * mpmath.log(B)
        return float(mpmath.exp(log_val))


def poisson_limit_param(C: float, s: int) -> float:
    """Mean ``C**s / s!`` of the limiting Poisson law of X_B."""
    return C**s / math.factorial(s)


def critical_ball_count(C: float, B: int, s: int) -> int:
    """``M = C * B**(1 - 1/s)``, rounded to the nearest integer."""
    return int(round(C * B ** (1.0 - 1.0 / s)))
