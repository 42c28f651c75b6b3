"""Closed-form bounds and constants used to read the experiments.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import BranchUndefined, ConvergenceFailure

MAX_ITER = 200
RESIDUAL_TOL = 1e-12


def first_moment_log_upper(n: int, m: int, k: int) -> float:
    """Natural log of ``2**n * (1 - 2**-k)**m``.

    This bounds the expected number of satisfying assignments when every
    clause has at most ``k`` literals with fair independent signs; a negative
    value means fewer than one is expected.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return n * math.log(2.0) + m * math.log1p(-(2.0**-k))


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of ``f`` on ``[lo, hi]`` given ``f(lo) > 0 > f(hi)``."""
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    best = lo if abs(f(lo)) <= abs(f(hi)) else hi
    if abs(f(best)) >= RESIDUAL_TOL:
        raise ConvergenceFailure(f"bisection stalled at {best!r} with residual {f(best)!r}")
    return best


def dc_residual(c: float, x: float) -> float:
    return 1.0 + x * (math.log(c) - math.log(x) + 1.0) - c


def solve_dc(c: float) -> float:
    """The root ``d_c > c`` of ``1 + x(ln c - ln x + 1) - c = 0``.

    The left side is 1 at ``x = c``, decreasing beyond it, and still positive
    at ``c + sqrt(c)``, which serves as the lower end of the bracket.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    lo = c + math.sqrt(c)
    if dc_residual(c, lo) <= 0:
        raise ConvergenceFailure(f"residual not positive at c + sqrt(c) for c={c}")
    step = max(1.0, c)
    hi = lo + step
    for _ in range(MAX_ITER):
        if dc_residual(c, hi) < 0:
            return _bisect(lambda x: dc_residual(c, x), lo, hi)
        lo, step = hi, 2 * step
        hi = lo + step
    raise ConvergenceFailure(f"could not bracket d_c for c={c}")


def u_residual(w: float, u: float) -> float:
    return -u + (1.0 + u) * math.log1p(u) - w


def solve_u(w: float) -> float:
    """Non-negative ``u`` with ``-u + (1+u) ln(1+u) = w``."""
    if w < 0:
        raise ValueError("w must be non-negative")
    if w == 0:
        return 0.0
    hi = 1.0
    for _ in range(MAX_ITER):
        if u_residual(w, hi) > 0:
            return _bisect(lambda u: -u_residual(w, u), 0.0, hi)
        hi *= 2
    raise ConvergenceFailure(f"could not bracket u({w})")


def solve_dc_via_u(c: float) -> float:
    """Second route to ``d_c``: ``c + c * u(1/c)``."""
    return c + c * solve_u(1.0 / c)


def raab_steger_lower(M: float, B: int, delta: float, branch: str) -> float:
    """W.h.p. lower bound on the maximum load of ``M`` balls in ``B`` bins.

    ``branch="sub"`` is the ``B/polylog(B) < M = o(B ln B)`` regime,
    ``ln B / ln(B ln B / M)``; ``branch="critical"`` is ``M = c B ln B``, giving
    ``(d_c - delta) ln B``.  The caller decides which regime applies.
    """
    lnB = math.log(B)
    if branch == "sub":
        ratio = B * lnB / M
        if not ratio > 1:
            raise BranchUndefined(f"M={M} is not below B ln B={B * lnB}")
        return lnB / math.log(ratio)
    if branch == "critical":
        c = M / (B * lnB)
        return (solve_dc(c) - delta) * lnB
    raise BranchUndefined(f"unknown branch {branch!r}")


def raab_steger_upper(M: float, B: int) -> tuple:
    """``M/B + sqrt(2 M ln B / B)`` and whether ``M >= B ln^3 B`` holds."""
    lnB = math.log(B)
    return M / B + math.sqrt(2.0 * M * lnB / B), M >= B * lnB**3


@dataclass(frozen=True)
class ThresholdEntry:
    lower: Optional[float]
    upper: float
    heuristic: Optional[float] = None


class ThresholdTable:
    """Known bounds on the random k-SAT thresholds, keyed by ``k``.

    Any ``k >= 2`` without a specific entry still gets the first-moment upper
    bound ``2**k ln 2``.
    """

    _KNOWN = {
        2: ThresholdEntry(1.0, 1.0, 1.0),
        3: ThresholdEntry(3.52, 4.4898, 4.26),
        4: ThresholdEntry(None, 16 * math.log(2), 9.93),
        5: ThresholdEntry(None, 32 * math.log(2), 21.12),
        6: ThresholdEntry(None, 64 * math.log(2), 43.37),
        7: ThresholdEntry(None, 128 * math.log(2), 87.79),
    }

    def __getitem__(self, k: int) -> ThresholdEntry:
        if k < 2:
            raise KeyError(k)
        return self._KNOWN.get(k, ThresholdEntry(None, 2**k * math.log(2)))

    def known(self) -> dict:
        return dict(self._KNOWN)


def threshold_constants() -> ThresholdTable:
    return ThresholdTable()
