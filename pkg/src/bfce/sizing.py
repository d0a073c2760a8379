"""Choosing m and k.

Two criteria are offered: the classical one (smallest FPP at capacity,
``k = (m/n) ln 2``) and the cumulative counting error, i.e. the expected
number of distinct elements the counter misses while filling to ``s_max``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import FPP_CEILING, correction_terms
from .exceptions import InvalidParameters
from .fpp import approx_fpp

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SizingRequest:
    s_max: int
    target_fpp: float | None = None
    target_mean_error: float | None = None
    m_fixed: int | None = None

    def __post_init__(self):
        if self.s_max < 1:
            raise InvalidParameters("s_max must be >= 1")
        if (self.target_fpp is None) == (self.target_mean_error is None):
            raise InvalidParameters("give exactly one of target_fpp / target_mean_error")


def classical_size(s_max: int, target_fpp: float) -> tuple[int, int]:
    """Textbook sizing, both values floored (reproduces m=162945, k=6 at 17000 / 1%)."""
    if s_max < 1:
        raise InvalidParameters("s_max must be >= 1")
    if not 0.0 < target_fpp < 1.0:
        raise InvalidParameters(f"target_fpp must lie in (0, 1), got {target_fpp}")
    m = max(1, math.floor(-s_max * math.log(target_fpp) / LN2 ** 2))
    k = max(1, math.floor(m / s_max * LN2))
    return m, min(k, m)


def cumulative_error(m: int, k: int, s_max: int) -> float:
    """``sum_{s=0}^{s_max} t_s / (1 - t_s)`` with the approximate FPP.

    Returns ``inf`` if the filter saturates before ``s_max``.
    """
    s = np.arange(s_max + 1, dtype=np.float64)
    t = (-np.expm1(-k * s / m)) ** k
    if t[-1] >= FPP_CEILING:
        return math.inf
    return float(np.sum(t / (1.0 - t)))


def _k_window(m: int, s_max: int) -> int:
    return min(m, math.ceil(2 * (m / s_max) * LN2) + 8)


def k_opt_cumulative(m: int, s_max: int) -> int:
    """k in ``[1, k_hi]`` minimising the expected misses up to ``s_max``.

    Ties go to the smaller k.
    """
    if m < 1 or s_max < 1:
        raise InvalidParameters("m and s_max must be >= 1")
    errors = [cumulative_error(m, k, s_max) for k in range(1, _k_window(m, s_max) + 1)]
    return int(np.argmin(errors)) + 1


def mean_error_upper_bound(m: int, k: int, s_max: int) -> float:
    """``s_max * t / (1 - t)`` with ``t`` the FPP at ``s_max``; bounds the cumulative error."""
    mean, _ = correction_terms(approx_fpp(m, k, s_max))
    return s_max * mean


def _best(m: int, s_max: int) -> tuple[int, float]:
    k = k_opt_cumulative(m, s_max)
    return k, cumulative_error(m, k, s_max)


def size_for_error_budget(s_max: int, target_mean_error: float) -> tuple[int, int]:
    """Smallest m (with k re-optimised at every m) whose cumulative error fits the budget."""
    if s_max < 1:
        raise InvalidParameters("s_max must be >= 1")
    if not target_mean_error > 0:
        raise InvalidParameters("target_mean_error must be positive")
    if _best(1, s_max)[1] <= target_mean_error:
        return 1, _best(1, s_max)[0]
    lo, hi = 1, 2
    while _best(hi, s_max)[1] > target_mean_error:
        lo, hi = hi, hi * 2
    # invariant: lo fails, hi fits
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _best(mid, s_max)[1] <= target_mean_error:
            hi = mid
        else:
            lo = mid
    return hi, _best(hi, s_max)[0]


def size(request: SizingRequest) -> tuple[int, int]:
    """Dispatch a :class:`SizingRequest` to the matching sizing rule."""
    if request.m_fixed is not None:
        return request.m_fixed, k_opt_cumulative(request.m_fixed, request.s_max)
    if request.target_fpp is not None:
        return classical_size(request.s_max, request.target_fpp)
    return size_for_error_budget(request.s_max, request.target_mean_error)
