"""Cardinality estimators for a Bloom filter with a negative-check counter.

The counter ``s`` misses every distinct element whose check came back a
false positive.  While the filter moves from state ``r`` to ``r + 1`` the
number of such misses is geometric, ``P(X_r = j) = (1 - t_r) t_r^j``, which
holds whether or not the stream repeats elements.  Summing the independent
per-state terms gives the corrected counter::

    E(N_s) = s + sum_{r=start}^{s-1} t_r / (1 - t_r)
    V(N_s) =     sum_{r=start}^{s-1} t_r / (1 - t_r)**2

``CorrectionAccumulator`` keeps both sums up to date as the counter moves.
The two fill-ratio estimators from the literature are provided for
comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DegenerateFpp, InvalidParameters, SaturatedFilter
from .fpp import APPROXIMATE, FppModel

# t at or above this is treated as a saturated filter
FPP_CEILING = 1.0 - 2.0 ** -40

CORRECTED = "corrected"
SWAMIDASS = "swamidass"
PAPAPETROU = "papapetrou"


def correction_terms(t: float) -> tuple[float, float]:
    """Mean and variance of the misses at one state with FPP ``t``."""
    if t >= FPP_CEILING:
        raise DegenerateFpp(f"false-positive probability {t!r} is saturated")
    q = 1.0 - t
    return t / q, t / (q * q)


@dataclass
class CorrectionAccumulator:
    """Running sums of the expected misses and their variance.

    ``start`` is 1 for a filter filled one element at a time and ``b`` when
    the first ``b`` distinct elements were inserted together into an empty
    filter (that batch cannot contain false positives).
    """

    model: FppModel
    start: int = 1
    sum_mean: float = 0.0
    sum_var: float = 0.0

    def __post_init__(self):
        self._approx = self.model.variant == APPROXIMATE

    def on_counter_increment(self, s_before: int, ones_before: int | None = None) -> None:
        """Account for the transition ``s_before -> s_before + 1``.

        Raises:
            DegenerateFpp: the FPP at ``s_before`` is numerically 1.
        """
        if s_before < 0:
            raise InvalidParameters("s_before must be non-negative")
        if s_before < self.start:
            return
        if self._approx:
            # same expression as fpp.approx_fpp, inlined for the hot path
            k = self.model.k
            t = (-math.expm1(-k * s_before / self.model.m)) ** k
        else:
            t = self.model(s_before, ones_before)
        mean, var = correction_terms(t)
        self.sum_mean += mean
        self.sum_var += var

    def copy(self) -> "CorrectionAccumulator":
        return CorrectionAccumulator(self.model, self.start, self.sum_mean, self.sum_var)


def on_counter_increment(acc: CorrectionAccumulator, s_before: int,
                         ones_before: int | None = None) -> CorrectionAccumulator:
    acc.on_counter_increment(s_before, ones_before)
    return acc


@dataclass(frozen=True)
class CardinalityEstimate:
    mean: float
    counter: int
    method: str = CORRECTED
    std_dev: float | None = None


def corrected_estimate(filt) -> CardinalityEstimate:
    """``s + E(S_s)`` with standard deviation ``sqrt(V(S_s))``."""
    acc = filt.correction
    return CardinalityEstimate(mean=filt.s + acc.sum_mean, counter=filt.s,
                               method=CORRECTED, std_dev=math.sqrt(acc.sum_var))


def _check_ones(m, k, ones):
    if m < 1 or k < 1:
        raise InvalidParameters(f"need m >= 1 and k >= 1, got m={m}, k={k}")
    if not 0 <= ones <= m:
        raise InvalidParameters(f"ones must lie in [0, m], got {ones}")
    if ones == m:
        raise SaturatedFilter("all bits set; fill-ratio estimate is unbounded")


def estimate_swamidass(m: int, k: int, ones: int) -> float:
    """``-(m/k) ln(1 - B/m)``."""
    _check_ones(m, k, ones)
    return -(m / k) * math.log1p(-ones / m)


def estimate_papapetrou(m: int, k: int, ones: int) -> float:
    """Maximum-likelihood count ``ln(1 - B/m) / (k ln(1 - 1/m))``; needs m >= 2."""
    _check_ones(m, k, ones)
    if m < 2:
        raise InvalidParameters("papapetrou estimator needs m >= 2")
    return math.log1p(-ones / m) / (k * math.log1p(-1.0 / m))


def error_distribution_pmf(t: float, r: int) -> float:
    """P(r false positives before the next counted element) at FPP ``t``."""
    if not 0.0 <= t < 1.0:
        raise InvalidParameters(f"t must lie in [0, 1), got {t}")
    if r < 0:
        raise InvalidParameters("r must be non-negative")
    return (1.0 - t) * t ** r


def make_accumulator(m: int, k: int, variant: str = APPROXIMATE, start: int = 1) -> CorrectionAccumulator:
    return CorrectionAccumulator(FppModel(variant, m, k), start=start)


__all__ = [
    "CORRECTED", "SWAMIDASS", "PAPAPETROU", "FPP_CEILING",
    "CardinalityEstimate", "CorrectionAccumulator", "correction_terms",
    "corrected_estimate", "error_distribution_pmf", "estimate_papapetrou",
    "estimate_swamidass", "make_accumulator", "on_counter_increment",
]
