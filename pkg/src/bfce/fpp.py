"""False-positive probability of a Bloom filter.

Three forms are available:

* ``approx_fpp``   -- ``(1 - exp(-k n / m)) ** k``, the usual large-m form;
* ``exact_fpp``    -- the exact Stirling-number expression, evaluated in
  rational arithmetic and therefore limited to tiny filters;
* ``fill_ratio_fpp`` -- ``(B / m) ** k`` from the observed number of set bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exceptions import InvalidParameters, OutOfRange

EXACT_MAX_M = 64
EXACT_MAX_KN = 256

APPROXIMATE = "approximate"
EXACT = "exact"
FILL_RATIO = "fill-ratio"
VARIANTS = (APPROXIMATE, EXACT, FILL_RATIO)


def _check_mk(m, k):
    if m < 1 or k < 1 or k > m:
        raise InvalidParameters(f"need 1 <= k <= m, got k={k}, m={m}")


def approx_fpp(m: int, k: int, n: int) -> float:
    _check_mk(m, k)
    if n < 0:
        raise InvalidParameters(f"n must be non-negative, got {n}")
    # -expm1(-x) == 1 - exp(-x) without cancellation for small x
    return (-math.expm1(-k * n / m)) ** k


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple[int, ...]:
    # S(n, i) for i = 0..n, by S(n, i) = i S(n-1, i) + S(n-1, i-1)
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1)
    row = [0] * (n + 1)
    for i in range(1, n + 1):
        row[i] = (i * prev[i] if i < n else 0) + prev[i - 1]
    return tuple(row)


def stirling2(n: int, i: int) -> int:
    """Stirling number of the second kind S(n, i), exact integer."""
    if n < 0 or i < 0:
        raise ValueError("arguments must be non-negative")
    if i > n:
        return 0
    return _stirling_row(n)[i]


def stirling2_alternating(n: int, i: int) -> int:
    """S(n, i) via the explicit alternating binomial sum (cross-check only)."""
    total = sum((-1) ** (i - j) * math.comb(i, j) * j ** n for j in range(i + 1))
    q, r = divmod(total, math.factorial(i))
    assert r == 0
    return q


def exact_fpp_fraction(m: int, k: int, n: int) -> Fraction:
    _check_mk(m, k)
    if n < 0:
        raise InvalidParameters(f"n must be non-negative, got {n}")
    if m > EXACT_MAX_M or k * n > EXACT_MAX_KN:
        raise OutOfRange(
            f"exact FPP limited to m <= {EXACT_MAX_M} and k*n <= {EXACT_MAX_KN} "
            f"(got m={m}, k*n={k * n}); use approx_fpp")
    kn = k * n
    num = sum(i ** k * math.factorial(i) * math.comb(m, i) * stirling2(kn, i)
              for i in range(1, m + 1))
    return Fraction(num, m ** (k * (n + 1)))


def exact_fpp(m: int, k: int, n: int) -> float:
    """Exact FPP after n insertions with ideal independent uniform hashing.

    Raises:
        OutOfRange: m > 64 or k*n > 256.
    """
    return float(exact_fpp_fraction(m, k, n))


def fill_ratio_fpp(m: int, k: int, ones: int) -> float:
    _check_mk(m, k)
    if not 0 <= ones <= m:
        raise InvalidParameters(f"ones must lie in [0, m], got {ones}")
    return (ones / m) ** k


@dataclass(frozen=True)
class FppModel:
    """A selectable FPP function of the filling state of an (m, k) filter."""

    variant: str = APPROXIMATE
    m: int = 1
    k: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameters(f"unknown FPP variant {self.variant!r}")
        _check_mk(self.m, self.k)

    def __call__(self, s: int, ones: int | None = None) -> float:
        if self.variant == APPROXIMATE:
            return approx_fpp(self.m, self.k, s)
        if self.variant == EXACT:
            return exact_fpp(self.m, self.k, s)
        if ones is None:
            raise InvalidParameters("fill-ratio FPP needs the count of set bits")
        return fill_ratio_fpp(self.m, self.k, ones)


def fpp_at_state(model: FppModel, state) -> float:
    """FPP of a filter (anything with ``s`` and ``ones``) under ``model``."""
    return model(state.s, state.ones)
