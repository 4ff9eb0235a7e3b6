"""Exact Fourier replacements of the flux operators R and R^2 on Z_{2L+1}.

On the integer grid ``r = -L..L`` the operator identities

    R   -> sum_nu f^s_nu sin(2 pi nu R / (2L+1))
    R^2 -> sum_nu f^c_nu cos(2 pi nu R / (2L+1)) + L(L+1)/3

hold exactly with ``nu = 1..2L``. The coefficients have closed forms in
terms of the digamma and trigamma functions, implemented here with an
upward recurrence followed by an asymptotic series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from compactqed.exceptions import DomainError

EULER_GAMMA = 0.57721566490153286061

# Shift arguments above this before using the asymptotic series.
_ASYMPTOTIC_THRESHOLD = 10.0

# B_{2k} for k = 1..8
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)


def _check_positive(x: float) -> float:
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"polygamma argument must be positive and finite, got {x}")
    return x


def digamma(x: float) -> float:
    """psi_0(x) for x > 0."""
    x = _check_positive(x)
    acc = 0.0
    while x < _ASYMPTOTIC_THRESHOLD:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """psi_1(x) for x > 0."""
    x = _check_positive(x)
    acc = 0.0
    while x < _ASYMPTOTIC_THRESHOLD:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv2 * inv
    for b in _BERNOULLI:
        series += b * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


@dataclass(frozen=True)
class ReplacementCoefficients:
    L: int
    sine_coeffs: np.ndarray
    cosine_coeffs: np.ndarray

    @property
    def offset(self) -> float:
        return self.L * (self.L + 1) / 3.0

    @property
    def group_order(self) -> int:
        return 2 * self.L + 1

    def linear(self, r) -> np.ndarray:
        """Evaluate the sine expansion at integer points ``r``."""
        nu = np.arange(1, 2 * self.L + 1)
        phase = 2 * np.pi * np.outer(np.atleast_1d(r), nu) / self.group_order
        return np.sin(phase) @ self.sine_coeffs

    def quadratic(self, r) -> np.ndarray:
        """Evaluate the cosine expansion plus offset at integer points ``r``."""
        nu = np.arange(1, 2 * self.L + 1)
        phase = 2 * np.pi * np.outer(np.atleast_1d(r), nu) / self.group_order
        return np.cos(phase) @ self.cosine_coeffs + self.offset


@lru_cache(maxsize=None)
def replacement_coefficients(L: int) -> ReplacementCoefficients:
    """Sine and cosine coefficients ``f^s_nu``, ``f^c_nu`` for ``nu = 1..2L``."""
    if int(L) != L or L < 1:
        raise DomainError(f"L must be a positive integer, got {L}")
    L = int(L)
    n = 2 * L + 1
    fs = np.empty(2 * L)
    fc = np.empty(2 * L)
    for nu in range(1, 2 * L + 1):
        lo = nu / (2 * n)
        hi = (n + nu) / (2 * n)
        sign = -1.0 if nu % 2 else 1.0
        fs[nu - 1] = -sign / (2 * math.pi) * (digamma(hi) - digamma(lo))
        fc[nu - 1] = sign / (4 * math.pi**2) * (trigamma(lo) - trigamma(hi))
    fs.setflags(write=False)
    fc.setflags(write=False)
    return ReplacementCoefficients(L, fs, fc)
