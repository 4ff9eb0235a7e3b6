from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, strategies as st

from compactqed.exceptions import DomainError
from compactqed.fourier import digamma, replacement_coefficients, trigamma


@pytest.mark.parametrize("x", [1e-3, 0.05, 0.3, 1.0, 2.5, 9.99, 10.0, 47.3, 1e4])
def test_polygamma_against_mpmath(x):
    assert digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-13, abs=1e-13)
    assert trigamma(x) == pytest.approx(float(mpmath.polygamma(1, x)), rel=1e-13)


@given(st.floats(1e-4, 500.0))
def test_polygamma_against_scipy(x):
    assert digamma(x) == pytest.approx(sc.digamma(x), rel=1e-12, abs=1e-12)
    assert trigamma(x) == pytest.approx(sc.polygamma(1, x), rel=1e-12)


def test_polygamma_domain():
    with pytest.raises(DomainError):
        digamma(0.0)
    with pytest.raises(DomainError):
        trigamma(-1.0)


def _aliased_series(L: int):
    # continuum Fourier series of x and x^2 on (-N/2, N/2), harmonics folded mod N
    N = 2 * L + 1
    fs, fc = [], []
    for nu in range(1, 2 * L + 1):
        fs.append(float(mpmath.nsum(
            lambda m: (-1) ** (nu + m * N + 1) * N / (mpmath.pi * (nu + m * N)), [0, mpmath.inf])))
        fc.append(float(mpmath.nsum(
            lambda m: (-1) ** (nu + m * N) * N**2 / (mpmath.pi**2 * (nu + m * N) ** 2),
            [0, mpmath.inf])))
    return np.array(fs), np.array(fc)


@pytest.mark.parametrize("L", [1, 2, 3, 5, 8, 12])
def test_coefficients_match_aliased_continuum_series(L):
    c = replacement_coefficients(L)
    fs, fc = _aliased_series(L)
    np.testing.assert_allclose(c.sine_coeffs, fs, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(c.cosine_coeffs, fc, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("L", range(1, 13))
def test_folded_pairs_match_discrete_fourier_transform(L):
    # f_nu - f_{N-nu} and f_nu + f_{N-nu} are fixed by the DFT of r and r^2
    c = replacement_coefficients(L)
    n = 2 * L + 1
    r = np.arange(-L, L + 1)
    nu = np.arange(1, 2 * L + 1)
    phase = 2 * np.pi * np.outer(nu, r) / n
    np.testing.assert_allclose(c.sine_coeffs - c.sine_coeffs[::-1],
                               2 * (np.sin(phase) @ r) / n, atol=1e-11)
    np.testing.assert_allclose(c.cosine_coeffs + c.cosine_coeffs[::-1],
                               2 * (np.cos(phase) @ r**2) / n, atol=1e-11)


@pytest.mark.parametrize("L", range(1, 13))
def test_expansions_reassemble_r_and_r_squared(L):
    c = replacement_coefficients(L)
    r = np.arange(-L, L + 1)
    assert np.max(np.abs(c.linear(r) - r)) <= 1e-9
    assert np.max(np.abs(c.quadratic(r) - r**2)) <= 1e-9


def test_offset():
    assert replacement_coefficients(5).offset == pytest.approx(10.0)
    assert replacement_coefficients(1).offset == pytest.approx(2 / 3)


def test_first_coefficients_golden():
    # frozen from the aliased-series oracle at L = 2
    c = replacement_coefficients(2)
    np.testing.assert_allclose(
        c.sine_coeffs, [1.4137949610315366, -0.647604064493327, 0.4038581597449402,
                        -0.28750665567254335], atol=1e-14)
    np.testing.assert_allclose(
        c.cosine_coeffs, [-2.477229215719529, 0.5935731336441081, -0.25193234714423435,
                          0.13558842921965486], atol=1e-14)


def test_coefficient_arrays_are_frozen_and_cached():
    c = replacement_coefficients(4)
    assert replacement_coefficients(4) is c
    with pytest.raises(ValueError):
        c.sine_coeffs[0] = 1.0
    with pytest.raises(DomainError):
        replacement_coefficients(0)
