"""Fourier series arithmetic checks."""

import numpy as np
import pytest

from wvnlab.fourier import FourierSeries, fit_with_tail

RNG = np.random.default_rng(1234)


def random_series(order, scale=1.0, rng=RNG):
    c = (rng.standard_normal(2 * order + 1)
         + 1j * rng.standard_normal(2 * order + 1)) * scale
    return FourierSeries(c)


def test_constant_and_harmonic():
    s = FourierSeries.constant(3.0 - 1j, order=4)
    assert s.coefficient(0) == 3.0 - 1j
    assert s.coefficient(2) == 0.0
    h = FourierSeries.harmonic(3, 2.0)
    x = 0.37
    assert np.isclose(h.evaluate(x), 2.0 * np.exp(2j * np.pi * 3 * x))


def test_periodicity_of_evaluation():
    s = random_series(6)
    xs = np.array([0.1, 0.45, 0.99])
    assert np.allclose(s.evaluate(xs), s.evaluate(xs + 1.0))
    assert np.allclose(s.evaluate(xs), s.evaluate(xs + 17.0))


def test_from_samples_roundtrip():
    s = random_series(8)
    grid = np.arange(64) / 64
    fitted = FourierSeries.from_samples(s.evaluate(grid), 8)
    assert np.allclose(fitted.coeffs, s.coeffs, atol=1e-12)


def test_product_matches_sampled_multiplication():
    a = random_series(5)
    b = random_series(7)
    prod = a.product(b)
    assert prod.order == 12
    xs = np.linspace(0, 1, 41)
    assert np.allclose(prod.evaluate(xs), a.evaluate(xs) * b.evaluate(xs))


def test_truncate_reports_tail():
    a = random_series(6)
    t, lost = a.truncate(3)
    assert t.order == 3
    expect = np.sum(np.abs(a.coeffs[:3])) + np.sum(np.abs(a.coeffs[-3:]))
    assert np.isclose(lost, expect)
    same, lost0 = a.truncate(6)
    assert lost0 == 0.0
    assert np.allclose(same.coeffs, a.coeffs)


def test_conjugate_is_pointwise_conjugate():
    a = random_series(4)
    xs = np.linspace(0, 1, 17)
    assert np.allclose(a.conjugate().evaluate(xs), np.conj(a.evaluate(xs)))


def test_times_harmonic_shifts():
    a = random_series(3)
    xs = np.linspace(0, 1, 11)
    shifted = a.times_harmonic(-2)
    assert np.allclose(shifted.evaluate(xs),
                       a.evaluate(xs) * np.exp(-4j * np.pi * xs))


def test_derivative_matches_finite_differences():
    a = random_series(4)
    d = a.derivative()
    xs = np.linspace(0.05, 0.95, 13)
    h = 1e-6
    fd = (a.evaluate(xs + h) - a.evaluate(xs - h)) / (2 * h)
    assert np.allclose(d.evaluate(xs), fd, atol=1e-5)


def test_linearity_addition():
    a, b = random_series(5), random_series(5)
    xs = np.linspace(0, 1, 19)
    assert np.allclose((a + b).evaluate(xs), a.evaluate(xs) + b.evaluate(xs))
    assert np.allclose((2.5 * a).evaluate(xs), 2.5 * a.evaluate(xs))


def test_fit_with_tail_detects_truncation():
    s = random_series(10)
    grid = np.arange(128) / 128
    _, tail = fit_with_tail(s.evaluate(grid), 10)
    assert tail < 1e-12
    _, tail_low = fit_with_tail(s.evaluate(grid), 4)
    expect = np.sum(np.abs(s.coeffs[:6])) + np.sum(np.abs(s.coeffs[-6:]))
    assert np.isclose(tail_low, expect, rtol=1e-10)


def test_even_length_rejected():
    with pytest.raises(ValueError):
        FourierSeries(np.zeros(4, dtype=complex))
