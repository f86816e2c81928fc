"""Truncated Fourier series on the unit period and their arithmetic.

Series are trigonometric polynomials ``x -> sum_{n=-N..N} c_n e^{2 pi i n x}``
stored as a dense coefficient array of length ``2N+1`` (index ``n`` lives at
array position ``n + N``).  Products are computed as full convolutions, so the
bandwidth doubles; callers that keep a fixed truncation order re-truncate and
can account for the discarded tail mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_coeff_array(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size % 2 == 0:
        raise ValueError("coefficients must be a 1-d array of odd length")
    return c


@dataclass(frozen=True)
class FourierSeries:
    """A 1-periodic trigonometric polynomial, immutable."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _as_coeff_array(self.coeffs)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # ------------------------------------------------------------ builders
    @classmethod
    def zero(cls, order: int = 0) -> "FourierSeries":
        return cls(np.zeros(2 * order + 1, dtype=complex))

    @classmethod
    def constant(cls, value: complex, order: int = 0) -> "FourierSeries":
        c = np.zeros(2 * order + 1, dtype=complex)
        c[order] = value
        return cls(c)

    @classmethod
    def harmonic(cls, n: int, amplitude: complex = 1.0) -> "FourierSeries":
        """The single mode ``amplitude * e^{2 pi i n x}``."""
        order = abs(n)
        c = np.zeros(2 * order + 1, dtype=complex)
        c[n + order] = amplitude
        return cls(c)

    @classmethod
    def from_samples(cls, samples, order: int) -> "FourierSeries":
        """Least-squares fit on a uniform grid via the DFT.

        ``samples`` are values at ``x_j = j/M``; requires ``M > 2*order``.
        """
        s = np.asarray(samples, dtype=complex)
        m = s.size
        if m <= 2 * order:
            raise ValueError(f"need more than {2 * order} samples, got {m}")
        f = np.fft.fft(s) / m
        c = np.concatenate([f[m - order:], f[:order + 1]])
        return cls(c)

    # ---------------------------------------------------------- inspection
    @property
    def order(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.order:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.order])

    @property
    def mean(self) -> complex:
        return self.coefficient(0)

    def evaluate(self, x):
        """Evaluate at scalar or array ``x`` (argument reduced mod 1)."""
        xa = np.asarray(x, dtype=float)
        n = np.arange(-self.order, self.order + 1)
        phase = np.exp((2j * np.pi) * np.multiply.outer(xa % 1.0, n))
        out = phase @ self.coeffs
        return out if out.ndim else complex(out)

    def sup_norm(self, oversample: int = 8) -> float:
        """Grid estimate of the uniform norm."""
        m = max(oversample * (2 * self.order + 1), 64)
        grid = np.arange(m) / m
        return float(np.max(np.abs(self.evaluate(grid))))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    # ---------------------------------------------------------- arithmetic
    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        a, b = _align(self, other)
        return FourierSeries(a + b)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        a, b = _align(self, other)
        return FourierSeries(a - b)

    def __neg__(self) -> "FourierSeries":
        return FourierSeries(-self.coeffs)

    def __mul__(self, scalar) -> "FourierSeries":
        return FourierSeries(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def product(self, other: "FourierSeries") -> "FourierSeries":
        """Pointwise product, exact: returns order ``N1 + N2``."""
        return FourierSeries(np.convolve(self.coeffs, other.coeffs))

    def truncate(self, order: int) -> tuple["FourierSeries", float]:
        """Truncate (or zero-pad) to ``order``; returns the lost tail mass."""
        n = self.order
        if order >= n:
            return self.pad(order), 0.0
        k = n - order
        lost = float(np.sum(np.abs(self.coeffs[:k])) +
                     np.sum(np.abs(self.coeffs[-k:])))
        return FourierSeries(self.coeffs[k:-k]), lost

    def pad(self, order: int) -> "FourierSeries":
        n = self.order
        if order <= n:
            return self
        z = np.zeros(order - n, dtype=complex)
        return FourierSeries(np.concatenate([z, self.coeffs, z]))

    def conjugate(self) -> "FourierSeries":
        """Series of the complex-conjugate function."""
        return FourierSeries(np.conj(self.coeffs[::-1]))

    def times_harmonic(self, m: int) -> "FourierSeries":
        """Multiply by ``e^{2 pi i m x}`` (shifts all indices by ``m``)."""
        if m == 0:
            return self
        pad = np.zeros(2 * abs(m), dtype=complex)
        if m > 0:
            return FourierSeries(np.concatenate([pad, self.coeffs]))
        return FourierSeries(np.concatenate([self.coeffs, pad]))

    def derivative(self) -> "FourierSeries":
        n = np.arange(-self.order, self.order + 1)
        return FourierSeries(self.coeffs * (2j * np.pi * n))


def _align(a: FourierSeries, b: FourierSeries) -> tuple[np.ndarray, np.ndarray]:
    order = max(a.order, b.order)
    return a.pad(order).coeffs, b.pad(order).coeffs


def fit_with_tail(samples, order: int) -> tuple[FourierSeries, float]:
    """Fit a series of the given order and estimate the spectral tail mass.

    The tail is the summed magnitude of all DFT bins beyond ``order``; for a
    smooth periodic function it bounds the sup-norm error of the truncation.
    """
    s = np.asarray(samples, dtype=complex)
    m = s.size
    f = np.abs(np.fft.fft(s) / m)
    series = FourierSeries.from_samples(s, order)
    tail = float(np.sum(f[order + 1:m - order]))
    return series, tail
