"""Truncated Fourier representation of 2pi-periodic complex fields.

Conventions. The spatial domain is the torus R/2piZ and all integrals are
normalized means, int f := (1/2pi) * int_0^{2pi} f(x) dx.  The forward
transform of a grid function therefore divides by the grid size,

    coeff(k) = (1/M) * sum_j samples(j) * exp(-i k x_j),   x_j = 2pi j / M,

and the inverse does not rescale.  With this normalization the squared l2
norm of the coefficients equals the mean-square of the field (Parseval) and
the mass functional is exactly sum_k |coeff(k)|^2.

Coefficients are stored contiguously in increasing frequency order
k = -K .. K, so index i holds frequency i - K.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a band-limited periodic field.

    Attributes:
        K: truncation radius; frequencies k = -K .. K are kept.
        coeffs: complex array of length 2K+1, entry i is the amplitude
            of frequency i - K.
    """

    K: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("truncation radius must be nonnegative")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (2 * self.K + 1,):
            raise ValueError(f"expected {2 * self.K + 1} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k: int) -> complex:
        """Amplitude of frequency k (0 outside the stored band)."""
        if abs(k) > self.K:
            return 0j
        return complex(self.coeffs[k + self.K])

    @classmethod
    def zeros(cls, K: int) -> "SpectralField":
        return cls(K, np.zeros(2 * K + 1, dtype=np.complex128))

    @classmethod
    def delta(cls, k: int, K: int, amplitude: complex = 1.0) -> "SpectralField":
        """Single Fourier mode: amplitude at frequency k, zero elsewhere."""
        if abs(k) > K:
            raise ValueError("mode outside truncation radius")
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[k + K] = amplitude
        return cls(K, c)

    @classmethod
    def from_modes(cls, modes, K: int) -> "SpectralField":
        """Build from an iterable of (k, amplitude) pairs."""
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        for k, a in modes:
            if abs(k) > K:
                raise ValueError(f"mode {k} outside radius {K}")
            c[k + K] += a
        return cls(K, c)

    @classmethod
    def random(cls, K: int, rng, scale: float = 1.0) -> "SpectralField":
        c = scale * (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))
        return cls(K, c)

    def truncate(self, K_new: int) -> "SpectralField":
        """Restrict (or zero-pad) to radius K_new."""
        if K_new == self.K:
            return self
        c = np.zeros(2 * K_new + 1, dtype=np.complex128)
        lo = min(self.K, K_new)
        c[K_new - lo : K_new + lo + 1] = self.coeffs[self.K - lo : self.K + lo + 1]
        return SpectralField(K_new, c)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if self.K != other.K:
            raise ValueError("radius mismatch")
        return SpectralField(self.K, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if self.K != other.K:
            raise ValueError("radius mismatch")
        return SpectralField(self.K, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.K, self.coeffs * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PhysicalField:
    """Complex samples on the uniform grid x_j = 2pi j / M, j = 0 .. M-1."""

    M: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("grid size must be positive")
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.shape != (self.M,):
            raise ValueError(f"expected {self.M} samples, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def grid(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M


class UndersampledError(ValueError):
    """Grid too small to resolve the requested frequency band."""


def to_spectral(p: PhysicalField, K: int) -> SpectralField:
    """Forward transform: coeff(k) = (1/M) sum_j samples(j) exp(-ik x_j).

    Requires M >= 2K+1 so the retained frequencies occupy distinct FFT bins;
    the result is then the exact inverse of ``to_physical`` on band-limited
    fields.
    """
    if p.M < 2 * K + 1:
        raise UndersampledError(f"grid size {p.M} < {2 * K + 1} for radius {K}")
    full = np.fft.fft(p.samples) / p.M
    ks = np.arange(-K, K + 1)
    return SpectralField(K, full[np.mod(ks, p.M)])


def to_physical(f: SpectralField, M: int) -> PhysicalField:
    """Inverse transform: samples(j) = sum_k coeff(k) exp(ik x_j)."""
    if M < 2 * f.K + 1:
        raise UndersampledError(f"grid size {M} < {2 * f.K + 1} for radius {f.K}")
    full = np.zeros(M, dtype=np.complex128)
    ks = np.arange(-f.K, f.K + 1)
    full[np.mod(ks, M)] = f.coeffs
    return PhysicalField(M, np.fft.ifft(full) * M)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Weighted l2 norm (sum_k (1+k^2)^s |coeff(k)|^2)^(1/2).

    s = 0 gives the plain l2 norm, which by Parseval equals the L2 norm of
    the physical field.
    """
    w = (1.0 + f.freqs.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def reflect(f: SpectralField) -> SpectralField:
    """Frequency reversal, coeff(k) -> coeff(-k)."""
    return SpectralField(f.K, f.coeffs[::-1])


def convolve(f: SpectralField, g: SpectralField) -> SpectralField:
    """Plain convolution (f*g)(k) = sum_m f(k-m) g(m), output radius 2K."""
    if f.K != g.K:
        raise ValueError("radius mismatch")
    return SpectralField(2 * f.K, np.convolve(f.coeffs, g.coeffs))


def twisted_convolve(f: SpectralField, g: SpectralField) -> SpectralField:
    """Twisted convolution (sum over k = k1 - k2 of f(k1) g(k2)).

    Pointwise, (f tw* g)(k) = sum_m f(k+m) g(m), which equals
    convolve(f, reflect(g)).
    """
    if f.K != g.K:
        raise ValueError("radius mismatch")
    return convolve(f, reflect(g))
