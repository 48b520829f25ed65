import numpy as np
import pytest

from fournls.fields import (PhysicalField, SpectralField, UndersampledError,
                            convolve, reflect, sobolev_norm, to_physical,
                            to_spectral, twisted_convolve)


def test_single_mode_forward():
    M = 16
    x = 2 * np.pi * np.arange(M) / M
    p = PhysicalField(M, np.exp(1j * x))
    f = to_spectral(p, 2)
    expected = np.zeros(5, dtype=complex)
    expected[1 + 2] = 1.0
    assert np.allclose(f.coeffs, expected, atol=1e-14)


def test_constant_forward():
    p = PhysicalField(8, np.ones(8, dtype=complex))
    f = to_spectral(p, 3)
    assert abs(f[0] - 1.0) < 1e-14
    assert np.allclose(np.delete(f.coeffs, 3), 0, atol=1e-14)


def test_cosine_forward():
    # 2 cos(2x) has unit amplitude at k = +-2; check against the defining sum
    M = 32
    x = 2 * np.pi * np.arange(M) / M
    p = PhysicalField(M, 2 * np.cos(2 * x) + 0j)
    f = to_spectral(p, 4)
    direct = {k: np.sum(p.samples * np.exp(-1j * k * x)) / M for k in (-2, 2)}
    assert abs(f[2] - 1.0) < 1e-13 and abs(f[-2] - 1.0) < 1e-13
    assert abs(f[2] - direct[2]) < 1e-14


def test_inverse_basics():
    f = SpectralField.delta(0, 4)
    p = to_physical(f, 16)
    assert np.allclose(p.samples, 1.0)
    g = SpectralField.delta(1, 4)
    q = to_physical(g, 16)
    assert np.allclose(q.samples, np.exp(1j * q.grid), atol=1e-14)


def test_round_trip_random():
    rng = np.random.default_rng(0)
    f = SpectralField.random(8, rng)
    g = to_spectral(to_physical(f, 32), 8)
    err = np.max(np.abs(g.coeffs - f.coeffs)) / np.max(np.abs(f.coeffs))
    assert err < 1e-13


def test_undersampling_rejected():
    f = SpectralField.delta(1, 4)
    with pytest.raises(UndersampledError):
        to_physical(f, 7)
    p = PhysicalField(7, np.ones(7, dtype=complex))
    with pytest.raises(UndersampledError):
        to_spectral(p, 4)


def test_sobolev_norm_values():
    assert sobolev_norm(SpectralField.delta(0, 3), 2.0) == pytest.approx(1.0)
    assert sobolev_norm(SpectralField.delta(1, 3), 1.0) == pytest.approx(np.sqrt(2))
    f = SpectralField.from_modes([(1, 1.0), (-1, 1.0)], 3)
    assert sobolev_norm(f, 0.0) == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("K", [4, 16, 32])
def test_parseval(K):
    rng = np.random.default_rng(K)
    f = SpectralField.random(K, rng)
    p = to_physical(f, 4 * K + 5)
    grid_l2 = np.sqrt(np.mean(np.abs(p.samples) ** 2))
    assert abs(grid_l2 - sobolev_norm(f, 0.0)) < 1e-12 * grid_l2


def test_convolve_deltas():
    d1 = SpectralField.delta(1, 3)
    d2 = SpectralField.delta(2, 3)
    c = convolve(d1, d2)
    assert c[3] == 1 and abs(np.sum(np.abs(c.coeffs))) == 1

    d0 = SpectralField.delta(0, 3)
    g = SpectralField.from_modes([(0, 0.3), (2, 1.5), (-1, -2.0)], 3)
    assert np.allclose(convolve(d0, g).truncate(3).coeffs, g.coeffs)


def test_convolve_binomial():
    f = SpectralField.from_modes([(1, 1.0), (-1, 1.0)], 2)
    c = convolve(f, f)
    assert c[2] == 1 and c[0] == 2 and c[-2] == 1


def test_twisted_convolve():
    d1 = SpectralField.delta(1, 3)
    d2 = SpectralField.delta(2, 3)
    tw = twisted_convolve(d1, d2)
    assert tw[-1] == 1 and np.sum(np.abs(tw.coeffs)) == 1

    rng = np.random.default_rng(5)
    f = SpectralField(16, np.round(3 * rng.standard_normal(33)) + 0j)
    g = SpectralField(16, np.round(3 * rng.standard_normal(33)) + 0j)
    assert np.array_equal(twisted_convolve(f, g).coeffs,
                          convolve(f, reflect(g)).coeffs)
    d0 = SpectralField.delta(0, 16)
    assert np.array_equal(twisted_convolve(d0, g).coeffs,
                          convolve(d0, reflect(g)).coeffs)
    assert np.array_equal(twisted_convolve(f, d0).truncate(16).coeffs, f.coeffs)
    assert np.array_equal(twisted_convolve(d0, g).truncate(16).coeffs,
                          reflect(g).coeffs)


def test_convolution_theorem():
    rng = np.random.default_rng(7)
    f = SpectralField.random(6, rng)
    g = SpectralField.random(6, rng)
    M = 32
    prod = PhysicalField(M, to_physical(f, M).samples * to_physical(g, M).samples)
    lhs = to_spectral(prod, 12)
    rhs = convolve(f, g)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12
