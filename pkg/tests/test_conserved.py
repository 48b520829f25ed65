import numpy as np
import pytest

from fournls.conserved import (EquationParams, check_conditions, e1, e2, e3, e4,
                               preset)
from fournls.fields import SpectralField


def test_conditions_integrable():
    flags = check_conditions(EquationParams(4, 3, 2, 1, 4))
    assert flags.a1 and flags.a2 and flags.a3
    assert flags.hamiltonian and flags.integrable


def test_conditions_zero_params():
    flags = check_conditions(EquationParams())
    assert flags.a1 and flags.a2 and flags.a3 and flags.integrable


def test_conditions_partial():
    flags = check_conditions(EquationParams(0, 1, 2, 1, 2))
    assert flags.a1 and flags.a2 and not flags.a3
    assert flags.hamiltonian and not flags.integrable


def test_preset_integrable():
    p = preset("integrable", lambda4=1)
    assert (p.lambda1, p.lambda2, p.lambda3, p.lambda4, p.lambda5) == (4, 3, 2, 1, 4)
    assert check_conditions(p).integrable


def test_preset_linear_and_errors():
    assert preset("linear") == EquationParams()
    with pytest.raises(ValueError):
        preset("nonsense")
    with pytest.raises(ValueError):
        preset("generic-theorem", lambda2=1, lambda3=5, lambda4=2, lambda5=1)


def test_preset_generic_theorem():
    p = preset("generic-theorem", lambda1=1, lambda2=1, lambda3=5, lambda4=2, lambda5=0)
    assert not check_conditions(p).a1 and p.lambda5 == 0.0


def test_preset_hamiltonian_flags():
    p = preset("hamiltonian", lambda2=2, lambda4=1, lambda1=3)
    f = check_conditions(p)
    assert f.hamiltonian and not f.a3


def test_preset_a1_only():
    f = check_conditions(preset("a1-only"))
    assert f.a1 and not f.a2


def test_e1_values():
    assert e1(SpectralField.delta(1, 3)) == pytest.approx(1.0)
    assert e1(SpectralField.from_modes([(1, 1), (2, 1)], 3)) == pytest.approx(2.0)
    assert e1(SpectralField.delta(0, 3, 3.0)) == pytest.approx(9.0)


def test_e2_values():
    assert e2(SpectralField.delta(1, 3)) == pytest.approx(1.0)
    assert e2(SpectralField.from_modes([(1, 1), (-1, 1)], 3)) == pytest.approx(0.0)
    assert e2(SpectralField.delta(-3, 4, 2.0)) == pytest.approx(-12.0)


def test_e3_values():
    # the common 1/2 spans the whole integrand (quartic weight l4/4)
    d1 = SpectralField.delta(1, 3)
    assert e3(d1, EquationParams()) == pytest.approx(0.5)
    assert e3(d1, EquationParams(lambda4=2)) == pytest.approx(1.0)
    c = SpectralField.delta(0, 3, 1.3 - 0.4j)
    assert e3(c, EquationParams(lambda4=2)) == pytest.approx(abs(1.3 - 0.4j) ** 4 / 2)


def test_e4_values():
    d1 = SpectralField.delta(1, 3)
    assert e4(d1, EquationParams()) == pytest.approx(0.5)
    assert e4(SpectralField.delta(0, 3), EquationParams(lambda1=8)) == pytest.approx(0.5)
    # u = exp(ix): integrand 1 + 1*1 + 1*(-1) = 1, halved to 1/2
    assert e4(d1, EquationParams(lambda4=1)) == pytest.approx(0.5)


@pytest.mark.parametrize("which", ["e1", "e3", "e4"])
def test_phase_and_translation_invariance(which):
    rng = np.random.default_rng(11)
    p = preset("integrable")
    f = SpectralField.random(8, rng)
    fn = {"e1": lambda g: e1(g), "e3": lambda g: e3(g, p), "e4": lambda g: e4(g, p)}[which]
    base = fn(f)
    rotated = SpectralField(f.K, f.coeffs * np.exp(1j * 0.7))
    shifted = SpectralField(f.K, f.coeffs * np.exp(1j * f.freqs * 0.3))
    assert fn(rotated) == pytest.approx(base, rel=1e-12)
    assert fn(shifted) == pytest.approx(base, rel=1e-12)


def test_e2_reflection_sign():
    rng = np.random.default_rng(12)
    f = SpectralField.random(8, rng)
    g = SpectralField(f.K, f.coeffs[::-1])
    assert e2(g) == pytest.approx(-e2(f), rel=1e-12)
