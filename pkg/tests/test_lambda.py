import numpy as np
import pytest

from fournls.conserved import preset
from fournls.fields import SpectralField
from fournls.lam import lambda_const, lambda_eval, lambda_eval_composed
from fournls.multipliers import (BaseSymbol, Chi, Const, EvalContext, Phase,
                                 build_L, build_M, extend, guarded_recip,
                                 product, scale, symmetrize)

CTX = EvalContext(preset("integrable"), 0, 4)
ONE3 = Const(3, 1)


def rand_fields(K, n, seed, scale_=1.0):
    rng = np.random.default_rng(seed)
    return [SpectralField.random(K, rng, scale_) for _ in range(n)]


def test_lambda_delta_zero_mode():
    d0 = SpectralField.delta(0, 3)
    out = lambda_eval(ONE3, [d0, d0, d0], 0.7, CTX)
    assert abs(out[0] - 1.0) < 1e-14
    assert np.sum(np.abs(out.coeffs)) == pytest.approx(1.0)


def test_lambda_delta_one_mode_any_time():
    d1 = SpectralField.delta(1, 3)
    for t in (0.0, 0.3, 2.0):
        out = lambda_eval(ONE3, [d1, d1, d1], t, CTX)
        assert abs(out[1] - 1.0) < 1e-14


def test_lambda_two_mode_counts():
    v = SpectralField.from_modes([(0, 1.0), (1, 1.0)], 2)
    out = lambda_eval(ONE3, [v, v, v], 0.0, CTX)
    assert abs(out[2] - 1.0) < 1e-14
    assert abs(out[1] - 3.0) < 1e-14


def test_lambda_symmetrization_invariance():
    m = product(BaseSymbol(3, "q1"), guarded_recip(Phase(3, True)))
    ms = symmetrize(m)
    v = rand_fields(6, 1, 1)[0]
    a = lambda_eval(m, [v, v, v], 0.4, CTX)
    b = lambda_eval(ms, [v, v, v], 0.4, CTX)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12 * np.max(np.abs(a.coeffs))


def test_lambda_const_matches_brute():
    fields = rand_fields(4, 5, 2)
    brute = lambda_eval(Const(5, 2.5), fields, 0.31, CTX)
    fast = lambda_const(2.5, fields, 0.31, CTX)
    assert np.max(np.abs(brute.coeffs - fast.coeffs)) < 1e-11 * np.max(np.abs(brute.coeffs))


def _relerr(a, b):
    denom = max(np.max(np.abs(a.coeffs)), np.max(np.abs(b.coeffs)), 1e-300)
    return np.max(np.abs(a.coeffs - b.coeffs)) / denom


def test_composed_matches_brute_arity5_variant1():
    m1 = product(BaseSymbol(3, "q1"), guarded_recip(Phase(3, False)))
    m = product(extend(m1, "ext1_1", 5), extend(BaseSymbol(3, "q1"), "ext2_1", 5))
    fields = rand_fields(4, 5, 3)
    assert _relerr(lambda_eval_composed(m, fields, 0.17, CTX),
                   lambda_eval(m, fields, 0.17, CTX)) < 1e-10


def test_composed_matches_brute_arity5_variant2():
    m1 = product(BaseSymbol(3, "q1"), guarded_recip(Phase(3, True)))
    m = scale(-1, product(extend(m1, "ext1_2", 5),
                          extend(BaseSymbol(3, "Q1"), "ext2_2", 5)))
    fields = rand_fields(4, 5, 4)
    assert _relerr(lambda_eval_composed(m, fields, 0.07, CTX),
                   lambda_eval(m, fields, 0.07, CTX)) < 1e-10


def test_composed_matches_brute_arity7():
    m1 = extend(Phase(3, False), "ext1_1", 5)  # a plain arity-5 polynomial
    m = product(extend(m1, "ext1_1", 7), extend(BaseSymbol(3, "q1"), "ext2_1", 7))
    fields = rand_fields(3, 7, 5)
    assert _relerr(lambda_eval_composed(m, fields, 0.05, CTX),
                   lambda_eval(m, fields, 0.05, CTX)) < 1e-10


def test_composed_matches_brute_arity7_step4():
    m = extend(product(BaseSymbol(3, "q1"), guarded_recip(Phase(3, True))),
               "ext1_1", 7)
    fields = rand_fields(3, 7, 6)
    assert _relerr(lambda_eval_composed(m, fields, 0.09, CTX),
                   lambda_eval(m, fields, 0.09, CTX)) < 1e-10


def test_composed_matches_brute_arity7_step4_conj():
    m = extend(product(BaseSymbol(3, "q1"), guarded_recip(Phase(3, True))),
               "ext1_2", 7)
    fields = rand_fields(3, 7, 7)
    assert _relerr(lambda_eval_composed(m, fields, 0.09, CTX),
                   lambda_eval(m, fields, 0.09, CTX)) < 1e-10


def test_composed_matches_brute_arity9():
    m = extend(extend(Phase(3, False), "ext1_1", 5), "ext1_1", 9)
    fields = rand_fields(2, 9, 8)
    assert _relerr(lambda_eval_composed(m, fields, 0.03, CTX),
                   lambda_eval(m, fields, 0.03, CTX)) < 1e-10


def test_composed_fallback_non_compositional():
    m = product(Chi(5, "NR1"), extend(BaseSymbol(3, "q1"), "ext2_1", 5),
                extend(BaseSymbol(3, "q1"), "ext1_1", 5))
    fields = rand_fields(3, 5, 9)
    a = lambda_eval_composed(m, fields, 0.2, CTX)
    b = lambda_eval(m, fields, 0.2, CTX)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_composed_catalog_entry_identical_inputs():
    # symmetrized and unsymmetrized flow entries agree inside the operator
    # when all inputs coincide
    v = rand_fields(5, 1, 10)[0]
    m = build_M(2, 2)
    ms = symmetrize(m)
    fast = lambda_eval_composed(m, [v] * 5, 0.12, CTX)
    brute = lambda_eval(ms, [v] * 5, 0.12, CTX)
    assert _relerr(fast, brute) < 1e-10


def test_dead_entry_is_zero_cheaply():
    v = rand_fields(6, 1, 11)[0]
    out = lambda_eval(build_M(2, 8), [v] * 5, 0.5, CTX)
    assert np.all(out.coeffs == 0)
