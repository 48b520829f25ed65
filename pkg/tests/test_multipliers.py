import itertools
from fractions import Fraction

import numpy as np
import pytest

from fournls.conserved import preset
from fournls.multipliers import (BaseSymbol, Chi, Const, EvalContext, Expr,
                                 GuardedRecip, Phase, Slot, build_L, build_M,
                                 eval_chi, eval_chi_array, eval_multiplier,
                                 eval_multiplier_array, extend, guarded_recip,
                                 one_minus, product, scale, symmetrize,
                                 symmetrize1, total)

CTX = EvalContext(preset("integrable"), 0, 4)


def test_chi_examples():
    assert eval_chi("H1_1", (1, 1, 100)) == 1
    assert eval_chi("H1_1", (1, 1, 16)) == 0
    assert eval_chi("R2", (5, 5, 5)) == 1
    assert eval_chi("R2", (5, 5, 6)) == 0
    assert eval_chi("NR1", (3, 3, 7)) == 0
    assert eval_chi("NR1", (1, 0, 1)) == 1
    assert eval_chi("gt_L", (1, 0, 5), L=4) == 1
    assert eval_chi("le_L", (1, 0, 5), L=4) == 0


def test_chi_arity5_examples():
    assert eval_chi("H1_1", (1, 0, 1, 0, 300)) == 1
    assert eval_chi("H1_1", (1, 0, 1, 0, 256)) == 0
    assert eval_chi("R1", (2, 3, 4, 3, 9)) == 1
    assert eval_chi("NR1", (1, 0, 2, 0, 5)) == 1
    # R3 power test: |k5|^3 <= 16^8 max^4 done in integers
    assert eval_chi("R3", (3, 1, 2, 1, 100)) == 1
    assert eval_chi("R3", (3, 1, 2, 1, 10**7)) == 0


def test_chi_arity_mismatch():
    with pytest.raises(ValueError):
        eval_chi("R3", (1, 2, 3))
    with pytest.raises(ValueError):
        eval_chi("H2_1", (1, 2, 3, 4, 5))


@pytest.mark.parametrize("name3", ["H1_1", "H1_2", "H2_1", "H2_2", "H2_3", "H3",
                                   "NR1", "R1", "R2"])
def test_chi_array_matches_exact_arity3(name3):
    rng = np.random.default_rng(1)
    ks = rng.integers(-50, 51, size=(3, 400))
    arr = eval_chi_array(name3, [k.astype(float) for k in ks])
    for i in range(400):
        assert arr[i] == eval_chi(name3, ks[:, i])


@pytest.mark.parametrize("name5", ["H1_1", "NR1", "R1", "R3", "A1", "A2", "A3",
                                   "NR1_1", "NR3_1", "NR2_2", "NR5_2"])
def test_chi_array_matches_exact_arity5(name5):
    rng = np.random.default_rng(2)
    spans = rng.choice([2, 20, 2000], size=(5, 400))
    ks = np.array([[int(rng.integers(-s, s + 1)) for s in row] for row in spans.T]).T
    arr = eval_chi_array(name5, [k.astype(float) for k in ks])
    for i in range(400):
        assert arr[i] == eval_chi(name5, ks[:, i])


def test_sym1_slot_average():
    m = symmetrize1(Slot(3, 0))
    for t in [(1, 5, 9), (-2, 0, 4)]:
        assert eval_multiplier(m, t, CTX) == Fraction(t[0] + t[2], 2)


def test_sym1_indicator_half():
    m = symmetrize1(Chi(3, "H1_1"))
    assert eval_multiplier(m, (100, 1, 1), CTX) == Fraction(1, 2)


def test_sym_idempotent():
    rng = np.random.default_rng(3)
    base = product(BaseSymbol(3, "q1"), Chi(3, "NR1"))
    m1 = symmetrize(base)
    m2 = symmetrize(m1)
    for _ in range(50):
        t = tuple(int(x) for x in rng.integers(-10, 11, size=3))
        assert eval_multiplier(m1, t, CTX) == eval_multiplier(m2, t, CTX)


def test_sym_idempotent_arity5():
    rng = np.random.default_rng(4)
    base = extend(BaseSymbol(3, "q1"), "ext2_1", 5)
    m1 = symmetrize(base)
    m2 = symmetrize(m1)
    for _ in range(20):
        t = tuple(int(x) for x in rng.integers(-6, 7, size=5))
        assert eval_multiplier(m1, t, CTX) == eval_multiplier(m2, t, CTX)


def test_extension_examples():
    c = Const(3, 7)
    assert eval_multiplier(extend(c, "ext1_1", 5), (1, 2, 3, 4, 5), CTX) == 7
    q1 = BaseSymbol(3, "q1")
    v = eval_multiplier(extend(q1, "ext2_1", 5), (0, 0, 1, 2, 3), CTX)
    assert v == eval_multiplier(q1, (1, 2, 3), CTX)
    last = extend(Slot(3, 2), "ext1_1", 5)
    assert eval_multiplier(last, (9, 9, 3, -4, 5), CTX) == 3 + 4 + 5


def test_extension_slot_maps():
    q1 = BaseSymbol(3, "q1")

    def q1v(t):
        return eval_multiplier(q1, t, CTX)

    t5 = (2, -1, 3, 4, -5)
    k1, k2, k3, k4, k5 = t5
    assert eval_multiplier(extend(q1, "ext1_1", 5), t5, CTX) == q1v((k1, k2, k3 - k4 + k5))
    assert eval_multiplier(extend(q1, "ext1_2", 5), t5, CTX) == q1v((k1, k2 - k5 + k4, k3))
    assert eval_multiplier(extend(q1, "ext2_2", 5), t5, CTX) == q1v((k2, k5, k4))
    t7 = (1, 2, 3, -4, 5, 6, -7)
    assert eval_multiplier(extend(q1, "ext1_1", 7), t7, CTX) == \
        q1v((1, 2, 3 - (-4) + 5 - 6 + (-7)))
    assert eval_multiplier(extend(q1, "ext1_2", 7), t7, CTX) == \
        q1v((1, 2 - (-7) + 6 - 5 + (-4), 3))


def test_extension_invalid_signature():
    with pytest.raises(ValueError):
        extend(BaseSymbol(3, "q1"), "ext1_1", 6)
    with pytest.raises(ValueError):
        extend(extend(BaseSymbol(3, "q1"), "ext1_1", 5), "ext2_1", 7)
    with pytest.raises(ValueError):
        extend(BaseSymbol(3, "q1"), "ext9_9", 5)


def test_extension_multiplicative():
    rng = np.random.default_rng(5)
    a = product(BaseSymbol(3, "q1"), Chi(3, "NR1"))
    b = guarded_recip(Phase(3, True))
    for kind, target in [("ext1_1", 5), ("ext1_2", 5), ("ext2_1", 5), ("ext2_2", 5),
                         ("ext1_1", 7)]:
        together = extend(product(a, b), kind, target)
        apart = product(extend(a, kind, target), extend(b, kind, target))
        for _ in range(40):
            t = tuple(int(x) for x in rng.integers(-9, 10, size=target))
            assert eval_multiplier(together, t, CTX) == eval_multiplier(apart, t, CTX)


def test_eval_multiplier_examples():
    Q1 = BaseSymbol(3, "Q1")
    assert eval_multiplier(Q1, (1, 0, 1), CTX) == 7
    assert eval_multiplier(Q1, (4, 4, 4), CTX) == 0
    g = GuardedRecip(3, Phase(3, True))
    assert eval_multiplier(g, (4, 4, 9), CTX) == 0
    assert eval_multiplier(g, (1, 0, 1), CTX) == Fraction(1, 14)


def test_guard_absorbs_zero_denominator_in_products():
    m = product(BaseSymbol(3, "Q1"), guarded_recip(Phase(3, True)))
    assert eval_multiplier(m, (3, 3, 3), CTX) == 0


def test_array_matches_exact_on_catalog():
    rng = np.random.default_rng(6)
    entries = [build_L(1, j) for j in range(1, 7)] + [build_M(2, j) for j in (1, 2, 8, 16, 19)]
    spans = [3, 30, 300]
    for m in entries:
        ts = []
        for _ in range(60):
            s = spans[int(rng.integers(0, 3))]
            ts.append([int(x) for x in rng.integers(-s, s + 1, size=m.arity)])
        ts = np.array(ts).T
        arr = eval_multiplier_array(m, list(ts.astype(float)), CTX)
        for i in range(ts.shape[1]):
            exact = eval_multiplier(m, ts[:, i], CTX)
            assert arr[i] == pytest.approx(float(exact), rel=1e-10, abs=1e-12)


def test_catalog_m1_is_constant():
    m = build_M(2, 1)
    for t in [(0, 0, 0, 0, 0), (3, -1, 2, 5, -7)]:
        assert eval_multiplier(m, t, CTX) == Fraction(3, 2)  # (3/8) * 4


def test_catalog_l_vanishes_off_region():
    # a tuple where the second cubic region indicator is 0 kills the weight
    m = build_L(1, 2)
    assert eval_multiplier(m, (5, 1, 5), CTX) == 0


def test_m8_growth_and_symmetrized_boundedness():
    # on the resonant hyperplane with a huge fifth slot, the raw flow entry
    # grows linearly in k5 while its symmetrization stays bounded
    m8 = build_M(2, 8)
    m8s = symmetrize(m8)
    mvals, svals, k5s = [], [], [2 * 10**3, 10**4, 10**5, 10**6]
    for k5 in k5s:
        t = (1, 0, 3, 4, k5)
        mvals.append(abs(float(eval_multiplier(m8, t, CTX))))
        svals.append(abs(float(eval_multiplier(m8s, t, CTX))))
    slope = np.polyfit(np.log(k5s), np.log(mvals), 1)[0]
    assert abs(slope - 1.0) < 0.1
    assert max(svals) < 50 * max(1.0, svals[0])


def test_partition_of_unity_box():
    # complement definition makes the sum one; binarity is the real claim
    for t in itertools.product(range(-20, 21), repeat=3):
        v = eval_chi("H3", t)
        assert v in (0, 1)


def test_cubic_split_identity_box():
    # 1 = chi_NR1 + [2 chi_R1]_sym1 - chi_R2 pointwise
    for t in itertools.product(range(-12, 13), repeat=3):
        v = (eval_chi("NR1", t) + (eval_chi("R1", t) + eval_chi("R1", t[::-1]))
             - eval_chi("R2", t))
        assert v == 1
