from fractions import Fraction
from itertools import product as iproduct

import numpy as np
import pytest

from fournls.conserved import EquationParams, e1, preset
from fournls.fields import SpectralField, sobolev_norm
from fournls.lam import lambda_eval
from fournls.multipliers import (EvalContext, ExactEvaluator, build_L, build_M,
                                 eval_multiplier, symmetrize)
from fournls.normalform import (NormalFormConfig, assemble_F, assemble_G,
                                gamma_of, g_term_table, nf_residual,
                                nf_residual_study, verify_cancellation,
                                verify_cubic_split, verify_gamma_continuity,
                                verify_partition, verify_quintic_expansion,
                                verify_region_product_identity,
                                verify_resonant_leading_term, _support_mask)

P = preset("integrable")


def test_partition_identities():
    rep = verify_partition(24)
    assert rep.violations == 0 and rep.non_binary == 0
    rep = verify_cubic_split(24)
    assert rep.violations == 0


def test_quintic_expansion_small_box():
    cfg = NormalFormConfig(L=4.0, K=8, gamma=0.0)
    rep = verify_quintic_expansion(4, P, cfg)
    assert rep.violations == 0
    cfg = NormalFormConfig(L=1.0, K=8, gamma=Fraction(3, 2))
    rep = verify_quintic_expansion(4, P, cfg)
    assert rep.violations == 0


@pytest.mark.parametrize("display", [1, 2])
def test_region_product_identity_small_box(display):
    cfg = NormalFormConfig(L=4.0, K=8, gamma=Fraction(3, 2))
    rep = verify_region_product_identity(4, P, cfg, display)
    assert rep.violations == 0


def test_support_mask_is_sound():
    # every catalog term vanishes exactly off the mask
    R = 3
    mask = _support_mask(R)
    cfg = NormalFormConfig(L=1.0, K=8, gamma=0.0)
    ev = ExactEvaluator(cfg.ctx(P))
    exprs = [symmetrize(build_M(2, j)) for j in (8, 10, 16, 18)] \
        + [symmetrize(build_L(2, j)) for j in (1, 3)]
    rng = np.random.default_rng(0)
    off = np.argwhere(~mask)
    for _ in range(150):
        row = off[rng.integers(0, len(off))]
        t = tuple(int(x) - R for x in row)
        for m in exprs:
            assert ev.eval(m, t) == 0


def test_assemble_F_zero_cases():
    cfg = NormalFormConfig(L=4.0, K=8, gamma=0.0)
    z = assemble_F(SpectralField.delta(0, 8), 0.1, P, cfg)
    assert np.all(z.coeffs == 0)
    # data supported at |k| <= L/2 never reaches above the cutoff
    v = SpectralField.from_modes([(1, 0.7), (-2, 0.4j), (2, 0.2)], 8)
    out = assemble_F(v, 0.05, P, cfg)
    assert np.all(out.coeffs == 0)


def test_assemble_G_zero_field():
    cfg = NormalFormConfig(L=4.0, K=6, gamma=0.0)
    out = assemble_G(SpectralField.zeros(6), 0.2, P, cfg)
    assert np.all(out.coeffs == 0)


def test_assemble_G_lambda1_terms_vanish():
    p0 = EquationParams(0.0, 3.0, 2.0, 1.0, 4.0)
    cfg = NormalFormConfig(L=2.0, K=4, gamma=0.5)
    rng = np.random.default_rng(1)
    v = SpectralField.random(4, rng, 0.4)
    full = assemble_G(v, 0.1, p0, cfg)
    ablated = assemble_G(v, 0.1, p0, cfg,
                         ablate=frozenset({("M", 2, 1), ("M", 3, 1), ("M", 3, 2),
                                           ("M", 4, 1), ("M", 4, 2)}))
    assert np.max(np.abs(full.coeffs - ablated.coeffs)) < 1e-14


def _reference_assembly(v, t, p, cfg):
    """Straight per-term reference: brute-force tuple sums throughout.

    For identical inputs the operator value is invariant under multiplier
    symmetrization, so the composed and constant-product fast paths must
    reproduce the plain brute-force sum of each unsymmetrized entry.
    """
    ctx = cfg.ctx(p)
    acc = np.zeros(2 * v.K + 1, dtype=np.complex128)
    for key, arity, expr, mode in g_term_table():
        acc += lambda_eval(expr, [v] * arity, t, ctx, K_out=v.K).coeffs
    return SpectralField(v.K, 1j * acc)


def test_assemble_G_matches_bruteforce_reference():
    cfg = NormalFormConfig(L=2.0, K=2, gamma=0.7)
    rng = np.random.default_rng(2)
    v = SpectralField.random(2, rng, 0.5)
    fast = assemble_G(v, 0.21, P, cfg)
    ref = _reference_assembly(v, 0.21, P, cfg)
    scale = max(np.max(np.abs(ref.coeffs)), 1e-300)
    assert np.max(np.abs(fast.coeffs - ref.coeffs)) / scale < 1e-9


def test_assemble_F_matches_bruteforce_reference():
    from fournls.multipliers import sym_weights_cutoff
    cfg = NormalFormConfig(L=2.0, K=4, gamma=0.7)
    rng = np.random.default_rng(3)
    v = SpectralField.random(4, rng, 0.5)
    fast = assemble_F(v, 0.13, P, cfg)
    ctx = cfg.ctx(P)
    ref = lambda_eval(sym_weights_cutoff(1, tuple(range(1, 7))), [v] * 3, 0.13,
                      ctx, K_out=v.K).coeffs
    ref = ref + lambda_eval(sym_weights_cutoff(2, tuple(range(1, 7))), [v] * 5,
                            0.13, ctx, K_out=v.K).coeffs
    scale = max(np.max(np.abs(ref)), 1e-300)
    assert np.max(np.abs(fast.coeffs - ref)) / scale < 1e-9


def test_residual_zero_for_linear_flow():
    p0 = EquationParams()
    phi0 = SpectralField.from_modes([(1, 1.0), (2, 0.5)], 6)
    cfg = NormalFormConfig(L=4.0, K=6, gamma=0.0)
    from fournls.solver import SolverConfig, integrate, interaction_picture
    traj = integrate(phi0, p0, SolverConfig(form="NLS4_3", K=6, dt=1e-3, T=5e-3))
    ts, rs = nf_residual(interaction_picture(traj, 0.0), p0, cfg)
    assert max(rs) < 1e-11


def test_residual_errors_on_short_trajectory():
    from fournls.solver import Trajectory
    phi0 = SpectralField.delta(1, 4)
    traj = Trajectory(np.array([0.0, 1e-3]), [phi0, phi0], np.zeros(2), "NLS4_3")
    cfg = NormalFormConfig(L=4.0, K=4, gamma=0.0)
    with pytest.raises(ValueError):
        nf_residual(traj, P, cfg)


def test_residual_second_order_small():
    phi0 = SpectralField.from_modes([(1, 1.0), (2, 0.1)], 4)
    gam = gamma_of(P, phi0)
    cfg = NormalFormConfig(L=64.0, K=4, gamma=gam)
    rep = nf_residual_study(phi0, P, cfg, dt=2e-3, T=1.2e-2, levels=3)
    assert rep.order_estimate >= 1.8


def test_residual_ablation_guard():
    # removing a live term must be detected loudly at fixed dt
    phi0 = SpectralField.from_modes([(1, 1.0), (2, 0.1)], 4)
    gam = gamma_of(P, phi0)
    cfg = NormalFormConfig(L=64.0, K=4, gamma=gam)
    full = nf_residual_study(phi0, P, cfg, dt=1e-3, T=6e-3, levels=1)
    ablated = nf_residual_study(phi0, P, cfg, dt=1e-3, T=6e-3, levels=1,
                                ablate=frozenset({("M", 1, 1)}))
    assert ablated.norms[0] > 10 * full.norms[0]


def test_live_quintic_flow_terms_at_low_cutoff():
    # at a low cutoff the extension products carry real content
    cfg = NormalFormConfig(L=2.0, K=4, gamma=0.3)
    rng = np.random.default_rng(4)
    v = SpectralField.random(4, rng, 0.5)
    ctx = cfg.ctx(P)
    vals = lambda_eval(symmetrize(build_M(2, 2)), [v] * 5, 0.1, ctx)
    assert np.max(np.abs(vals.coeffs)) > 1e-8


def test_cancellation_report():
    rep = verify_cancellation(300, 10**6, P, seed=5)
    assert rep.samples == 300
    assert np.isfinite(rep.max_sym_ratio) and rep.max_sym_ratio < 1e3
    assert abs(rep.growth_exponent - 1.0) < 0.1


def test_resonant_leading_term():
    assert verify_resonant_leading_term(40, P, seed=6) == 0


def test_gamma_continuity():
    rng = np.random.default_rng(7)
    v = SpectralField.random(8, rng, 0.5)
    diffs = verify_gamma_continuity(v, 0.4, P, gamma=2.0,
                                    eps_values=[1e-1, 1e-2, 1e-3, 1e-4])
    assert all(a > b for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] < 1e-3 * sobolev_norm(v, 1.0) ** 3
