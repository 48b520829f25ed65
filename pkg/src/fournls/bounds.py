"""Sampled verification of the pointwise multiplier bounds.

The catalog weights obey pointwise bounds of the form

    |L_j chi_{>L}|  <=  C * majorant(k1, ..., k_{2N+1})

on their supporting regions, with majorants built from the output
frequency, the largest slot, and slot differences.  The implicit constants
are never written down, so this module measures them: for each catalog
entry it draws a large sample of frequency tuples inside the supporting
region (hierarchical scales, so the regions are actually hit), evaluates
the weight on the float path, and reports the largest observed ratio.

The same machinery sweeps the exact lower-bound certificates of the phase
case analysis: each drawn tuple that matches a case yields a certificate
whose inequality was verified in exact integer arithmetic at construction
time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fournls.conserved import EquationParams
from fournls.multipliers import (EvalContext, build_L, build_M,
                                 eval_chi_array, eval_multiplier_array,
                                 symmetrize, sym_orbit)
from fournls.phase import FrequencyTuple, PhaseContext, certify_lower_bound


def _jp(x):
    """Japanese bracket <x> = sqrt(1 + x^2), elementwise."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def _alt(ks):
    return sum(k if i % 2 == 0 else -k for i, k in enumerate(ks))


def _kmax(ks):
    m = np.abs(ks[0])
    for k in ks[1:]:
        m = np.maximum(m, np.abs(k))
    return m


# ---------------------------------------------------------------------------
# region-targeted tuple samplers
# ---------------------------------------------------------------------------


def _log_ints(rng, n, lo, hi, signed=True):
    lo = max(int(lo), 1)
    v = np.exp(rng.uniform(np.log(lo), np.log(max(hi, lo + 1)), size=n))
    v = np.maximum(np.round(v), lo).astype(np.int64)
    if signed:
        v *= rng.choice([-1, 1], size=n)
    return v


def _small_ints(rng, n, bound):
    b = np.maximum(np.asarray(bound, dtype=np.int64), 0)
    return rng.integers(-b, b + 1)


def _sample3(rng, n, region, lo, hi):
    """Triples inside one cubic region (dominant slot per region shape)."""
    if region == "H1_1":
        k3 = _log_ints(rng, n, lo, hi)
        b = np.abs(k3) // 17
        return (_small_ints(rng, n, b), _small_ints(rng, n, b), k3)
    if region == "H1_2":
        k2 = _log_ints(rng, n, lo, hi)
        b = np.abs(k2) // 17
        return (_small_ints(rng, n, b), k2, _small_ints(rng, n, b))
    if region == "H2_1":
        k2 = _log_ints(rng, n, lo, hi)
        ratio = np.exp(rng.uniform(np.log(1 / 15.9), np.log(15.9), size=n))
        k3 = np.round(k2 * ratio).astype(np.int64) * rng.choice([-1, 1], size=n)
        lim = np.minimum(np.minimum(np.abs(k2 - k3), np.abs(k2)), np.abs(k3)) // 33
        return (_small_ints(rng, n, lim), k2, k3)
    if region == "H2_2":
        k2 = _log_ints(rng, n, lo, hi)
        k1 = _small_ints(rng, n, np.abs(k2) // 33 + 1)
        delta = _small_ints(rng, n, 32 * np.abs(k1))
        return (k1, k2, k2 + delta)
    if region == "H2_3":
        k1 = _log_ints(rng, n, lo, hi)
        ratio = np.exp(rng.uniform(np.log(1 / 15.9), np.log(15.9), size=n))
        k3 = np.round(k1 * ratio).astype(np.int64) * rng.choice([-1, 1], size=n)
        lim = np.minimum(np.abs(k1), np.abs(k3)) // 33
        return (k1, _small_ints(rng, n, lim), k3)
    if region == "H3":
        m = _log_ints(rng, n, lo, hi, signed=False)
        out = []
        for _ in range(3):
            r = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=n))
            out.append(np.maximum(np.round(m * r), 1).astype(np.int64)
                       * rng.choice([-1, 1], size=n))
        return tuple(out)
    raise ValueError(region)


def _sample5(rng, n, entry, lo, hi):
    """Quintuples inside the supporting region of one quintic entry."""
    if entry in ("L1", "M8", "M9"):
        m = _log_ints(rng, n, 1, max(2, hi // 300), signed=False)
        k1 = _small_ints(rng, n, m)
        k2 = _small_ints(rng, n, m)
        k3 = _small_ints(rng, n, m)
        if entry == "M8":
            k4 = k1 - k2 + k3
        else:
            k4 = k1 - k2 + k3 + rng.integers(1, 4, size=n) * rng.choice([-1, 1], size=n)
        mx = _kmax((k1, k2, k3, k4))
        k5 = np.round(np.exp(rng.uniform(np.log(np.maximum(256 * mx + 1, lo)),
                                         np.log(np.maximum(256 * mx + 2, hi)))))
        k5 = k5.astype(np.int64) * rng.choice([-1, 1], size=n)
        return (k1, k2, k3, k4, k5)
    if entry == "L2":
        k3 = _log_ints(rng, n, lo, hi)
        k4 = -k3 + _small_ints(rng, n, np.abs(k3) // 8 + 1)
        k5 = np.round(np.abs(k3 - k4) * np.exp(rng.uniform(np.log(17.0), np.log(40.0),
                                                           size=n)))
        k5 = k5.astype(np.int64) * rng.choice([-1, 1], size=n)
        k1 = _small_ints(rng, n, 2)
        k2 = k1 + rng.integers(1, 3, size=n) * rng.choice([-1, 1], size=n)
        return (k1, k2, k3, k4, k5)
    if entry in ("L3", "M16a"):
        k4 = _log_ints(rng, n, lo, hi)
        b = np.abs(k4) // 20
        k3 = _small_ints(rng, n, b)
        k5 = _small_ints(rng, n, b)
        k1 = _small_ints(rng, n, np.abs(k4) // 40 + 1)
        k2 = _small_ints(rng, n, np.abs(k4) // 40 + 1)
        return (k1, k2, k3, k4, k5)
    if entry in ("L4", "M13"):
        k4 = _log_ints(rng, n, lo, hi)
        ratio = np.exp(rng.uniform(np.log(1 / 15.9), np.log(15.9), size=n))
        k5 = np.round(k4 * ratio).astype(np.int64) * rng.choice([-1, 1], size=n)
        lim = np.minimum(np.minimum(np.abs(k4 - k5), np.abs(k4)), np.abs(k5)) // 33
        k3 = _small_ints(rng, n, lim)
        a345 = k3 - k4 + k5
        k1 = _small_ints(rng, n, np.abs(a345) // 600 + 1)
        k2 = _small_ints(rng, n, np.abs(a345) // 600 + 1)
        return (k1, k2, k3, k4, k5)
    if entry in ("L5", "M14"):
        k4 = _log_ints(rng, n, lo, hi)
        k3 = _small_ints(rng, n, np.abs(k4) // 40 + 1)
        k3 = np.where(k3 == 0, 1, k3)
        delta = _small_ints(rng, n, np.minimum(32 * np.abs(k3), np.abs(k4) // 2))
        k5 = k4 + delta
        a345 = k3 - k4 + k5
        k1 = _small_ints(rng, n, np.abs(a345) // 20 + 1)
        k2 = _small_ints(rng, n, np.abs(a345) // 20 + 1)
        return (k1, k2, k3, k4, k5)
    if entry in ("L6", "M15"):
        k3 = _log_ints(rng, n, lo, hi)
        ratio = np.exp(rng.uniform(np.log(1 / 15.9), np.log(15.9), size=n))
        k5 = np.round(k3 * ratio).astype(np.int64) * rng.choice([-1, 1], size=n)
        k4 = _small_ints(rng, n, np.minimum(np.abs(k3), np.abs(k5)) // 33)
        a345 = k3 - k4 + k5
        k1 = _small_ints(rng, n, np.abs(a345) // 20 + 1)
        k2 = _small_ints(rng, n, np.abs(a345) // 20 + 1)
        return (k1, k2, k3, k4, k5)
    if entry == "M10":
        m = _log_ints(rng, n, lo, hi, signed=False)
        k3 = np.round(m * np.exp(rng.uniform(np.log(0.5), 0, size=n))).astype(np.int64)
        k4 = _small_ints(rng, n, np.abs(k3) // 18)
        k5 = np.round(np.abs(k3) * np.exp(rng.uniform(np.log(17.0), np.log(250.0),
                                                      size=n))).astype(np.int64)
        k5 *= rng.choice([-1, 1], size=n)
        a345 = k3 - k4 + k5
        k1 = _small_ints(rng, n, np.abs(a345) // 17)
        k2 = k1 + _small_ints(rng, n, np.maximum(np.abs(k3 - k4) // 200, 1))
        return (k1, k2, k3, k4, k5)
    if entry in ("M16", "M17"):
        k1 = _log_ints(rng, n, lo, hi)
        b = np.abs(k1) // 20
        k3 = _small_ints(rng, n, b)
        k4 = _small_ints(rng, n, b)
        k5 = _small_ints(rng, n, b)
        k2 = _small_ints(rng, n, np.abs(k1) // 40 + 1)
        return (k1, k2, k3, k4, k5)
    raise ValueError(entry)


# ---------------------------------------------------------------------------
# bound survey
# ---------------------------------------------------------------------------


@dataclass
class BoundReport:
    name: str
    samples: int
    support_hits: int
    measured_constant: float
    unbounded: int


def _sym_majorant(fn, ks):
    """Average of a majorant over the symmetrization orbit."""
    acc = None
    for perm in sym_orbit(5, True):
        v = fn(tuple(ks[i] for i in perm))
        acc = v if acc is None else acc + v
    return acc / 12.0


def _weight_majorants(L):
    """(name, expr builder, sampler key, majorant) for the weight bounds."""
    def maj_alt(ks):
        return 1.0 / (_jp(_alt(ks)) * _jp(_kmax(ks)))

    entries = []
    for (N, j), skey in [((1, 2), "H1_2"), ((1, 3), "H2_1"), ((1, 5), "H2_3"),
                         ((2, 1), "L1"), ((2, 2), "L2"), ((2, 3), "L3"),
                         ((2, 4), "L4"), ((2, 5), "L5"), ((2, 6), "L6")]:
        entries.append((f"weight({N},{j})", build_L(N, j), skey, maj_alt))
    entries.append(("weight(1,1)", build_L(1, 1), "H1_1",
                    lambda ks: 1.0 / (_jp(ks[0] - ks[1]) * _jp(_kmax(ks)))))
    entries.append(("weight(1,4)", build_L(1, 4), "H2_2",
                    lambda ks: 1.0 / (_jp(ks[1] - ks[2]) * _jp(_kmax(ks)))))
    entries.append(("weight(1,6)", build_L(1, 6), "H3",
                    lambda ks: 1.0 / (_jp(ks[0] - ks[1]) * _jp(ks[2] - ks[1]))))
    return entries


def _flow_majorants(L, s=1.0):
    """(name, expr, symmetrized?, sampler key, majorant) for flow bounds."""
    def mins(ks):
        return np.minimum(1.0 / _jp(ks[0] - ks[1]), 1.0 / _jp(ks[2] - ks[3]))

    def max4(ks):
        return _kmax(ks[:4])

    def sec4(ks):
        arr = np.stack(np.broadcast_arrays(*[np.abs(k) for k in ks[:4]]))
        return np.sort(arr, axis=0)[-2]

    def weight_out(ks):
        return _jp(_alt(ks)) ** s

    entries = []
    entries.append(("flow(2,8)", symmetrize(build_M(2, 8)), "M8", lambda ks:
                    _sym_majorant(lambda u: mins(u) * _jp(max4(u)) ** 0.5
                                  * _jp(sec4(u)) ** 0.5 * _jp(u[4]) ** s, ks)
                    / weight_out(ks)))
    entries.append(("flow(2,9)", build_M(2, 9), "M9", lambda ks:
                    mins(ks) * _jp(max4(ks)) ** (2 / 3) * _jp(sec4(ks)) ** (2 / 3)
                    * _jp(ks[4]) ** s / weight_out(ks)))
    entries.append(("flow(2,10)", build_M(2, 10), "M10", lambda ks:
                    mins(ks) * np.maximum(max4(ks), 1.0) * _jp(ks[4]) ** s
                    / weight_out(ks)))
    entries.append(("flow(2,11)", build_M(2, 11), "M8", lambda ks:
                    np.full(np.broadcast(*ks).shape, float(L))))
    entries.append(("flow(2,12)", build_M(2, 12), "M8", lambda ks:
                    np.full(np.broadcast(*ks).shape, float(L))))
    entries.append(("flow(2,13)", build_M(2, 13), "M13", lambda ks:
                    (1.0 / _jp(ks[0] - ks[1]))
                    * _jp(np.maximum(np.abs(ks[0]), np.abs(ks[1]))) ** s
                    / _jp(ks[2] - ks[3] + ks[4]) * _jp(ks[3]) * _jp(ks[4])
                    / weight_out(ks)))
    entries.append(("flow(2,15)", build_M(2, 15), "M15", lambda ks:
                    (1.0 / _jp(ks[0] - ks[1]))
                    * _jp(np.maximum(np.abs(ks[0]), np.abs(ks[1]))) ** s
                    / _jp(ks[2] - ks[3] + ks[4]) * _jp(ks[2]) * _jp(ks[4])
                    / weight_out(ks)))
    entries.append(("flow(2,14)", build_M(2, 14), "M14", lambda ks:
                    _jp(ks[2]) ** s / _jp(ks[3] - ks[4]) ** 2 * _jp(ks[3])
                    * _jp(ks[4]) / weight_out(ks)))
    entries.append(("flow(2,16)", build_M(2, 16), "M16", lambda ks:
                    _jp(ks[0]) ** (s - 1) / _jp(ks[1] - ks[2] + ks[3] - ks[4])
                    * np.maximum(_jp(ks[2]) * _jp(ks[4]), _jp(ks[3]) * _jp(ks[4]))
                    / weight_out(ks)))
    entries.append(("flow(2,17)", build_M(2, 17), "M17", lambda ks:
                    _jp(ks[0]) ** s / _jp(ks[1] - ks[2] + ks[3] - ks[4])
                    * np.maximum(_jp(ks[3]), _jp(ks[4])) / weight_out(ks)))
    return entries


def survey_weight_bounds(n: int, p: EquationParams, gamma: float, L: float,
                         seed: int = 0, kmax: int = 10**4):
    """Measure the constants in the weight bounds over n support samples."""
    ctx = EvalContext(p, gamma, L)
    rng = np.random.default_rng(seed)
    lo = int(max(L, 16 * max(1.0, abs(gamma)))) + 1
    out = []
    for name, expr, skey, maj in _weight_majorants(L):
        if expr.arity == 3:
            ks = _sample3(rng, n, skey, lo, kmax)
        else:
            ks = _sample5(rng, n, skey, lo, kmax)
        ks = tuple(np.broadcast_arrays(*[np.asarray(k, dtype=np.int64) for k in ks]))
        vals = np.abs(eval_multiplier_array(expr, [k.astype(float) for k in ks], ctx))
        gate = eval_chi_array("gt_L", [k.astype(float) for k in ks], L)
        vals = vals * gate
        hits = int(np.sum(vals != 0.0))
        ratio = vals / maj(tuple(k.astype(float) for k in ks))
        finite = np.isfinite(ratio)
        out.append(BoundReport(name=name, samples=n, support_hits=hits,
                               measured_constant=float(np.max(ratio[finite],
                                                              initial=0.0)),
                               unbounded=int(np.sum(~finite))))
    return out


def survey_flow_bounds(n: int, p: EquationParams, gamma: float, L: float,
                       seed: int = 0, kmax: int = 10**4):
    """Measure the constants in the flow-term bounds over n support samples."""
    ctx = EvalContext(p, gamma, L)
    rng = np.random.default_rng(seed)
    lo = int(max(L, 16 * max(1.0, abs(gamma)))) + 1
    out = []
    for name, expr, skey, maj in _flow_majorants(L):
        ks = _sample5(rng, n, skey, lo, kmax)
        ks = tuple(np.broadcast_arrays(*[np.asarray(k, dtype=np.int64) for k in ks]))
        fks = [k.astype(float) for k in ks]
        vals = np.abs(eval_multiplier_array(expr, fks, ctx))
        hits = int(np.sum(vals != 0.0))
        ratio = vals / maj(tuple(fks))
        finite = np.isfinite(ratio)
        out.append(BoundReport(name=name, samples=n, support_hits=hits,
                               measured_constant=float(np.max(ratio[finite],
                                                              initial=0.0)),
                               unbounded=int(np.sum(~finite))))
    return out


# ---------------------------------------------------------------------------
# certificate sweep
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    case: str
    certified: int
    min_margin: float


def sweep_certificates(n_per_shape: int, gamma, seed: int = 0, kmax: int = 10**4):
    """Draw hierarchical tuples, certify each matching case exactly.

    Every certificate constructed by ``certify_lower_bound`` asserts its
    inequality in exact arithmetic; this sweep records, per case, how many
    certificates were produced and the smallest ratio |phase| / bound.
    """
    ctx = PhaseContext(gamma)
    rng = np.random.default_rng(seed)
    floor = 16 * max(1, abs(float(gamma)))
    stats = {}
    shapes3 = ["H1_1", "H1_2", "H2_1", "H2_2", "H2_3", "H3"]
    shapes5 = ["L1", "M8", "M9", "L2", "L3", "L4", "L5", "L6", "M10"]
    for shape in shapes3 + shapes5:
        n = n_per_shape
        if shape in shapes3:
            ks = _sample3(rng, n, shape, int(floor) + 1, kmax)
        else:
            ks = _sample5(rng, n, shape, int(floor) + 1, kmax)
        cols = np.stack(np.broadcast_arrays(*[np.asarray(k) for k in ks]), axis=1)
        for row in cols:
            t = FrequencyTuple(tuple(int(x) for x in row))
            if t.kmax <= floor:
                continue
            try:
                cert = certify_lower_bound(t, ctx)
            except ValueError:
                continue
            if cert is None:
                continue
            margin = float(abs(cert.phase_value) / cert.bound)
            rec = stats.setdefault(cert.case, [0, np.inf])
            rec[0] += 1
            rec[1] = min(rec[1], margin)
    return [CertificateReport(case=c, certified=v[0], min_margin=v[1])
            for c, v in sorted(stats.items())]
