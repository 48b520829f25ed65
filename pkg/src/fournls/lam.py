"""Multilinear frequency-sum operators.

``lambda_eval`` computes, for a (2N+1)-multiplier m and input spectra
v_1 .. v_{2N+1},

    out(k) = sum over k = k1 - k2 + ... + k_{2N+1} of
             exp(-i t Phi) m(k1, ..., k_{2N+1}) v_1(k1) conj(v_2)(k2) ...

with even slots conjugated, each slot ranging over its own truncation
band, and Phi the oscillation phase at the context gamma.  This is the
brute-force path: it enumerates the full tuple grid, so the cost is
O(prod_l (2 K_l + 1)) per snapshot.  Multiplier grids (time-independent)
and phase grids are cached across snapshots; an all-zero multiplier grid
is remembered as a sentinel so dead catalog entries cost nothing.

``lambda_eval_composed`` is the fast path for extension products
[m1]_ext1,j * [m2]_ext2,j: the trailing slots are contracted first into an
auxiliary spectrum on the wider band they naturally occupy, and the result
feeds one slot of the outer operator (the last odd slot for the ext*,1
pairing; the last even slot for ext*,2, where the standard even-slot
conjugation supplies exactly the conjugate the algebra requires).  The
phase telescopes exactly across the split, so the composed value equals
the brute-force value up to rounding, for arbitrary distinct inputs.
Expressions not in compositional form fall back to ``lambda_eval``.
"""

from __future__ import annotations

from itertools import product as iproduct

import numpy as np
from scipy.fft import next_fast_len

from fournls.fields import PhysicalField, SpectralField, to_physical, to_spectral
from fournls.multipliers import (ArrayEvaluator, Const, ConstLambda, EvalContext,
                                 Expr, Ext, Product, Scale)

_TWO_PI = 2.0 * np.pi
_FULL_GRID_LIMIT = 8_000_000
_CHUNK_LIMIT = 1_000_000


def _unit_phase(x: np.ndarray) -> np.ndarray:
    """exp(-i x) with range reduction in extended precision for large x."""
    x = np.asarray(x, dtype=float)
    if x.size and np.max(np.abs(x)) > 1e8:
        r = np.mod(x.astype(np.longdouble), np.longdouble(_TWO_PI)).astype(np.float64)
        return np.exp(-1j * r)
    return np.exp(-1j * x)


class _GridCache:
    """Insertion-ordered cache with a global element budget."""

    def __init__(self, max_elems=40_000_000):
        self.data = {}
        self.elems = 0
        self.max_elems = max_elems

    def get(self, key):
        return self.data.get(key)

    def put(self, key, value, nelems):
        if nelems > self.max_elems:
            return
        while self.elems + nelems > self.max_elems and self.data:
            oldest = next(iter(self.data))
            old_n, _ = self.data.pop(oldest)
            self.elems -= old_n
        self.data[key] = (nelems, value)
        self.elems += nelems

    def fetch(self, key):
        hit = self.data.get(key)
        return None if hit is None else hit[1]


_MVALS = _GridCache()
_PHASES = _GridCache(max_elems=120_000_000)
_MESHES = _GridCache(max_elems=120_000_000)


def _signs(arity: int):
    return [1 if i % 2 == 0 else -1 for i in range(arity)]


def _mesh(radii):
    hit = _MESHES.fetch(radii)
    if hit is not None:
        return hit
    axes = [np.arange(-K, K + 1, dtype=float) for K in radii]
    grids = np.meshgrid(*axes, indexing="ij")
    total = 1
    for K in radii:
        total *= 2 * K + 1
    if total <= _FULL_GRID_LIMIT:
        _MESHES.put(radii, grids, total * len(radii))
    return grids


def _phase_grid(radii, gamma, ctx: EvalContext):
    key = (radii, float(gamma))
    hit = _PHASES.fetch(key)
    if hit is not None:
        return hit
    grids = _mesh(radii)
    ev = ArrayEvaluator(ctx)
    phi = np.asarray(ev._phase(tuple(grids), True), dtype=float)
    alt = sum(s * g for s, g in zip(_signs(len(radii)), grids)).astype(np.int64)
    _PHASES.put(key, (phi, alt), phi.size * 2)
    return phi, alt


def _mult_grid(m: Expr, radii, ctx: EvalContext):
    """Multiplier values on the full tuple grid; 0 sentinel when all-zero."""
    key = (id(m), radii, ctx.key())
    hit = _MVALS.fetch(key)
    if hit is not None:
        return hit
    grids = _mesh(radii)
    mvals = np.asarray(ArrayEvaluator(ctx).eval(m, tuple(grids)), dtype=float)
    if not np.any(mvals):
        mvals = 0
        _MVALS.put(key, 0, 1)
    else:
        _MVALS.put(key, mvals, mvals.size)
    return mvals


def _accumulate(summand, alt, K_out, out):
    mask = np.abs(alt) <= K_out
    idx = (alt + K_out)[mask].ravel()
    vals = summand[mask].ravel()
    n = 2 * K_out + 1
    out += np.bincount(idx, weights=vals.real, minlength=n)
    out += 1j * np.bincount(idx, weights=vals.imag, minlength=n)


def lambda_eval(m: Expr, fields, t: float, ctx: EvalContext,
                K_out: int | None = None) -> SpectralField:
    """Brute-force multilinear sum; see the module docstring."""
    fields = list(fields)
    if len(fields) != m.arity:
        raise ValueError(f"arity {m.arity} needs {m.arity} inputs, got {len(fields)}")
    radii = tuple(f.K for f in fields)
    if K_out is None:
        K_out = radii[0]
    total = 1
    for K in radii:
        total *= 2 * K + 1
    out = np.zeros(2 * K_out + 1, dtype=np.complex128)
    if total <= _FULL_GRID_LIMIT:
        mvals = _mult_grid(m, radii, ctx)
        if isinstance(mvals, int):
            return SpectralField(K_out, out)
        phi, alt = _phase_grid(radii, ctx.gamma, ctx)
        summand = mvals * _unit_phase(t * phi)
        for slot, f in enumerate(fields):
            c = np.conj(f.coeffs) if slot % 2 == 1 else f.coeffs
            shape = [1] * len(fields)
            shape[slot] = c.size
            summand = summand * c.reshape(shape)
        _accumulate(summand, alt, K_out, out)
        return SpectralField(K_out, out)
    # chunked path for large grids: freeze a leading prefix of slots
    arity = len(radii)
    p = 0
    rest = total
    while rest > _CHUNK_LIMIT and p < arity - 1:
        rest //= 2 * radii[p] + 1
        p += 1
    rest_mesh = _mesh(radii[p:])
    ev = ArrayEvaluator(ctx)
    rest_signs = _signs(arity)[p:]
    rest_alt = sum(s * g for s, g in zip(rest_signs, rest_mesh)).astype(np.int64)
    prefix_axes = [np.arange(-K, K + 1) for K in radii[:p]]
    for combo in iproduct(*prefix_axes):
        scalar = complex(1.0)
        alt0 = 0
        for slot, kv in enumerate(combo):
            cval = fields[slot][int(kv)]
            scalar *= np.conj(cval) if slot % 2 == 1 else cval
            alt0 += int(kv) if slot % 2 == 0 else -int(kv)
        if scalar == 0:
            continue
        args = tuple(np.asarray(float(kv)) for kv in combo) + tuple(rest_mesh)
        mvals = np.asarray(ev.eval(m, args), dtype=float)
        if not np.any(mvals):
            continue
        phi = np.asarray(ev._phase(args, True), dtype=float)
        summand = (scalar * mvals) * _unit_phase(t * phi)
        for off, f in enumerate(fields[p:]):
            c = np.conj(f.coeffs) if (p + off) % 2 == 1 else f.coeffs
            shape = [1] * (arity - p)
            shape[off] = c.size
            summand = summand * c.reshape(shape)
        _accumulate(summand, rest_alt + alt0, K_out, out)
    return SpectralField(K_out, out)


def lambda_const(coef: complex, fields, t: float, ctx: EvalContext,
                 K_out: int | None = None) -> SpectralField:
    """Constant-multiplier operator via dealiased grid products.

    With m = coef the phase factors split per slot, so the sum equals
    coef * exp(-i t phi(k)) times the Fourier coefficients of the pointwise
    product of the phase-advanced inputs (conjugated in even slots).  The
    grid is padded past the full product band, so this equals the
    brute-force sum exactly (to rounding).
    """
    fields = list(fields)
    gamma = float(ctx.gamma)
    if K_out is None:
        K_out = fields[0].K
    band = sum(f.K for f in fields)
    M = next_fast_len(band + K_out + 1)
    prod_samples = None
    for slot, f in enumerate(fields):
        ks = f.freqs.astype(float)
        adv = SpectralField(f.K, f.coeffs * np.exp(1j * t * (ks**4 + gamma * ks**2)))
        u = to_physical(adv, M).samples
        if slot % 2 == 1:
            u = np.conj(u)
        prod_samples = u if prod_samples is None else prod_samples * u
    spec = to_spectral(PhysicalField(M, prod_samples), K_out)
    ks = np.arange(-K_out, K_out + 1, dtype=float)
    out = coef * np.exp(-1j * t * (ks**4 + gamma * ks**2)) * spec.coeffs
    return SpectralField(K_out, out)


# ---------------------------------------------------------------------------
# composed evaluation
# ---------------------------------------------------------------------------


def _flatten_product(m: Expr):
    """Split m into (scalar coefficient, has_lambda1_factor, other factors)."""
    coef = 1.0
    has_lambda = False
    factors = []

    def walk(node):
        nonlocal coef, has_lambda
        if isinstance(node, Scale):
            coef *= float(node.value)
            walk(node.child)
        elif isinstance(node, Product):
            for c in node.children:
                walk(c)
        elif isinstance(node, Const):
            coef *= float(node.value)
        elif isinstance(node, ConstLambda):
            has_lambda = True
        else:
            factors.append(node)

    walk(m)
    return coef, has_lambda, factors


def _match_composition(m: Expr):
    """Recognize coef * [m1]_ext1,j (* [m2]_ext2,j); None when not of that form."""
    coef, has_lambda, factors = _flatten_product(m)
    ext1 = ext2 = None
    for f in factors:
        if isinstance(f, Ext) and f.kind.startswith("ext1") and ext1 is None:
            ext1 = f
        elif isinstance(f, Ext) and f.kind.startswith("ext2") and ext2 is None:
            ext2 = f
        else:
            return None
    if ext1 is None:
        return None

    def peel(node):
        c = 1.0
        while isinstance(node, Scale):
            c *= float(node.value)
            node = node.child
        return c, node

    c1, m1 = peel(ext1.child)
    coef *= c1
    ext1 = Ext(ext1.arity, ext1.kind, m1)
    if ext2 is not None:
        c2, m2 = peel(ext2.child)
        coef *= c2
        ext2 = Ext(ext2.arity, ext2.kind, m2)
    step = ext1.arity - ext1.child.arity
    if step == 2:
        if ext2 is None or ext1.kind[-1] != ext2.kind[-1]:
            return None
    elif ext2 is not None:
        return None
    return coef, has_lambda, ext1, ext2


def lambda_eval_composed(m: Expr, fields, t: float, ctx: EvalContext,
                         K_out: int | None = None) -> SpectralField:
    """Nested evaluation of an extension-product multiplier.

    Falls back to ``lambda_eval`` when the expression is not an extension
    product.
    """
    match = _match_composition(m)
    if match is None:
        return lambda_eval(m, fields, t, ctx, K_out=K_out)
    coef, has_lambda, ext1, ext2 = match
    fields = list(fields)
    if len(fields) != m.arity:
        raise ValueError("arity mismatch")
    if K_out is None:
        K_out = fields[0].K
    if has_lambda:
        coef *= 0.375 * ctx.params.lambda1
    n = m.arity
    mm = ext1.child.arity
    step = n - mm
    i2n = mm - 2  # index of the last even outer slot

    if step == 2:
        if ext1.kind == "ext1_1":
            inner = [fields[n - 3], fields[n - 2], fields[n - 1]]
            aux = lambda_eval(ext2.child, inner, t, ctx,
                              K_out=sum(f.K for f in inner))
            outer = fields[: n - 3] + [aux]
            return coef * lambda_eval(ext1.child, outer, t, ctx, K_out=K_out)
        inner = [fields[i2n], fields[n - 1], fields[n - 2]]
        aux = lambda_eval(ext2.child, inner, t, ctx, K_out=sum(f.K for f in inner))
        outer = fields[:i2n] + [aux, fields[mm - 1]]
        return coef * lambda_eval(ext1.child, outer, t, ctx, K_out=K_out)

    if ext1.kind == "ext1_1":
        inner = fields[n - 5 :]
        aux = lambda_const(1.0, inner, t, ctx, K_out=sum(f.K for f in inner))
        outer = fields[: n - 5] + [aux]
        return coef * lambda_eval(ext1.child, outer, t, ctx, K_out=K_out)
    inner = [fields[i2n], fields[i2n + 3], fields[i2n + 2],
             fields[i2n + 5], fields[i2n + 4]]
    aux = lambda_const(1.0, inner, t, ctx, K_out=sum(f.K for f in inner))
    outer = fields[:i2n] + [aux, fields[mm - 1]]
    return coef * lambda_eval(ext1.child, outer, t, ctx, K_out=K_out)


def clear_caches():
    for c in (_MVALS, _PHASES, _MESHES):
        c.data.clear()
        c.elems = 0
