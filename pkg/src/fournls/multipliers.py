"""Combinator language for odd-arity frequency multipliers.

A multiplier is a function of an odd-length integer frequency tuple.  The
catalog needed by the normal-form reduction is built from a small set of
base symbols closed under product, sum, guarded reciprocal, symmetrization,
and slot-extension.  Expressions are immutable trees; evaluation is
referentially transparent, with an exact rational path (tolerance-free
identity checks) and a vectorized float path (large sums and sampling).

Base symbols
    q1   cubic interaction weight
             l2 k1 k3 - (l3/2)(k1+k3) k2 + l4 k2^2 + (l5/2)(k1^2+k3^2)
    q2   resonant-diagonal weight
             (2 l4 + l5 - l3) * [k1^2 chi_R1]_sym1
    Q1 = q1 * chi_NR1,   Q2 = q2 - q1 * chi_R2
    Phase(arity, with_gamma)   the oscillation phase of ``fournls.phase``
    ConstLambda                the quintic coefficient (3/8) l1

Characteristic functions restrict summation regions; see ``eval_chi`` for
the full list.  ``H3`` is stored as the literal complement expression (one
minus the five sibling regions), not as a synthesized indicator; the
partition test verifies it is {0,1}-valued.

Extension operators lift a multiplier to arity + 2 or + 4 by substituting
an alternating partial sum into one slot; they are multiplicative over
products by construction.

Guard rule: every reciprocal evaluates to 0 where its denominator
vanishes.  On the float path a denominator with |den| < 1e-9 counts as
zero; integer-valued denominators at the scales used here are exactly
representable in float64, so the two paths agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

from fournls.conserved import EquationParams

_FLOAT_ZERO_DEN = 1e-9

# ---------------------------------------------------------------------------
# expression nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    arity: int


@dataclass(frozen=True)
class Const(Expr):
    value: object = 1


@dataclass(frozen=True)
class ConstLambda(Expr):
    """The quintic coefficient (3/8) l1, read from the evaluation context."""


@dataclass(frozen=True)
class Slot(Expr):
    """Projection onto one tuple slot (0-based index)."""

    index: int = 0

    def __post_init__(self):
        if not 0 <= self.index < self.arity:
            raise ValueError("slot index out of range")


@dataclass(frozen=True)
class BaseSymbol(Expr):
    """One of q1, q2, Q1, Q2 at arity 3."""

    name: str = "q1"

    def __post_init__(self):
        if self.arity != 3:
            raise ValueError("base symbols have arity 3")
        if self.name not in ("q1", "q2", "Q1", "Q2"):
            raise ValueError(f"unknown base symbol {self.name}")


@dataclass(frozen=True)
class Phase(Expr):
    """Oscillation phase; with_gamma=False pins gamma to 0."""

    with_gamma: bool = True


@dataclass(frozen=True)
class Chi(Expr):
    name: str = "NR1"


@dataclass(frozen=True)
class GuardedRecip(Expr):
    child: Expr = None

    def __post_init__(self):
        if self.child.arity != self.arity:
            raise ValueError("arity mismatch")


@dataclass(frozen=True)
class Product(Expr):
    children: tuple = ()

    def __post_init__(self):
        for c in self.children:
            if c.arity != self.arity:
                raise ValueError("arity mismatch in product")


@dataclass(frozen=True)
class Sum(Expr):
    children: tuple = ()

    def __post_init__(self):
        for c in self.children:
            if c.arity != self.arity:
                raise ValueError("arity mismatch in sum")


@dataclass(frozen=True)
class Scale(Expr):
    value: object = 1
    child: Expr = None

    def __post_init__(self):
        if self.child.arity != self.arity:
            raise ValueError("arity mismatch")


@dataclass(frozen=True)
class Sym(Expr):
    """Average over permutations of odd slots and of even slots."""

    child: Expr = None


@dataclass(frozen=True)
class Sym1(Expr):
    """Average over permutations of odd slots only."""

    child: Expr = None


_EXT_KINDS = ("ext1_1", "ext1_2", "ext2_1", "ext2_2")


@dataclass(frozen=True)
class Ext(Expr):
    kind: str = "ext1_1"
    child: Expr = None

    def __post_init__(self):
        if self.kind not in _EXT_KINDS:
            raise ValueError(f"unknown extension {self.kind}")
        step = self.arity - self.child.arity
        if self.kind.startswith("ext1"):
            if step not in (2, 4):
                raise ValueError("ext1 raises arity by 2 or 4")
        else:
            if self.child.arity != 3 or self.arity < 5:
                raise ValueError("ext2 extends a 3-multiplier to arity >= 5")


def product(*children) -> Expr:
    kids = tuple(children)
    return Product(kids[0].arity, kids)


def total(*children) -> Expr:
    kids = tuple(children)
    return Sum(kids[0].arity, kids)


def scale(c, child: Expr) -> Expr:
    return Scale(child.arity, c, child)


def one_minus(child: Expr) -> Expr:
    return Sum(child.arity, (Const(child.arity, 1), Scale(child.arity, -1, child)))


def symmetrize(m: Expr) -> Expr:
    """[m]_sym: average over odd-slot and even-slot permutations."""
    return Sym(m.arity, m)


def symmetrize1(m: Expr) -> Expr:
    """[m]_sym1: average over odd-slot permutations."""
    return Sym1(m.arity, m)


def extend(m: Expr, kind: str, target_arity: int) -> Expr:
    return Ext(target_arity, kind, m)


def guarded_recip(m: Expr) -> Expr:
    return GuardedRecip(m.arity, m)


# ---------------------------------------------------------------------------
# evaluation context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    """Coefficients, gamma = l5 * mass(datum), and the frequency cutoff L."""

    params: EquationParams
    gamma: object = 0
    L: object = 1

    def key(self):
        p = self.params
        return (p.lambda1, p.lambda2, p.lambda3, p.lambda4, p.lambda5,
                float(self.gamma), float(self.L))


# ---------------------------------------------------------------------------
# characteristic functions, exact scalar path
# ---------------------------------------------------------------------------


def _chi_h11(a, b, c):
    return 1 if 16 * max(abs(a), abs(b)) < abs(c) else 0


def _chi_h12(a, b, c):
    return 1 if 16 * max(abs(a), abs(c)) < abs(b) else 0


def _comparable(a, b):
    return abs(a) <= 16 * abs(b) and abs(b) <= 16 * abs(a)


def _chi_h21(a, b, c):
    return 1 if 32 * abs(a) < min(abs(b - c), abs(b), abs(c)) and _comparable(b, c) else 0


def _chi_h22(a, b, c):
    return 1 if abs(b - c) <= 32 * abs(a) < min(abs(b), abs(c)) and _comparable(b, c) else 0


def _chi_h23(a, b, c):
    return 1 if 32 * abs(b) < min(abs(a), abs(c)) and _comparable(a, c) else 0


def _chi_h3(a, b, c):
    # literal complement of the five sibling regions; may leave {0,1} if the
    # siblings ever overlapped (the partition test rules that out)
    return 1 - ((_chi_h11(a, b, c) + _chi_h11(c, b, a)) + _chi_h12(a, b, c)
                + (_chi_h21(a, b, c) + _chi_h21(c, b, a))
                + (_chi_h22(a, b, c) + _chi_h22(c, b, a)) + _chi_h23(a, b, c))


def _chi_nr1(a, b, c):
    return 1 if (a - b) * (c - b) != 0 else 0


_INNER3 = {1: _chi_h11, 2: _chi_h12, 3: _chi_h21, 4: _chi_h22, 5: _chi_h23}


def eval_chi(name: str, t: Sequence[int], L=None):
    """Exact indicator value of a summation region at an integer tuple.

    Arity 3: H1_1, H1_2, H2_1, H2_2, H2_3, H3 (signed literal complement),
    NR1, R1 (k1 = k2), R2 (k1 = k2 = k3).
    Arity 5: H1_1, NR1, R1 (k1-k2+k3-k4 = 0), R3, A1, A2, A3, and NR{j}_1 /
    NR{j}_2 for j = 1..5.
    le_L / gt_L apply at any arity and need the cutoff argument.
    """
    t = tuple(int(k) for k in (t.entries if hasattr(t, "entries") else t))
    n = len(t)
    if name == "le_L":
        return 1 if max(abs(k) for k in t) <= L else 0
    if name == "gt_L":
        return 1 if max(abs(k) for k in t) > L else 0
    if n == 3:
        a, b, c = t
        if name == "H1_1":
            return _chi_h11(a, b, c)
        if name == "H1_2":
            return _chi_h12(a, b, c)
        if name == "H2_1":
            return _chi_h21(a, b, c)
        if name == "H2_2":
            return _chi_h22(a, b, c)
        if name == "H2_3":
            return _chi_h23(a, b, c)
        if name == "H3":
            return _chi_h3(a, b, c)
        if name == "NR1":
            return _chi_nr1(a, b, c)
        if name == "R1":
            return 1 if a == b else 0
        if name == "R2":
            return 1 if a == b == c else 0
    elif n == 5:
        k1, k2, k3, k4, k5 = t
        a345 = k3 - k4 + k5
        if name == "H1_1":
            return 1 if 256 * max(abs(k1), abs(k2), abs(k3), abs(k4)) < abs(k5) else 0
        if name == "NR1":
            return _chi_nr1(k1, k2, a345) * _chi_nr1(k3, k4, k5)
        if name == "R1":
            return 1 if k1 - k2 + k3 - k4 == 0 else 0
        if name == "R3":
            m = max(abs(k1), abs(k2), abs(k3), abs(k4))
            sec = sorted((abs(k1), abs(k2), abs(k3), abs(k4)))[-2]
            # |k5|^{3/4} <= 16^2 m tested exactly as |k5|^3 <= 16^8 m^4
            return 1 if (abs(k5) ** 3 <= 16**8 * m**4 and m <= 16 * sec
                         and abs(k3 - k4) <= 256 * abs(k1 - k2)) else 0
        if name == "A1":
            return 1 if 512 * max(abs(k1), abs(k2)) < abs(a345) else 0
        if name == "A2":
            return 1 if 256 * abs(k1 - k2) < abs(k3 - k4) else 0
        if name == "A3":
            return 1 if 256 * abs(k1 - k2) < abs(k4 - k5) else 0
        if name.startswith("NR") and name[2:3].isdigit():
            j = int(name[2])
            inner = _INNER3[j](k3, k4, k5)
            if inner == 0:
                return 0
            if name.endswith("_1"):
                return _chi_h11(k1, k2, a345) * inner
            if name.endswith("_2"):
                return _chi_h11(a345, k2, k1) * inner
    raise ValueError(f"unknown region {name!r} at arity {n}")


# ---------------------------------------------------------------------------
# characteristic functions, array path
# ---------------------------------------------------------------------------


def _aa(x):
    return np.abs(x)


def _chi_h11_arr(a, b, c):
    return (16 * np.maximum(_aa(a), _aa(b)) < _aa(c)).astype(float)


def _chi_h12_arr(a, b, c):
    return (16 * np.maximum(_aa(a), _aa(c)) < _aa(b)).astype(float)


def _comparable_arr(a, b):
    return (_aa(a) <= 16 * _aa(b)) & (_aa(b) <= 16 * _aa(a))


def _chi_h21_arr(a, b, c):
    m = np.minimum(_aa(b - c), np.minimum(_aa(b), _aa(c)))
    return ((32 * _aa(a) < m) & _comparable_arr(b, c)).astype(float)


def _chi_h22_arr(a, b, c):
    cond = (_aa(b - c) <= 32 * _aa(a)) & (32 * _aa(a) < np.minimum(_aa(b), _aa(c)))
    return (cond & _comparable_arr(b, c)).astype(float)


def _chi_h23_arr(a, b, c):
    return ((32 * _aa(b) < np.minimum(_aa(a), _aa(c))) & _comparable_arr(a, c)).astype(float)


def _chi_h3_arr(a, b, c):
    return 1.0 - ((_chi_h11_arr(a, b, c) + _chi_h11_arr(c, b, a)) + _chi_h12_arr(a, b, c)
                  + (_chi_h21_arr(a, b, c) + _chi_h21_arr(c, b, a))
                  + (_chi_h22_arr(a, b, c) + _chi_h22_arr(c, b, a)) + _chi_h23_arr(a, b, c))


def _chi_nr1_arr(a, b, c):
    return (((a - b) != 0) & ((c - b) != 0)).astype(float)


_INNER3_ARR = {1: _chi_h11_arr, 2: _chi_h12_arr, 3: _chi_h21_arr, 4: _chi_h22_arr,
               5: _chi_h23_arr}


def eval_chi_array(name: str, args, L=None):
    n = len(args)
    if name in ("le_L", "gt_L"):
        m = _aa(args[0])
        for x in args[1:]:
            m = np.maximum(m, _aa(x))
        return (m <= L).astype(float) if name == "le_L" else (m > L).astype(float)
    if n == 3:
        a, b, c = args
        table = {"H1_1": _chi_h11_arr, "H1_2": _chi_h12_arr, "H2_1": _chi_h21_arr,
                 "H2_2": _chi_h22_arr, "H2_3": _chi_h23_arr, "H3": _chi_h3_arr,
                 "NR1": _chi_nr1_arr}
        if name in table:
            return table[name](a, b, c)
        if name == "R1":
            return (a == b).astype(float)
        if name == "R2":
            return ((a == b) & (b == c)).astype(float)
    elif n == 5:
        k1, k2, k3, k4, k5 = args
        a345 = k3 - k4 + k5
        if name == "H1_1":
            m = np.maximum(np.maximum(_aa(k1), _aa(k2)), np.maximum(_aa(k3), _aa(k4)))
            return (256 * m < _aa(k5)).astype(float)
        if name == "NR1":
            return _chi_nr1_arr(k1, k2, a345) * _chi_nr1_arr(k3, k4, k5)
        if name == "R1":
            return ((k1 - k2 + k3 - k4) == 0).astype(float)
        if name == "R3":
            arr = np.stack(np.broadcast_arrays(_aa(k1), _aa(k2), _aa(k3), _aa(k4)))
            srt = np.sort(arr, axis=0)
            m, sec = srt[-1], srt[-2]
            c1 = _aa(k5).astype(np.float64) ** 3 <= float(16**8) * m.astype(np.float64) ** 4
            c2 = m <= 16 * sec
            c3 = _aa(k3 - k4) <= 256 * _aa(k1 - k2)
            return (c1 & c2 & c3).astype(float)
        if name == "A1":
            return (512 * np.maximum(_aa(k1), _aa(k2)) < _aa(a345)).astype(float)
        if name == "A2":
            return (256 * _aa(k1 - k2) < _aa(k3 - k4)).astype(float)
        if name == "A3":
            return (256 * _aa(k1 - k2) < _aa(k4 - k5)).astype(float)
        if name.startswith("NR") and name[2:3].isdigit():
            j = int(name[2])
            inner = _INNER3_ARR[j](k3, k4, k5)
            if name.endswith("_1"):
                return _chi_h11_arr(k1, k2, a345) * inner
            return _chi_h11_arr(a345, k2, k1) * inner
    raise ValueError(f"unknown region {name!r} at arity {n}")


# ---------------------------------------------------------------------------
# extension argument maps and symmetrization orbits
# ---------------------------------------------------------------------------


def _ext_args(kind: str, child_arity: int, ks):
    n = len(ks)
    m = child_arity
    if kind == "ext1_1":
        if n == m + 2:
            return ks[:-3] + (ks[-3] - ks[-2] + ks[-1],)
        return ks[:-5] + (ks[-5] - ks[-4] + ks[-3] - ks[-2] + ks[-1],)
    if kind == "ext1_2":
        if n == m + 2:
            return ks[: m - 2] + (ks[m - 2] - ks[m + 1] + ks[m], ks[m - 1])
        return ks[: m - 2] + (ks[m - 2] - ks[m + 1] + ks[m] - ks[m + 3] + ks[m + 2],
                              ks[m - 1])
    if kind == "ext2_1":
        return (ks[-3], ks[-2], ks[-1])
    if kind == "ext2_2":
        return (ks[-4], ks[-1], ks[-2])
    raise ValueError(kind)


def _orbit(arity: int, with_even: bool):
    odd_idx = tuple(range(0, arity, 2))
    even_idx = tuple(range(1, arity, 2))
    out = []
    evens = permutations(even_idx) if with_even else [even_idx]
    for ev in evens:
        for od in permutations(odd_idx):
            perm = [0] * arity
            for pos, src in zip(odd_idx, od):
                perm[pos] = src
            for pos, src in zip(even_idx, ev):
                perm[pos] = src
            out.append(tuple(perm))
    return tuple(out)


_ORBITS = {}


def sym_orbit(arity: int, with_even: bool):
    key = (arity, with_even)
    if key not in _ORBITS:
        _ORBITS[key] = _orbit(arity, with_even)
    return _ORBITS[key]


# ---------------------------------------------------------------------------
# exact evaluation
# ---------------------------------------------------------------------------


def _as_exact(x):
    f = Fraction(x)
    return int(f) if f.denominator == 1 else f


class ExactEvaluator:
    """Evaluates expression trees in exact rational arithmetic.

    Trees are compiled to closures once per evaluator; arithmetic stays in
    Python integers wherever the coefficients allow and falls back to
    fractions at divisions.  Arity-3 subtree results and canonicalized
    phase values are memoized, since the extension operators and
    symmetrization orbits hit the same small argument tuples repeatedly.
    """

    def __init__(self, ctx: EvalContext):
        p = ctx.params
        self.l1 = _as_exact(p.lambda1)
        self.l2 = _as_exact(p.lambda2)
        self.l3h = _as_exact(Fraction(p.lambda3) / 2)
        self.l4 = _as_exact(p.lambda4)
        self.l5h = _as_exact(Fraction(p.lambda5) / 2)
        self.q2c = _as_exact(2 * Fraction(p.lambda4) + Fraction(p.lambda5)
                             - Fraction(p.lambda3))
        self.gamma = _as_exact(ctx.gamma)
        self.L = ctx.L
        self._cache = {}
        self._compiled = {}

    def _q1(self, a, b, c):
        return (self.l2 * a * c - self.l3h * (a + c) * b + self.l4 * b * b
                + self.l5h * (a * a + c * c))

    def _q2(self, a, b, c):
        acc = 0
        if a == b:
            acc += a * a
        if c == b:
            acc += c * c
        return self.q2c * Fraction(acc, 2)

    def _phase(self, ks, with_gamma):
        g = self.gamma if with_gamma else 0
        if len(ks) == 3:
            a, b, c = ks
            return (a - b) * (c - b) * ((a - b) ** 2 + (c - b) ** 2
                                        + 3 * (a + c) ** 2 + 2 * g)
        head = ks[:-2]
        alt = sum(k if i % 2 == 0 else -k for i, k in enumerate(head))
        return (self._phase((alt, ks[-2], ks[-1]), with_gamma)
                + self._phase(head, with_gamma))

    def eval(self, node: Expr, ks: tuple):
        fn = self._compiled.get(id(node))
        if fn is None:
            fn = self._compile(node)
            self._compiled[id(node)] = fn
        return fn(ks)

    def _compile(self, node: Expr):
        fn = self._compile_raw(node)
        cache = self._cache
        nid = id(node)
        if node.arity == 3:
            def memo3(ks, _fn=fn, _c=cache, _id=nid):
                key = (_id, ks)
                v = _c.get(key)
                if v is None:
                    v = _fn(ks)
                    _c[key] = v
                return v
            return memo3
        if isinstance(node, Phase):
            # invariant under odd-slot and even-slot permutations
            def memophase(ks, _fn=fn, _c=cache, _id=nid):
                key = (_id, tuple(sorted(ks[0::2])), tuple(sorted(ks[1::2])))
                v = _c.get(key)
                if v is None:
                    v = _fn(ks)
                    _c[key] = v
                return v
            return memophase
        return fn

    def _compile_raw(self, node: Expr):
        if isinstance(node, Const):
            v = _as_exact(node.value)
            return lambda ks: v
        if isinstance(node, ConstLambda):
            v = _as_exact(Fraction(3, 8) * self.l1)
            return lambda ks: v
        if isinstance(node, Slot):
            i = node.index
            return lambda ks: ks[i]
        if isinstance(node, BaseSymbol):
            q1, q2 = self._q1, self._q2
            if node.name == "q1":
                return lambda ks: q1(*ks)
            if node.name == "q2":
                return lambda ks: q2(*ks)
            if node.name == "Q1":
                def fQ1(ks):
                    a, b, c = ks
                    return q1(a, b, c) if (a - b) * (c - b) != 0 else 0
                return fQ1

            def fQ2(ks):
                a, b, c = ks
                v = q2(a, b, c)
                if a == b == c:
                    v -= q1(a, b, c)
                return v
            return fQ2
        if isinstance(node, Phase):
            wg = node.with_gamma
            return lambda ks: self._phase(ks, wg)
        if isinstance(node, Chi):
            name, L = node.name, self.L
            return lambda ks: eval_chi(name, ks, L)
        if isinstance(node, GuardedRecip):
            child = self._compile(node.child)

            def frecip(ks):
                d = child(ks)
                if d == 0:
                    return 0
                return Fraction(1, d) if type(d) is int else 1 / d
            return frecip
        if isinstance(node, Product):
            kids = [self._compile(c) for c in node.children]

            def fprod(ks):
                acc = 1
                for k in kids:
                    v = k(ks)
                    if v == 0:
                        return 0
                    acc = acc * v
                return acc
            return fprod
        if isinstance(node, Sum):
            kids = [self._compile(c) for c in node.children]

            def fsum(ks):
                acc = 0
                for k in kids:
                    acc = acc + k(ks)
                return acc
            return fsum
        if isinstance(node, Scale):
            c = _as_exact(node.value)
            child = self._compile(node.child)
            return lambda ks: c * child(ks)
        if isinstance(node, (Sym, Sym1)):
            orbit = sym_orbit(node.arity, isinstance(node, Sym))
            child = self._compile(node.child)
            n = len(orbit)

            def fsym(ks):
                acc = 0
                for perm in orbit:
                    acc = acc + child(tuple(ks[i] for i in perm))
                return Fraction(acc, n) if type(acc) is int else acc / n
            return fsym
        if isinstance(node, Ext):
            kind, ca = node.kind, node.child.arity
            child = self._compile(node.child)
            return lambda ks: child(_ext_args(kind, ca, ks))
        raise TypeError(f"unknown node {type(node)}")


def eval_multiplier(m: Expr, t, ctx: EvalContext):
    """Exact rational value of a multiplier at one integer tuple."""
    ks = tuple(int(k) for k in (t.entries if hasattr(t, "entries") else t))
    if len(ks) != m.arity:
        raise ValueError(f"arity mismatch: expr {m.arity}, tuple {len(ks)}")
    return ExactEvaluator(ctx).eval(m, ks)


# ---------------------------------------------------------------------------
# array evaluation
# ---------------------------------------------------------------------------


class ArrayEvaluator:
    """Vectorized float64 evaluation over broadcast argument arrays."""

    def __init__(self, ctx: EvalContext):
        p = ctx.params
        self.l1 = float(p.lambda1)
        self.l2 = float(p.lambda2)
        self.l3h = float(p.lambda3) / 2.0
        self.l4 = float(p.lambda4)
        self.l5h = float(p.lambda5) / 2.0
        self.q2c = 2.0 * p.lambda4 + p.lambda5 - p.lambda3
        self.gamma = float(ctx.gamma)
        self.L = float(ctx.L)

    def _q1(self, a, b, c):
        return (self.l2 * a * c - self.l3h * (a + c) * b + self.l4 * b * b
                + self.l5h * (a * a + c * c))

    def _q2(self, a, b, c):
        return self.q2c * 0.5 * (a * a * (a == b) + c * c * (c == b))

    def _phase(self, ks, with_gamma):
        g = self.gamma if with_gamma else 0.0
        if len(ks) == 3:
            a, b, c = ks
            return (a - b) * (c - b) * ((a - b) ** 2 + (c - b) ** 2
                                        + 3.0 * (a + c) ** 2 + 2.0 * g)
        head = ks[:-2]
        alt = head[0] * 0.0
        for i, k in enumerate(head):
            alt = alt + (k if i % 2 == 0 else -k)
        return (self._phase((alt, ks[-2], ks[-1]), with_gamma)
                + self._phase(head, with_gamma))

    def eval(self, node: Expr, args):
        if isinstance(node, Const):
            return np.full(np.broadcast(*args).shape if len(args) > 1 else args[0].shape,
                           float(node.value))
        if isinstance(node, ConstLambda):
            return np.full(np.broadcast(*args).shape if len(args) > 1 else args[0].shape,
                           0.375 * self.l1)
        if isinstance(node, Slot):
            return np.asarray(args[node.index], dtype=float)
        if isinstance(node, BaseSymbol):
            a, b, c = args
            if node.name == "q1":
                return self._q1(a, b, c)
            if node.name == "q2":
                return self._q2(a, b, c)
            if node.name == "Q1":
                return self._q1(a, b, c) * _chi_nr1_arr(a, b, c)
            return self._q2(a, b, c) - self._q1(a, b, c) * ((a == b) & (b == c))
        if isinstance(node, Phase):
            return self._phase(args, node.with_gamma)
        if isinstance(node, Chi):
            return eval_chi_array(node.name, args, self.L)
        if isinstance(node, GuardedRecip):
            den = self.eval(node.child, args)
            zero = np.abs(den) < _FLOAT_ZERO_DEN
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, den))
        if isinstance(node, Product):
            acc = None
            for c in node.children:
                v = self.eval(c, args)
                acc = v if acc is None else acc * v
                if acc.size > 256 and not np.any(acc):
                    return np.zeros_like(acc)
            return acc
        if isinstance(node, Sum):
            acc = None
            for c in node.children:
                v = self.eval(c, args)
                acc = v if acc is None else acc + v
            return acc
        if isinstance(node, Scale):
            return float(node.value) * self.eval(node.child, args)
        if isinstance(node, (Sym, Sym1)):
            orbit = sym_orbit(node.arity, isinstance(node, Sym))
            acc = None
            for perm in orbit:
                v = self.eval(node.child, tuple(args[i] for i in perm))
                acc = v if acc is None else acc + v
            return acc / len(orbit)
        if isinstance(node, Ext):
            return self.eval(node.child, _ext_args(node.kind, node.child.arity, tuple(args)))
        raise TypeError(f"unknown node {type(node)}")


def eval_multiplier_array(m: Expr, args, ctx: EvalContext) -> np.ndarray:
    """Float value array of a multiplier over broadcast argument arrays."""
    if len(args) != m.arity:
        raise ValueError("arity mismatch")
    args = [np.asarray(a, dtype=float) for a in args]
    return np.asarray(ArrayEvaluator(ctx).eval(m, args), dtype=float)


# ---------------------------------------------------------------------------
# the catalog
# ---------------------------------------------------------------------------


def _base(name):
    return BaseSymbol(3, name)


def _chi3(name):
    return Chi(3, name)


def _chi5(name):
    return Chi(5, name)


_REGION3 = {1: "H1_1", 2: "H1_2", 3: "H2_1", 4: "H2_2", 5: "H2_3", 6: "H3"}
_L3_COEF = {1: 2, 2: 1, 3: 2, 4: 2, 5: 1, 6: 1}

L_INDEX = tuple((1, j) for j in range(1, 7)) + tuple((2, j) for j in range(1, 7))
M_INDEX = ((1, 1),) + tuple((2, j) for j in range(1, 20)) \
    + tuple((3, j) for j in range(1, 7)) + tuple((4, j) for j in range(1, 3))


@lru_cache(maxsize=None)
def build_L(N: int, j: int) -> Expr:
    """Normal-form weight number j at arity 2N+1 (unsymmetrized).

    The cubic weights (N = 1) are Q1 times one region indicator over the
    cubic phase; the quintic weights (N = 2) combine an extended cubic core
    with region indicators over the quintic phase.
    """
    if N == 1:
        if j not in _REGION3:
            raise ValueError(f"no cubic weight index {j}")
        core = product(_chi3(_REGION3[j]), _base("Q1"), guarded_recip(Phase(3, True)))
        return scale(_L3_COEF[j], core)
    if N != 2:
        raise ValueError("weights exist at N = 1, 2")
    if j not in range(1, 7):
        raise ValueError(f"no quintic weight index {j}")
    recip5 = guarded_recip(Phase(5, True))
    if j in (1, 2):
        core = product(
            extend(product(_base("q1"), guarded_recip(Phase(3, False))), "ext1_1", 5),
            extend(_base("q1"), "ext2_1", 5),
        )
        if j == 1:
            chis = product(_chi5("NR1"), _chi5("H1_1"), one_minus(_chi5("R1")),
                           one_minus(_chi5("R3")))
        else:
            chis = product(_chi5("NR1"), _chi5("NR1_1"), one_minus(_chi5("H1_1")),
                           _chi5("A2"))
        return scale(4, product(chis, core, recip5))
    cutoff_core = product(
        extend(product(_base("q1"), Chi(3, "gt_L"), guarded_recip(Phase(3, True))),
               "ext1_1", 5),
        extend(_base("q1"), "ext2_1", 5),
    )
    if j == 3:
        return scale(2, product(_chi5("NR1"), _chi5("NR2_1"), cutoff_core, recip5))
    if j == 4:
        return scale(4, product(_chi5("NR1"), _chi5("NR3_1"), _chi5("A1"),
                                cutoff_core, recip5))
    if j == 5:
        return scale(4, product(_chi5("NR1"), _chi5("NR4_1"), _chi5("A3"),
                                cutoff_core, recip5))
    return scale(2, product(_chi5("NR1"), _chi5("NR5_1"), _chi5("A1"),
                            cutoff_core, recip5))


@lru_cache(maxsize=None)
def sym_weights_cutoff(N: int, js) -> Expr:
    """sum over j in js of [L_j]_sym * chi_{>L}, at arity 2N+1."""
    arity = 2 * N + 1
    terms = [product(symmetrize(build_L(N, j)), Chi(arity, "gt_L")) for j in js]
    return terms[0] if len(terms) == 1 else total(*terms)


@lru_cache(maxsize=None)
def build_M(N: int, j: int) -> Expr:
    """Flow multiplier number j at arity 2N+1 (unsymmetrized).

    Entries j = 2..7, 18, 19 at arity 5, all arity-7 entries, and both
    arity-9 entries are extension products produced by differentiating the
    lower-order weights along the flow; j = 8..17 at arity 5 are the region
    splits of the free cubic core.
    """
    if (N, j) == (1, 1):
        return _base("Q2")
    if N == 2:
        if j == 1:
            return ConstLambda(5)
        if j == 2:
            return product(extend(scale(2, sym_weights_cutoff(1, range(1, 7))), "ext1_1", 5),
                           extend(_base("Q2"), "ext2_1", 5))
        if j == 3:
            return scale(-1, product(extend(sym_weights_cutoff(1, range(1, 7)), "ext1_2", 5),
                                     extend(_base("Q2"), "ext2_2", 5)))
        if j == 4:
            return product(extend(scale(2, sym_weights_cutoff(1, (2, 3, 5))), "ext1_1", 5),
                           extend(_base("Q1"), "ext2_1", 5))
        if j == 5:
            return scale(-1, product(extend(sym_weights_cutoff(1, (2, 3, 5)), "ext1_2", 5),
                                     extend(_base("Q1"), "ext2_2", 5)))
        if j == 6:
            return product(extend(scale(2, sym_weights_cutoff(1, (4, 6))), "ext1_1", 5),
                           extend(_base("Q1"), "ext2_1", 5))
        if j == 7:
            return scale(-1, product(extend(sym_weights_cutoff(1, (4, 6)), "ext1_2", 5),
                                     extend(_base("Q1"), "ext2_2", 5)))
        free_core = product(
            extend(product(_base("q1"), guarded_recip(Phase(3, False))), "ext1_1", 5),
            extend(_base("q1"), "ext2_1", 5),
        )
        cutoff_core = product(
            extend(product(_base("q1"), Chi(3, "gt_L"), guarded_recip(Phase(3, True))),
                   "ext1_1", 5),
            extend(_base("q1"), "ext2_1", 5),
        )
        if j == 8:
            return scale(4, product(_chi5("NR1"), _chi5("H1_1"), _chi5("R1"), free_core))
        if j == 9:
            return scale(4, product(_chi5("NR1"), _chi5("H1_1"), one_minus(_chi5("R1")),
                                    _chi5("R3"), free_core))
        if j == 10:
            return scale(4, product(_chi5("NR1"), _chi5("NR1_1"), one_minus(_chi5("H1_1")),
                                    one_minus(_chi5("A2")), free_core))
        if j == 11:
            diff = total(product(_base("q1"), guarded_recip(Phase(3, True))),
                         scale(-1, product(_base("q1"), guarded_recip(Phase(3, False)))))
            core = product(extend(product(Chi(3, "gt_L"), diff), "ext1_1", 5),
                           extend(_base("q1"), "ext2_1", 5))
            return scale(4, product(_chi5("NR1"), _chi5("NR1_1"), core))
        if j == 12:
            neg = scale(-1, product(_base("q1"), guarded_recip(Phase(3, False))))
            core = product(extend(product(Chi(3, "le_L"), neg), "ext1_1", 5),
                           extend(_base("q1"), "ext2_1", 5))
            return scale(4, product(_chi5("NR1"), _chi5("NR1_1"), core))
        if j == 13:
            return scale(4, product(_chi5("NR1"), _chi5("NR3_1"), one_minus(_chi5("A1")),
                                    cutoff_core))
        if j == 14:
            return scale(4, product(_chi5("NR1"), _chi5("NR4_1"), one_minus(_chi5("A3")),
                                    cutoff_core))
        if j == 15:
            return scale(2, product(_chi5("NR1"), _chi5("NR5_1"), one_minus(_chi5("A1")),
                                    cutoff_core))
        if j == 16:
            mix = total(scale(2, _chi5("NR3_2")), scale(2, _chi5("NR4_2")), _chi5("NR5_2"))
            return scale(2, product(_chi5("NR1"), mix, cutoff_core))
        if j == 17:
            mix = total(scale(2, _chi5("NR1_2")), _chi5("NR2_2"))
            return scale(2, product(_chi5("NR1"), mix, cutoff_core))
        if j == 18:
            return product(extend(scale(2, sym_weights_cutoff(1, (1,))), "ext1_1", 5),
                           extend(product(_chi3("H3"), _base("Q1")), "ext2_1", 5))
        if j == 19:
            return scale(-1, product(extend(sym_weights_cutoff(1, (1,)), "ext1_2", 5),
                                     extend(_base("Q1"), "ext2_2", 5)))
        raise ValueError(f"no quintic flow index {j}")
    if N == 3:
        all6 = range(1, 7)
        if j == 1:
            return product(ConstLambda(7),
                           extend(scale(2, sym_weights_cutoff(1, all6)), "ext1_1", 7))
        if j == 2:
            return scale(-1, product(ConstLambda(7),
                                     extend(sym_weights_cutoff(1, all6), "ext1_2", 7)))
        if j == 3:
            return product(extend(scale(3, sym_weights_cutoff(2, all6)), "ext1_1", 7),
                           extend(_base("Q2"), "ext2_1", 7))
        if j == 4:
            return scale(-1, product(extend(scale(2, sym_weights_cutoff(2, all6)), "ext1_2", 7),
                                     extend(_base("Q2"), "ext2_2", 7)))
        if j == 5:
            return product(extend(scale(3, sym_weights_cutoff(2, all6)), "ext1_1", 7),
                           extend(_base("Q1"), "ext2_1", 7))
        if j == 6:
            return scale(-1, product(extend(scale(2, sym_weights_cutoff(2, all6)), "ext1_2", 7),
                                     extend(_base("Q1"), "ext2_2", 7)))
        raise ValueError(f"no septic flow index {j}")
    if N == 4:
        all6 = range(1, 7)
        if j == 1:
            return product(ConstLambda(9),
                           extend(scale(3, sym_weights_cutoff(2, all6)), "ext1_1", 9))
        if j == 2:
            return scale(-1, product(ConstLambda(9),
                                     extend(scale(2, sym_weights_cutoff(2, all6)), "ext1_2", 9)))
        raise ValueError(f"no nonic flow index {j}")
    raise ValueError(f"no flow family N = {N}")
