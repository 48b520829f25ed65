"""Linear symbol and interaction phase functions, with resonance certificates.

The linear symbol of the reduced equation is phi(k) = k^4 + gamma k^2 where
gamma = l5 * mass(datum).  A (2N+1)-linear interaction at frequencies
(k_1, ..., k_{2N+1}) with output k = k_1 - k_2 + ... + k_{2N+1} oscillates
at the rate

    Phi = phi(k) - (phi(k_1) + phi(k_3) + ... ) + (phi(k_2) + phi(k_4) + ...),

and a lower bound on |Phi| converts the oscillation into a derivative gain.
This module evaluates Phi exactly (Python integers / fractions), provides
the closed-form cubic factorization, the quintic remainder polynomials, a
certificate generator for the lower-bound case analysis, and the explicit
frequency family showing that the quintic phase cannot dominate
|k_1-k_2+k_3-k_4| |k_5|^3 in general.

Exact evaluation is tolerance-free: gamma is a ``fractions.Fraction`` (or
int) and all arithmetic stays in Q.  Floating paths for array-scale work
live in ``multipliers``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

_ARITIES = (3, 5, 7, 9)


@dataclass(frozen=True)
class PhaseContext:
    """Carries gamma = l5 * mass(datum) for the phase family."""

    gamma: Fraction | float = 0

    def exact_gamma(self) -> Fraction:
        # floats are binary rationals, so Fraction(g) is exact
        return Fraction(self.gamma)


@dataclass(frozen=True)
class FrequencyTuple:
    """Odd-length integer frequency tuple with the standard accessors."""

    entries: tuple

    def __post_init__(self):
        t = tuple(int(k) for k in self.entries)
        if len(t) not in _ARITIES:
            raise ValueError(f"arity must be one of {_ARITIES}, got {len(t)}")
        object.__setattr__(self, "entries", t)

    @property
    def arity(self) -> int:
        return len(self.entries)

    @property
    def alt_sum(self) -> int:
        """k_1 - k_2 + k_3 - ... + k_{2N+1}."""
        return sum(k if i % 2 == 0 else -k for i, k in enumerate(self.entries))

    @property
    def kmax(self) -> int:
        return max(abs(k) for k in self.entries)

    @property
    def sec(self) -> int:
        """Second largest |k_j|, duplicates counted separately."""
        m = sorted((abs(k) for k in self.entries), reverse=True)
        return m[1]

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def _as_entries(t) -> tuple:
    if isinstance(t, FrequencyTuple):
        return t.entries
    return tuple(int(k) for k in t)


def phi(k: int, ctx: PhaseContext):
    """Linear symbol k^4 + gamma k^2, exact for rational gamma."""
    g = ctx.exact_gamma()
    k = int(k)
    v = Fraction(k**4) + g * k * k
    return int(v) if v.denominator == 1 else v


def _phi_g(k: int, g: Fraction):
    return k**4 + g * k * k


def phase(t, ctx: PhaseContext):
    """Alternating phase combination Phi at an odd-arity tuple, exact."""
    ks = _as_entries(t)
    g = ctx.exact_gamma()
    alt = sum(k if i % 2 == 0 else -k for i, k in enumerate(ks))
    acc = _phi_g(alt, g)
    for i, k in enumerate(ks):
        acc -= _phi_g(k, g) if i % 2 == 0 else -_phi_g(k, g)
    return int(acc) if isinstance(acc, int) or acc.denominator == 1 else acc


def phase3_factored(k1: int, k2: int, k3: int, ctx: PhaseContext):
    """Closed form of the cubic phase,

    (k1-k2)(k3-k2) [ (k1-k2)^2 + (k3-k2)^2 + 3(k1+k3)^2 + 2 gamma ].

    Agrees with ``phase`` on every integer triple.
    """
    g = ctx.exact_gamma()
    a, b = k1 - k2, k3 - k2
    v = a * b * (Fraction(a * a + b * b + 3 * (k1 + k3) ** 2) + 2 * g)
    return int(v) if v.denominator == 1 else v


def r1_5(t) -> int:
    """Quintic gamma-remainder: phase(t, gamma) - phase(t, 0) = gamma * r1_5(t).

    Equals 2[(k1-k2+k3-k4)(k5-k4) + (k1-k2)(k3-k2)].
    """
    k1, k2, k3, k4, k5 = _as_entries(t)
    return 2 * ((k1 - k2 + k3 - k4) * (k5 - k4) + (k1 - k2) * (k3 - k2))


def r2_5(t) -> int:
    """Remainder of the swapped quintic split,

    phase(t, g) = phase0(k3, k2+k4-k1, k5) - phase0(k2, k1, k4) + g * r2_5(t),

    where phase0 is the gamma = 0 phase.  Equals
    2[(k3+k1-k2-k4)(k5+k1-k2-k4) - (k2-k1)(k4-k1)].
    """
    k1, k2, k3, k4, k5 = _as_entries(t)
    s = k1 - k2 - k4
    return 2 * ((k3 + s) * (k5 + s) - (k2 - k1) * (k4 - k1))


# ---------------------------------------------------------------------------
# lower-bound certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """A verified instance of one lower-bound case.

    ``bound`` is the explicit value c * (case majorant); the generator only
    returns certificates for which |phase| >= bound was checked.
    """

    case: str
    bound: Fraction
    phase_value: Fraction


class OutOfLemmaRange(ValueError):
    """kmax <= 16 max(1, |gamma|): the case analysis does not apply."""


def _hyp_kmax(t: FrequencyTuple, g: Fraction) -> None:
    if t.kmax <= 16 * max(1, abs(g)):
        raise OutOfLemmaRange(
            f"kmax={t.kmax} <= 16*max(1, |gamma|)={16 * max(1, abs(g))}"
        )


def _cert3(t: FrequencyTuple, ctx: PhaseContext) -> Optional[Certificate]:
    k1, k2, k3 = t.entries
    g = ctx.exact_gamma()
    _hyp_kmax(t, g)
    if (k1 - k2) * (k3 - k2) == 0:
        return None
    kmax = t.kmax
    p = phase(t, ctx)

    def mk(case, bound):
        bound = Fraction(bound)
        assert abs(Fraction(p)) >= bound, (case, t.entries, p, bound)
        return Certificate(case, bound, Fraction(p))

    # case (i): third slot dominant
    if abs(k3) > 16 * max(abs(k1), abs(k2)):
        return mk("3:(i)", abs(k1 - k2) * kmax**3)
    # case (ii): middle slot dominant, or comparable outer slots with tiny middle
    if abs(k2) > 16 * max(abs(k1), abs(k3)):
        return mk("3:(ii-a)", kmax**4)
    if 32 * abs(k2) < min(abs(k1), abs(k3)) and abs(k1) <= 16 * abs(k3) <= 256 * abs(k1):
        return mk("3:(ii-b)", Fraction(kmax**4, 16))
    # case (iii): first slot much smaller, outer-to-middle comparable
    if 32 * abs(k1) < min(abs(k2), abs(k3)) and abs(k2) <= 16 * abs(k3) <= 256 * abs(k2):
        return mk("3:(iii)", Fraction(abs(k3 - k2) * kmax**3, 16))
    # case (iv): all comparable; uses the unconditional bracket bound
    #   (k1-k2)^2 + (k3-k2)^2 + 3(k1+k3)^2 >= (12/7) kmax^2,
    # which follows from 2|k_j| <= |k1-k2| + |k3-k2| + |k1+k3| and
    # Cauchy-Schwarz with weights (1, 1, 1/3).
    return mk("3:(iv)", Fraction(3, 2) * abs(k1 - k2) * abs(k3 - k2) * kmax**2)


def _cert5(t: FrequencyTuple, ctx: PhaseContext) -> Optional[Certificate]:
    k1, k2, k3, k4, k5 = t.entries
    g = ctx.exact_gamma()
    _hyp_kmax(t, g)
    kmax = t.kmax
    alt4 = k1 - k2 + k3 - k4
    m4 = max(abs(k1), abs(k2), abs(k3), abs(k4))
    p = phase(t, ctx)

    def mk(case, bound):
        bound = Fraction(bound)
        assert abs(Fraction(p)) >= bound, (case, t.entries, p, bound)
        return Certificate(case, bound, Fraction(p))

    # dominant-last-slot cases
    if abs(k3 - k4) > 256 * abs(k1 - k2) and abs(k5) > 14 * m4:
        return mk("5:rel3", Fraction(abs(alt4) * abs(k5) ** 3, 2))
    if abs(k5) ** 3 > 16**8 * m4**4 and alt4 != 0:
        return mk("5:rel4", abs(alt4) * abs(k5) ** 3)
    sec4 = sorted((abs(k1), abs(k2), abs(k3), abs(k4)))[-2]
    if abs(k5) > 256 * m4 and m4 > 16 * sec4:
        return mk("5:rel5", abs(alt4) * abs(k5) ** 3)
    # comparable k4, k5 cases
    m3 = max(abs(k1), abs(k2), abs(k3))
    comparable45 = abs(k4) <= 16 * abs(k5) <= 256 * abs(k4)
    if 14 * m3 < min(abs(k4), abs(k5), abs(k4 - k5)) and comparable45:
        return mk("5:rel21", Fraction(abs(k4 - k5) * max(abs(k4), abs(k5)) ** 3, 16))
    if (256 * abs(k1 - k2) < abs(k4 - k5) and 14 * m3 < min(abs(k4), abs(k5))
            and comparable45):
        return mk("5:rel22", Fraction(abs(k4 - k5) * max(abs(k4), abs(k5)) ** 3, 16))
    # dominant fourth slot (the stated max runs over the other four slots)
    if 196 * max(abs(k1), abs(k2), abs(k3), abs(k5)) < abs(k4):
        return mk("5:rel23", Fraction(abs(k4) ** 4, 2))
    # comparable third and fifth slots
    if (14 * max(abs(k1), abs(k2), abs(k4)) < min(abs(k3), abs(k5))
            and abs(k3) <= 16 * abs(k5) <= 256 * abs(k3)):
        return mk("5:rel24", Fraction(max(abs(k3), abs(k5)) ** 4, 64))
    return None


def certify_lower_bound(t, ctx: PhaseContext) -> Optional[Certificate]:
    """Classify a tuple against the lower-bound case analysis.

    Cases are tested in catalog order and the first match is returned with
    its explicit constant; overlapping hypothesis sets are resolved by that
    order.  Returns None when no case applies; raises ``OutOfLemmaRange``
    when kmax <= 16 max(1, |gamma|).
    """
    if not isinstance(t, FrequencyTuple):
        t = FrequencyTuple(tuple(t))
    if t.arity == 3:
        return _cert3(t, ctx)
    if t.arity == 5:
        return _cert5(t, ctx)
    raise ValueError("certificates exist for arity 3 and 5 only")


# ---------------------------------------------------------------------------
# sharpness family
# ---------------------------------------------------------------------------

class SizeError(OverflowError):
    """Requested tuple exceeds the supported 128-bit entry range."""


def counterexample_tuple(n: int) -> FrequencyTuple:
    """Frequency family (n^5, n^5+n^3-1, n^8+n^3, n^8, n^9).

    Satisfies k1-k2+k3-k4 = 1 with |k5| far above the first four entries,
    yet |phase| grows only like n^22 while the would-be majorant
    |k1-k2+k3-k4| |k5|^3 grows like n^27.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if n**9 >= 2**127:
        raise SizeError("entries exceed 128-bit range")
    return FrequencyTuple((n**5, n**5 + n**3 - 1, n**8 + n**3, n**8, n**9))


def counterexample_scan(n_values: Sequence[int]) -> list[dict]:
    """Rows {n, phi5, bound, ratio} for the sharpness family at gamma = 0."""
    ctx = PhaseContext(0)
    rows = []
    for n in n_values:
        t = counterexample_tuple(int(n))
        p = phase(t, ctx)
        bound = abs(t[0] - t[1] + t[2] - t[3]) * abs(t[4]) ** 3
        rows.append({
            "n": int(n),
            "phi5": float(abs(p)),
            "bound": float(bound),
            "ratio": float(Fraction(abs(p), bound)),
        })
    return rows


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
