"""Equation coefficients, structural conditions, and conserved functionals.

The equation family is

    i u_t + u_xxxx = -(3/8) l1 |u|^4 u + l2 conj(u) u_x^2 + l3 u |u_x|^2
                     + l4 u^2 conj(u)_xx + l5 |u|^2 u_xx

with real coefficients l1 .. l5, optionally extended by mu * u_xx on the
left and + l6 |u|^2 u on the right (the vortex-filament variant).

Three structural conditions gate the conservation laws:

    A1:  l5 = l2 + l4
    A2:  l2 + l3 = l4 + l5
    A3:  8 l4 = 2 l2 + l3  and  l4 (l2 + 2 l4 - 2 l5) = -3 l1 / 4

E_j is conserved along smooth flows when A_j holds (j = 1, 2, 3); E_4 is
conserved when A1 and A2 both hold, in which case the equation is
Hamiltonian.  When all three hold the equation is completely integrable,
which pins the coefficients to (4 l4^2, 3 l4, 2 l4, l4, 4 l4).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fournls.fields import SpectralField, to_physical

_REL_TOL = 1e-12


@dataclass(frozen=True)
class EquationParams:
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0
    lambda4: float = 0.0
    lambda5: float = 0.0
    mu: float = 0.0
    lambda6: float = 0.0

    def __post_init__(self):
        vals = (self.lambda1, self.lambda2, self.lambda3, self.lambda4,
                self.lambda5, self.mu, self.lambda6)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("coefficients must be finite")


@dataclass(frozen=True)
class ConditionFlags:
    a1: bool
    a2: bool
    a3: bool
    hamiltonian: bool
    integrable: bool


def _close(a: float, b: float) -> bool:
    # exact on exactly-representable inputs, relative tolerance otherwise
    if a == b:
        return True
    return abs(a - b) <= _REL_TOL * max(abs(a), abs(b))


def check_conditions(p: EquationParams) -> ConditionFlags:
    """Evaluate A1, A2, A3; Hamiltonian = A1 and A2, integrable = all three."""
    a1 = _close(p.lambda5, p.lambda2 + p.lambda4)
    a2 = _close(p.lambda2 + p.lambda3, p.lambda4 + p.lambda5)
    a3 = _close(8.0 * p.lambda4, 2.0 * p.lambda2 + p.lambda3) and _close(
        p.lambda4 * (p.lambda2 + 2.0 * p.lambda4 - 2.0 * p.lambda5), -3.0 * p.lambda1 / 4.0
    )
    return ConditionFlags(a1=a1, a2=a2, a3=a3, hamiltonian=a1 and a2,
                          integrable=a1 and a2 and a3)


def preset(name: str, **kw) -> EquationParams:
    """Named coefficient sets.

    linear            all coefficients zero.
    integrable        (4 l4^2, 3 l4, 2 l4, l4, 4 l4); keyword lambda4 (default 1).
    hamiltonian       l3 = 2 l4, l5 = l2 + l4; keywords lambda2, lambda4, lambda1.
    a1-only           A1 holds, A2 fails; fixed sample set (1, 1, 5, 2, 3).
    generic-theorem   explicit lambdas, accepted only when l5 = l2 + l4 or l5 = 0.
    """
    if name == "linear":
        return EquationParams()
    if name == "integrable":
        l4 = float(kw.get("lambda4", 1.0))
        return EquationParams(4.0 * l4 * l4, 3.0 * l4, 2.0 * l4, l4, 4.0 * l4)
    if name == "hamiltonian":
        l2 = float(kw.get("lambda2", 1.0))
        l4 = float(kw.get("lambda4", 1.0))
        l1 = float(kw.get("lambda1", 1.0))
        return EquationParams(l1, l2, 2.0 * l4, l4, l2 + l4)
    if name == "a1-only":
        return EquationParams(1.0, 1.0, 5.0, 2.0, 3.0)
    if name == "generic-theorem":
        p = EquationParams(
            float(kw.get("lambda1", 0.0)), float(kw.get("lambda2", 0.0)),
            float(kw.get("lambda3", 0.0)), float(kw.get("lambda4", 0.0)),
            float(kw.get("lambda5", 0.0)),
        )
        if not (check_conditions(p).a1 or p.lambda5 == 0.0):
            raise ValueError("generic-theorem preset needs l5 = l2 + l4 or l5 = 0")
        return p
    raise ValueError(f"unknown preset {name!r}")


def _grid_means(f: SpectralField, padding: int):
    """Physical samples on a grid large enough for degree-`padding` products."""
    M = padding * (2 * f.K + 1)
    u = to_physical(f, M).samples
    return u, M


def e1(f: SpectralField) -> float:
    """Mass, int |u|^2 = sum_k |coeff(k)|^2."""
    return float(np.sum(np.abs(f.coeffs) ** 2))


def e2(f: SpectralField) -> float:
    """Momentum, Im int conj(u) u_x = sum_k k |coeff(k)|^2."""
    return float(np.sum(f.freqs * np.abs(f.coeffs) ** 2))


def e3(f: SpectralField, p: EquationParams) -> float:
    """First energy, (1/2) int [ |u_x|^2 + (l4/2) |u|^4 ].

    The common 1/2 sits outside a single integral; that grouping (quartic
    coefficient l4/4) is the one the flow actually conserves under the
    third structural condition.  The quartic mean is computed on a grid of
    size >= 2(2K+1), alias-free for |u|^4 of a radius-K field.
    """
    quad = 0.5 * float(np.sum(f.freqs.astype(float) ** 2 * np.abs(f.coeffs) ** 2))
    if p.lambda4 == 0.0:
        return quad
    u, M = _grid_means(f, 2)
    quartic = float(np.mean(np.abs(u) ** 4))
    return quad + 0.25 * p.lambda4 * quartic


def e4(f: SpectralField, p: EquationParams) -> float:
    """Second energy,

    (1/2) int [ |u_xx|^2 + (l1/8) |u|^6 + (l2+l4) |u|^2 |u_x|^2
                + l4 Re[u^2 conj(u_x)^2] ].

    As with e3 the 1/2 spans the whole integrand; this grouping is
    conserved exactly when the first two structural conditions hold.  All
    field products are evaluated on a grid of size 3(2K+1), alias-free for
    the sextic term.
    """
    ks = f.freqs.astype(float)
    out = 0.5 * float(np.sum(ks**4 * np.abs(f.coeffs) ** 2))
    if p.lambda1 == 0.0 and p.lambda2 + p.lambda4 == 0.0 and p.lambda4 == 0.0:
        return out
    M = 3 * (2 * f.K + 1)
    u = to_physical(f, M).samples
    ux = to_physical(SpectralField(f.K, 1j * f.freqs * f.coeffs), M).samples
    if p.lambda1 != 0.0:
        out += p.lambda1 / 16.0 * float(np.mean(np.abs(u) ** 6))
    if p.lambda2 + p.lambda4 != 0.0:
        out += 0.5 * (p.lambda2 + p.lambda4) * float(np.mean(np.abs(u) ** 2
                                                             * np.abs(ux) ** 2))
    if p.lambda4 != 0.0:
        out += 0.5 * p.lambda4 * float(np.mean(np.real(u**2 * np.conj(ux) ** 2)))
    return out


def all_invariants(f: SpectralField, p: EquationParams) -> dict:
    return {"E1": e1(f), "E2": e2(f), "E3": e3(f, p), "E4": e4(f, p)}
