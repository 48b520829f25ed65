"""Time integration of the fourth-order equations on the torus.

Four right-hand-side forms are supported:

    NLS4_1   the original equation
    FM       the vortex-filament variant (extra mu u_xx and l6 |u|^2 u)
    NLS4_2   mass frozen into the quadratic symbol, transport term kept
    NLS4_3   additionally in the frame moving with the momentum transport

The linear part is stiff (symbol k^4), so the default integrator applies
the exact linear propagator and advances only the nonlinear remainder with
classical RK4 (integrating-factor RK4).  A direct RK4 on the unmodified
system is retained for cross-checks at small truncation radii, where its
step restriction dt ~ K^-4 is affordable.

Nonlinear products are formed pointwise on a zero-padded grid sized for
the quintic term (padding factor 3), so the computed right-hand side
equals the exact truncated convolution sums to rounding; the mean-value
functionals entering the reduced forms are evaluated spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.fft import next_fast_len

from fournls.conserved import EquationParams, e1, e2
from fournls.fields import PhysicalField, SpectralField, sobolev_norm, to_physical, to_spectral

_FORMS = ("NLS4_1", "NLS4_2", "NLS4_3", "FM")


class BlowUpError(RuntimeError):
    def __init__(self, t, message="state blew up"):
        super().__init__(f"{message} at t = {t}")
        self.time = t


@dataclass(frozen=True)
class SolverConfig:
    form: str = "NLS4_3"
    K: int = 32
    dt: float = 1e-4
    T: float = 0.1
    integrator: str = "rk4_interaction"
    padding: int = 3
    save_every: int = 1

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ValueError(f"unknown form {self.form}")
        if self.integrator not in ("rk4_interaction", "rk4_direct"):
            raise ValueError(f"unknown integrator {self.integrator}")
        if self.dt <= 0 or abs(self.T) < self.dt * (1 - 1e-12):
            raise ValueError("need dt > 0 and |T| >= dt")
        if self.padding < 2:
            raise ValueError("padding factor must be at least 2")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    gauge_c: np.ndarray
    form: str

    def __post_init__(self):
        if not (len(self.times) == len(self.states) == len(self.gauge_c)):
            raise ValueError("length mismatch")

    @property
    def K(self):
        return self.states[0].K


def linear_symbol(K: int, p: EquationParams, form: str, E1phi: float) -> np.ndarray:
    ks = np.arange(-K, K + 1, dtype=float)
    if form == "NLS4_1":
        return ks**4
    if form == "FM":
        return ks**4 - p.mu * ks**2
    return ks**4 + p.lambda5 * E1phi * ks**2


def rhs(u: SpectralField, p: EquationParams, form: str, E1phi: float = 0.0,
        padding: int = 3) -> SpectralField:
    """Full right-hand side du/dt for the chosen form."""
    lin = 1j * linear_symbol(u.K, p, form, E1phi) * u.coeffs
    nl = rhs_nonlinear(u, p, form, E1phi, padding)
    return SpectralField(u.K, lin + nl.coeffs)


def rhs_nonlinear(u: SpectralField, p: EquationParams, form: str,
                  E1phi: float = 0.0, padding: int = 3) -> SpectralField:
    """Right-hand side minus the stiff linear part i * symbol * u."""
    K = u.K
    ks = u.freqs.astype(float)
    M = next_fast_len(max(padding * (2 * K + 1), 6 * K + 1))
    ug = to_physical(u, M).samples
    uxg = to_physical(SpectralField(K, 1j * ks * u.coeffs), M).samples
    uxxg = to_physical(SpectralField(K, -(ks**2) * u.coeffs), M).samples
    au2 = np.abs(ug) ** 2

    def spec(samples):
        return to_spectral(PhysicalField(M, samples), K).coeffs

    # derivative-carrying cubic block
    cubic = (p.lambda2 * np.conj(ug) * uxg**2
             + p.lambda3 * ug * np.abs(uxg) ** 2
             + p.lambda4 * ug**2 * np.conj(uxxg)
             + p.lambda5 * au2 * uxxg)
    quintic = au2**2 * ug

    if form in ("NLS4_1", "FM"):
        nl = -1j * spec(cubic) + 1j * 0.375 * p.lambda1 * spec(quintic)
        if form == "FM":
            nl += -1j * p.lambda6 * spec(au2 * ug)
        return SpectralField(K, nl)

    # reduced forms.  The |u_x|^2-mean pieces of the two middle blocks
    # cancel exactly, and in the transport-carrying form the momentum term
    # on the left cancels the matching block term, so the remainders are:
    #   NLS4_2:  J-blocks with only the mass correction
    #   NLS4_3:  the same plus the momentum transport
    e1u = e1(u)
    nl = -1j * spec(cubic) + 1j * 0.375 * p.lambda1 * spec(quintic)
    nl += 1j * p.lambda5 * e1u * (-(ks**2)) * u.coeffs
    if form == "NLS4_3":
        nl += (p.lambda3 - 2.0 * p.lambda2) * e2(u) * (1j * ks) * u.coeffs
    return SpectralField(K, nl)


def step(u: SpectralField, t: float, dt: float, p: EquationParams,
         cfg: SolverConfig, E1phi: float = 0.0) -> SpectralField:
    """One RK4 step; the interaction-picture variant applies the exact
    linear propagator so the step size is not constrained by k^4."""
    try:
        return _step_inner(u, t, dt, p, cfg, E1phi)
    except ValueError as exc:
        if "finite" in str(exc):
            raise BlowUpError(t + dt, "non-finite intermediate state") from exc
        raise


def _step_inner(u, t, dt, p, cfg, E1phi):
    if cfg.integrator == "rk4_direct":
        def f(v):
            return rhs(v, p, cfg.form, E1phi, cfg.padding).coeffs
        y = u.coeffs
        k1 = f(u)
        k2 = f(SpectralField(u.K, y + 0.5 * dt * k1))
        k3 = f(SpectralField(u.K, y + 0.5 * dt * k2))
        k4 = f(SpectralField(u.K, y + dt * k3))
        out = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        phi = linear_symbol(u.K, p, cfg.form, E1phi)
        Eh = np.exp(1j * phi * dt)
        E2 = np.exp(1j * phi * (dt / 2.0))

        def nl(v):
            return rhs_nonlinear(SpectralField(u.K, v), p, cfg.form, E1phi,
                                 cfg.padding).coeffs

        y = u.coeffs
        n1 = nl(y)
        ua = E2 * (y + 0.5 * dt * n1)
        n2 = nl(ua)
        ub = E2 * y + 0.5 * dt * n2
        n3 = nl(ub)
        uc = Eh * y + dt * E2 * n3
        n4 = nl(uc)
        out = Eh * y + dt / 6.0 * (Eh * n1 + 2.0 * E2 * (n2 + n3) + n4)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(t + dt, "non-finite state")
    return SpectralField(u.K, out)


def integrate(phi0: SpectralField, p: EquationParams, cfg: SolverConfig) -> Trajectory:
    """March from 0 to T (backwards when T < 0), storing every
    ``save_every``-th state and the accumulated spatial shift c(t)."""
    if cfg.padding < 3 and p.lambda1 != 0.0:
        raise ValueError("quintic term needs padding >= 3")
    E1phi = e1(phi0)
    n_steps = int(round(abs(cfg.T) / cfg.dt))
    h = cfg.dt if cfg.T > 0 else -cfg.dt
    mass0 = max(e1(phi0), 1e-300)
    tcoef = p.lambda3 - 2.0 * p.lambda2

    times = [0.0]
    states = [phi0]
    cs = [0.0]
    u = phi0
    t = 0.0
    c = 0.0
    e2_prev = e2(u)
    for i in range(n_steps):
        u = step(u, t, h, p, cfg, E1phi)
        t = (i + 1) * h
        if e1(u) > 1e12 * mass0:
            raise BlowUpError(t, "mass grew beyond 1e12 x initial")
        e2_new = e2(u)
        c += 0.5 * h * tcoef * (e2_prev + e2_new)
        e2_prev = e2_new
        if (i + 1) % cfg.save_every == 0 or i == n_steps - 1:
            times.append(t)
            states.append(u)
            cs.append(c)
    return Trajectory(np.array(times), states, np.array(cs), cfg.form)


def gauge_translate(traj: Trajectory, direction: str = "forward") -> Trajectory:
    """Spatial translation by the accumulated shift, as a Fourier phase.

    ``forward`` maps a trajectory of the transport-carrying form onto the
    moving frame (multiply by exp(i k c(t))); ``inverse`` undoes it, and
    the two compose to the identity exactly.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    sign = 1.0 if direction == "forward" else -1.0
    out = []
    for u, c in zip(traj.states, traj.gauge_c):
        ks = u.freqs.astype(float)
        out.append(SpectralField(u.K, u.coeffs * np.exp(sign * 1j * ks * c)))
    return Trajectory(traj.times.copy(), out, traj.gauge_c.copy(), traj.form)


def interaction_picture(traj: Trajectory, gamma: float) -> Trajectory:
    """v(t, k) = exp(-i t (k^4 + gamma k^2)) u(t, k)."""
    out = []
    for t, u in zip(traj.times, traj.states):
        ks = u.freqs.astype(float)
        out.append(SpectralField(u.K, np.exp(-1j * t * (ks**4 + gamma * ks**2))
                                 * u.coeffs))
    return Trajectory(traj.times.copy(), out, traj.gauge_c.copy(), traj.form)


def solution_map_experiment(phi0: SpectralField, psi: SpectralField,
                            eps_values, p: EquationParams, cfg: SolverConfig,
                            s: float = 1.0):
    """Perturbation response table for the data-to-solution map.

    For each eps, integrates from phi0 and from phi0 + eps * psi and
    reports sup_t ||u1 - u2||_{H^s} / eps; a continuous solution map keeps
    the ratio bounded and stable as eps shrinks.
    """
    base = integrate(phi0, p, cfg)
    rows = []
    for eps in eps_values:
        pert = SpectralField(phi0.K, phi0.coeffs + eps * psi.coeffs)
        other = integrate(pert, p, cfg)
        sup = 0.0
        for ub, up in zip(base.states, other.states):
            diff = SpectralField(ub.K, ub.coeffs - up.coeffs)
            sup = max(sup, sobolev_norm(diff, s))
        rows.append({"eps": float(eps), "ratio": sup / eps if eps > 0 else 0.0})
    return rows
