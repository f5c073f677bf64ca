"""Degenerate shooting IVPs as a first-order (u, v) system on [0, 1].

With v := phi_p(u') the three problem families integrate the system

    u' = phi_{p'}(v),      v' = g(x, u),

where g selects the family:

  * half-eigenvalue:  g = -(a_plus + lam) phi_p(u+) + (a_minus + lam) phi_p(u-)
  * rescaled:         g = -a_plus phi_p(u+) + a_minus phi_p(u-)
                          - ttau f(x, |ttau|^(-1/(p-1)) u)   (0 when ttau = 0)
  * shooting:         g = -a_plus phi_p(u+) + a_minus phi_p(u-) - f(x, u)

The right-hand side is continuous but only Hoelder at the degeneracies
(u = 0 for p < 2 in the phi_p terms, v = 0 for p > 2 in phi_{p'}), so the
integrator is an adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) whose
step control rides through them; zeros of u and v are located on the dense
output and refined by bracketed bisection to x-accuracy ~1e-13.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import NormalizedProblem, Sign, Tolerances, phi_p, phi_p_inv
from .exprlang import EvalError

__all__ = [
    "Trajectory", "IvpError", "StepSizeCollapse", "IvpOverflow",
    "DegenerateFieldError", "DegenerateZeroError", "MaxStepsExceeded",
    "solve_half_eig_ivp", "solve_rescaled_ivp", "solve_shooting_ivp",
    "count_zeros",
]


class IvpError(RuntimeError):
    """Base class for integration failures."""


class StepSizeCollapse(IvpError):
    def __init__(self, x: float):
        super().__init__(f"step size collapsed near x = {x:.12g}")
        self.x = x


class MaxStepsExceeded(IvpError):
    def __init__(self, x: float, max_steps: int):
        super().__init__(f"exceeded {max_steps} steps at x = {x:.12g}")
        self.x = x


class IvpOverflow(IvpError):
    def __init__(self, x: float):
        super().__init__(f"trajectory overflow near x = {x:.12g}")
        self.x = x


class DegenerateFieldError(IvpError):
    """|v| and |g| simultaneously below tolerance away from u = 0."""

    def __init__(self, x: float):
        super().__init__(
            f"degenerate field at x = {x:.12g}: both u' and v' vanish while "
            "u is bounded away from 0 (condition on the coefficients at "
            "critical points is violated)")
        self.x = x


class DegenerateZeroError(IvpError):
    """A located zero of u with |u'| below the simplicity tolerance."""

    def __init__(self, x: float, uprime: float):
        super().__init__(
            f"degenerate zero of u at x = {x:.12g} (|u'| = {abs(uprime):.3g})")
        self.x = x
        self.uprime = uprime


# near-degeneracy guard thresholds (see module docstring); the abort fires
# only when u is bounded away from 0, i.e. at a stuck critical point rather
# than at the (0, 0) corner of a vanishing initial condition
_V_FLOOR = 1e-14
_DEGEN_TOL = 1e-12
_EDGE_BELT = 1e-8   # u-zeros this close to x=1 count as the endpoint zero
_ORIGIN_BELT = 1e-9


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with FSAL, scalar pair state
# ---------------------------------------------------------------------------

def _dp45(rhs: Callable[[float, float, float], tuple[float, float]],
          u0: float, v0: float, rtol: float, atol: float,
          max_steps: int, max_step: float = 0.1):
    """Integrate (u, v)' = rhs(x, u, v) over [0, 1].

    Returns node arrays (xs, us, vs, dus, dvs) with derivatives at nodes,
    plus the accepted step count.
    """
    x = 0.0
    u, v = u0, v0
    try:
        fu, fv = rhs(x, u, v)
    except OverflowError:
        raise IvpOverflow(x) from None

    xs = [0.0]
    us = [u0]
    vs = [v0]
    dus = [fu]
    dvs = [fv]

    h = min(1e-3, max_step)
    nsteps = 0
    naccept = 0
    while 1.0 - x > 1e-14:
        if nsteps >= max_steps:
            raise MaxStepsExceeded(x, max_steps)
        nsteps += 1
        if h > 1.0 - x:
            h = 1.0 - x
        if h < 1e-14 * max(1.0, x):
            raise StepSizeCollapse(x)
        try:
            k1u, k1v = fu, fv
            k2u, k2v = rhs(x + 0.2 * h, u + h * 0.2 * k1u, v + h * 0.2 * k1v)
            k3u, k3v = rhs(x + 0.3 * h,
                           u + h * (0.075 * k1u + 0.225 * k2u),
                           v + h * (0.075 * k1v + 0.225 * k2v))
            k4u, k4v = rhs(x + 0.8 * h,
                           u + h * (0.9777777777777777 * k1u - 3.7333333333333334 * k2u + 3.5555555555555554 * k3u),
                           v + h * (0.9777777777777777 * k1v - 3.7333333333333334 * k2v + 3.5555555555555554 * k3v))
            k5u, k5v = rhs(x + 0.8888888888888888 * h,
                           u + h * (2.9525986892242035 * k1u - 11.595793324188385 * k2u + 9.822892851699436 * k3u - 0.2908093278463649 * k4u),
                           v + h * (2.9525986892242035 * k1v - 11.595793324188385 * k2v + 9.822892851699436 * k3v - 0.2908093278463649 * k4v))
            k6u, k6v = rhs(x + h,
                           u + h * (2.8462752525252526 * k1u - 10.757575757575758 * k2u + 8.906422717743473 * k3u + 0.2784090909090909 * k4u - 0.2735313036020583 * k5u),
                           v + h * (2.8462752525252526 * k1v - 10.757575757575758 * k2v + 8.906422717743473 * k3v + 0.2784090909090909 * k4v - 0.2735313036020583 * k5v))
            un = u + h * (0.09114583333333333 * k1u + 0.44923629829290207 * k3u + 0.6510416666666666 * k4u - 0.322376179245283 * k5u + 0.13095238095238096 * k6u)
            vn = v + h * (0.09114583333333333 * k1v + 0.44923629829290207 * k3v + 0.6510416666666666 * k4v - 0.322376179245283 * k5v + 0.13095238095238096 * k6v)
            xn = x + h
            k7u, k7v = rhs(xn, un, vn)
        except OverflowError:
            raise IvpOverflow(x) from None
        # embedded 4th-order error estimate
        eu = h * (0.0012326388888888888 * k1u - 0.0042527702905061394 * k3u + 0.036979166666666667 * k4u - 0.05086379716981132 * k5u + 0.041904761904761904 * k6u - 0.025 * k7u)
        ev = h * (0.0012326388888888888 * k1v - 0.0042527702905061394 * k3v + 0.036979166666666667 * k4v - 0.05086379716981132 * k5v + 0.041904761904761904 * k6v - 0.025 * k7v)
        su = atol + rtol * max(abs(u), abs(un))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if err <= 1.0:
            x, u, v = xn, un, vn
            fu, fv = k7u, k7v  # FSAL
            xs.append(x)
            us.append(u)
            vs.append(v)
            dus.append(fu)
            dvs.append(fv)
            naccept += 1
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h = min(h * factor, max_step)

    # the final step targets 1 - x exactly; rounding can leave the last node
    # a few ulp short, relabel it (perturbation is O(eps * |u'|))
    xs[-1] = 1.0
    return (np.asarray(xs), np.asarray(us), np.asarray(vs),
            np.asarray(dus), np.asarray(dvs), naccept)


# ---------------------------------------------------------------------------
# Cubic Hermite dense output
# ---------------------------------------------------------------------------

def _hermite_scalar(t: float, h: float, y0: float, y1: float,
                    d0: float, d1: float) -> float:
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (3 * t2 - 2 * t3) * y1 + (t3 - t2) * h * d1)


def _hermite_eval(xq, xs, ys, ds):
    q = np.asarray(xq, dtype=float)
    scalar = q.ndim == 0
    q1 = np.atleast_1d(q)
    idx = np.clip(np.searchsorted(xs, q1, side="right") - 1, 0, len(xs) - 2)
    h = xs[idx + 1] - xs[idx]
    t = np.where(h > 0, (q1 - xs[idx]) / np.where(h > 0, h, 1.0), 0.0)
    t2 = t * t
    t3 = t2 * t
    out = ((2 * t3 - 3 * t2 + 1) * ys[idx] + (t3 - 2 * t2 + t) * h * ds[idx]
           + (3 * t2 - 2 * t3) * ys[idx + 1] + (t3 - t2) * h * ds[idx + 1])
    return float(out[0]) if scalar else out


def _panel_roots(xs, ys, ds, lo_cut: float, hi_cut: float) -> list[float]:
    """Sign-change roots of the Hermite interpolant, refined by brentq."""
    roots: list[float] = []
    probes = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
    for i in range(len(xs) - 1):
        x0, x1 = xs[i], xs[i + 1]
        h = x1 - x0
        if h <= 0.0:
            continue
        y0, y1, d0, d1 = ys[i], ys[i + 1], ds[i], ds[i + 1]
        vals = [y0,
                _hermite_scalar(probes[1], h, y0, y1, d0, d1),
                _hermite_scalar(probes[2], h, y0, y1, d0, d1),
                y1]
        for j in range(3):
            va, vb = vals[j], vals[j + 1]
            if va == 0.0:
                roots.append(x0 + probes[j] * h)
            elif va * vb < 0.0:
                f = lambda xq: _hermite_scalar((xq - x0) / h, h, y0, y1, d0, d1)
                roots.append(brentq(f, x0 + probes[j] * h, x0 + probes[j + 1] * h,
                                    xtol=1e-13, rtol=8.9e-16))
    if ys[-1] == 0.0:
        roots.append(xs[-1])
    roots.sort()
    out: list[float] = []
    for r in roots:
        if r < lo_cut or r > hi_cut:
            continue
        if out and r - out[-1] < 1e-11:
            continue
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# Trajectory
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense solution of one shooting IVP with located zeros.

    ``u_zeros`` lists the simple zeros of u strictly inside (0, 1) (a zero
    within 1e-8 of x = 1 is regarded as the endpoint zero and not counted);
    ``v_zeros`` are the critical points of u.  ``u_scale``/``v_scale``
    support the exact positive-homogeneity rescaling without re-integration.
    """
    p: float
    xs: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    dus: np.ndarray
    dvs: np.ndarray
    u_zeros: tuple[float, ...]
    uprime_at_zeros: tuple[float, ...]
    v_zeros: tuple[float, ...]
    u_at_critical: tuple[float, ...]
    rtol: float
    atol: float
    n_steps: int
    u_scale: float = 1.0
    v_scale: float = 1.0
    flags: tuple[str, ...] = ()

    # -- dense accessors ---------------------------------------------------

    def u(self, x):
        return self.u_scale * _hermite_eval(x, self.xs, self.us, self.dus)

    def v(self, x):
        return self.v_scale * _hermite_eval(x, self.xs, self.vs, self.dvs)

    def uprime(self, x):
        raw = _hermite_eval(x, self.xs, self.vs, self.dvs)
        if np.ndim(raw) == 0:
            return self.u_scale * phi_p_inv(self.p, float(raw))
        e = 1.0 / (self.p - 1.0)
        return self.u_scale * np.sign(raw) * np.abs(raw) ** e

    @property
    def u1(self) -> float:
        return self.u_scale * float(self.us[-1])

    @property
    def v1(self) -> float:
        return self.v_scale * float(self.vs[-1])

    @property
    def uprime1(self) -> float:
        return self.u_scale * phi_p_inv(self.p, float(self.vs[-1]))

    @property
    def uprime0(self) -> float:
        return self.u_scale * phi_p_inv(self.p, float(self.vs[0]))

    @property
    def sup_u(self) -> float:
        m = float(np.max(np.abs(self.us)))
        if self.u_at_critical:
            m = max(m, max(abs(c) for c in self.u_at_critical))
        return self.u_scale * m

    @property
    def sup_uprime(self) -> float:
        vmax = float(np.max(np.abs(self.vs)))
        return self.u_scale * vmax ** (1.0 / (self.p - 1.0)) if vmax > 0 else 0.0

    @property
    def endpoint_error_estimate(self) -> float:
        raw = 50.0 * math.sqrt(max(self.n_steps, 1)) * (
            self.rtol * float(np.max(np.abs(self.us))) + self.atol)
        return self.u_scale * raw

    # -- views and checks ----------------------------------------------------

    def scaled(self, s: float) -> "Trajectory":
        """View of s * u for s > 0 (positive homogeneity; v scales by s^(p-1))."""
        if s <= 0.0:
            raise ValueError("scale must be positive")
        return replace(self, u_scale=self.u_scale * s,
                       v_scale=self.v_scale * s ** (self.p - 1.0),
                       uprime_at_zeros=tuple(s * d for d in self.uprime_at_zeros),
                       u_at_critical=tuple(s * c for c in self.u_at_critical))

    def require_nondegenerate(self, zero_simple_tol: float) -> None:
        for xz, dz in zip(self.u_zeros, self.uprime_at_zeros):
            if abs(dz) <= zero_simple_tol:
                raise DegenerateZeroError(xz, dz)
        for xz in self.u_zeros:
            for xv in self.v_zeros:
                if abs(xz - xv) < 1e-12:
                    raise DegenerateZeroError(xz, self.uprime(xz))

    def consistency_residual(self, samples_per_step: int = 1) -> float:
        """Max over steps of |du - Simpson integral of phi_{p'}(v)|.

        This is the integrated form of the first equation u' = phi_{p'}(v),
        evaluated on the dense output; it ties u and v together through the
        actual ODE rather than through the tautological node identity.
        """
        e = 1.0 / (self.p - 1.0)

        def pp(v):
            return np.sign(v) * np.abs(v) ** e

        xs = self.xs
        worst = 0.0
        for i in range(len(xs) - 1):
            h = xs[i + 1] - xs[i]
            if h <= 0:
                continue
            vmid = _hermite_eval(xs[i] + 0.5 * h, xs, self.vs, self.dvs)
            integral = (h / 6.0) * (pp(self.vs[i]) + 4.0 * pp(vmid) + pp(self.vs[i + 1]))
            worst = max(worst, abs(self.us[i + 1] - self.us[i] - integral))
        return self.u_scale * worst

    def check_growth(self, C: float, ttau: float) -> bool:
        """A-priori sup-norm bound |u|_0 + |u'|_0 <= C (1 + |ttau|^(1/(p-1)))."""
        bound = C * (1.0 + abs(ttau) ** (1.0 / (self.p - 1.0)))
        return self.sup_u + self.sup_uprime <= bound

    def write_csv(self, path, n: int | None = None) -> None:
        """Dump x, u, v, u' at the integration nodes (or n uniform points)."""
        if n is None:
            xq = self.xs
        else:
            xq = np.linspace(0.0, 1.0, n)
        u = np.atleast_1d(self.u(xq))
        v = np.atleast_1d(self.v(xq))
        up = np.atleast_1d(self.uprime(xq))
        with open(path, "w") as fh:
            fh.write("x,u,v,uprime\n")
            for row in zip(xq, u, v, up):
                fh.write("%.17g,%.17g,%.17g,%.17g\n" % row)


def count_zeros(traj: Trajectory) -> int:
    """Number of sign-change zeros of u strictly inside (0, 1).

    Degenerate zeros (|u| and |u'| both below tolerance) raise
    :class:`DegenerateZeroError`; they are never silently counted.
    """
    traj.require_nondegenerate(1e-8)
    return len(traj.u_zeros)


# ---------------------------------------------------------------------------
# Field builders
# ---------------------------------------------------------------------------

def _base_field(nspec: NormalizedProblem, lam: float, f_term):
    """g(x, u) = -(a+ + lam) phi_p(u+) + (a- + lam) phi_p(u-) + f_term(x, u)."""
    p = nspec.p
    pm1 = p - 1.0
    e1 = 1.0 / pm1
    ap = nspec.spec.a_plus_fn
    am = nspec.spec.a_minus_fn
    guard = p > 2.0

    def rhs(x: float, u: float, v: float) -> tuple[float, float]:
        if v > 0.0:
            du = v ** e1
        elif v < 0.0:
            du = -((-v) ** e1)
        else:
            du = 0.0
        if u > 0.0:
            g = -(ap(x) + lam) * u ** pm1
        elif u < 0.0:
            g = (am(x) + lam) * (-u) ** pm1
        else:
            g = 0.0
        if f_term is not None:
            g += f_term(x, u)
        if guard and -_V_FLOOR < v < _V_FLOOR:
            du = 0.0
        if guard and -_DEGEN_TOL < v < _DEGEN_TOL and -_DEGEN_TOL < g < _DEGEN_TOL \
                and not -_DEGEN_TOL < u < _DEGEN_TOL:
            raise DegenerateFieldError(x)
        return du, g

    return rhs


def _integrate(nspec: NormalizedProblem, rhs, v0: float,
               tol: Tolerances, flags: tuple[str, ...] = ()) -> Trajectory:
    try:
        xs, us, vs, dus, dvs, nsteps = _dp45(
            rhs, 0.0, v0, tol.ode_rel, tol.ode_abs, tol.max_steps)
    except EvalError as exc:
        raise IvpError(f"expression evaluation failed during integration: {exc}") from exc
    u_zeros = _panel_roots(xs, us, dus, _ORIGIN_BELT, 1.0 - _EDGE_BELT)
    v_zeros = _panel_roots(xs, vs, dvs, 1e-12, 1.0 - 1e-12)
    p = nspec.p
    upz = tuple(phi_p_inv(p, _hermite_eval(z, xs, vs, dvs)) for z in u_zeros)
    uc = tuple(_hermite_eval(z, xs, us, dus) for z in v_zeros)
    return Trajectory(
        p=p, xs=xs, us=us, vs=vs, dus=dus, dvs=dvs,
        u_zeros=tuple(u_zeros), uprime_at_zeros=upz,
        v_zeros=tuple(v_zeros), u_at_critical=uc,
        rtol=tol.ode_rel, atol=tol.ode_abs, n_steps=nsteps, flags=flags)


def solve_half_eig_ivp(nspec: NormalizedProblem, lam: float, nu: Sign,
                       tol: Tolerances, slope_scale: float = 1.0) -> Trajectory:
    """Shooting trajectory of the half-eigenvalue field with u'(0) = nu * slope_scale."""
    rhs = _base_field(nspec, lam, None)
    v0 = phi_p(nspec.p, nu * slope_scale)
    return _integrate(nspec, rhs, v0, tol)


def solve_rescaled_ivp(nspec: NormalizedProblem, ttau: float, nu: Sign,
                       tol: Tolerances) -> Trajectory:
    """Trajectory of the rescaled family at parameter ttau, slope u'(0) = nu.

    At ttau = 0 this coincides with the half-eigenvalue trajectory at
    lam = 0.  Uniqueness is only guaranteed for |ttau| below delta_ttau;
    larger values are integrated anyway and flagged.
    """
    flags: tuple[str, ...] = ()
    if abs(ttau) >= tol.delta_ttau:
        flags = ("ttau-above-uniqueness-threshold",)
    if ttau == 0.0:
        f_term = None
    else:
        p = nspec.p
        f = nspec.spec.f_fn
        scale = abs(ttau) ** (-1.0 / (p - 1.0))

        def f_term(x: float, u: float) -> float:
            return -ttau * f(x, scale * u)

    rhs = _base_field(nspec, 0.0, f_term)
    return _integrate(nspec, rhs, float(nu), tol, flags)


def _zero_trajectory(nspec: NormalizedProblem, tol: Tolerances) -> Trajectory:
    xs = np.array([0.0, 1.0])
    z = np.zeros(2)
    return Trajectory(
        p=nspec.p, xs=xs, us=z, vs=z, dus=z, dvs=z,
        u_zeros=(), uprime_at_zeros=(), v_zeros=(), u_at_critical=(),
        rtol=tol.ode_rel, atol=tol.ode_abs, n_steps=1,
        flags=("tau-zero-trivial-branch",))


def solve_shooting_ivp(nspec: NormalizedProblem, tau: float,
                       tol: Tolerances) -> Trajectory:
    """One trajectory psi(tau) of the shooting family, u'(0) = |tau|^(1/(p-1)) sgn tau.

    tau = 0 returns the documented trivial branch u == 0 (a genuine solution
    of the IVP only when f(x, 0) == 0; callers must judge it by the BVP
    defect, never by the endpoint alone).  Large |tau| >= 1/delta_ttau is
    computed through the small-ttau rescaling for stability and returned as
    an exactly scaled view.
    """
    if tau == 0.0:
        return _zero_trajectory(nspec, tol)
    if abs(tau) >= 1.0 / tol.delta_ttau:
        base = solve_rescaled_ivp(nspec, 1.0 / abs(tau), 1 if tau > 0 else -1, tol)
        return base.scaled(abs(tau) ** (1.0 / (nspec.p - 1.0)))
    f = nspec.spec.f_fn

    def f_term(x: float, u: float) -> float:
        return -f(x, u)

    rhs = _base_field(nspec, 0.0, f_term)
    return _integrate(nspec, rhs, float(tau), tol)
