"""Resonant boundary value solve by shooting over the initial slope.

The Dirichlet problem (normalized to lambda = 0) is solved by finding tau
with psi(tau)(1) = 0, where psi(tau) integrates the shooting IVP with
u'(0) = |tau|^(1/(p-1)) sgn tau.  The bracket comes from the rescaled
family: once psi~_+(ttau)(1) * psi~_-(ttau)(1) < 0 at a small ttau > 0,
the scaling psi(tau) = |tau|^(1/(p-1)) psi~_{sgn tau}(1/|tau|) turns it
into opposite-sign endpoint values at tau = +-(1/ttau).

Bisection (never secant/Newton) then shrinks the bracket: the endpoint map
may be non-smooth and multi-branch for intermediate tau, so robustness
wins over speed.  A candidate root is only accepted after re-integration
at tight tolerance AND an integrated-form defect check of the full
equation on a 1025-point grid; branch artifacts (such as the trivial
trajectory at tau = 0 when f(x, 0) != 0) are rejected and stepped around,
and a lost sign change triggers a dense tau-scan of the stalled
sub-interval to relocate it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import MINUS, PLUS, NormalizedProblem, Tolerances
from .ivp import Trajectory, solve_rescaled_ivp, solve_shooting_ivp
from .landesman import LLReport

__all__ = ["Bracket", "ShootingResult", "ShootingError",
           "find_bracket", "shoot", "bvp_defect"]


class ShootingError(RuntimeError):
    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])


@dataclass(frozen=True)
class Bracket:
    tau_lo: float
    tau_hi: float
    value_lo: float
    value_hi: float
    ttau0: float

    def to_dict(self) -> dict:
        return {"tau_lo": self.tau_lo, "tau_hi": self.tau_hi,
                "value_lo": self.value_lo, "value_hi": self.value_hi,
                "ttau0": self.ttau0}


@dataclass(frozen=True, eq=False)
class ShootingResult:
    tau_star: float
    solution: Trajectory
    endpoint_residual: float
    bvp_residual: float
    bracket: Bracket | None
    history: tuple[tuple[float, float], ...]
    iterations: int
    notices: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"tau_star": self.tau_star,
                "endpoint_residual": self.endpoint_residual,
                "bvp_residual": self.bvp_residual,
                "bracket": None if self.bracket is None else self.bracket.to_dict(),
                "iterations": self.iterations,
                "history_length": len(self.history),
                "notices": list(self.notices)}


def bvp_defect(nspec: NormalizedProblem, traj: Trajectory,
               grid_n: int = 1025) -> float:
    """Sup over a grid of the integrated-form equation residual.

    Checks v(x) = v(0) - int_0^x [a+ phi_p(u+) - a- phi_p(u-) + f(., u)]
    with composite Simpson on the dense output; the trivial zero trajectory
    fails this check whenever f(x, 0) != 0.
    """
    p = nspec.p
    ap = nspec.spec.a_plus_fn
    am = nspec.spec.a_minus_fn
    f = nspec.spec.f_fn
    xs = np.linspace(0.0, 1.0, 2 * grid_n - 1)  # midpoints for Simpson
    u = np.atleast_1d(traj.u(xs))
    v = np.atleast_1d(traj.v(xs))

    def g(i: int) -> float:
        x = float(xs[i])
        ui = float(u[i])
        if ui > 0.0:
            return ap(x) * ui ** (p - 1.0) + f(x, ui)
        if ui < 0.0:
            return -am(x) * (-ui) ** (p - 1.0) + f(x, ui)
        return f(x, 0.0)

    gv = np.array([g(i) for i in range(len(xs))])
    h = xs[2] - xs[0]
    # cumulative Simpson over each pair of half-intervals
    increments = (h / 6.0) * (gv[0:-2:2] + 4.0 * gv[1:-1:2] + gv[2::2])
    cum = np.concatenate(([0.0], np.cumsum(increments)))
    defect = np.abs(v[::2] - (v[0] - cum))
    return float(np.max(defect))


_TTAU_START = 1e-2
_TTAU_FLOOR = 1e-8


def find_bracket(nspec: NormalizedProblem, ll: LLReport | None,
                 tol: Tolerances) -> Bracket:
    """Geometric search for ttau0 with opposite-sign rescaled endpoints.

    Requires a solvable Landesman-Lazer verdict when a report is given;
    the returned bracket is (-1/ttau0, +1/ttau0) with endpoint values
    mapped through the exact rescaling.
    """
    if ll is not None and ll.verdict != "solvable_by_theorem":
        raise ShootingError(
            f"bracket search requires a solvable LL verdict, got {ll.verdict!r}")
    p = nspec.p
    floor = 1e3 * tol.ode_abs
    ttau = min(_TTAU_START, 0.5 * tol.delta_ttau)
    history = []
    while ttau >= _TTAU_FLOOR:
        vp = solve_rescaled_ivp(nspec, ttau, PLUS, tol).u1
        vm = solve_rescaled_ivp(nspec, ttau, MINUS, tol).u1
        history.append((ttau, vp, vm))
        if vp * vm < 0.0 and abs(vp) > floor and abs(vm) > floor:
            tau0 = 1.0 / ttau
            scale = tau0 ** (1.0 / (p - 1.0))
            return Bracket(tau_lo=-tau0, tau_hi=tau0,
                           value_lo=scale * vm, value_hi=scale * vp,
                           ttau0=ttau)
        ttau /= 10.0
    raise ShootingError(
        "no sign split of the rescaled endpoints found down to ttau = 1e-8; "
        "the LL condition may be marginal or quadrature/eigenvalue accuracy "
        "too loose. samples: "
        + ", ".join(f"({t:g}: {a:.3g}, {b:.3g})" for t, a, b in history))


def _tighter(tol: Tolerances) -> Tolerances:
    return replace(tol, ode_rel=max(tol.ode_rel * 1e-2, 5e-14),
                   ode_abs=max(tol.ode_abs * 1e-2, 1e-14))


def shoot(nspec: NormalizedProblem, bracket: Bracket,
          tol: Tolerances) -> ShootingResult:
    """Bisection on tau -> psi(tau)(1) inside an opposite-sign bracket."""
    history: list[tuple[float, float]] = [
        (bracket.tau_lo, bracket.value_lo), (bracket.tau_hi, bracket.value_hi)]
    flat = (abs(bracket.value_lo) < tol.bvp_tol
            and abs(bracket.value_hi) < tol.bvp_tol)
    if not (bracket.value_lo * bracket.value_hi < 0.0) and not flat:
        raise ShootingError(
            "bracket endpoint values do not have opposite signs: "
            f"{bracket.value_lo!r}, {bracket.value_hi!r}")
    if flat:
        # the endpoint map vanishes across the whole bracket (a continuum
        # of roots, e.g. a resonant linear problem): accept any defect-clean
        # candidate, starting from the bracket midpoint
        for frac in (0.5, 0.25, 0.75, 0.125, 0.875):
            tau = bracket.tau_lo + frac * (bracket.tau_hi - bracket.tau_lo)
            f_tau = _evaluate(nspec, tau, tol)
            history.append((tau, f_tau))
            if abs(f_tau) < tol.bvp_tol:
                accepted = _accept(nspec, tau, tol)
                if accepted is not None:
                    traj, endpoint, defect = accepted
                    return ShootingResult(
                        tau_star=tau, solution=traj,
                        endpoint_residual=endpoint, bvp_residual=defect,
                        bracket=bracket, history=tuple(history),
                        iterations=len(history),
                        notices=("endpoint map is flat across the bracket; "
                                 "accepted a defect-clean member of the "
                                 "solution continuum",))
        raise ShootingError(
            "flat endpoint map but no defect-clean candidate found", history)

    result = _bisect(nspec, bracket.tau_lo, bracket.value_lo,
                     bracket.tau_hi, bracket.value_hi, tol, history,
                     rescans_left=2)
    tau_star, traj, endpoint, defect, iters, notices = result
    return ShootingResult(
        tau_star=tau_star, solution=traj, endpoint_residual=endpoint,
        bvp_residual=defect, bracket=bracket, history=tuple(history),
        iterations=iters, notices=tuple(notices))


def _evaluate(nspec: NormalizedProblem, tau: float, tol: Tolerances) -> float:
    return solve_shooting_ivp(nspec, tau, tol).u1


def _bisect(nspec, lo, f_lo, hi, f_hi, tol, history, rescans_left):
    notices: list[str] = []
    iters = 0
    skip_budget = 5
    while True:
        iters += 1
        width = hi - lo
        if width < 1e-13 * max(1.0, abs(lo), abs(hi)):
            # stagnation: the bracket collapsed without an accepted root
            res = _rescan(nspec, lo, hi, tol, history, rescans_left, notices)
            if res is not None:
                return res
            raise ShootingError(
                f"residual stagnation: bracket collapsed to [{lo!r}, {hi!r}] "
                "without a defect-clean root", history)
        if iters > 300:
            raise ShootingError("bisection iteration budget exhausted", history)
        mid = 0.5 * (lo + hi)
        if mid == 0.0:
            # tau = 0 yields the documented trivial branch; judge it by the
            # defect like any other candidate, but off-center to keep the
            # sign bisection meaningful
            mid = lo + 0.4999 * width
        f_mid = _evaluate(nspec, mid, tol)
        history.append((mid, f_mid))
        if abs(f_mid) < tol.bvp_tol:
            accepted = _accept(nspec, mid, tol)
            if accepted is not None:
                traj, endpoint, defect = accepted
                return mid, traj, endpoint, defect, iters, notices
            notices.append(
                f"candidate tau = {mid!r} rejected by the defect check "
                "(branch artifact); continuing")
            skip_budget -= 1
            if skip_budget <= 0:
                res = _rescan(nspec, lo, hi, tol, history, rescans_left, notices)
                if res is not None:
                    return res
                raise ShootingError(
                    "repeated defect-check rejections near "
                    f"tau = {mid!r}", history)
            # nudge the midpoint off the artifact and continue
            mid = lo + 0.37 * width
            f_mid = _evaluate(nspec, mid, tol)
            history.append((mid, f_mid))
        if f_lo * f_mid < 0.0:
            hi, f_hi = mid, f_mid
        elif f_mid * f_hi < 0.0:
            lo, f_lo = mid, f_mid
        else:
            # sign anomaly: the midpoint agrees with both endpoints (only
            # possible through f_mid == 0 handled above, or noise); rescan
            res = _rescan(nspec, lo, hi, tol, history, rescans_left, notices)
            if res is not None:
                return res
            raise ShootingError(
                f"unresolvable sign anomaly in [{lo!r}, {hi!r}]", history)


def _accept(nspec, tau, tol):
    tight = _tighter(tol)
    traj = solve_shooting_ivp(nspec, tau, tight)
    endpoint = abs(traj.u1)
    if endpoint >= tol.bvp_tol:
        return None
    defect = bvp_defect(nspec, traj)
    if defect >= tol.defect_tol:
        return None
    return traj, endpoint, defect


def _rescan(nspec, lo, hi, tol, history, rescans_left, notices):
    """Dense tau-scan of the stalled sub-interval to relocate a sign change."""
    if rescans_left <= 0:
        return None
    center = 0.5 * (lo + hi)
    w = max(abs(hi - lo) * 512.0, 1e-6 * max(1.0, abs(center)))
    taus = np.linspace(center - w, center + w, 1024)
    vals = []
    for t in taus:
        v = _evaluate(nspec, float(t), tol)
        vals.append(v)
        history.append((float(t), v))
    notices.append(
        f"dense rescan of [{taus[0]!r}, {taus[-1]!r}] (1024 points)")
    for i in range(len(taus) - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
            if abs(vals[i]) < tol.bvp_tol:
                accepted = _accept(nspec, float(taus[i]), tol)
                if accepted is not None:
                    traj, endpoint, defect = accepted
                    return float(taus[i]), traj, endpoint, defect, 0, notices
            if vals[i] * vals[i + 1] < 0.0:
                return _bisect(nspec, float(taus[i]), vals[i],
                               float(taus[i + 1]), vals[i + 1], tol, history,
                               rescans_left - 1)
    return None
