"""Landesman-Lazer integrals and the resonant solvability verdict.

At a resonant lambda the solvability of the Dirichlet problem is decided
by the sign of

    I(u) = int_0^1 ( f_plus u+  -  f_minus u- ) dx

evaluated on the half-eigenfunctions u_{k,min} and u_{k,max}:

  * case A  (lambda_{k,min} = lambda_{k,max}):  I(u_{k,min}) * I(u_{k,max}) > 0
  * case B1 (lambda = lambda_{k,min} < lambda_{k,max}):  I(u_{k,min}) < 0
  * case B2 (lambda_{k,min} < lambda_{k,max} = lambda):  I(u_{k,max}) > 0

The integrand is smooth between eigenfunction zeros and has a kink at
them, so the quadrature splits the panels there.  Strict inequalities are
only asserted outside a noise floor combining the quadrature error and an
eigenfunction-accuracy allowance; for p > 2 the verdict additionally
requires the coefficient condition at critical points to hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .core import MINUS, PLUS, ProblemSpec, Tolerances
from .exprlang import Expr, compile_expr
from .ivp import Trajectory, solve_half_eig_ivp
from .spectrum import (Classification, CLambdaReport, SpectrumSlice,
                       check_C_lambda, classify_lambda)

__all__ = ["LLReport", "ll_integral", "ll_verdict", "QuadratureError"]


class QuadratureError(RuntimeError):
    pass


def ll_integral(f_plus: Expr, f_minus: Expr, eigenfunction: Trajectory,
                tol: Tolerances) -> tuple[float, float]:
    """Adaptive quadrature of f_plus u+ - f_minus u- over [0, 1].

    Splits at the eigenfunction's recorded zeros; on a one-signed panel the
    integrand reduces to f_plus * u (u > 0) or f_minus * u (u < 0), which
    is smooth.  Returns (value, error estimate).
    """
    fp = compile_expr(f_plus)
    fm = compile_expr(f_minus)
    traj = eigenfunction
    cuts = [0.0, *traj.u_zeros, 1.0]
    total = 0.0
    err = 0.0
    npanels = max(1, len(cuts) - 1)
    for a, b in zip(cuts, cuts[1:]):
        if b - a < 1e-13:
            continue
        mid = traj.u(0.5 * (a + b))
        if mid > 0.0:
            integrand = lambda x: fp(x) * traj.u(x)
        elif mid < 0.0:
            integrand = lambda x: fm(x) * traj.u(x)
        else:
            continue  # identically-zero panel contributes nothing
        v, e = quad(integrand, a, b, epsabs=tol.quad_tol / npanels,
                    epsrel=1e-12, limit=200)
        if not math.isfinite(v):
            raise QuadratureError(f"quadrature diverged on panel ({a}, {b})")
        total += v
        err += abs(e)
    return total, err


@dataclass(frozen=True)
class LLReport:
    """Solvability report at (or away from) resonance.

    ``verdict`` is one of 'solvable_by_theorem', 'condition_fails',
    'inconclusive', or None when the problem is not resonant (case
    'not_resonant' carries no verdict).
    """
    case: str              # 'A' | 'B1' | 'B2' | 'not_resonant'
    k: int | None
    I_min: float | None
    I_min_err: float | None
    I_max: float | None
    I_max_err: float | None
    product: float | None
    verdict: str | None
    quadrature_error: float
    threshold_min: float | None
    threshold_max: float | None
    c_lambda: CLambdaReport | None
    classification: Classification
    notes: tuple[str, ...]
    tolerances: Tolerances

    def to_dict(self) -> dict:
        return {
            "case": self.case, "k": self.k,
            "I_min": self.I_min, "I_min_err": self.I_min_err,
            "I_max": self.I_max, "I_max_err": self.I_max_err,
            "product": self.product, "verdict": self.verdict,
            "quadrature_error": self.quadrature_error,
            "threshold_min": self.threshold_min,
            "threshold_max": self.threshold_max,
            "c_lambda": None if self.c_lambda is None else self.c_lambda.to_dict(),
            "classification": self.classification.to_dict(),
            "notes": list(self.notes),
            "tolerances": self.tolerances.to_dict(),
        }


def ll_verdict(spec: ProblemSpec, sl: SpectrumSlice,
               tol: Tolerances | None = None) -> LLReport:
    """Classify spec.lam against the slice and evaluate the theorem's case."""
    tol = tol or sl.tol
    sl.check_coefficients_match(spec)
    cls = classify_lambda(sl, spec.lam)
    if cls.kind != "resonant":
        return LLReport(case="not_resonant", k=None,
                        I_min=None, I_min_err=None, I_max=None, I_max_err=None,
                        product=None, verdict=None, quadrature_error=0.0,
                        threshold_min=None, threshold_max=None,
                        c_lambda=None, classification=cls, notes=(),
                        tolerances=tol)

    k = cls.k
    notes: list[str] = []
    # eigenfunction-accuracy allowance on top of the quadrature error
    allowance = 10.0 * tol.eig_tol * spec.f_limit_sup

    pair_min = sl.pairs[(k, sl.nu_min(k))]
    pair_max = sl.pairs[(k, sl.nu_max(k))]
    tie = sl.is_tie(k)

    c_rep: CLambdaReport | None = None
    if spec.p > 2.0:
        lam_n = spec.lam - sl.shift
        tp = (pair_min.trajectory if sl.nu_min(k) == PLUS
              else pair_max.trajectory if sl.nu_max(k) == PLUS
              else solve_half_eig_ivp(sl.nspec, lam_n, PLUS, tol))
        tm = (pair_min.trajectory if sl.nu_min(k) == MINUS
              else pair_max.trajectory if sl.nu_max(k) == MINUS
              else solve_half_eig_ivp(sl.nspec, lam_n, MINUS, tol))
        c_rep = check_C_lambda(sl.nspec, tp, tm, tol)
        if not c_rep.satisfied:
            notes.append("condition (C_lambda) not satisfied; the theorem "
                         "does not apply for p > 2")

    if tie:
        case = "A"
        I_min, e_min = ll_integral(spec.f_plus, spec.f_minus,
                                   pair_min.trajectory, tol)
        I_max, e_max = ll_integral(spec.f_plus, spec.f_minus,
                                   pair_max.trajectory, tol)
        thr_min = e_min + allowance
        thr_max = e_max + allowance
        product = I_min * I_max
        if abs(I_min) <= thr_min or abs(I_max) <= thr_max:
            verdict = "inconclusive"
            notes.append("an integral sits inside the noise floor; the "
                         "strict inequality cannot be asserted")
        elif product > 0.0:
            verdict = "solvable_by_theorem"
        else:
            verdict = "condition_fails"
    else:
        resonant_nu = cls.nus[0]
        if resonant_nu == sl.nu_min(k):
            case = "B1"
            I_min, e_min = ll_integral(spec.f_plus, spec.f_minus,
                                       pair_min.trajectory, tol)
            I_max = e_max = None
            thr_min = e_min + allowance
            thr_max = None
            product = None
            if abs(I_min) <= thr_min:
                verdict = "inconclusive"
            elif I_min < 0.0:
                verdict = "solvable_by_theorem"
            else:
                verdict = "condition_fails"
        else:
            case = "B2"
            I_max, e_max = ll_integral(spec.f_plus, spec.f_minus,
                                       pair_max.trajectory, tol)
            I_min = e_min = None
            thr_max = e_max + allowance
            thr_min = None
            product = None
            if abs(I_max) <= thr_max:
                verdict = "inconclusive"
            elif I_max > 0.0:
                verdict = "solvable_by_theorem"
            else:
                verdict = "condition_fails"

    if c_rep is not None and not c_rep.satisfied and verdict == "solvable_by_theorem":
        verdict = "inconclusive"

    quad_err = sum(e for e in (e_min, e_max) if e is not None)
    return LLReport(case=case, k=k,
                    I_min=I_min, I_min_err=e_min, I_max=I_max, I_max_err=e_max,
                    product=product, verdict=verdict,
                    quadrature_error=quad_err,
                    threshold_min=thr_min, threshold_max=thr_max,
                    c_lambda=c_rep, classification=cls, notes=tuple(notes),
                    tolerances=tol)
