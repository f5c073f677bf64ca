"""End-to-end pipelines shared by the HTTP service and the CLI client.

Each run_* function takes validated problem data, executes the numerical
pipeline, and returns a JSON-ready dict (schema version 1).  Numeric
payloads that belong in CSV files (spectrum tables, Fucik points, solution
samples) are included as arrays so a thin client can write them locally.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import (MINUS, PLUS, ProblemSpec, Sign, Tolerances, normalize,
                   sign_label, validate_hypotheses)
from .ivp import solve_half_eig_ivp
from .landesman import ll_verdict
from .solver import Bracket, ShootingError, bvp_defect, find_bracket, shoot
from .spectrum import (SpectrumSlice, classify_lambda, spectrum_slice,
                       trace_fucik)
from .variational import boundary_identity, small_ttau_sign, solve_variational

SCHEMA_VERSION = 1

__all__ = ["run_spectrum", "run_fucik", "run_check", "run_solve",
           "run_sensitivity", "SCHEMA_VERSION"]


def _base(tol: Tolerances) -> dict:
    return {"schema": SCHEMA_VERSION, "tolerances": tol.to_dict()}


def run_spectrum(spec: ProblemSpec, k_max: int, tol: Tolerances) -> dict:
    sl = spectrum_slice(spec, k_max, tol)
    out = _base(tol)
    out["problem"] = spec.describe()
    out["k_max"] = k_max
    out["pairs"] = sl.rows()
    out["per_k"] = [
        {"k": k, "lambda_min": sl.lam_min(k), "lambda_max": sl.lam_max(k),
         "nu_min": sign_label(sl.nu_min(k)), "tie": sl.is_tie(k)}
        for k in range(k_max + 1)]
    return out


def run_fucik(p: float, k: int, branch: Sign,
              alpha_plus: Sequence[float], tol: Tolerances) -> dict:
    pts = trace_fucik(p, k, branch, alpha_plus, tol)
    out = _base(tol)
    out["p"] = p
    out["k"] = k
    out["branch"] = sign_label(branch)
    out["points"] = [pt.to_dict() for pt in pts]
    return out


def run_check(spec: ProblemSpec, k_max: int, tol: Tolerances) -> dict:
    validation = validate_hypotheses(spec)
    sl = spectrum_slice(spec, k_max, tol)
    report = ll_verdict(spec, sl, tol)
    out = _base(tol)
    out["problem"] = spec.describe()
    out["validation"] = validation.to_dict()
    out["classification"] = report.classification.to_dict()
    out["landesman"] = report.to_dict()
    return out


def _solution_payload(nspec, traj, samples: int) -> dict:
    xs = np.linspace(0.0, 1.0, samples)
    return {
        "x": np.atleast_1d(xs).tolist(),
        "u": np.atleast_1d(traj.u(xs)).tolist(),
        "uprime": np.atleast_1d(traj.uprime(xs)).tolist(),
    }


def run_solve(spec: ProblemSpec, k_max: int, tol: Tolerances,
              manual_bracket: tuple[float, float] | None = None,
              samples: int = 1025) -> dict:
    nspec = normalize(spec)
    out = _base(tol)
    out["problem"] = spec.describe()

    if manual_bracket is not None:
        lo, hi = manual_bracket
        from .ivp import solve_shooting_ivp
        v_lo = solve_shooting_ivp(nspec, lo, tol).u1
        v_hi = solve_shooting_ivp(nspec, hi, tol).u1
        bracket = Bracket(tau_lo=lo, tau_hi=hi, value_lo=v_lo, value_hi=v_hi,
                          ttau0=math.nan)
        result = shoot(nspec, bracket, tol)
        out["mode"] = "manual_bracket"
        out["landesman"] = None
    else:
        sl = spectrum_slice(spec, k_max, tol)
        report = ll_verdict(spec, sl, tol)
        out["landesman"] = report.to_dict()
        cls = report.classification
        if cls.kind != "resonant":
            raise ShootingError(
                f"lambda is not resonant ({cls.kind}); the resonant solver "
                "does not apply (supply run.tau_bracket to shoot anyway)")
        if spec.f_is_zero:
            # any positive multiple of the half-eigenfunction already solves
            # the problem; return the normalized eigenfunction
            k = cls.k
            nu = cls.nus[0]
            pair = sl.pairs[(k, nu)]
            traj = pair.trajectory
            out["mode"] = "f_zero_shortcircuit"
            out["notices"] = [
                "f is identically zero at a resonant lambda: every positive "
                "multiple of the half-eigenfunction solves the problem; "
                "returning the normalized one"]
            out["result"] = {
                "tau_star": float(nu),
                "endpoint_residual": pair.residual,
                "bvp_residual": bvp_defect(nspec, traj),
                "bracket": None, "iterations": 0, "history_length": 0,
                "notices": out["notices"],
            }
            out["solution"] = _solution_payload(nspec, traj, samples)
            return out
        bracket = find_bracket(nspec, report, tol)
        result = shoot(nspec, bracket, tol)
        out["mode"] = "landesman_bracket"

    out["result"] = result.to_dict()
    out["solution"] = _solution_payload(nspec, result.solution, samples)
    return out


def run_sensitivity(spec: ProblemSpec, k_max: int, tol: Tolerances) -> dict:
    nspec = normalize(spec)
    sl = spectrum_slice(spec, k_max, tol)
    cls = classify_lambda(sl, spec.lam)
    if cls.kind != "resonant":
        raise ShootingError(
            f"sensitivity at ttau = 0 is reported for resonant problems; "
            f"lambda classified as {cls.kind}")
    k = cls.k
    out = _base(tol)
    out["problem"] = spec.describe()
    out["classification"] = cls.to_dict()
    per_nu = {}
    for nu in (PLUS, MINUS):
        resonant = any(nu == n for n in cls.nus)
        if resonant:
            base = sl.pairs[(k, nu)]
            sens = solve_variational(nspec, base, nu, tol)
            ident = boundary_identity(nspec, base, sens, tol)
            per_nu[sign_label(nu)] = {
                "resonant": True,
                "sensitivity": sens.to_dict(),
                "identity": ident.to_dict(),
            }
        else:
            base = solve_half_eig_ivp(nspec, 0.0, nu, tol)
            sens = solve_variational(nspec, base, nu, tol)
            per_nu[sign_label(nu)] = {
                "resonant": False,
                "sensitivity": sens.to_dict(),
                "identity": None,
                "note": "endpoint does not vanish for this sign; the "
                        "boundary identity applies to half-eigenfunctions only",
            }
    out["per_nu"] = per_nu
    out["small_ttau"] = small_ttau_sign(spec, sl, tol).to_dict()
    return out
