import math
from dataclasses import replace

import numpy as np
import pytest

from halfspec.core import MINUS, PLUS, ProblemSpec, Tolerances, normalize
from halfspec.landesman import ll_verdict
from halfspec.solver import (Bracket, ShootingError, bvp_defect, find_bracket,
                             shoot)
from halfspec.spectrum import spectrum_slice

PI2 = math.pi ** 2


@pytest.fixture(scope="module")
def case_a(tol):
    spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2",
                                    f="tanh(xi)", f_plus="1", f_minus="-1")
    sl = spectrum_slice(spec, 1, tol)
    report = ll_verdict(spec, sl, tol)
    return spec, sl, report


def test_find_bracket_case_a(case_a, tol):
    spec, sl, report = case_a
    nspec = normalize(spec)
    bracket = find_bracket(nspec, report, tol)
    assert bracket.ttau0 == pytest.approx(1e-2)
    assert bracket.tau_hi == pytest.approx(1.0 / bracket.ttau0)
    assert bracket.tau_lo == -bracket.tau_hi
    assert bracket.value_lo * bracket.value_hi < 0.0


def test_find_bracket_requires_solvable(case_a, tol):
    spec, sl, _ = case_a
    zero_spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2")
    report = ll_verdict(zero_spec, sl, tol)
    assert report.verdict == "inconclusive"
    with pytest.raises(ShootingError):
        find_bracket(normalize(zero_spec), report, tol)


def test_find_bracket_no_split_for_zero_f(case_a, tol):
    # with f == 0 every rescaled endpoint vanishes: the search must fail
    # loudly rather than hand back a fake bracket
    zero_spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2")
    with pytest.raises(ShootingError) as err:
        find_bracket(normalize(zero_spec), None, tol)
    assert "sign split" in str(err.value)


def test_shoot_case_a(case_a, tol):
    spec, sl, report = case_a
    nspec = normalize(spec)
    bracket = find_bracket(nspec, report, tol)
    result = shoot(nspec, bracket, tol)
    assert result.endpoint_residual < tol.bvp_tol
    assert result.bvp_residual < tol.defect_tol
    # history endpoints reproduce the strict opposite signs of the bracket
    assert result.history[0][1] * result.history[1][1] < 0.0


def test_shoot_rejects_bad_bracket(case_a, tol):
    spec, sl, report = case_a
    nspec = normalize(spec)
    bad = Bracket(tau_lo=-1.0, tau_hi=1.0, value_lo=0.5, value_hi=0.3,
                  ttau0=math.nan)
    with pytest.raises(ShootingError):
        shoot(nspec, bad, tol)


def test_defect_invariant(case_a, tol):
    # the accepted trajectory satisfies the integrated-form equation on a
    # 1025-point grid
    spec, sl, report = case_a
    nspec = normalize(spec)
    result = shoot(nspec, find_bracket(nspec, report, tol), tol)
    assert bvp_defect(nspec, result.solution, 1025) < tol.defect_tol


def test_defect_rejects_trivial_branch(tol):
    # u == 0 fails the defect check whenever f(x, 0) != 0
    spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2",
                                    f="sin(2*pi*x)")
    nspec = normalize(spec)
    from halfspec.ivp import solve_shooting_ivp
    trivial = solve_shooting_ivp(nspec, 0.0, tol)
    assert bvp_defect(nspec, trivial) > 0.1


def test_linear_resonant_manual_bracket(tol):
    # -u'' - pi^2 u = sin(2 pi x): solutions are B sin(pi x) +
    # sin(2 pi x)/(3 pi^2); a bracket centered at tau = u'(0) = 2/(3 pi)
    # pins the B = 0 member
    spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2",
                                    f="sin(2*pi*x)")
    nspec = normalize(spec)
    center = 2.0 / (3.0 * math.pi)
    from halfspec.ivp import solve_shooting_ivp
    lo, hi = center - 0.25, center + 0.25
    bracket = Bracket(tau_lo=lo, tau_hi=hi,
                      value_lo=solve_shooting_ivp(nspec, lo, tol).u1,
                      value_hi=solve_shooting_ivp(nspec, hi, tol).u1,
                      ttau0=math.nan)
    result = shoot(nspec, bracket, tol)
    assert result.tau_star == pytest.approx(center, abs=1e-12)
    xs = np.linspace(0.0, 1.0, 257)
    exact = np.sin(2 * np.pi * xs) / (3 * PI2)
    assert np.max(np.abs(result.solution.u(xs) - exact)) < 1e-7
    assert any("flat" in n for n in result.notices)


def test_asymmetric_solve_and_reflection(tol):
    # an x-dependent term moves tau* away from 0; reflecting the problem
    # (f(x, xi) -> -f(x, -xi), a+ <-> a-) maps u -> -u and tau* -> -tau*
    spec = ProblemSpec.from_strings(
        p=2.0, a_plus="pi^2", a_minus="pi^2",
        f="2/pi*atan(xi) + 0.3*sin(pi*x)",
        f_plus="1 + 0.3*sin(pi*x)", f_minus="-1 + 0.3*sin(pi*x)")
    refl = ProblemSpec.from_strings(
        p=2.0, a_plus="pi^2", a_minus="pi^2",
        f="2/pi*atan(xi) - 0.3*sin(pi*x)",
        f_plus="1 - 0.3*sin(pi*x)", f_minus="-1 - 0.3*sin(pi*x)")
    results = []
    for s in (spec, refl):
        sl = spectrum_slice(s, 1, tol)
        report = ll_verdict(s, sl, tol)
        assert report.verdict == "solvable_by_theorem"
        nspec = normalize(s)
        res = shoot(nspec, find_bracket(nspec, report, tol), tol)
        assert res.endpoint_residual < tol.bvp_tol
        assert res.bvp_residual < tol.defect_tol
        results.append(res)
    a, b = results
    assert abs(a.tau_star) > 1e-3
    assert b.tau_star == pytest.approx(-a.tau_star, rel=1e-6)
    xs = np.linspace(0.0, 1.0, 65)
    assert np.max(np.abs(np.atleast_1d(a.solution.u(xs))
                         + np.atleast_1d(b.solution.u(xs)))) < 1e-6


def test_rerun_with_tighter_tolerances_is_stable(case_a, tol):
    spec, sl, report = case_a
    nspec = normalize(spec)
    res1 = shoot(nspec, find_bracket(nspec, report, tol), tol)
    tighter = replace(tol, ode_rel=tol.ode_rel / 10.0,
                      ode_abs=tol.ode_abs / 10.0)
    res2 = shoot(nspec, find_bracket(nspec, report, tighter), tighter)
    # both runs accept near the same root; the case-A spec's root is tau=0
    assert abs(res1.tau_star - res2.tau_star) < 1e-4
    assert res2.endpoint_residual < tighter.bvp_tol


def test_result_serializes(case_a, tol):
    import json
    spec, sl, report = case_a
    nspec = normalize(spec)
    res = shoot(nspec, find_bracket(nspec, report, tol), tol)
    d = res.to_dict()
    json.dumps(d)
    assert d["bracket"]["ttau0"] == pytest.approx(1e-2)
    assert d["iterations"] >= 1
