import math

import pytest

from halfspec import exprlang as el
from halfspec.core import MINUS, PLUS, ProblemSpec
from halfspec.ivp import solve_half_eig_ivp
from halfspec.landesman import ll_integral, ll_verdict

PI2 = math.pi ** 2
TWO_OVER_PI2 = 2.0 / PI2  # int_0^1 sin(pi x)/pi dx


def test_integral_positive_eigenfunction(case_a_slice, tol):
    # u_{0,+} = sin(pi x)/pi, f+ = 1, f- = -1: value = int u+ = 2/pi^2
    val, err = ll_integral(el.parse("1"), el.parse("-1"),
                           case_a_slice.pairs[(0, PLUS)].trajectory, tol)
    assert val == pytest.approx(TWO_OVER_PI2, abs=1e-8)
    assert err < 1e-9


def test_integral_negative_eigenfunction(case_a_slice, tol):
    # u_{0,-} = -sin(pi x)/pi: u+ = 0 and -f- u- integrates to +2/pi^2
    val, err = ll_integral(el.parse("1"), el.parse("-1"),
                           case_a_slice.pairs[(0, MINUS)].trajectory, tol)
    assert val == pytest.approx(TWO_OVER_PI2, abs=1e-8)


def test_integral_zero_limits(case_a_slice, tol):
    val, err = ll_integral(el.parse("0"), el.parse("0"),
                           case_a_slice.pairs[(0, PLUS)].trajectory, tol)
    assert val == 0.0


def test_integral_splits_at_zeros(case_a_slice, tol):
    # k=1 eigenfunction changes sign once; the kink must not spoil accuracy
    pair = case_a_slice.pairs[(1, PLUS)]
    val, err = ll_integral(el.parse("1"), el.parse("-1"), pair.trajectory, tol)
    # u = sin(2 pi x)/(2 pi): int |u| = 2/(2pi)^2 + 2/(2pi)^2 = 1/pi^2
    assert val == pytest.approx(1.0 / PI2, abs=1e-8)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

def test_case_a_solvable(case_a_spec, case_a_slice, tol):
    rep = ll_verdict(case_a_spec, case_a_slice, tol)
    assert rep.case == "A"
    assert rep.k == 0
    assert rep.I_min == pytest.approx(TWO_OVER_PI2, abs=1e-8)
    assert rep.I_max == pytest.approx(TWO_OVER_PI2, abs=1e-8)
    assert rep.product == pytest.approx(TWO_OVER_PI2 ** 2, rel=1e-6)
    assert rep.verdict == "solvable_by_theorem"


def test_case_a_condition_fails(case_a_slice, tol):
    # shifting f by c = 2 gives f+ = 3, f- = 1:
    # I over u_{0,+} = 3 * 2/pi^2, over u_{0,-} = -1 * 2/pi^2 -> product < 0
    spec = ProblemSpec.from_strings(
        p=2.0, a_plus="pi^2", a_minus="pi^2",
        f="tanh(xi) + 2", f_plus="3", f_minus="1")
    rep = ll_verdict(spec, case_a_slice, tol)
    assert rep.case == "A"
    assert rep.I_min == pytest.approx(3 * TWO_OVER_PI2, abs=1e-7)
    assert rep.I_max == pytest.approx(-TWO_OVER_PI2, abs=1e-7)
    assert rep.product < 0.0
    assert rep.verdict == "condition_fails"


def test_case_a_zero_f_inconclusive(case_a_slice, tol):
    spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2")
    rep = ll_verdict(spec, case_a_slice, tol)
    assert rep.case == "A"
    assert rep.product == 0.0
    assert rep.verdict == "inconclusive"


def test_case_b1_solvable(b1_spec, jump_slice, tol):
    # lambda = pi^2 - 1 = lambda_{0,min}; u_{0,min} = u_{0,+} > 0 and
    # f_pm = -1 give I_min = -int u < 0
    rep = ll_verdict(b1_spec, jump_slice, tol)
    assert rep.case == "B1"
    assert rep.I_min < 0.0
    assert rep.I_max is None
    assert rep.verdict == "solvable_by_theorem"


def test_case_b2(jump_spec, jump_slice, tol):
    # lambda = pi^2 = lambda_{0,max}; u_{0,max} = u_{0,-} < 0 has u+ = 0,
    # so I_max = -f_- u-: with f_pm = -1 this is +int u- > 0 -> solvable
    spec = ProblemSpec.from_strings(
        p=2.0, a_plus="1", a_minus="0", lam=PI2,
        f="-tanh(xi)^2", f_plus="-1", f_minus="-1")
    rep = ll_verdict(spec, jump_slice, tol)
    assert rep.case == "B2"
    assert rep.I_max == pytest.approx(TWO_OVER_PI2, abs=1e-7)
    assert rep.verdict == "solvable_by_theorem"
    # flipping f makes I_max < 0 and the condition fails
    spec2 = ProblemSpec.from_strings(
        p=2.0, a_plus="1", a_minus="0", lam=PI2,
        f="tanh(xi)^2", f_plus="1", f_minus="1")
    rep2 = ll_verdict(spec2, jump_slice, tol)
    assert rep2.case == "B2"
    assert rep2.I_max == pytest.approx(-TWO_OVER_PI2, abs=1e-7)
    assert rep2.verdict == "condition_fails"


def test_not_resonant(jump_slice, tol):
    spec = ProblemSpec.from_strings(p=2.0, a_plus="1", a_minus="0",
                                    lam=PI2 - 0.5, f="tanh(xi)",
                                    f_plus="1", f_minus="-1")
    rep = ll_verdict(spec, jump_slice, tol)
    assert rep.case == "not_resonant"
    assert rep.verdict is None
    assert rep.classification.kind == "inside_pair_gap"


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

def test_sign_equivariance(b1_spec, jump_slice, tol):
    rep = ll_verdict(b1_spec, jump_slice, tol)
    flipped = ProblemSpec.from_strings(
        p=2.0, a_plus="1", a_minus="0", lam=math.pi ** 2 - 1.0,
        f="tanh(xi)^2", f_plus="1", f_minus="1")
    rep2 = ll_verdict(flipped, jump_slice, tol)
    assert rep2.I_min == pytest.approx(-rep.I_min, abs=1e-9)
    assert rep.verdict == "solvable_by_theorem"
    assert rep2.verdict == "condition_fails"


def test_scaling_invariance(case_a_spec, case_a_slice, tol):
    # re-integrating the eigenfunction with u'(0) = nu*t scales the
    # integral by t and leaves the verdict unchanged
    base, _ = ll_integral(case_a_spec.f_plus, case_a_spec.f_minus,
                          case_a_slice.pairs[(0, PLUS)].trajectory, tol)
    for t in (0.5, 2.0):
        traj = solve_half_eig_ivp(case_a_slice.nspec,
                                  case_a_slice.pairs[(0, PLUS)].lam,
                                  PLUS, tol, slope_scale=t)
        val, _ = ll_integral(case_a_spec.f_plus, case_a_spec.f_minus,
                             traj, tol)
        assert val == pytest.approx(t * base, rel=1e-7)
        assert (val > 0) == (base > 0)


def test_report_serializes(case_a_spec, case_a_slice, tol):
    import json
    rep = ll_verdict(case_a_spec, case_a_slice, tol)
    payload = json.dumps(rep.to_dict(), sort_keys=True)
    assert "solvable_by_theorem" in payload
    assert "tolerances" in json.loads(payload)
