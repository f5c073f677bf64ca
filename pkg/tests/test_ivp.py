import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp as scipy_solve_ivp

from conftest import pi_p, plap_eigenvalue
from halfspec.core import (MINUS, PLUS, ProblemSpec, Tolerances, normalize,
                           phi_p)
from halfspec import ivp
from halfspec.ivp import (DegenerateFieldError, Trajectory, count_zeros,
                          solve_half_eig_ivp, solve_rescaled_ivp,
                          solve_shooting_ivp)

PI2 = math.pi ** 2


@pytest.fixture(scope="module")
def zero_nspec():
    return normalize(ProblemSpec.from_strings(p=2.0))


# ---------------------------------------------------------------------------
# closed-form trajectories
# ---------------------------------------------------------------------------

def test_sine_eigenfunction(zero_nspec, tol):
    # -u'' = pi^2 u, u(0)=0, u'(0)=1  ->  u = sin(pi x)/pi
    traj = solve_half_eig_ivp(zero_nspec, PI2, PLUS, tol)
    assert abs(traj.u1) < 1e-9
    assert len(traj.u_zeros) == 0
    # node values carry the integrator accuracy; between nodes the cubic
    # Hermite dense output adds an O((h omega)^4) interpolation term
    assert np.max(np.abs(traj.us - np.sin(np.pi * traj.xs) / np.pi)) < 1e-10
    xs = np.linspace(0.05, 0.95, 19)
    assert np.max(np.abs(traj.u(xs) - np.sin(np.pi * xs) / np.pi)) < 5e-9
    assert traj.uprime1 == pytest.approx(-1.0, abs=1e-9)


def test_linear_trajectory_at_lambda_zero(zero_nspec, tol):
    # -u'' = 0 with u'(0) = -1  ->  u = -x
    traj = solve_half_eig_ivp(zero_nspec, 0.0, MINUS, tol)
    assert traj.u1 == pytest.approx(-1.0, abs=1e-12)
    assert len(traj.u_zeros) == 0


def test_plap_first_eigenfunction(tol):
    # classical first eigenvalue lambda = (p-1) pi_p^p at p = 3
    nspec = normalize(ProblemSpec.from_strings(p=3.0))
    lam = 2.0 * pi_p(3.0) ** 3
    traj = solve_half_eig_ivp(nspec, lam, PLUS, tol)
    assert abs(traj.u1) < 1e-7
    assert len(traj.u_zeros) == 0


# ---------------------------------------------------------------------------
# zero counting
# ---------------------------------------------------------------------------

def test_count_zeros_classical(zero_nspec, tol):
    # u = sin((k+1) pi x) has k interior zeros
    for k in range(6):
        lam = ((k + 1) * math.pi) ** 2
        traj = solve_half_eig_ivp(zero_nspec, lam, PLUS, tol)
        assert count_zeros(traj) == k
        # zeros sit at j/(k+1)
        for j, z in enumerate(traj.u_zeros, start=1):
            assert z == pytest.approx(j / (k + 1), abs=1e-10)


def test_count_zeros_monotone_x(zero_nspec, tol):
    traj = solve_half_eig_ivp(zero_nspec, (5 * math.pi) ** 2, PLUS, tol)
    zs = traj.u_zeros
    assert all(a < b for a, b in zip(zs, zs[1:]))
    # no u-zero collides with a critical point
    for z in zs:
        assert min(abs(z - v) for v in traj.v_zeros) > 1e-3


def test_degenerate_zero_reported():
    # fabricate a trajectory whose recorded zero has a tiny derivative
    xs = np.array([0.0, 0.5, 1.0])
    z = np.zeros(3)
    traj = Trajectory(p=2.0, xs=xs, us=z, vs=z, dus=z, dvs=z,
                      u_zeros=(0.5,), uprime_at_zeros=(1e-12,),
                      v_zeros=(), u_at_critical=(),
                      rtol=1e-10, atol=1e-12, n_steps=2)
    with pytest.raises(ivp.DegenerateZeroError):
        count_zeros(traj)


# ---------------------------------------------------------------------------
# rescaled family
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def resonant_nspec(case_a_spec_module):
    return normalize(case_a_spec_module)


@pytest.fixture(scope="module")
def case_a_spec_module():
    return ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2",
                                    f="tanh(xi)", f_plus="1", f_minus="-1")


def test_rescaled_at_zero_equals_half_eig(resonant_nspec, tol):
    t0 = solve_rescaled_ivp(resonant_nspec, 0.0, PLUS, tol)
    te = solve_half_eig_ivp(resonant_nspec, 0.0, PLUS, tol)
    xs = np.linspace(0.0, 1.0, 33)
    assert np.max(np.abs(t0.u(xs) - te.u(xs))) < 1e-12


def test_rescaled_continuity_trend(resonant_nspec, tol):
    base = solve_half_eig_ivp(resonant_nspec, 0.0, PLUS, tol)
    gaps = []
    for tt in (1e-2, 1e-3, 1e-4):
        t = solve_rescaled_ivp(resonant_nspec, tt, PLUS, tol)
        gaps.append(abs(t.u1 - base.u1))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_rescaled_growth_bound(resonant_nspec, tol):
    for tt in (0.0, 1e-3, 1e-2):
        t = solve_rescaled_ivp(resonant_nspec, tt, PLUS, tol)
        assert t.check_growth(tol.gronwall_const, tt)


def test_rescaled_flags_above_threshold(resonant_nspec, tol):
    t = solve_rescaled_ivp(resonant_nspec, 0.5, PLUS, tol)
    assert "ttau-above-uniqueness-threshold" in t.flags
    t = solve_rescaled_ivp(resonant_nspec, 1e-3, PLUS, tol)
    assert t.flags == ()


# ---------------------------------------------------------------------------
# shooting family and the scaling relation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("tau", [10.0, -10.0])
def test_scaling_relation(p, tau, tol):
    # direct integration vs the rescaled route agree in u(1)
    a = repr(plap_eigenvalue(p, 0))
    spec = ProblemSpec.from_strings(p=p, a_plus=a, a_minus=a,
                                    f="tanh(xi)", f_plus="1", f_minus="-1")
    nspec = normalize(spec)
    direct = solve_shooting_ivp(nspec, tau, tol)
    assert not any("uniqueness" in f for f in direct.flags)
    nu = PLUS if tau > 0 else MINUS
    rescaled = solve_rescaled_ivp(nspec, 1.0 / abs(tau), nu, tol)
    scaled_u1 = abs(tau) ** (1.0 / (p - 1.0)) * rescaled.u1
    assert direct.u1 == pytest.approx(scaled_u1, rel=1e-7, abs=1e-10)


def test_shooting_linear_closed_form(tol):
    # p=2, a=pi^2, f=0, tau=2: u = 2 sin(pi x)/pi
    spec = ProblemSpec.from_strings(p=2.0, a_plus="pi^2", a_minus="pi^2")
    nspec = normalize(spec)
    traj = solve_shooting_ivp(nspec, 2.0, tol)
    xs = np.linspace(0.0, 1.0, 41)
    assert np.max(np.abs(traj.u(xs) - 2 * np.sin(np.pi * xs) / np.pi)) < 1e-8
    assert abs(traj.u1) < 1e-9


def test_tau_zero_returns_trivial_branch(zero_nspec, tol):
    traj = solve_shooting_ivp(zero_nspec, 0.0, tol)
    assert "tau-zero-trivial-branch" in traj.flags
    xs = np.linspace(0.0, 1.0, 9)
    assert np.max(np.abs(traj.u(xs))) == 0.0


def test_homogeneity_f_zero():
    # f == 0: psi(tau) = tau^(1/(p-1)) Psi_+ for tau > 0; integrate tightly
    # enough that the 1e-9 relative claim is resolvable
    tol = Tolerances(ode_rel=1e-12, ode_abs=1e-14)
    for p in (1.5, 2.0, 3.0):
        spec = ProblemSpec.from_strings(p=p, a_plus="3", a_minus="5")
        nspec = normalize(spec)
        tau = 7.0
        psi = solve_shooting_ivp(nspec, tau, tol)
        base = solve_half_eig_ivp(nspec, 0.0, PLUS, tol)
        scale = tau ** (1.0 / (p - 1.0))
        sup = max(1.0, psi.sup_u)
        # endpoint and nodes resolve the homogeneity to 1e-9 relative;
        # dense samples add the interpolation term of both trajectories
        assert abs(psi.u1 - scale * base.u1) < 1e-9 * sup
        xs = np.linspace(0.0, 1.0, 17)
        ref = scale * np.atleast_1d(base.u(xs))
        assert np.max(np.abs(psi.u(xs) - ref)) < 1e-8 * sup


def test_scaled_view_consistency(zero_nspec, tol):
    traj = solve_half_eig_ivp(zero_nspec, (2 * math.pi) ** 2, PLUS, tol)
    s = 3.0
    view = traj.scaled(s)
    xs = np.linspace(0.0, 1.0, 9)
    assert np.allclose(view.u(xs), s * np.atleast_1d(traj.u(xs)), rtol=0, atol=0)
    assert view.v(0.3) == pytest.approx(s ** (traj.p - 1.0) * traj.v(0.3), rel=1e-15)
    assert view.u_zeros == traj.u_zeros
    assert view.uprime1 == pytest.approx(s * traj.uprime1, rel=1e-14)


# ---------------------------------------------------------------------------
# integrator quality
# ---------------------------------------------------------------------------

def test_consistency_residual(zero_nspec, tol):
    traj = solve_half_eig_ivp(zero_nspec, (3 * math.pi) ** 2, PLUS, tol)
    assert traj.consistency_residual() < 100.0 * (
        tol.ode_rel * traj.sup_u + tol.ode_abs)


def test_convergence_self_test(zero_nspec):
    from dataclasses import replace
    tol = Tolerances(ode_rel=1e-8, ode_abs=1e-10)
    lam = (4 * math.pi) ** 2
    t1 = solve_half_eig_ivp(zero_nspec, lam, PLUS, tol)
    t2 = solve_half_eig_ivp(zero_nspec, lam, PLUS,
                            replace(tol, ode_rel=5e-9, ode_abs=5e-11))
    assert abs(t1.u1 - t2.u1) < t1.endpoint_error_estimate


@pytest.mark.parametrize("p,lam", [(2.0, 55.5), (3.0, 140.0), (1.5, 23.0)])
def test_cross_check_against_scipy(p, lam, tol):
    # an independent integrator on the same field is the accuracy oracle
    spec = ProblemSpec.from_strings(p=p, a_plus="1+sin(pi*x)", a_minus="2")
    nspec = normalize(spec)
    ap = nspec.spec.a_plus_fn
    am = nspec.spec.a_minus_fn

    def rhs(x, y):
        u, v = y
        up = np.sign(v) * np.abs(v) ** (1.0 / (p - 1.0))
        if u > 0:
            g = -(ap(x) + lam) * u ** (p - 1.0)
        elif u < 0:
            g = (am(x) + lam) * (-u) ** (p - 1.0)
        else:
            g = 0.0
        return [up, g]

    ref = scipy_solve_ivp(rhs, (0.0, 1.0), [0.0, 1.0],
                          rtol=1e-12, atol=1e-14, dense_output=True)
    tight = Tolerances(ode_rel=1e-12, ode_abs=1e-14)
    traj = solve_half_eig_ivp(nspec, lam, PLUS, tight)
    assert traj.u1 == pytest.approx(ref.y[0, -1], abs=2e-9)
    xs = np.linspace(0.1, 0.9, 9)
    assert np.max(np.abs(traj.u(xs) - ref.sol(xs)[0])) < 2e-8


def test_degeneracy_guard_fires():
    # p > 2 with coefficients that vanish where the trajectory is positive:
    # u' and v' vanish together away from u = 0 and the field aborts
    spec = ProblemSpec.from_strings(p=3.0, a_plus="0", a_minus="1")
    nspec = normalize(spec)
    from halfspec.ivp import _base_field
    rhs = _base_field(nspec, 0.0, None)
    with pytest.raises(DegenerateFieldError):
        rhs(0.5, 1.0, 1e-15)


def test_csv_dump(zero_nspec, tol, tmp_path):
    traj = solve_half_eig_ivp(zero_nspec, PI2, PLUS, tol)
    path = tmp_path / "traj.csv"
    traj.write_csv(path, n=11)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,u,v,uprime"
    assert len(lines) == 12
    mid = [float(t) for t in lines[6].split(",")]
    assert mid[0] == pytest.approx(0.5)
    assert mid[1] == pytest.approx(math.sin(math.pi / 2) / math.pi, abs=1e-9)
