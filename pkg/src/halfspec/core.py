"""Problem data and the scalar p-Laplacian primitives.

The Dirichlet problem under study on (0, 1) is

    -phi_p(u')' - a_plus(x) phi_p(u+) + a_minus(x) phi_p(u-)
        - lambda phi_p(u) = f(x, u),        u(0) = u(1) = 0,

with phi_p(s) = |s|^(p-1) sgn(s), p > 1, continuous coefficients
a_plus/a_minus, and a bounded C^1 nonlinearity f whose limits
f(x, xi) -> f_plus(x) / f_minus(x) as xi -> +/-inf exist.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable

import numpy as np

from . import exprlang
from .exprlang import Expr, EvalError

__all__ = [
    "PLUS", "MINUS", "Sign", "sign_label", "parse_sign",
    "phi_p", "phi_p_inv",
    "Tolerances", "ProblemSpec", "NormalizedProblem", "normalize",
    "ValidationReport", "validate_hypotheses", "SpecError",
]

PLUS = 1
MINUS = -1
Sign = int  # +1 or -1, the nu index of the half-eigenvalue pairs


def sign_label(nu: Sign) -> str:
    return "+" if nu > 0 else "-"


def parse_sign(s: str) -> Sign:
    if s in ("+", "plus", "+1", "1"):
        return PLUS
    if s in ("-", "minus", "-1"):
        return MINUS
    raise SpecError(f"sign must be '+' or '-', got {s!r}")


class SpecError(ValueError):
    """Invalid problem data (violated hypotheses, malformed expressions)."""


def phi_p(p: float, s: float) -> float:
    """|s|^(p-1) sgn(s); total for p > 1, with phi_p(0) = 0."""
    if s > 0.0:
        return s ** (p - 1.0)
    if s < 0.0:
        return -((-s) ** (p - 1.0))
    return 0.0


def phi_p_inv(p: float, s: float) -> float:
    """The exact inverse of phi_p: phi_{p'} with p' = p/(p-1)."""
    e = 1.0 / (p - 1.0)
    if s > 0.0:
        return s ** e
    if s < 0.0:
        return -((-s) ** e)
    return 0.0


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared across the solvers.

    Defaults follow the artifact-wide conventions: eigenvalue acceptance is
    on the shooting endpoint |Psi(1)|, ODE tolerances feed the adaptive
    RK5(4) integrator, and delta_ttau is the smallness threshold below which
    the rescaled problem is treated as uniquely solvable.
    """
    eig_tol: float = 1e-9
    ode_rel: float = 1e-10
    ode_abs: float = 1e-12
    quad_tol: float = 1e-10
    bvp_tol: float = 1e-8
    defect_tol: float = 1e-6
    c_lambda_tol: float = 1e-8
    delta_ttau: float = 0.05
    zero_simple_tol: float = 1e-8
    lambda_scan_max: float = 1e6
    max_steps: int = 1_000_000
    gronwall_const: float = 100.0

    def __post_init__(self):
        for name in ("eig_tol", "ode_rel", "ode_abs", "quad_tol", "bvp_tol",
                     "defect_tol", "c_lambda_tol", "delta_ttau",
                     "zero_simple_tol", "lambda_scan_max", "gronwall_const"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise SpecError(f"tolerance {name} must be positive, got {v!r}")
        if self.max_steps < 100:
            raise SpecError("max_steps too small")

    def scan(self) -> "Tolerances":
        """Relaxed copy used for integer-valued zero-count scans."""
        return replace(self,
                       ode_rel=min(max(self.ode_rel * 1e3, 1e-7), 1e-6),
                       ode_abs=min(max(self.ode_abs * 1e3, 1e-9), 1e-8))

    def refine(self) -> "Tolerances":
        """Copy used inside bracketed root refinement on the endpoint map."""
        return replace(self,
                       ode_rel=min(max(self.ode_rel, 1e-9), 1e-8),
                       ode_abs=min(max(self.ode_abs, 1e-11), 1e-10))

    def to_dict(self) -> dict:
        return {
            "eig_tol": self.eig_tol, "ode_rel": self.ode_rel,
            "ode_abs": self.ode_abs, "quad_tol": self.quad_tol,
            "bvp_tol": self.bvp_tol, "defect_tol": self.defect_tol,
            "c_lambda_tol": self.c_lambda_tol, "delta_ttau": self.delta_ttau,
            "zero_simple_tol": self.zero_simple_tol,
            "lambda_scan_max": self.lambda_scan_max,
            "max_steps": self.max_steps,
            "gronwall_const": self.gronwall_const,
        }


def default_rho(p: float) -> float:
    """A rho satisfying hypothesis (f2): rho in [0,1), rho > 2-p when p <= 2."""
    return (max(0.0, 2.0 - p) + 1.0) / 2.0


_VALIDATION_GRID = np.linspace(0.0, 1.0, 65)


@dataclass(frozen=True)
class ProblemSpec:
    """Full input of the Dirichlet problem.

    Expressions use variable ``x`` for the coefficients and limits, and
    ``(x, xi)`` for the nonlinearity.  K0 bounds |f|, K1 bounds
    |xi^rho f_xi|; both are user-declared and only audited by sampling.
    """
    p: float
    a_plus: Expr
    a_minus: Expr
    lam: float
    f: Expr
    f_plus: Expr
    f_minus: Expr
    rho: float
    K0: float = 10.0
    K1: float = 10.0

    def __post_init__(self):
        if not self.p > 1.0:
            raise SpecError(f"p must be > 1, got {self.p!r}")
        if not (0.0 <= self.rho < 1.0):
            raise SpecError(f"rho must lie in [0, 1), got {self.rho!r}")
        if self.p <= 2.0 and not self.rho > 2.0 - self.p:
            raise SpecError(
                f"hypothesis (f2) needs rho > 2 - p = {2.0 - self.p!r} when "
                f"p <= 2, got rho = {self.rho!r}")
        if self.K0 <= 0 or self.K1 <= 0:
            raise SpecError("K0 and K1 must be positive")
        for name in ("a_plus", "a_minus", "f_plus", "f_minus"):
            e = getattr(self, name)
            extra = exprlang.free_vars(e) - {"x"}
            if extra:
                raise SpecError(f"{name} may only depend on x, found {sorted(extra)}")
        extra = exprlang.free_vars(self.f) - {"x", "xi"}
        if extra:
            raise SpecError(f"f may only depend on (x, xi), found {sorted(extra)}")
        # coefficients must evaluate to finite reals across [0, 1]
        for name in ("a_plus", "a_minus", "f_plus", "f_minus"):
            fn = exprlang.compile_expr(getattr(self, name))
            for xg in _VALIDATION_GRID:
                try:
                    fn(float(xg))
                except EvalError as exc:
                    raise SpecError(f"{name} fails to evaluate at x={xg}: {exc}") from exc

    @classmethod
    def from_strings(cls, p: float, a_plus: str = "0", a_minus: str = "0",
                     lam: float = 0.0, f: str = "0", f_plus: str = "0",
                     f_minus: str = "0", rho: float | None = None,
                     K0: float = 10.0, K1: float = 10.0) -> "ProblemSpec":
        return cls(
            p=float(p),
            a_plus=exprlang.parse(a_plus),
            a_minus=exprlang.parse(a_minus),
            lam=float(lam),
            f=exprlang.parse(f),
            f_plus=exprlang.parse(f_plus),
            f_minus=exprlang.parse(f_minus),
            rho=default_rho(float(p)) if rho is None else float(rho),
            K0=float(K0), K1=float(K1),
        )

    # compiled accessors (cached; the instances are immutable)
    @cached_property
    def a_plus_fn(self) -> Callable[[float], float]:
        return exprlang.compile_expr(self.a_plus)

    @cached_property
    def a_minus_fn(self) -> Callable[[float], float]:
        return exprlang.compile_expr(self.a_minus)

    @cached_property
    def f_fn(self) -> Callable[[float, float], float]:
        return exprlang.compile_expr(self.f)

    @cached_property
    def f_plus_fn(self) -> Callable[[float], float]:
        return exprlang.compile_expr(self.f_plus)

    @cached_property
    def f_minus_fn(self) -> Callable[[float], float]:
        return exprlang.compile_expr(self.f_minus)

    @cached_property
    def coeff_sup(self) -> float:
        """max over the validation grid of |a_plus| and |a_minus|."""
        ap, am = self.a_plus_fn, self.a_minus_fn
        return max(max(abs(ap(float(x))) for x in _VALIDATION_GRID),
                   max(abs(am(float(x))) for x in _VALIDATION_GRID))

    @cached_property
    def f_limit_sup(self) -> float:
        fp, fm = self.f_plus_fn, self.f_minus_fn
        return max(max(abs(fp(float(x))) for x in _VALIDATION_GRID),
                   max(abs(fm(float(x))) for x in _VALIDATION_GRID))

    @cached_property
    def f_is_zero(self) -> bool:
        """True when f and its limits vanish identically on the sample grid."""
        f, fp, fm = self.f_fn, self.f_plus_fn, self.f_minus_fn
        for xg in _VALIDATION_GRID[::8]:
            x = float(xg)
            if abs(fp(x)) > 0.0 or abs(fm(x)) > 0.0:
                return False
            for xi in (-37.2, -1.0, 0.0, 0.7, 19.3):
                if abs(f(x, xi)) > 0.0:
                    return False
        return True

    def describe(self) -> dict:
        return {
            "p": self.p,
            "a_plus": exprlang.to_str(self.a_plus),
            "a_minus": exprlang.to_str(self.a_minus),
            "lambda": self.lam,
            "f": exprlang.to_str(self.f),
            "f_plus": exprlang.to_str(self.f_plus),
            "f_minus": exprlang.to_str(self.f_minus),
            "rho": self.rho, "K0": self.K0, "K1": self.K1,
        }


@dataclass(frozen=True)
class NormalizedProblem:
    """ProblemSpec with lambda absorbed into the coefficients.

    Replacing a_pm by a_pm + lambda and setting lambda = 0 leaves the
    problem unchanged; every spectral quantity of the normalized problem is
    the original one shifted by -shift.
    """
    spec: ProblemSpec
    shift: float

    def __post_init__(self):
        if self.spec.lam != 0.0:
            raise SpecError("normalized problem must carry lambda = 0")

    @property
    def p(self) -> float:
        return self.spec.p


def normalize(spec: ProblemSpec) -> NormalizedProblem:
    if spec.lam == 0.0:
        return NormalizedProblem(spec=spec, shift=0.0)
    lam = exprlang.Num(spec.lam)
    shifted = replace(
        spec,
        a_plus=_shift_expr(spec.a_plus, lam),
        a_minus=_shift_expr(spec.a_minus, lam),
        lam=0.0,
    )
    return NormalizedProblem(spec=shifted, shift=spec.lam)


def _shift_expr(e: Expr, lam: exprlang.Num) -> Expr:
    if isinstance(e, exprlang.Num):
        return exprlang.Num(e.value + lam.value)
    return exprlang.Bin("+", e, lam)


# ---------------------------------------------------------------------------
# Hypothesis audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    """Advisory audit of hypotheses (f1)/(f2) by sampling.

    The hypotheses are asymptotic statements, so the audit can warn but
    never prove; deviations are max over an x-grid of |f(x, +/-Xi) -
    f_pm(x)| at increasing Xi, and f2_max is the observed sup of
    |xi^rho f_xi(x, xi)|.
    """
    limit_deviation_plus: dict[float, float]
    limit_deviation_minus: dict[float, float]
    limit_ok: bool
    f2_max: float | None
    f2_ok: bool | None
    k0_observed: float
    k0_ok: bool
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "limit_deviation_plus": {str(k): v for k, v in self.limit_deviation_plus.items()},
            "limit_deviation_minus": {str(k): v for k, v in self.limit_deviation_minus.items()},
            "limit_ok": self.limit_ok,
            "f2_max": self.f2_max,
            "f2_ok": self.f2_ok,
            "k0_observed": self.k0_observed,
            "k0_ok": self.k0_ok,
            "warnings": list(self.warnings),
        }


_XI_PROBES = (1e2, 1e4, 1e6)
_F2_XI_GRID = tuple(10.0 ** j for j in range(0, 7))  # 1 .. 1e6


def validate_hypotheses(spec: ProblemSpec, grid_n: int = 65) -> ValidationReport:
    """Sample-check (f1), (f2) and the K0 bound; warnings, not hard errors."""
    if grid_n < 8:
        raise SpecError("grid_n must be at least 8")
    xs = np.linspace(0.0, 1.0, grid_n)
    f, fp, fm = spec.f_fn, spec.f_plus_fn, spec.f_minus_fn
    warnings: list[str] = []

    dev_p: dict[float, float] = {}
    dev_m: dict[float, float] = {}
    k0_obs = 0.0
    for Xi in _XI_PROBES:
        dp = dm = 0.0
        for xg in xs:
            x = float(xg)
            try:
                vp = f(x, Xi)
                vm = f(x, -Xi)
            except EvalError as exc:
                warnings.append(f"f failed to evaluate at |xi|={Xi:g}: {exc}")
                vp = vm = math.nan
                break
            dp = max(dp, abs(vp - fp(x)))
            dm = max(dm, abs(vm - fm(x)))
            k0_obs = max(k0_obs, abs(vp), abs(vm))
        dev_p[Xi] = dp
        dev_m[Xi] = dm

    devs = [max(dev_p[Xi], dev_m[Xi]) for Xi in _XI_PROBES if not math.isnan(dev_p[Xi])]
    # deviations shrinking with growing Xi, and small at Xi = 1e6, indicate
    # a genuine limit; anything else earns a warning
    if len(devs) == len(_XI_PROBES):
        scale = 1.0 + spec.f_limit_sup
        limit_ok = devs[-1] <= devs[0] + 1e-12 and devs[-1] <= 1e-2 * scale
    else:
        limit_ok = False
    if not limit_ok:
        warnings.append(
            "f(x, xi) does not appear to approach f_plus/f_minus: deviations "
            + ", ".join(f"{Xi:g}:{max(dev_p[Xi], dev_m[Xi]):.3g}" for Xi in _XI_PROBES))

    # sample |xi|^rho * f_xi on a log grid
    f2_max: float | None = None
    f2_ok: bool | None = None
    try:
        dfe = exprlang.diff_xi(spec.f)
        dff = exprlang.compile_expr(dfe)
        m = 0.0
        for xg in xs[:: max(1, grid_n // 17)]:
            x = float(xg)
            for xi in _F2_XI_GRID:
                for s in (xi, -xi):
                    m = max(m, abs(s) ** spec.rho * abs(dff(x, s)))
        f2_max = m
        f2_ok = m <= spec.K1
        if not f2_ok:
            warnings.append(
                f"observed |xi^rho f_xi| = {m:.3g} exceeds declared K1 = {spec.K1:g}")
    except exprlang.DerivativeError as exc:
        warnings.append(f"f_xi not available symbolically: {exc}")

    k0_ok = k0_obs <= spec.K0
    if not k0_ok:
        warnings.append(f"observed |f| = {k0_obs:.3g} exceeds declared K0 = {spec.K0:g}")

    return ValidationReport(
        limit_deviation_plus=dev_p, limit_deviation_minus=dev_m,
        limit_ok=limit_ok, f2_max=f2_max, f2_ok=f2_ok,
        k0_observed=k0_obs, k0_ok=k0_ok, warnings=tuple(warnings))
