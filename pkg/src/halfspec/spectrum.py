"""Half-eigenvalues, spectrum classification and Fucik curve tracing.

For each zero count k >= 0 and initial slope sign nu the half-eigenvalue
lambda_{k,nu} is characterised by the shooting trajectory Psi_{lambda,nu}
vanishing at x = 1 with exactly k interior zeros.  The integer-valued map
lambda -> N(lambda, nu) (interior zero count) is nondecreasing, so the
search brackets the N = k -> k+1 transition by a doubling scan, then
refines the endpoint map lambda -> Psi_{lambda,nu}(1) inside the bracket
with a guarded bracket-preserving root finder, and verifies the zero count
at full tolerance.

The constant-coefficient Fucik spectrum reuses the same transition engine
with alpha_minus as the scan parameter (lambda = 0, a_pm = alpha_pm).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (MINUS, PLUS, NormalizedProblem, ProblemSpec, Sign,
                   Tolerances, normalize, sign_label)
from .ivp import (DegenerateZeroError, StepSizeCollapse, Trajectory,
                  count_zeros, solve_half_eig_ivp)
from . import exprlang

__all__ = [
    "HalfEigenpair", "SpectrumSlice", "FucikPoint", "Classification",
    "SignLemmaReport", "CLambdaReport", "SpectrumError",
    "find_half_eigenvalue", "spectrum_slice", "classify_lambda",
    "check_sign_lemma", "check_C_lambda", "trace_fucik",
]

TIE_REL = 1e-7  # |lam_{k,+} - lam_{k,-}| < TIE_REL * max(1, |lam|) is a tie


class SpectrumError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class HalfEigenpair:
    """(k, nu, lambda_{k,nu}) with the normalized half-eigenfunction.

    The eigenfunction trajectory is normalized by u'(0) = nu; ``lam`` is in
    the coordinates of the problem the pair was computed on (a normalized
    problem yields normalized coordinates).
    """
    k: int
    nu: Sign
    lam: float
    trajectory: Trajectory
    residual: float

    def to_dict(self) -> dict:
        return {"k": self.k, "nu": sign_label(self.nu), "lambda": self.lam,
                "residual": self.residual}


@dataclass(eq=False)
class SpectrumSlice:
    """Half-eigenpairs for k = 0..k_max, both signs, of one problem.

    ``pairs`` carry lambdas of the normalized problem; the ``shift`` maps
    them back to the original problem via lam_original = lam + shift.
    """
    nspec: NormalizedProblem
    shift: float
    k_max: int
    pairs: dict[tuple[int, Sign], HalfEigenpair]
    tol: Tolerances

    def pair(self, k: int, nu: Sign) -> HalfEigenpair:
        return self.pairs[(k, nu)]

    def lam(self, k: int, nu: Sign) -> float:
        """lambda_{k,nu} in the original problem's coordinates."""
        return self.pairs[(k, nu)].lam + self.shift

    def lam_min(self, k: int) -> float:
        return min(self.lam(k, PLUS), self.lam(k, MINUS))

    def lam_max(self, k: int) -> float:
        return max(self.lam(k, PLUS), self.lam(k, MINUS))

    def nu_min(self, k: int) -> Sign:
        return PLUS if self.lam(k, PLUS) <= self.lam(k, MINUS) else MINUS

    def nu_max(self, k: int) -> Sign:
        return MINUS if self.nu_min(k) == PLUS else PLUS

    def is_tie(self, k: int) -> bool:
        gap = abs(self.lam(k, PLUS) - self.lam(k, MINUS))
        scale = max(1.0, abs(self.lam(k, PLUS)))
        return gap < TIE_REL * scale

    def check_coefficients_match(self, spec: ProblemSpec) -> None:
        """The slice covers problems whose raw coefficients agree with its own.

        The slice's normalized coefficients are a_pm + shift of the problem
        it was built from, so the requirement is
        slice.a_pm(x) - shift == spec.a_pm(x).
        """
        mine = self.nspec.spec
        for x in (0.0, 0.25, 0.5, 0.75, 1.0):
            if (abs(mine.a_plus_fn(x) - self.shift - spec.a_plus_fn(x)) > 1e-12
                    or abs(mine.a_minus_fn(x) - self.shift
                           - spec.a_minus_fn(x)) > 1e-12):
                raise SpectrumError(
                    "the spectrum slice was computed for different "
                    "coefficients than the given problem")

    def check_monotonicity(self) -> None:
        """Half-eigenvalues must be strictly increasing across k."""
        for k in range(self.k_max):
            if not self.lam_min(k + 1) > self.lam_max(k):
                raise SpectrumError(
                    f"monotonicity violated: lam_min({k + 1}) = "
                    f"{self.lam_min(k + 1)!r} <= lam_max({k}) = {self.lam_max(k)!r}")

    def rows(self) -> list[dict]:
        out = []
        for k in range(self.k_max + 1):
            for nu in (PLUS, MINUS):
                p = self.pairs[(k, nu)]
                out.append({"k": k, "nu": sign_label(nu),
                            "lambda": p.lam + self.shift,
                            "residual": p.residual})
        return out

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k,nu,lambda,residual\n")
            for r in self.rows():
                fh.write("%d,%s,%.17g,%.17g\n"
                         % (r["k"], r["nu"], r["lambda"], r["residual"]))


# ---------------------------------------------------------------------------
# Transition engine
# ---------------------------------------------------------------------------

def _counted(traj_at: Callable[[float], Trajectory], theta: float,
             retries: int = 3) -> tuple[float, Trajectory, int]:
    """Trajectory and zero count at theta, nudging past degenerate samples."""
    for attempt in range(retries + 1):
        try:
            t = traj_at(theta)
            return theta, t, count_zeros(t)
        except (DegenerateZeroError, StepSizeCollapse):
            if attempt == retries:
                raise
            theta = theta + 1e-6 * (1.0 + abs(theta))
    raise AssertionError("unreachable")


def _refine_transition(traj_scan: Callable[[float], Trajectory],
                       traj_refine: Callable[[float], Trajectory],
                       traj_full: Callable[[float], Trajectory],
                       k: int, lo: float, n_lo: int, hi: float, n_hi: int,
                       eig_tol: float, zero_simple_tol: float,
                       ) -> tuple[float, Trajectory]:
    """Locate the root of the endpoint map inside the N: k -> k+1 bracket."""
    if n_lo > k or n_hi < k + 1:
        raise SpectrumError(f"invalid bracket counts ({n_lo}, {n_hi}) for k={k}")
    # integer bisection until the counts hug the transition
    iters = 0
    while n_lo < k or n_hi > k + 1:
        iters += 1
        if iters > 200 or hi - lo < 1e-12 * max(1.0, abs(hi)):
            raise SpectrumError(
                f"could not isolate the N={k}->{k + 1} transition in "
                f"[{lo!r}, {hi!r}] (counts {n_lo}, {n_hi})")
        mid = 0.5 * (lo + hi)
        mid, _, n_mid = _counted(traj_scan, mid)
        if n_mid <= k:
            lo, n_lo = mid, n_mid
        else:
            hi, n_hi = mid, n_mid

    def endpoint(th: float) -> float:
        return traj_refine(th).u1

    h_lo = endpoint(lo)
    h_hi = endpoint(hi)
    # an integer-bisection endpoint can land essentially on the curve, with
    # the endpoint value inside the noise floor and its sign meaningless
    if abs(h_hi) <= 0.5 * eig_tol:
        hi = hi - 1e-9 * max(1.0, abs(hi))
        h_hi = endpoint(hi)
    if abs(h_lo) <= 0.5 * eig_tol:
        root = lo
    elif h_hi == 0.0:
        root = hi
    elif h_lo * h_hi > 0.0:
        # counts at scan tolerance misjudged a zero hugging x = 1; re-count
        # at refine tolerance and retry once
        lo2, tlo, n_lo2 = _counted(traj_refine, lo)
        hi2, thi, n_hi2 = _counted(traj_refine, hi)
        if (n_lo2, n_hi2) != (k, k + 1):
            return _refine_transition(traj_refine, traj_refine, traj_full, k,
                                      lo2, n_lo2, hi2, n_hi2,
                                      eig_tol, zero_simple_tol)
        raise SpectrumError(
            f"endpoint values do not change sign across the N={k}->{k + 1} "
            f"transition: h({lo!r}) = {h_lo!r}, h({hi!r}) = {h_hi!r}")
    else:
        root = brentq(endpoint, lo, hi,
                      xtol=1e-11 * max(1.0, abs(hi)), rtol=8.9e-16)

    traj = traj_full(root)
    n = _tolerant_count(traj)
    if n == k + 1:
        # landed on the next transition hugging the bracket edge; shave hi
        hi = root - 1e-9 * max(1.0, abs(root))
        h_hi2 = endpoint(hi)
        if h_lo * h_hi2 < 0.0:
            root = brentq(endpoint, lo, hi,
                          xtol=1e-11 * max(1.0, abs(hi)), rtol=8.9e-16)
            traj = traj_full(root)
            n = _tolerant_count(traj)
    if n != k:
        raise SpectrumError(
            f"refined root has zero count {n}, expected {k} (root {root!r})")
    if abs(traj.u1) > eig_tol:
        root, traj = _polish(endpoint_full=lambda th: traj_full(th).u1,
                             traj_full=traj_full, root=root,
                             scale=max(1.0, abs(root)), eig_tol=eig_tol)
        n = _tolerant_count(traj)
        if n != k:
            raise SpectrumError(
                f"polished root has zero count {n}, expected {k}")
    traj.require_nondegenerate(zero_simple_tol)
    return root, traj


def _tolerant_count(traj: Trajectory) -> int:
    traj.require_nondegenerate(1e-10)
    return len(traj.u_zeros)


def _polish(endpoint_full, traj_full, root: float, scale: float,
            eig_tol: float) -> tuple[float, Trajectory]:
    """Re-root at full integrator tolerance in a small window around root."""
    w = 1e-8 * scale
    for _ in range(4):
        a, b = root - w, root + w
        fa, fb = endpoint_full(a), endpoint_full(b)
        if fa == 0.0:
            root = a
            break
        if fb == 0.0:
            root = b
            break
        if fa * fb < 0.0:
            root = brentq(endpoint_full, a, b, xtol=1e-13 * scale, rtol=8.9e-16)
            break
        w *= 10.0
    traj = traj_full(root)
    if abs(traj.u1) > eig_tol:
        raise SpectrumError(
            f"endpoint residual {abs(traj.u1)!r} stays above eig_tol after "
            f"polishing (root {root!r})")
    return root, traj


# ---------------------------------------------------------------------------
# Half-eigenvalue search
# ---------------------------------------------------------------------------

def _lambda_scan(nspec: NormalizedProblem, nu: Sign, n_target: int,
                 tol: Tolerances) -> list[tuple[float, int]]:
    """Doubling scan of the zero-count map up to N >= n_target.

    The start is below the spectrum: with both shifted coefficients
    <= -10 the trajectory cannot turn, so N = 0 there.
    """
    scan_tol = tol.scan()

    def traj_at(lam: float) -> Trajectory:
        return solve_half_eig_ivp(nspec, lam, nu, scan_tol)

    lo = -2.0 * nspec.spec.coeff_sup - 10.0
    lo_adj, t0, n0 = _counted(traj_at, lo)
    samples = [(lo_adj, n0)]
    if n0 != 0:
        raise SpectrumError(
            f"zero count {n0} at the sub-spectrum start lambda = {lo!r}")
    step = 5.0
    cur, n_cur = lo_adj, n0
    while n_cur < n_target:
        nxt = cur + step
        step *= 2.0
        if nxt > tol.lambda_scan_max:
            raise SpectrumError(
                f"no bracket with zero count {n_target} found below "
                f"lambda_scan_max = {tol.lambda_scan_max!r}")
        nxt, t, n_nxt = _counted(traj_at, nxt)
        if n_nxt < n_cur:
            raise SpectrumError(
                f"zero count decreased along the scan: N({cur!r}) = {n_cur}, "
                f"N({nxt!r}) = {n_nxt}")
        samples.append((nxt, n_nxt))
        cur, n_cur = nxt, n_nxt
    return samples


def _bracket_from_samples(samples: Sequence[tuple[float, int]], k: int
                          ) -> tuple[float, int, float, int]:
    lo = n_lo = None
    for lam, n in samples:
        if n <= k:
            lo, n_lo = lam, n
        elif lo is not None:
            return lo, n_lo, lam, n
    raise SpectrumError(f"scan samples do not bracket the k={k} transition")


def find_half_eigenvalue(nspec: NormalizedProblem, k: int, nu: Sign,
                         tol: Tolerances,
                         _samples: Sequence[tuple[float, int]] | None = None,
                         ) -> HalfEigenpair:
    """Compute (lambda_{k,nu}, u_{k,nu}) for the normalized problem."""
    if k < 0:
        raise SpectrumError("k must be >= 0")
    samples = _samples if _samples is not None else _lambda_scan(nspec, nu, k + 1, tol)
    lo, n_lo, hi, n_hi = _bracket_from_samples(samples, k)
    scan_tol, refine_tol = tol.scan(), tol.refine()
    root, traj = _refine_transition(
        traj_scan=lambda lam: solve_half_eig_ivp(nspec, lam, nu, scan_tol),
        traj_refine=lambda lam: solve_half_eig_ivp(nspec, lam, nu, refine_tol),
        traj_full=lambda lam: solve_half_eig_ivp(nspec, lam, nu, tol),
        k=k, lo=lo, n_lo=n_lo, hi=hi, n_hi=n_hi,
        eig_tol=tol.eig_tol, zero_simple_tol=tol.zero_simple_tol)
    pair = HalfEigenpair(k=k, nu=nu, lam=root, trajectory=traj,
                         residual=abs(traj.u1))
    _check_pair(pair, tol)
    return pair


def _check_pair(pair: HalfEigenpair, tol: Tolerances) -> None:
    traj = pair.trajectory
    if len(traj.u_zeros) != pair.k:
        raise SpectrumError("eigenpair zero count inconsistent")
    if pair.k == 0:
        xs = np.linspace(1.0 / 130.0, 1.0 - 1.0 / 130.0, 129)
        if np.min(pair.nu * np.atleast_1d(traj.u(xs))) <= 0.0:
            raise SpectrumError(
                "k = 0 half-eigenfunction is not one-signed on (0, 1)")


def spectrum_slice(spec: ProblemSpec | NormalizedProblem, k_max: int,
                   tol: Tolerances | None = None) -> SpectrumSlice:
    """All half-eigenpairs with k <= k_max, sharing one scan per sign."""
    tol = tol or Tolerances()
    if isinstance(spec, NormalizedProblem):
        nspec, shift = spec, 0.0
    else:
        nspec = normalize(spec)
        shift = nspec.shift
    pairs: dict[tuple[int, Sign], HalfEigenpair] = {}
    for nu in (PLUS, MINUS):
        samples = _lambda_scan(nspec, nu, k_max + 1, tol)
        for k in range(k_max + 1):
            pairs[(k, nu)] = find_half_eigenvalue(nspec, k, nu, tol,
                                                  _samples=samples)
    out = SpectrumSlice(nspec=nspec, shift=shift, k_max=k_max,
                        pairs=pairs, tol=tol)
    out.check_monotonicity()
    return out


# ---------------------------------------------------------------------------
# Classification of lambda against the spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    """Position of lambda relative to the computed slice.

    kind is one of 'resonant', 'inside_pair_gap', 'between_pairs_gap',
    'below_spectrum'.  For 'resonant', ``nus`` lists the sign(s) whose
    half-eigenvalue equals lambda; for gaps, ``k`` names the pair.
    """
    kind: str
    k: int | None
    nus: tuple[Sign, ...]
    sign_product: float | None
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k,
                "nus": [sign_label(n) for n in self.nus],
                "sign_product": self.sign_product, "detail": self.detail}


def classify_lambda(sl: SpectrumSlice, lam: float) -> Classification:
    """Classify lambda (original coordinates) against the slice."""
    lam_n = lam - sl.shift
    res_tol = TIE_REL * max(1.0, abs(lam_n))
    hits = [(k, nu) for (k, nu), p in sl.pairs.items()
            if abs(p.lam - lam_n) <= res_tol]
    if hits:
        k = hits[0][0]
        nus = tuple(sorted((nu for kk, nu in hits if kk == k), reverse=True))
        t = solve_half_eig_ivp(sl.nspec, lam_n, nus[0], sl.tol)
        if abs(t.u1) > 1e-5 * max(1.0, t.sup_u):
            raise SpectrumError(
                f"lambda = {lam!r} matches lambda_({k},{sign_label(nus[0])}) "
                f"within tolerance but the endpoint residual {abs(t.u1)!r} "
                "is inconsistent")
        return Classification(kind="resonant", k=k, nus=nus, sign_product=None,
                              detail=f"lambda = lambda_({k},"
                                     f"{''.join(sign_label(n) for n in nus)})")
    if lam_n < sl.pairs[(0, PLUS)].lam and lam_n < sl.pairs[(0, MINUS)].lam:
        return Classification(kind="below_spectrum", k=None, nus=(),
                              sign_product=None,
                              detail="lambda < lambda_{0,min}")
    for k in range(sl.k_max + 1):
        lo = sl.lam_min(k) - sl.shift
        hi = sl.lam_max(k) - sl.shift
        if lo < lam_n < hi:
            tp = solve_half_eig_ivp(sl.nspec, lam_n, PLUS, sl.tol)
            tm = solve_half_eig_ivp(sl.nspec, lam_n, MINUS, sl.tol)
            prod = tp.u1 * tm.u1
            if prod <= 0.0:
                raise SpectrumError(
                    "inside-pair classification contradicts the endpoint "
                    f"sign product {prod!r} at lambda = {lam!r}")
            return Classification(kind="inside_pair_gap", k=k, nus=(),
                                  sign_product=prod,
                                  detail=f"lambda_({k},min) < lambda < lambda_({k},max)")
        nxt = sl.lam_min(k + 1) - sl.shift if k < sl.k_max else None
        if lam_n > hi and (nxt is None or lam_n < nxt):
            if nxt is None:
                raise SpectrumError(
                    f"lambda = {lam!r} lies above the computed slice "
                    f"(k_max = {sl.k_max}); increase k_max")
            return Classification(kind="between_pairs_gap", k=k, nus=(),
                                  sign_product=None,
                                  detail=f"lambda_({k},max) < lambda < lambda_({k + 1},min)")
    raise SpectrumError(f"failed to classify lambda = {lam!r}")


# ---------------------------------------------------------------------------
# Sign lemma and coefficient condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignLemmaReport:
    """Products Psi'_{lam,nu}(1) * Psi_{lam,-nu}(1) at the pair's edges.

    At lam = lambda_{k,min} the product must be positive, at
    lambda_{k,max} negative; values inside the noise floor are flagged
    inconclusive instead of asserted.
    """
    k: int
    product_at_min: float
    product_at_max: float
    ok_at_min: bool
    ok_at_max: bool
    conclusive: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "product_at_min": self.product_at_min,
                "product_at_max": self.product_at_max,
                "ok_at_min": self.ok_at_min, "ok_at_max": self.ok_at_max,
                "conclusive": self.conclusive}


def check_sign_lemma(sl: SpectrumSlice, k: int) -> SignLemmaReport:
    if sl.is_tie(k):
        raise SpectrumError(
            f"sign lemma requires lambda_({k},min) < lambda_({k},max) strictly")
    floor = 100.0 * sl.tol.eig_tol
    products = {}
    for which, nu in (("min", sl.nu_min(k)), ("max", sl.nu_max(k))):
        pair = sl.pairs[(k, nu)]
        other = solve_half_eig_ivp(sl.nspec, pair.lam, -nu, sl.tol)
        products[which] = pair.trajectory.uprime1 * other.u1
    conclusive = all(abs(v) > floor for v in products.values())
    return SignLemmaReport(
        k=k,
        product_at_min=products["min"], product_at_max=products["max"],
        ok_at_min=products["min"] > 0.0, ok_at_max=products["max"] < 0.0,
        conclusive=conclusive)


@dataclass(frozen=True)
class CLambdaReport:
    """Coefficient non-vanishing at critical points of the trajectories.

    Only binding for p > 2: at every x with Psi'(x) = 0 the coefficient on
    the side of the sign of Psi(x) must be bounded away from zero.
    """
    trivially_satisfied: bool
    satisfied: bool
    min_abs_coeff: float | None
    witnesses: tuple[tuple[float, str, float], ...]  # (x, side, coeff value)
    accuracy_failures: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"trivially_satisfied": self.trivially_satisfied,
                "satisfied": self.satisfied,
                "min_abs_coeff": self.min_abs_coeff,
                "witnesses": [list(w) for w in self.witnesses],
                "accuracy_failures": list(self.accuracy_failures)}


def check_C_lambda(nspec: NormalizedProblem, traj_plus: Trajectory,
                   traj_minus: Trajectory, tol: Tolerances) -> CLambdaReport:
    if nspec.p <= 2.0:
        return CLambdaReport(trivially_satisfied=True, satisfied=True,
                             min_abs_coeff=None, witnesses=(),
                             accuracy_failures=())
    ap = nspec.spec.a_plus_fn
    am = nspec.spec.a_minus_fn
    witnesses: list[tuple[float, str, float]] = []
    failures: list[str] = []
    for traj in (traj_plus, traj_minus):
        for x, uc in zip(traj.v_zeros, traj.u_at_critical):
            if abs(uc) <= tol.zero_simple_tol:
                failures.append(
                    f"critical point at x = {x:.12g} with |Psi| = {abs(uc):.3g}: "
                    "simple-zero structure lost, integration accuracy suspect")
                continue
            if uc > 0.0:
                witnesses.append((x, "+", ap(x)))
            else:
                witnesses.append((x, "-", am(x)))
    if failures:
        return CLambdaReport(trivially_satisfied=False, satisfied=False,
                             min_abs_coeff=None, witnesses=tuple(witnesses),
                             accuracy_failures=tuple(failures))
    mn = min((abs(c) for _, _, c in witnesses), default=math.inf)
    return CLambdaReport(
        trivially_satisfied=False,
        satisfied=mn > tol.c_lambda_tol,
        min_abs_coeff=None if mn == math.inf else mn,
        witnesses=tuple(witnesses), accuracy_failures=())


# ---------------------------------------------------------------------------
# Fucik spectrum (constant coefficients)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FucikPoint:
    alpha_plus: float
    alpha_minus: float
    k: int
    branch: Sign
    residual: float
    found: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"alpha_plus": self.alpha_plus, "alpha_minus": self.alpha_minus,
                "k": self.k, "branch": sign_label(self.branch),
                "residual": self.residual, "found": self.found,
                "note": self.note}


def _const_nspec(p: float, alpha_plus: float,
                 alpha_minus: float) -> NormalizedProblem:
    spec = ProblemSpec(
        p=p,
        a_plus=exprlang.Num(alpha_plus), a_minus=exprlang.Num(alpha_minus),
        lam=0.0,
        f=exprlang.Num(0.0), f_plus=exprlang.Num(0.0), f_minus=exprlang.Num(0.0),
        rho=(max(0.0, 2.0 - p) + 1.0) / 2.0)
    return NormalizedProblem(spec=spec, shift=0.0)


def _first_eigenvalue(p: float, tol: Tolerances) -> float:
    nspec = _const_nspec(p, 0.0, 0.0)
    return find_half_eigenvalue(nspec, 0, PLUS, tol).lam


_ALPHA_SCAN_MAX = 1e9


def _fucik_alpha_minus(p: float, k: int, branch: Sign, alpha_plus: float,
                       tol: Tolerances) -> FucikPoint:
    def traj_at(tol_used):
        def inner(alpha_minus: float) -> Trajectory:
            return solve_half_eig_ivp(_const_nspec(p, alpha_plus, alpha_minus),
                                      0.0, branch, tol_used)
        return inner

    scan = traj_at(tol.scan())
    lo = 0.0
    lo, t0, n_lo = _counted(scan, lo)
    if n_lo > k:
        return FucikPoint(alpha_plus, math.nan, k, branch, math.nan, False,
                          "zero count already exceeds k at alpha_minus = 0")
    cur, n_cur = lo, n_lo
    step = max(1.0, alpha_plus / 4.0)
    samples = [(cur, n_cur)]
    while n_cur < k + 1:
        nxt = cur + step
        step *= 2.0
        if nxt > _ALPHA_SCAN_MAX:
            return FucikPoint(
                alpha_plus, math.nan, k, branch, math.nan, False,
                "no bracket below alpha_minus = 1e9; alpha_plus is at or "
                "below the curve's asymptote")
        nxt, t, n_nxt = _counted(scan, nxt)
        if n_nxt < n_cur:
            raise SpectrumError("zero count decreased along the alpha scan")
        samples.append((nxt, n_nxt))
        cur, n_cur = nxt, n_nxt
    lo, n_lo, hi, n_hi = _bracket_from_samples(samples, k)
    root, traj = _refine_transition(
        traj_scan=scan,
        traj_refine=traj_at(tol.refine()),
        traj_full=traj_at(tol),
        k=k, lo=lo, n_lo=n_lo, hi=hi, n_hi=n_hi,
        eig_tol=tol.eig_tol, zero_simple_tol=tol.zero_simple_tol)
    return FucikPoint(alpha_plus, root, k, branch, abs(traj.u1), True)


def trace_fucik(p: float, k: int, branch: Sign,
                alpha_plus_grid: Sequence[float],
                tol: Tolerances | None = None) -> list[FucikPoint]:
    """Points of the Fucik curve Sigma_k reached from the given grid.

    For k >= 1 each grid value is an alpha_plus and the matching
    alpha_minus is found by bracketing the zero-count transition of the
    constant-coefficient problem.  Sigma_0 degenerates to a vertical line
    (branch '+', the eigenfunction never sees alpha_minus) and a horizontal
    line (branch '-'); for branch '+' the grid is therefore interpreted as
    the free alpha_minus coordinate and paired with the first eigenvalue.
    """
    tol = tol or Tolerances()
    if p <= 1.0:
        raise SpectrumError("p must be > 1")
    if k == 0:
        lam0 = _first_eigenvalue(p, tol)
        if branch == PLUS:
            return [FucikPoint(lam0, float(a), 0, PLUS, 0.0, True,
                               "vertical line alpha_plus = lambda_0 (grid value "
                               "used as alpha_minus)")
                    for a in alpha_plus_grid]
        return [FucikPoint(float(a), lam0, 0, MINUS, 0.0, True,
                           "horizontal line alpha_minus = lambda_0")
                for a in alpha_plus_grid]

    threads = _thread_budget()
    if threads > 1 and len(alpha_plus_grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(
                lambda a: _fucik_alpha_minus(p, k, branch, float(a), tol),
                alpha_plus_grid))
    return [_fucik_alpha_minus(p, k, branch, float(a), tol)
            for a in alpha_plus_grid]


def _thread_budget() -> int:
    raw = os.environ.get("HALFSPEC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def write_fucik_csv(points: Sequence[FucikPoint], path) -> None:
    with open(path, "w") as fh:
        fh.write("alpha_plus,alpha_minus,k,branch,residual,found\n")
        for pt in points:
            fh.write("%.17g,%.17g,%d,%s,%.17g,%d\n"
                     % (pt.alpha_plus, pt.alpha_minus, pt.k,
                        sign_label(pt.branch), pt.residual, int(pt.found)))
