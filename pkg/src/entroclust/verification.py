"""Numerical checks of the risk-geometry and scalar inequalities.

Each check returns one or more LemmaReport records. A report's
``worst_violation`` is the largest signed amount by which a claimed
inequality fails (negative means it holds with that much slack), and
``status`` is "pass" exactly when it is <= ``tolerance``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import risk as rk
from . import special as sf
from .datagen import make_spec, rng_stream, sample
from .errors import DomainError, HypothesisError

SCHEMA_VERSION = 1


@dataclass
class LemmaReport:
    lemma_id: str
    status: str
    worst_violation: Optional[float]
    grid_size: int
    tolerance: float
    notes: str

    def to_dict(self):
        return asdict(self)


class _Claims:
    """Accumulates named sub-claims and folds them into one report."""

    def __init__(self, lemma_id, statement, tolerance):
        self.lemma_id = lemma_id
        self.statement = statement
        self.tolerance = tolerance
        self.parts = []
        self.size = 0
        self.extra = []

    def add(self, name, violation, count=None):
        v = np.asarray(violation, dtype=float)
        worst = float(np.max(v)) if v.size else -math.inf
        if np.any(np.isnan(v)):
            worst = math.inf
        self.parts.append((name, worst))
        self.size += int(count if count is not None else max(v.size, 1))

    def note(self, text):
        self.extra.append(text)

    def report(self):
        worst = max(w for _, w in self.parts)
        status = "pass" if worst <= self.tolerance else "fail"
        detail = "; ".join(f"{n}: {w:.3e}" for n, w in self.parts)
        notes = f"claim: {self.statement} | worst by part: {detail}"
        if self.extra:
            notes += " | " + "; ".join(self.extra)
        finite = worst if math.isfinite(worst) else 1e308
        return LemmaReport(self.lemma_id, status, finite, self.size, self.tolerance, notes)


def _skipped(lemma_id, statement, reason):
    return LemmaReport(lemma_id, "skipped", None, 0, 0.0, f"claim: {statement} | skipped: {reason}")


def _random_unit(gen, d):
    v = gen.standard_normal(d)
    return v / np.linalg.norm(v)


def _ball_points(gen, k, d, R):
    v = gen.standard_normal((k, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return R * gen.random((k, 1)) ** (1.0 / d) * v


def _richardson(fn, h):
    return (4.0 * fn(h / 2) - fn(h)) / 3.0


# ---------------------------------------------------------------- scalar kernel


def check_alpha_study(quick=False):
    c = _Claims("alpha_study", "alpha even, alpha(0)=-1/4 global minimum, alpha<0 on (-x1,x1), "
                "alpha>0 beyond x1, argmax of alpha in [2,3], sup|alpha'|<=0.22, alpha'>=0.052 on [x1,2]", 0.0)
    x1 = sf.solve_x1()
    xs = np.linspace(-40, 40, 8001 if quick else 80001)
    al = sf.alpha(xs)
    c.add("alpha(0)=-1/4", abs(sf.alpha(0.0) + 0.25) - 1e-15)
    c.add("global minimum at 0", -0.25 - al - 1e-15)
    c.add("even", np.abs(al - sf.alpha(-xs)) - 1e-15)
    inner = xs[np.abs(xs) < x1 - 1e-9]
    outer = xs[np.abs(xs) > x1 + 1e-9]
    c.add("negative inside", sf.alpha(inner))
    c.add("positive outside", -sf.alpha(outer))
    c.add("alpha(x1)=0", abs(sf.alpha(x1)) - 1e-12)
    c.add("x1 in [1.54,1.55]", max(1.54 - x1, x1 - 1.55))
    pos = xs[xs >= 0]
    xmax = pos[np.argmax(sf.alpha(pos))]
    c.add("argmax in [2,3]", max(2.0 - xmax, xmax - 3.0))
    c.add("sup|alpha'|<=0.22", np.max(np.abs(sf.alpha_prime(xs))) - 0.22)
    mid = np.linspace(x1, 2.0, 200 if quick else 2000)
    c.add("alpha'>=0.052 on [x1,2]", 0.052 - sf.alpha_prime(mid))
    c.note(f"argmax alpha = {xmax:.4f}, sup|alpha'| = {np.max(np.abs(sf.alpha_prime(xs))):.5f} (grid only)")
    return c.report()


def check_alpha_concavity(quick=False, lower=-0.264, upper=-0.0199):
    c = _Claims("alpha_concavity", "alpha concave on [x1,3] with alpha'' in [-0.264,-0.0199]", 0.0)
    x1 = sf.solve_x1()
    xs = np.linspace(x1, 3.0, 200 if quick else 1000)
    h = 1e-3
    fd2 = (sf.alpha(xs + h) - 2 * sf.alpha(xs) + sf.alpha(xs - h)) / h**2
    a2 = sf.alpha_second(xs)
    c.add("second differences <= 0", fd2)
    c.add("alpha'' <= upper", a2 - upper)
    c.add("alpha'' >= lower", lower - a2)
    c.add("analytic alpha'' matches differences", np.abs(fd2 - a2) - 1e-5)
    c.note(f"alpha'' range [{a2.min():.5f}, {a2.max():.5f}]")
    return c.report()


def check_alpha_above_phi(quick=False, shift=sf.X1_SHIFT):
    c = _Claims("alpha_above_phi", "alpha(x) >= (x - x1 - 0.08) e^{-x} on [x1, inf)", 0.0)
    x1 = sf.solve_x1()
    xs = np.linspace(x1, 40.0, 1000 if quick else 20000)
    # compare after multiplying by e^x so the tail is not lost to underflow
    scaled_alpha = np.exp(xs) * sf.alpha(xs)
    scaled_phi = xs - x1 - shift
    c.add("e^x (phi - alpha)", scaled_phi - scaled_alpha)
    return c.report()


def check_alpha_minus_phi_tail(quick=False):
    c = _Claims("alpha_minus_phi_tail",
                "for x >= 3, alpha - phi >= x e^{-x} ((x1 + 0.08 - 1)/x - 4 e^{-x})", 1e-12)
    x1 = sf.solve_x1()
    xs = np.linspace(3.0, 40.0, 1000 if quick else 20000)
    lhs = np.exp(xs) * sf.alpha(xs) - (xs - x1 - sf.X1_SHIFT)
    rhs = (x1 + sf.X1_SHIFT - 1.0) - 4.0 * xs * np.exp(-xs)
    c.add("e^x (rhs - (alpha - phi))", rhs - lhs)
    # both sides tend to x1 + 0.08 - 1, so far out only rounding separates them
    c.note("tolerance is the rounding floor of the e^x-scaled comparison")
    return c.report()


def check_mills_sandwich(quick=False, lower=None, upper=None):
    c = _Claims("mills_sandwich", "2/(x+sqrt(x^2+4)) <= G(x) <= 2/(x+sqrt(x^2+8/pi)) for x >= 0", 0.0)
    xs = np.linspace(0.0, 40.0, 500 if quick else 5000)
    G = sf.mills_ratio(xs)
    lo, hi = sf.mills_sandwich(xs)
    if lower is not None:
        lo = lower(xs)
    if upper is not None:
        hi = upper(xs)
    c.add("lower bound", (lo - G) / G)
    c.add("upper bound", (G - hi) / G)
    return c.report()


def check_mills_decreasing(quick=False):
    c = _Claims("mills_decreasing", "G strictly decreasing on the real line", 0.0)
    xs = np.linspace(-10.0, 40.0, 1000 if quick else 20000)
    G = sf.mills_ratio(xs)
    c.add("G(x_{k+1}) - G(x_k) < 0", np.diff(G) / G[1:], count=xs.size)
    return c.report()


def check_mills_ode(quick=False):
    c = _Claims("mills_ode", "xG - G' = 1, G'' - xG' - G = 0, G''' - 2G' - xG'' = 0", 1e-6)
    xs = np.linspace(-5.0, 10.0, 151 if quick else 301)
    r1, r2, r3 = sf.mills_ode_residuals(xs)
    c.add("first", np.abs(r1))
    c.add("second", np.abs(r2))
    c.add("third", np.abs(r3))
    c.note("derivatives by Richardson-extrapolated finite differences; relative to G for x < 0")
    return c.report()


def check_tail_gap(quick=False, seed=11):
    c = _Claims("tail_gap",
                "Phi^c(|a| - x1/R) - Phi^c(|a| + x1/R) >= 2 (x1/R) gamma(|a| + x1/R)", 0.0)
    gen = rng_stream(seed, 0)
    k = 100 if quick else 1000
    an = np.concatenate([[2.548], gen.uniform(0.05, 8.0, k)])
    Rs = np.concatenate([[1.2741], np.exp(gen.uniform(math.log(0.1), math.log(20.0), k))])
    lhs = np.array([rk.tail_gap(a, R) for a, R in zip(an, Rs)])
    rhs = np.array([rk.tail_gap_lower_bound(a, R) for a, R in zip(an, Rs)])
    c.add("relative gap", (rhs - lhs) / np.maximum(lhs, 1e-300))
    return c.report()


def check_condition_monotone(quick=False):
    c = _Claims("condition_monotone", "once the curvature condition holds at |a| it holds at |a| + h", 0.0)
    Rref = sf.reference_radius()
    bad = 0
    total = 0
    for R in (Rref, 1.4, 1.8):
        grid = np.linspace(0.5 * R, 12.0, 400 if quick else 4000)
        for nu in (0.5, 0.95, 2.0):
            flags = [rk.condition_inequality_holds(a, R, nu) for a in grid]
            seen = False
            for f in flags:
                if seen and not f:
                    bad += 1
                seen = seen or f
            total += len(flags)
    c.add("true-then-false transitions", float(bad), count=total)
    return c.report()


def check_particular_case(quick=False):
    c = _Claims("particular_case",
                "curvature condition at |a| = 2R, R = sqrt(x1+0.08), nu = 0.95: 1.2741 >= 1.2668", 0.0)
    R = sf.reference_radius()
    chk = rk.condition_inequality(2 * R, R, 0.95)
    c.add("rhs - lhs", chk.rhs - chk.lhs)
    c.add("lhs near 1.2741", abs(chk.lhs - 1.2741) - 5e-4)
    c.add("rhs near 1.2668", abs(chk.rhs - 1.2668) - 5e-4)
    c.add("G(1.337) near 0.5552", abs(sf.mills_ratio(1.337) - 0.5552) - 5e-5)
    c.add("e^{x1}/4 near 1.1701", abs(math.exp(sf.solve_x1()) / 4 - 1.1701) - 5e-5)
    c.note(f"lhs={chk.lhs:.6f} rhs={chk.rhs:.6f}")
    return c.report()


# ---------------------------------------------------------------- Gaussian integrals


def _tilted_integral(power, xi, z, a_norm, R):
    def integrand(x):
        logd = -xi * x - 0.5 * (x / R - a_norm) ** 2 - math.log(math.sqrt(2 * math.pi) * R)
        return x**power * math.exp(logd)

    mode = R * a_norm - R * R * xi
    upper = max(z, mode) + 40.0 * R
    pts = [p for p in (mode, 0.0) if z < p < upper]
    val, _ = integrate.quad(integrand, z, upper, points=pts or None, epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def _jk_points(k, seed):
    gen = rng_stream(seed, 0)
    return [
        (gen.uniform(0.0, 2.0), gen.uniform(0.0, 3.0), gen.uniform(1.0, 5.0), gen.uniform(0.5, 2.0))
        for _ in range(k)
    ]


def check_j_closed_form(quick=False, seed=5):
    c = _Claims("j_closed_form", "J(xi,z) = R(1+(|a|-R xi)G(z/R+R xi-|a|)) gamma(z/R-|a|) e^{-xi z}", 1e-9)
    errs = []
    for xi, z, a, R in _jk_points(10 if quick else 50, seed):
        ref = _tilted_integral(1, xi, z, a, R)
        errs.append(abs(rk.J_integral(xi, z, a, R) - ref) / abs(ref))
    c.add("relative error vs adaptive quadrature", errs)
    return c.report()


def check_k_closed_form(quick=False, seed=6):
    c = _Claims("k_closed_form", "K(xi,z) = gamma(z/R-|a|) G(z/R+R xi-|a|) e^{-xi z}", 1e-9)
    errs = []
    for xi, z, a, R in _jk_points(10 if quick else 50, seed):
        ref = _tilted_integral(0, xi, z, a, R)
        errs.append(abs(rk.K_integral(xi, z, a, R) - ref) / abs(ref))
    R = 1.2741
    errs.append(abs(rk.K_integral(0.0, 1.0, 2.548, R) - sf.gaussian_tail(1.0 / R - 2.548)))
    c.add("relative error vs adaptive quadrature", errs)
    return c.report()


def _truncated_alpha_moments(a_norm, R, lo, hi, power):
    """E[Y^power alpha(Y) 1{lo < Y < hi}], Y ~ N(R a_norm, R^2), adaptive."""
    m = R * a_norm

    def f(y):
        return y**power * sf.alpha(y) * math.exp(-0.5 * ((y - m) / R) ** 2) / (math.sqrt(2 * math.pi) * R)

    lo_c = max(lo, m - 40 * R)
    hi_c = min(hi, m + 40 * R)
    if hi_c <= lo_c:
        return 0.0
    val, _ = integrate.quad(f, lo_c, hi_c, epsabs=1e-15, epsrel=1e-12, limit=400)
    return val


def check_beginning_minoration(quick=False):
    c = _Claims("beginning_minoration",
                "E[alpha(Z^t b0) 1{Z^t b0 > x1}] >= J(1,x1) - (x1+0.08) K(1,x1)", 0.0)
    x1 = sf.solve_x1()
    Rref = sf.reference_radius()
    viol = []
    for R in (Rref, 1.5, 2.0):
        for a in (2 * R, 3.0 + R, 5.0 + R):
            lhs = _truncated_alpha_moments(a, R, x1, math.inf, 0)
            rhs = rk.J_integral(1.0, x1, a, R) - (x1 + sf.X1_SHIFT) * rk.K_integral(1.0, x1, a, R)
            viol.append(rhs - lhs)
    ref = rk.J_integral(1.0, x1, 2.548, 1.2741) - (x1 + sf.X1_SHIFT) * rk.K_integral(1.0, x1, 2.548, 1.2741)
    c.add("rhs - lhs", viol)
    c.add("lower bound positive at (2.548, 1.2741)", -ref)
    c.note(f"J - 1.62 K at reference = {ref:.6f}")
    return c.report()


def check_control_A_B(quick=False):
    c = _Claims("control_A_B", "A >= a-bound (strict in theory) and B <= b-bound; -alpha in (0,1/4] on (-x1,x1)", 0.0)
    x1 = sf.solve_x1()
    Rref = sf.reference_radius()
    etas = (0.0, 0.25, 0.5, Rref / x1, 1.0)
    va, vb, margins = [], [], []
    for a in (2 * Rref, 3.0, 4.0) if quick else (2 * Rref, 2.8, 3.0, 3.5, 4.0, 5.0):
        A0 = _truncated_alpha_moments(a, Rref, x1, math.inf, 0)
        A2 = _truncated_alpha_moments(a, Rref, x1, math.inf, 2)
        B0 = _truncated_alpha_moments(a, Rref, -x1, x1, 0)
        B2 = _truncated_alpha_moments(a, Rref, -x1, x1, 2)
        for eta in etas:
            A = eta**2 * A2 / Rref**2 + (1 - eta**2) * A0
            B = -(eta**2 * B2 / Rref**2 + (1 - eta**2) * B0)
            abound = rk.A_lower_bound(a, Rref, eta)
            bbound = rk.B_upper_bound(a, Rref, eta)
            va.append((abound - A) / abs(abound))
            vb.append((B - bbound) / abs(bbound))
            margins.append(A / abound)
    xs = np.linspace(-x1, x1, 2001)[1:-1]
    c.add("A >= a-bound (relative)", va)
    c.add("B <= b-bound (relative)", vb)
    c.add("-alpha > 0 on (-x1,x1)", sf.alpha(xs))
    c.add("-alpha <= 1/4", -sf.alpha(xs) - 0.25)
    c.note(f"min A / a-bound = {min(margins):.4f}")
    return c.report()


# ---------------------------------------------------------------- Hessian at beta0


def _dense_fd_min_eig(a_norm, R, d=6, h=1e-3):
    a = np.zeros(d)
    a[0] = a_norm
    b0 = rk.beta0(a, R)
    E = np.eye(d)

    def f(b):
        return rk.population_risk_of_beta(b, a)

    H = np.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            v = (f(b0 + h * E[i] + h * E[j]) - f(b0 + h * E[i] - h * E[j])
                 - f(b0 - h * E[i] + h * E[j]) + f(b0 - h * E[i] - h * E[j])) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return float(np.linalg.eigvalsh(H)[0])


def check_hessian_theorem(a_norm_grid=None, R=None, quick=False, nu=0.95):
    statement = "Lambda_min of the Hessian at beta0 >= (nu/4)(Phi^c(|a|-x1/R) - Phi^c(|a|+x1/R))"
    R = sf.reference_radius() if R is None else R
    if a_norm_grid is None:
        a_norm_grid = (2 * R, 3.0, 5.0)
    c = _Claims("hessian_theorem", statement, 0.0)
    etas = np.linspace(0, 1, 1000)
    used = 0
    margins = []
    for a in a_norm_grid:
        try:
            bound = rk.lambda_min_lower_bound(a, R, nu)
        except HypothesisError as exc:
            c.note(f"|a|={a:.4g} skipped ({exc})")
            continue
        used += 1
        scan = float(np.min(rk.hessian_quadratic_form_at_beta0(a, R, etas)))
        c.add(f"bound - scan at |a|={a:.4g}", bound - scan)
        fd = _dense_fd_min_eig(a, R)
        c.add(f"fd/scan rel gap at |a|={a:.4g} minus 1e-4", abs(fd - scan) / abs(scan) - 1e-4)
        margins.append(f"|a|={a:.4g}: scan={scan:.6g} bound={bound:.6g} fd={fd:.6g}")
    if used == 0:
        return _skipped("hessian_theorem", statement, "no grid point satisfies R >= sqrt(x1+0.08), |a| >= 2R")
    c.note("; ".join(margins))
    return c.report()


def check_bilinear_values_control(quick=False, nu=0.95):
    c = _Claims("bilinear_values_control",
                "if the curvature condition holds, d2R(h,h) > (nu/4)(eta^2 x1^2/R^2 + 1 - eta^2)(tail gap)", 0.0)
    x1 = sf.solve_x1()
    R = sf.reference_radius()
    etas = np.linspace(0, 1, 101)
    for a in (2 * R, 3.0, 5.0):
        if not rk.condition_inequality_holds(a, R, nu):
            c.note(f"|a|={a:.4g}: condition false, not tested")
            continue
        q = rk.hessian_quadratic_form_at_beta0(a, R, etas)
        bound = nu / 4 * (etas**2 * x1**2 / R**2 + 1 - etas**2) * rk.tail_gap(a, R)
        c.add(f"bound - form at |a|={a:.4g}", bound - q)
    return c.report()


def check_hessian_reduction(quick=False, seed=3):
    c = _Claims("hessian_reduction",
                "d2R_{beta0}(h,h) = eta^2 E[(Z^t b0)^2 alpha]/R^2 + (1-eta^2) E[alpha], eta = |<h, b0/R>|", 1e-12)
    gen = rng_stream(seed, 0)
    R = sf.reference_radius()
    errs = []
    for a_norm in (2 * R, 3.0, 5.0):
        d = 6
        a = gen.standard_normal(d)
        a *= a_norm / np.linalg.norm(a)
        b0 = rk.beta0(a, R)
        H = rk.population_hessian(b0, a)
        for _ in range(20):
            h = _random_unit(gen, d)
            eta = abs(float(h @ b0)) / R
            errs.append(abs(float(h @ H @ h) - rk.hessian_quadratic_form_at_beta0(a_norm, R, eta)))
    c.add("|full Hessian form - reduced form|", errs)
    return c.report()


def check_orthogonality_independence(quick=False, seed=4, n=200_000):
    c = _Claims("orthogonality_independence",
                "for h orthogonal to b0, h^t Z and Z^t b0 are independent (moments factorize)", 0.0)
    gen = rng_stream(seed, 0)
    d = 5
    a = np.array([2.0, 1.0, 0.0, 0.0, 0.5])
    R = sf.reference_radius()
    b0 = rk.beta0(a, R)
    h = gen.standard_normal(d)
    h -= (h @ b0) / (b0 @ b0) * b0
    h /= np.linalg.norm(h)
    n = n // 4 if quick else n
    Z = a + gen.standard_normal((n, d))
    u = Z @ h
    y = Z @ b0
    prod = (u - u.mean()) * (y - y.mean())
    z_cov = abs(prod.mean()) / (prod.std() / math.sqrt(n))
    w = u * u * sf.alpha(y)
    exact = float(np.mean(w))
    target = rk.hessian_quadratic_form_at_beta0(float(np.linalg.norm(a)), R, 0.0)
    z_fac = abs(exact - target) / (w.std() / math.sqrt(n))
    c.add("covariance z-score minus 5", z_cov - 5.0)
    c.add("factorization z-score minus 5", z_fac - 5.0)
    c.note(f"Monte Carlo n={n}, 5 sigma tolerance")
    return c.report()


# ---------------------------------------------------------------- risk geometry


def check_derivative_formulas(quick=False, seed=1, hessian_sign=1.0):
    c = _Claims("derivative_formulas",
                "grad rho_b(X) = -g(X^t b) X and Hessian E[X X^t alpha(X^t b)] match finite differences", 0.0)
    gen = rng_stream(seed, 0)
    h = 1e-5
    e_emp, e_pop, e_hess, e_mu, e_r = [], [], [], [], []
    for _ in range(20):
        d = int(gen.integers(2, 9))
        a = gen.standard_normal(d) * gen.uniform(0.3, 2.0)
        beta = _random_unit(gen, d) * gen.uniform(0.2, 1.5)
        X = gen.standard_normal((50, d)) + a
        g_emp = rk.empirical_gradient(beta, X)
        g_pop = rk.population_gradient(beta, a)
        H = hessian_sign * rk.population_hessian(beta, a)
        fd_emp = np.zeros(d)
        fd_pop = np.zeros(d)
        fd_H = np.zeros((d, d))
        for i in range(d):
            ei = np.eye(d)[i]
            fd_emp[i] = _richardson(lambda s: (rk.empirical_risk(beta + s * ei, X) - rk.empirical_risk(beta - s * ei, X)) / (2 * s), h)
            fd_pop[i] = _richardson(lambda s: (rk.population_risk_of_beta(beta + s * ei, a)
                                               - rk.population_risk_of_beta(beta - s * ei, a)) / (2 * s), h)
            fd_H[:, i] = _richardson(lambda s: (rk.population_gradient(beta + s * ei, a)
                                                - rk.population_gradient(beta - s * ei, a)) / (2 * s), h)
        e_emp.append(np.linalg.norm(fd_emp - g_emp) / np.linalg.norm(g_emp))
        e_pop.append(np.linalg.norm(fd_pop - g_pop) / np.linalg.norm(g_pop))
        e_hess.append(np.abs(fd_H - H).max() / np.abs(H).max())
        mu, r = float(beta @ a), float(np.linalg.norm(beta))
        fd_mu = _richardson(lambda s: (rk.population_risk(mu + s, r) - rk.population_risk(mu - s, r)) / (2 * s), h)
        e_mu.append(abs(fd_mu - rk.risk_gradient_mu(mu, r)) / max(abs(fd_mu), 1e-12))
        u = mu / r
        fd_r = _richardson(lambda s: (rk.population_risk(u * (r + s), r + s) - rk.population_risk(u * (r - s), r - s)) / (2 * s), h)
        e_r.append(abs(fd_r - rk.risk_gradient_r(u, r)) / abs(fd_r))
    c.add("empirical gradient rel err - 1e-6", np.array(e_emp) - 1e-6)
    c.add("population gradient rel err - 1e-6", np.array(e_pop) - 1e-6)
    c.add("Hessian rel err - 1e-6", np.array(e_hess) - 1e-6)
    c.add("dR/dmu rel err - 1e-6", np.array(e_mu) - 1e-6)
    c.add("ray derivative rel err - 1e-6", np.array(e_r) - 1e-6)
    return c.report()


def check_risk_symmetry(quick=False, seed=2):
    c = _Claims("risk_symmetry",
                "R(beta) = R(-beta), and at fixed r the risk decreases strictly in |mu|", 0.0)
    gen = rng_stream(seed, 0)
    sym, mono = [], []
    for _ in range(50):
        r = gen.uniform(0.1, 3.0)
        a_norm = gen.uniform(0.5, 5.0)
        mus = np.linspace(0.0, r * a_norm, 50)
        vals = rk.population_risk(mus, np.full_like(mus, r))
        neg = rk.population_risk(-mus, np.full_like(mus, r))
        sym.append(np.max(np.abs(vals - neg)) - 1e-12)
        mono.append(np.max(np.diff(vals)))
        d = 6
        a = gen.standard_normal(d)
        beta = gen.standard_normal(d)
        sym.append(abs(rk.population_risk_of_beta(beta, a) - rk.population_risk_of_beta(-beta, a)) - 1e-12)
    c.add("|R(mu,r) - R(-mu,r)| - 1e-12", sym)
    c.add("R(mu_{k+1},r) - R(mu_k,r) < 0", mono)
    return c.report()


def check_ray_monotonicity(quick=False, seed=7):
    c = _Claims("ray_monotonicity", "lambda -> R(lambda beta) strictly decreasing on (0, inf)", 0.0)
    gen = rng_stream(seed, 0)
    worst = []
    neg_ray = []
    for _ in range(50):
        d = 5
        a = gen.standard_normal(d) * gen.uniform(0.2, 2.5)
        beta = _random_unit(gen, d) * gen.uniform(0.2, 1.5)
        lams = np.linspace(0.01, 3.0, 60)
        mu = lams * float(beta @ a)
        r = lams * float(np.linalg.norm(beta))
        vals = rk.population_risk(mu, r)
        worst.append(np.max(np.diff(vals)))
        u = float(beta @ a) / float(np.linalg.norm(beta))
        neg_ray.append(np.max(rk.risk_gradient_r(np.full_like(r, u), r)))
    c.add("R(lambda_{k+1} beta) - R(lambda_k beta) < 0", worst)
    c.add("ray derivative < 0", neg_ray)
    return c.report()


def check_global_minimizer(quick=False, seed=8, n_samples=10_000):
    c = _Claims("global_minimizer", "on B(0,R) the risk is minimized at +-R a/|a|", 1e-10)
    gen = rng_stream(seed, 0)
    R = sf.reference_radius()
    k = n_samples // 5 if quick else n_samples
    for a_norm in (1.0, 2 * R, 4.0):
        d = 5
        a = _random_unit(gen, d) * a_norm
        pts = _ball_points(gen, k, d, R)
        vals = rk.population_risk(pts @ a, np.linalg.norm(pts, axis=1))
        ref = rk.population_risk(R * a_norm, R)
        c.add(f"R(beta0) - min sample at |a|={a_norm:.3g}", ref - float(np.min(vals)))
    return c.report()


def check_sign_lemma(mu_grid=None, r_grid=None, mc_samples=100_000, seed=9, quick=False):
    c = _Claims("sign_lemma", "E[g(mu + rN)] has the sign of mu", 0.0)
    if mu_grid is None:
        mu_grid = np.concatenate([-np.geomspace(5.0, 0.05, 5), np.geomspace(0.05, 5.0, 5)])
    if r_grid is None:
        r_grid = np.geomspace(0.1, 5.0, 10)
    mu_grid = np.asarray(mu_grid, float)
    r_grid = np.asarray(r_grid, float)
    if mu_grid.size == 0 or r_grid.size == 0:
        raise DomainError("grids must be nonempty")
    if mc_samples < 100_000:
        raise DomainError("mc_samples must be at least 1e5")
    gen = rng_stream(seed, 0)
    M, Rg = np.meshgrid(mu_grid, r_grid, indexing="ij")
    M, Rg = M.ravel(), Rg.ravel()
    quad = -rk.risk_gradient_mu(M, Rg)  # E[g]
    sign_viol = np.where(M != 0, -np.sign(M) * quad, -np.inf)
    zs = []
    for mu, r, qv in zip(M, Rg, quad):
        sample_g = sf.g(mu + r * gen.standard_normal(mc_samples))
        se = sample_g.std() / math.sqrt(mc_samples)
        zs.append(abs(sample_g.mean() - qv) / se)
    c.add("-sign(mu) E[g]", sign_viol)
    c.add("Monte Carlo |z| - 5", np.array(zs) - 5.0)
    c.note(f"Monte Carlo with {mc_samples} draws per point, 5 sigma tolerance")
    return c.report()


# ---------------------------------------------------------------- growth around beta0


def _excess_by_nodes(mu, r, mu0, R):
    """R(mu, r) - R(mu0, R) with node-wise differences to limit cancellation."""
    q = rk.rule_for_scale(max(float(np.max(r)), R))
    mu = np.asarray(mu, float)[..., None]
    r = np.asarray(r, float)[..., None]
    diff = sf.rho(mu + r * q.nodes) - sf.rho(mu0 + R * q.nodes)
    return np.sum(diff * q.weights, axis=-1)


def check_quadratic_growth(a_norm=2.548, R=1.2741, n_samples=10_000, seed=10, quick=False):
    statement = "inf over the half ball of E(beta,b0)/|beta-b0|^2 >= c0"
    try:
        gc = rk.growth_constants(a_norm, R)
    except HypothesisError as exc:
        return _skipped("quadratic_growth", statement, str(exc))
    c = _Claims("quadratic_growth", statement, 0.0)
    gen = rng_stream(seed, 0)
    d = 4
    a = np.zeros(d)
    a[0] = a_norm
    b0 = rk.beta0(a, R)
    k = n_samples // 5 if quick else n_samples
    pts = _ball_points(gen, 3 * k, d, R)
    pts = pts[pts @ b0 > 0][:k]
    # probes near beta0 and close to the antipode on the half-space boundary
    near = b0 + _ball_points(gen, 200, d, 1e-2)
    near = near[np.linalg.norm(near, axis=1) <= R]
    anti = -b0 * (1 - 1e-6) + _ball_points(gen, 200, d, 1e-3)
    anti[:, 0] = np.abs(anti[:, 0]) * 1e-6 + 1e-9
    anti = anti * np.minimum(1.0, R / np.linalg.norm(anti, axis=1))[:, None]
    allp = np.vstack([pts, near, anti])
    ex = _excess_by_nodes(allp @ a, np.linalg.norm(allp, axis=1), a_norm * R, R)
    ratio = ex / np.sum((allp - b0) ** 2, axis=1)
    m = float(np.min(ratio))
    c.add("c0 - min ratio", gc.c0 - m, count=len(allp))
    c.note(f"min ratio = {m:.6g}, c0 = {gc.c0:.6g}, margin = {m / gc.c0:.3g}x")
    return c.report()


def check_local_growth(a_norm=2.548, R=1.2741, n_samples=2000, seed=12, quick=False):
    statement = "within eps_max of b0, E(beta,b0) >= (1/32)(1+(|a|-R)^2) e^{-(|a|R - R^2/2)} |beta-b0|^2"
    try:
        gc = rk.growth_constants(a_norm, R)
    except HypothesisError as exc:
        return _skipped("local_growth", statement, str(exc))
    c = _Claims("local_growth", statement, 0.0)
    gen = rng_stream(seed, 0)
    d = 4
    a = np.zeros(d)
    a[0] = a_norm
    b0 = rk.beta0(a, R)
    k = n_samples // 4 if quick else n_samples
    dirs = gen.standard_normal((k, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs[:, 0] = -np.abs(dirs[:, 0])  # point into the ball
    rad = gc.eps_max * np.exp(gen.uniform(math.log(1e-2), 0.0, k))
    pts = b0 + rad[:, None] * dirs
    pts = pts[np.linalg.norm(pts, axis=1) <= R]
    ex = _excess_by_nodes(pts @ a, np.linalg.norm(pts, axis=1), a_norm * R, R)
    ratio = ex / np.sum((pts - b0) ** 2, axis=1)
    c.add("coefficient - ratio", gc.local_coefficient - ratio)
    c.note(f"eps_max = {gc.eps_max:.4g}, min ratio = {ratio.min():.4g}, coefficient = {gc.local_coefficient:.4g}")
    return c.report()


def check_linear_form(quick=False, seed=13, restrict=True):
    """Lower bound on the directional derivative.

    The bound is gated on directions whose component orthogonal to beta is
    also orthogonal to a: for those E[Z^t v_perp] = 0, which is what the
    bound needs. General directions are still probed and reported, because
    the mean a^t v_perp of that component can flip the sign of dR_b(v).
    """
    c = _Claims("linear_form",
                "if a^t b - 2|b|^2 >= 0, <v,b> <= 0 and a^t v_perp = 0 then "
                "dR_b(v) >= (1/8)e^{-(2a^t b-|b|^2)/2}<-v,b/|b|^2>(|b|^2+(a^t b-2|b|^2)^2)",
                0.0)
    gen = rng_stream(seed, 0)
    Rref = sf.reference_radius()
    viol, stmt, general = [], [], []
    for _ in range(40 if quick else 200):
        d = 5
        a_norm = gen.uniform(2 * Rref, 5.0)
        a = _random_unit(gen, d) * a_norm
        while True:
            beta = _ball_points(gen, 1, d, Rref)[0]
            if beta @ a - 2 * beta @ beta >= 0:
                break
        grad = rk.population_gradient(beta, a)
        Q, _ = np.linalg.qr(np.column_stack([beta, a]))
        for _ in range(5):
            v = gen.standard_normal(d)
            if v @ beta > 0:
                v = -v
            general.append(rk.linear_form_lower_bound(beta, v, a, "proof") - float(grad @ v))
            w = v - Q @ (Q.T @ v)
            vr = -abs(float(v @ beta)) / float(beta @ beta) * beta + w
            if not restrict:
                vr = v
            dd = float(grad @ vr)
            viol.append(rk.linear_form_lower_bound(beta, vr, a, "proof") - dd)
            stmt.append(rk.linear_form_lower_bound(beta, vr, a, "statement") - dd)
    c.add("bound - derivative", viol, count=len(viol))
    general = np.array(general)
    c.note(f"variant with (a^t b - |b|^2)^2: worst {max(stmt):.3e} ({'holds' if max(stmt) <= 0 else 'fails'}), not gated")
    c.note(f"unrestricted directions (not gated): {int(np.sum(general > 0))}/{general.size} violate, "
           f"worst {general.max():.3e}")
    return c.report()


def check_scalar_product(quick=False, seed=14):
    c = _Claims("scalar_product", "|b0| = R and |b| <= R imply <b0 - b, b0> >= |b - b0|^2 / 2", 1e-12)
    gen = rng_stream(seed, 0)
    R = sf.reference_radius()
    viol = []
    for d in (2, 5, 20):
        b0 = _random_unit(gen, d) * R
        pts = _ball_points(gen, 500, d, R)
        lhs = (b0 - pts) @ b0
        rhs = 0.5 * np.sum((pts - b0) ** 2, axis=1)
        viol.append(np.max(rhs - lhs))
    c.add("rhs - lhs", viol, count=1500)
    return c.report()


def check_trilinear(quick=False, seed=15):
    c = _Claims("trilinear", "|d3R_b(u,u,u)| <= 8 e^{-(a^t b - |b|^2)} C3a(b); C3a <= 3|a|^4 on the ball when |a| >= 2R",
                0.0)
    gen = rng_stream(seed, 0)
    R = sf.reference_radius()
    d = 5
    a = np.zeros(d)
    a[0] = 3.0
    viol, fd_err = [], []
    betas = [rk.beta0(a, R)] + list(_ball_points(gen, 3 if quick else 10, d, R))
    h = 1e-2
    for beta in betas:
        bound = rk.trilinear_norm_bound(beta, a)
        for _ in range(20):
            u = _random_unit(gen, d)
            d3 = rk.third_derivative_along(beta, a, u)
            viol.append(abs(d3) - bound)
            if len(fd_err) < 20:
                def f(t):
                    return rk.population_risk_of_beta(beta + t * u, a)
                fd = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
                fd_err.append(abs(fd) - bound)
    c3 = []
    for a_norm in np.linspace(2 * R, 8.0, 10):
        av = np.zeros(d)
        av[0] = a_norm
        for m in _ball_points(gen, 500, d, R):
            c3.append(rk.c3a(m, av) / (3 * a_norm**4) - 1.0)
    c.add("|d3R| - bound (quadrature)", viol)
    c.add("|d3R| - bound (finite differences)", fd_err)
    c.add("C3a/(3|a|^4) - 1", c3)
    return c.report()


# ---------------------------------------------------------------- estimator inequalities


def check_essential_and_oracle_inequalities(fit_result, data, spec, lam, lam0, T, R=None):
    """Returns (essential, oracle) reports for one fitted beta_hat."""
    R = fit_result.config.R if R is None else R
    rows = getattr(data, "rows", data)
    ess = _Claims("essential_inequality",
                  "E(bh,b0) + lam|bh|_1 <= |V_n(bh) - V_n(b0)| + lam|b0|_1, V_n = R_n - R", 1e-12)
    orc = _Claims("oracle_inequality",
                  "E(bh,b0) + 2(lam - 2T lam0)|bh_{S^c}|_1 <= (T lam0 + lam)^2 max(s/c0, 2)", 0.0)
    e_v, o_v, notes = _inequality_margins(fit_result.beta_hat, rows, spec, lam, lam0, T, R)
    ess.add("lhs - rhs", e_v)
    orc.add("lhs - rhs", o_v[0])
    orc.note(f"lhs/rhs = {o_v[1]:.3e}; display form with coefficient 4 and A s: lhs/rhs = {o_v[2]:.3e}")
    ess.note(notes)
    return ess.report(), orc.report()


def _inequality_margins(beta_hat, rows, spec, lam, lam0, T, R):
    a = np.asarray(spec.a)
    b0 = rk.beta0(a, R)
    emp_h = rk.empirical_risk(beta_hat, rows)
    emp_0 = rk.empirical_risk(b0, rows)
    pop_h = float(rk.excess_risk(beta_hat, a, R)) + rk.population_risk(R * spec.a_norm2, R)
    pop_0 = rk.population_risk(R * spec.a_norm2, R)
    excess = pop_h - pop_0
    v_diff = (emp_h - pop_h) - (emp_0 - pop_0)
    lhs = excess + lam * np.abs(beta_hat).sum()
    rhs = abs(v_diff) + lam * np.abs(b0).sum()
    mask = np.ones(a.size, bool)
    mask[list(spec.support)] = False
    off = float(np.abs(beta_hat[mask]).sum())
    c0 = rk.c0_constant(spec.a_norm2, R)
    o_lhs = excess + 2 * (lam - 2 * T * lam0) * off
    o_rhs = (T * lam0 + lam) ** 2 * max(spec.s / c0, 2.0)
    A = 9.0 * 2**22 * spec.a_norm2**8 * (spec.a_norm2 - R) ** -6 * R**2 * math.exp(spec.a_norm2 * R + 2 * R**2)
    d_lhs = excess + 4 * (lam - 2 * T * lam0) * off
    d_rhs = A * spec.s * (T * lam0 + lam) ** 2
    note = f"excess={excess:.4e}, |V_n diff|={abs(v_diff):.3e}"
    return lhs - rhs, (o_lhs - o_rhs, o_lhs / o_rhs, d_lhs / d_rhs), note


def _estimator_reports(quick=False, seed=21):
    from .estimator import FitConfig, fit, lambda0

    R = sf.reference_radius()
    d, s, n = (40, 3, 400) if quick else (100, 5, 1000)
    spec = make_spec(d, s, 2 * R + 1e-3)
    T = 1.5
    ess_all = _Claims("essential_inequality",
                      "E(bh,b0) + lam|bh|_1 <= |V_n(bh) - V_n(b0)| + lam|b0|_1, V_n = R_n - R", 1e-12)
    orc_all = _Claims("oracle_inequality",
                      "E(bh,b0) + 2(lam - 2T lam0)|bh_{S^c}|_1 <= (T lam0 + lam)^2 max(s/c0, 2)", 0.0)
    ratios = []
    for rep in range(2 if quick else 5):
        ds = sample(spec, n, seed=seed + rep)
        lam0 = lambda0(n, d, spec.a_norm_inf)
        for lam in (3 * T * lam0, 0.5 * math.sqrt(math.log(d) / n)):
            res = fit(ds.without_labels(), FitConfig(R=R, lam=lam, restarts=2, seed=rep))
            e_v, o_v, _ = _inequality_margins(res.beta_hat, ds.rows, spec, lam, lam0, T, R)
            ess_all.add(f"lhs - rhs (rep {rep}, lam={lam:.3g})", e_v)
            if lam > 2 * T * lam0:
                orc_all.add(f"lhs - rhs (rep {rep}, lam={lam:.3g})", o_v[0])
                ratios.append(o_v[1])
    orc_all.note(f"max lhs/rhs = {max(ratios):.3e}")
    return [ess_all.report(), orc_all.report()]


def _event_T_report(quick=False):
    return [_skipped("event_T", "probability bound for the uniform deviation event",
                     "needs a supremum of the empirical process over the ball; not computed")]


# ---------------------------------------------------------------- registry


def _one(fn):
    return lambda quick: [fn(quick=quick)]


_PRODUCERS = {
    "scalar": lambda quick: check_scalar_lemmas(quick=quick),
    "derivatives": _one(check_derivative_formulas),
    "symmetry": _one(check_risk_symmetry),
    "ray": _one(check_ray_monotonicity),
    "global": _one(check_global_minimizer),
    "sign": _one(check_sign_lemma),
    "hessian": _one(check_hessian_theorem),
    "hessian_reduction": _one(check_hessian_reduction),
    "bilinear": _one(check_bilinear_values_control),
    "orthogonality": _one(check_orthogonality_independence),
    "growth": _one(check_quadratic_growth),
    "local": _one(check_local_growth),
    "linear": _one(check_linear_form),
    "scalar_product": _one(check_scalar_product),
    "trilinear": _one(check_trilinear),
    "estimator": lambda quick: _estimator_reports(quick=quick),
    "event_T": _event_T_report,
}

# lemma id -> producer key
LEMMA_IDS = {
    "alpha_study": "scalar",
    "alpha_concavity": "scalar",
    "alpha_above_phi": "scalar",
    "alpha_minus_phi_tail": "scalar",
    "beginning_minoration": "scalar",
    "j_closed_form": "scalar",
    "k_closed_form": "scalar",
    "mills_sandwich": "scalar",
    "mills_decreasing": "scalar",
    "mills_ode": "scalar",
    "condition_monotone": "scalar",
    "particular_case": "scalar",
    "tail_gap": "scalar",
    "control_A_B": "scalar",
    "bilinear_values_control": "bilinear",
    "derivative_formulas": "derivatives",
    "risk_symmetry": "symmetry",
    "ray_monotonicity": "ray",
    "global_minimizer": "global",
    "sign_lemma": "sign",
    "hessian_theorem": "hessian",
    "hessian_reduction": "hessian_reduction",
    "orthogonality_independence": "orthogonality",
    "quadratic_growth": "growth",
    "local_growth": "local",
    "linear_form": "linear",
    "scalar_product": "scalar_product",
    "trilinear": "trilinear",
    "essential_inequality": "estimator",
    "oracle_inequality": "estimator",
    "event_T": "event_T",
}

_SCALAR_CHECKS = {
    "alpha_study": check_alpha_study,
    "alpha_concavity": check_alpha_concavity,
    "alpha_above_phi": check_alpha_above_phi,
    "alpha_minus_phi_tail": check_alpha_minus_phi_tail,
    "beginning_minoration": check_beginning_minoration,
    "j_closed_form": check_j_closed_form,
    "k_closed_form": check_k_closed_form,
    "mills_sandwich": check_mills_sandwich,
    "mills_decreasing": check_mills_decreasing,
    "mills_ode": check_mills_ode,
    "condition_monotone": check_condition_monotone,
    "particular_case": check_particular_case,
    "tail_gap": check_tail_gap,
    "control_A_B": check_control_A_B,
}


def check_scalar_lemmas(quick=False, only=None):
    ids = [k for k in _SCALAR_CHECKS if only is None or k in only]
    return [_SCALAR_CHECKS[k](quick=quick) for k in ids]


def default_workers():
    env = os.environ.get("ENTROCLUST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"ENTROCLUST_THREADS must be an integer, got {env!r}") from None
    return max(1, min(8, os.cpu_count() or 1))


def run_checks(only=None, quick=False, workers=None):
    """Run the selected checks and return reports sorted by lemma_id."""
    ids = sorted(LEMMA_IDS) if only is None else list(only)
    unknown = [i for i in ids if i not in LEMMA_IDS]
    if unknown:
        raise DomainError(f"unknown lemma id(s) {unknown}; valid ids: {', '.join(sorted(LEMMA_IDS))}")
    wanted = set(ids)
    keys = sorted({LEMMA_IDS[i] for i in ids})
    workers = default_workers() if workers is None else workers

    def produce(key):
        if key == "scalar":
            return check_scalar_lemmas(quick=quick, only=wanted)
        return _PRODUCERS[key](quick)

    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(produce, keys))
    else:
        batches = [produce(k) for k in keys]
    reports = [r for batch in batches for r in batch if r.lemma_id in wanted]
    return sorted(reports, key=lambda r: r.lemma_id)


def report_document(reports):
    return {"schema": SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]}


def emit_report(reports, path):
    """Write the JSON report; returns the process exit status (1 if any check failed)."""
    doc = report_document(reports)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return 1 if any(r.status == "fail" for r in reports) else 0


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_VERSION or "reports" not in doc:
        raise DomainError(f"{path} is not a schema {SCHEMA_VERSION} lemma report")
    return [LemmaReport(**r) for r in doc["reports"]]
