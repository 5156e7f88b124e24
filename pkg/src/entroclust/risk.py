"""Population and empirical entropy risk, derivatives and closed-form bounds.

Population quantities only depend on beta through mu = beta^t a and
r = ||beta||_2, because X^t beta has the law of eps (mu + r N) with N a
standard normal. Everything below is a one dimensional Gaussian integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from . import special as sf
from .errors import DomainError, HypothesisError

DEFAULT_ORDER = 64
# accepts reference values quoted to 4-5 significant digits, such as R = 1.2741
HYPOTHESIS_RTOL = 1e-3
N0_SIXTH_MOMENT = 15.0


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Probabilist Gauss-Hermite rule, weights normalized to sum to one."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def expect(self, f, mu, r):
        """E[f(mu + r N)] broadcast over array-valued mu and r."""
        mu = np.asarray(mu, dtype=float)[..., None]
        r = np.asarray(r, dtype=float)[..., None]
        vals = f(mu + r * self.nodes, self.nodes)
        return np.sum(vals * self.weights, axis=-1)


@lru_cache(maxsize=64)
def gauss_hermite(order=DEFAULT_ORDER):
    if order < 2:
        raise DomainError("quadrature order must be at least 2")
    x, w = sp.roots_hermitenorm(int(order))
    w = w / w.sum()
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(nodes=x, weights=w, order=int(order))


def default_rule():
    return gauss_hermite(DEFAULT_ORDER)


def rule_for_scale(r):
    """Rule accurate to about 1e-14 for E[h(mu + r N)] with logistic-type h.

    The integrands have complex poles at distance ~pi/r from the real axis,
    so the order must grow like r^2 for a fixed accuracy. Order 64 already
    covers r <= 1.5.
    """
    rmax = float(np.max(np.abs(r))) if np.size(r) else 0.0
    order = max(DEFAULT_ORDER, int(math.ceil(40.0 * rmax * rmax)))
    order = 32 * int(math.ceil(order / 32))
    return gauss_hermite(min(order, 4096))


def _rule(quad, r):
    return quad if quad is not None else rule_for_scale(r)


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("r must be positive and finite")
    return r


def _shape(value, *like):
    if all(np.ndim(v) == 0 for v in like):
        return float(value)
    return value


# ---------------------------------------------------------------- (mu, r) risk


@dataclass(frozen=True)
class RiskPoint:
    mu: float
    r: float
    value: float
    d_mu: float
    d_r: float


def _sech2q(x):
    e = np.exp(-np.abs(x))
    return e / (1.0 + e) ** 2


def population_risk(mu, r, quad=None):
    """R(mu, r) = E[rho(mu + r N)]."""
    _check_r(r)
    q = _rule(quad, r)
    val = q.expect(lambda x, t: sf.rho(x), mu, r)
    return _shape(val, mu, r)


def risk_gradient_mu(mu, r, quad=None):
    """Partial derivative in mu: -E[g(mu + r N)]."""
    _check_r(r)
    q = _rule(quad, r)
    val = -q.expect(lambda x, t: sf.g(x), mu, r)
    return _shape(val, mu, r)


def risk_partial_r(mu, r, quad=None):
    """Partial derivative in r at fixed mu: -E[N g(mu + r N)]."""
    _check_r(r)
    q = _rule(quad, r)
    val = -q.expect(lambda x, t: t * sf.g(x), mu, r)
    return _shape(val, mu, r)


def risk_gradient_r(u, r, quad=None):
    """Derivative along a ray, d/dr R(u r, r) = -E[r N_u^2 s(r N_u)], N_u ~ N(u, 1).

    Here s(x) = e^x/(1+e^x)^2; the value is strictly negative for r > 0.
    """
    _check_r(r)
    q = _rule(quad, r)
    u = np.asarray(u, dtype=float)
    r_arr = np.asarray(r, dtype=float)

    def f(x, t):
        nu = u[..., None] + t
        return r_arr[..., None] * nu * nu * _sech2q(r_arr[..., None] * nu)

    val = -q.expect(f, 0.0 * u, 0.0 * r_arr + 1.0)
    return _shape(val, u, r)


def risk_point(mu, r, quad=None):
    return RiskPoint(
        mu=float(mu),
        r=float(r),
        value=population_risk(mu, r, quad),
        d_mu=risk_gradient_mu(mu, r, quad),
        d_r=risk_gradient_r(mu / r, r, quad),
    )


# ---------------------------------------------------------------- beta-space risk


def _mu_r(beta, a):
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    if beta.shape[-1] != a.shape[-1]:
        raise DomainError(f"dimension mismatch: beta has {beta.shape[-1]}, a has {a.shape[-1]}")
    return beta @ a, np.linalg.norm(beta, axis=-1)


def _risk_mu_r_allow_zero(mu, r, quad=None):
    mu = np.asarray(mu, dtype=float)
    r = np.asarray(r, dtype=float)
    out = np.empty(np.broadcast(mu, r).shape)
    zero = r <= 0
    mu_b, r_b = np.broadcast_arrays(mu, r)
    if np.any(zero):
        out[zero] = sf.rho(mu_b[zero])
    if np.any(~zero):
        out[~zero] = population_risk(mu_b[~zero], r_b[~zero], quad)
    return out


def population_risk_of_beta(beta, a, quad=None):
    """R(beta); beta may be a single vector or a (k, d) stack."""
    mu, r = _mu_r(beta, a)
    if np.any(r <= 0):
        raise DomainError("beta must be nonzero")
    return _shape(population_risk(mu, r, quad), mu)


def beta0(a, R):
    a = np.asarray(a, dtype=float)
    return R * a / np.linalg.norm(a)


def excess_risk(beta, a, R, quad=None):
    """E(beta, beta0) = R(beta) - R(beta0) with beta0 = R a/||a||.

    beta = 0 is allowed here (its risk is log 2) since penalized fits can
    return it.
    """
    beta = np.asarray(beta, dtype=float)
    mu, r = _mu_r(beta, a)
    if np.any(r > R + 1e-9):
        raise DomainError(f"beta outside the ball of radius {R}")
    a_norm = float(np.linalg.norm(a))
    ref = population_risk(R * a_norm, R, quad)
    return _shape(_risk_mu_r_allow_zero(mu, r, quad) - ref, mu)


def population_gradient(beta, a, quad=None):
    """Gradient of R at a nonzero beta: dR/dmu * a + dR/dr * beta/||beta||."""
    beta = np.asarray(beta, dtype=float)
    mu, r = _mu_r(beta, a)
    if r <= 0:
        raise DomainError("beta must be nonzero")
    return risk_gradient_mu(mu, r, quad) * np.asarray(a, float) + risk_partial_r(mu, r, quad) * beta / r


def population_hessian(beta, a, quad=None):
    """Hessian E[X X^t alpha(X^t beta)] assembled from three 1-D moments."""
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    mu, r = _mu_r(beta, a)
    if r <= 0:
        raise DomainError("beta must be nonzero")
    u = beta / r
    q = _rule(quad, r)
    m0 = q.expect(lambda x, t: sf.alpha(x), mu, r)
    m1 = q.expect(lambda x, t: t * sf.alpha(x), mu, r)
    m2 = q.expect(lambda x, t: t * t * sf.alpha(x), mu, r)
    uu = np.outer(u, u)
    return (
        m0 * (np.eye(a.size) - uu + np.outer(a, a))
        + m1 * (np.outer(a, u) + np.outer(u, a))
        + m2 * uu
    )


def third_derivative_along(beta, a, v, quad=None):
    """d^3 R(v, v, v) = E[(X^t v)^3 alpha'(X^t beta)]."""
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    mu, r = _mu_r(beta, a)
    u = beta / r
    c = float(u @ v)
    s2 = max(float(v @ v) - c * c, 0.0)
    av = float(a @ v)
    q = _rule(quad, r)

    def f(x, t):
        A = av + c * t
        return (A**3 + 3.0 * A * s2) * sf.alpha_prime(x)

    return float(q.expect(f, mu, r))


# ---------------------------------------------------------------- empirical risk


def _rows(data):
    rows = getattr(data, "rows", data)
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError("data must be a nonempty n x d array")
    return rows


def empirical_risk(beta, data):
    X = _rows(data)
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != X.shape[1]:
        raise DomainError(f"dimension mismatch: beta has {beta.shape[-1]}, data has {X.shape[1]}")
    return float(np.mean(sf.rho(X @ beta)))


def empirical_gradient(beta, data):
    X = _rows(data)
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != X.shape[1]:
        raise DomainError(f"dimension mismatch: beta has {beta.shape[-1]}, data has {X.shape[1]}")
    return -(X.T @ sf.g(X @ beta)) / X.shape[0]


def empirical_risk_and_gradient(beta, X):
    """Fused evaluation used by the solver; X is a raw n x d array."""
    z = X @ beta
    az = np.abs(z)
    e = np.exp(-az)
    one_e = 1.0 + e
    val = np.mean(np.log1p(e) + az * e / one_e)
    gz = z * e / one_e**2
    return float(val), -(X.T @ gz) / X.shape[0]


# ---------------------------------------------------------------- hypotheses


def _x1():
    return sf.solve_x1()


def check_theorem_hypotheses(a_norm, R):
    """Raise HypothesisError unless R >= sqrt(x1+0.08) and ||a|| >= 2R."""
    if not (a_norm > 0 and R > 0):
        raise DomainError("a_norm and R must be positive")
    r_ref = sf.reference_radius()
    if R < r_ref * (1 - HYPOTHESIS_RTOL):
        raise HypothesisError(f"R={R} is below sqrt(x1+0.08)={r_ref:.6f}")
    if a_norm < 2 * R * (1 - HYPOTHESIS_RTOL):
        raise HypothesisError(f"a_norm={a_norm} is below 2R={2 * R:.6f}")


# ---------------------------------------------------------------- Hessian at beta0


def z_beta0_moments(a_norm, R, quad=None):
    """(E[alpha(Y)], E[Y^2 alpha(Y)]) for Y = Z^t beta0 ~ N(R a_norm, R^2)."""
    q = _rule(quad, R)
    m_alpha = q.expect(lambda x, t: sf.alpha(x), R * a_norm, R)
    m_y2 = q.expect(lambda x, t: x * x * sf.alpha(x), R * a_norm, R)
    return float(m_alpha), float(m_y2)


def hessian_quadratic_form_at_beta0(a_norm, R, eta, quad=None):
    """d^2R at beta0 on a unit h whose component along beta0 has norm eta."""
    if a_norm <= 0 or R <= 0:
        raise DomainError("a_norm and R must be positive")
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0) or np.any(eta > 1):
        raise DomainError("eta must lie in [0, 1]")
    m_alpha, m_y2 = z_beta0_moments(a_norm, R, quad)
    val = eta**2 * m_y2 / R**2 + (1 - eta**2) * m_alpha
    return _shape(val, eta)


def tail_gap(a_norm, R):
    x1 = _x1()
    return sf.gaussian_tail(a_norm - x1 / R) - sf.gaussian_tail(a_norm + x1 / R)


def lambda_min_lower_bound(a_norm, R, nu=0.95):
    """(nu/4) (Phi^c(||a|| - x1/R) - Phi^c(||a|| + x1/R))."""
    check_theorem_hypotheses(a_norm, R)
    return nu / 4.0 * tail_gap(a_norm, R)


def tail_gap_lower_bound(a_norm, R):
    """2 (x1/R) gamma(||a|| + x1/R), a lower bound for the tail gap."""
    if a_norm <= 0 or R <= 0:
        raise DomainError("a_norm and R must be positive")
    x1 = _x1()
    return 2.0 * x1 / R * sf.gaussian_pdf(a_norm + x1 / R)


@dataclass(frozen=True)
class ConditionCheck:
    holds: bool
    lhs: float
    rhs: float


def condition_inequality(a_norm, R, nu=0.95):
    """Both sides of the sufficient condition for the curvature bound."""
    if a_norm <= 0 or R <= 0 or nu <= 0:
        raise DomainError("inputs must be positive")
    x1 = _x1()
    c = x1 + sf.X1_SHIFT
    lhs = R * (1.0 - (R - a_norm + c / R) * sf.mills_ratio(x1 / R + R - a_norm))
    rhs = (1.0 + nu) * math.exp(x1) / 4.0 * sf.mills_ratio(a_norm - x1 / R)
    return ConditionCheck(holds=bool(lhs >= rhs), lhs=float(lhs), rhs=float(rhs))


def condition_inequality_holds(a_norm, R, nu=0.95):
    return condition_inequality(a_norm, R, nu).holds


def A_lower_bound(a_norm, R, eta):
    """Lower bound for the curvature contributed by {Z^t beta0 > x1}."""
    x1 = _x1()
    c = x1 + sf.X1_SHIFT
    w = eta**2 * x1**2 / R**2 + 1.0 - eta**2
    G = sf.mills_ratio(x1 / R + R - a_norm)
    return w * (R + (R * (a_norm - R) - c) * G) * sf.gaussian_pdf(a_norm - x1 / R) * math.exp(-x1)


def B_upper_bound(a_norm, R, eta):
    """Upper bound for the curvature lost on {|Z^t beta0| < x1}."""
    x1 = _x1()
    w = eta**2 * x1**2 / R**2 + 1.0 - eta**2
    return 0.25 * w * tail_gap(a_norm, R)


# ---------------------------------------------------------------- J / K integrals


def _log_J_K_common(xi, z, a_norm, R):
    # log gamma(z/R - ||a||) - xi z, shared by both closed forms
    y = z / R - a_norm
    return -0.5 * y * y - 0.5 * math.log(2 * math.pi) - xi * z


def K_integral(xi, z, a_norm, R):
    """int_z^inf e^{-xi x} N(R||a||, R^2)(dx) in closed form."""
    if R <= 0:
        raise DomainError("R must be positive")
    w = z / R + R * xi - a_norm
    return math.exp(_log_J_K_common(xi, z, a_norm, R) + sf.log_mills_ratio(w))


def J_integral(xi, z, a_norm, R):
    """int_z^inf x e^{-xi x} N(R||a||, R^2)(dx) in closed form."""
    if R <= 0:
        raise DomainError("R must be positive")
    w = z / R + R * xi - a_norm
    base = _log_J_K_common(xi, z, a_norm, R)
    # R (gamma(.) + (||a|| - R xi) G(w) gamma(.)) e^{-xi z}
    return R * (math.exp(base) + (a_norm - R * xi) * math.exp(base + sf.log_mills_ratio(w)))


# ---------------------------------------------------------------- growth constants


@dataclass(frozen=True)
class GrowthConstants:
    R: float
    a_norm: float
    lambda_min_bound: float
    eps_max: float
    c0: float
    local_coefficient: float


def c0_constant(a_norm, R):
    return (a_norm - R) ** 6 / (9.0 * 2**22 * a_norm**8 * R**2) * math.exp(-a_norm * R - 2 * R**2)


def eps_max_constant(a_norm, R):
    k = 1.0 + (a_norm - R) ** 2
    return k / (768.0 * a_norm**4) * math.exp(-(R**2) / 2 - k / (384.0 * a_norm**3 * math.exp(R**2 / 2)))


def local_growth_coefficient(a_norm, R):
    """(1/32)(1+(||a||-R)^2) e^{-(||a|| R - R^2/2)}: valid within eps_max of beta0."""
    return (1.0 + (a_norm - R) ** 2) / 32.0 * math.exp(-(a_norm * R - R**2 / 2))


def growth_constants(a_norm, R, nu=0.95):
    check_theorem_hypotheses(a_norm, R)
    return GrowthConstants(
        R=float(R),
        a_norm=float(a_norm),
        lambda_min_bound=lambda_min_lower_bound(a_norm, R, nu),
        eps_max=eps_max_constant(a_norm, R),
        c0=c0_constant(a_norm, R),
        local_coefficient=local_growth_coefficient(a_norm, R),
    )


# ---------------------------------------------------------------- first/third order bounds


def linear_form_lower_bound(beta, nu_dir, a, variant="proof"):
    """Lower bound on the directional derivative (d_beta R)(nu).

    Requires a^t beta - 2||beta||^2 >= 0 and <nu, beta> <= 0. ``variant``
    picks the centring of the squared term: "proof" uses
    (a^t beta - 2||beta||^2)^2, "statement" uses (a^t beta - ||beta||^2)^2.
    """
    beta = np.asarray(beta, dtype=float)
    nu_dir = np.asarray(nu_dir, dtype=float)
    a = np.asarray(a, dtype=float)
    mu = float(a @ beta)
    r2 = float(beta @ beta)
    tol = 1e-12 * max(1.0, abs(mu))
    if mu - 2 * r2 < -tol:
        raise HypothesisError("requires a^t beta - 2||beta||^2 >= 0")
    inner = float(nu_dir @ beta)
    if inner > 1e-12 * max(1.0, np.linalg.norm(nu_dir) * math.sqrt(r2)):
        raise HypothesisError("requires <nu, beta> <= 0")
    if variant == "proof":
        m = mu - 2 * r2
    elif variant == "statement":
        m = mu - r2
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return 0.125 * math.exp(-(2 * mu - r2) / 2) * (-inner / r2) * (r2 + m * m)


def trilinear_norm_bound(beta, a, variant="proof"):
    """Upper bound on the operator norm of the third derivative of R at beta.

    "proof" uses (m+1)^2 = m^2 + 2m + 1, "statement" m^2 + m + 1, with
    m = a^t beta - 2||beta||^2.
    """
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    mu = float(a @ beta)
    r2 = float(beta @ beta)
    a_norm = float(np.linalg.norm(a))
    m = mu - 2 * r2
    lin = 2 * m if variant == "proof" else m
    inner = r2 + m * m + lin + 1.0
    return 8.0 * math.exp(-(mu - r2)) * math.sqrt(2 * (a_norm**6 + N0_SIXTH_MOMENT) * max(inner, 0.0))


def c3a(mu_vec, a):
    """The factor multiplying the exponential in the trilinear bound."""
    mu_vec = np.asarray(mu_vec, dtype=float)
    a = np.asarray(a, dtype=float)
    a_norm = float(np.linalg.norm(a))
    r2 = float(mu_vec @ mu_vec)
    m = float(a @ mu_vec) - 2 * r2
    return math.sqrt(2 * (a_norm**6 + N0_SIXTH_MOMENT) * (r2 + m * m + 2 * m + 1.0))
