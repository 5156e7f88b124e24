import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from entroclust import risk as rk
from entroclust import special as sf
from entroclust.errors import DomainError, HypothesisError

R_REF = sf.reference_radius()
REF = (2.548, 1.2741)


def adaptive_expect(f, mu, r):
    val, _ = integrate.quad(lambda t: f(mu + r * t) * sf.gaussian_pdf(t), -40, 40,
                            epsabs=0, epsrel=1e-12, limit=400, points=[0.0, -mu / r])
    return val


# ---------------------------------------------------------------- quadrature


@pytest.mark.parametrize("mu,r", [(0.0, 0.3), (1.5, 1.0), (-2.0, 2.5), (3.2, 1.27), (0.4, 4.0)])
def test_population_risk_matches_adaptive_quadrature(mu, r):
    assert rk.population_risk(mu, r) == pytest.approx(adaptive_expect(sf.rho, mu, r), rel=1e-12)
    assert rk.risk_gradient_mu(mu, r) == pytest.approx(-adaptive_expect(sf.g, mu, r), rel=1e-10, abs=1e-14)


def test_rule_order_grows_with_scale():
    assert rk.rule_for_scale(1.0).order == 64
    assert rk.rule_for_scale(3.0).order >= 360
    assert rk.rule_for_scale(3.0).order % 32 == 0
    assert rk.rule_for_scale(1e3).order == 4096


def test_quadrature_moments():
    q = rk.default_rule()
    assert q.weights.sum() == pytest.approx(1.0, abs=1e-14)
    for k, m in [(2, 1.0), (4, 3.0), (6, 15.0)]:
        assert np.sum(q.weights * q.nodes**k) == pytest.approx(m, rel=1e-12)


def test_nonpositive_r_rejected():
    with pytest.raises(DomainError):
        rk.population_risk(0.0, 0.0)
    with pytest.raises(DomainError):
        rk.population_risk_of_beta(np.zeros(3), np.ones(3))


# ---------------------------------------------------------------- geometry


@given(st.floats(-10, 10), st.floats(0.01, 4.0))
@settings(max_examples=100, deadline=None)
def test_symmetry_in_mu(mu, r):
    assert rk.population_risk(mu, r) == pytest.approx(rk.population_risk(-mu, r), abs=1e-14)


@given(st.floats(0.0, 5.0), st.floats(0.05, 4.0))
@settings(max_examples=100, deadline=None)
def test_ray_derivative_negative(u, r):
    assert rk.risk_gradient_r(u, r) < 0


def test_risk_below_log2_and_minimum_at_beta0():
    gen = np.random.default_rng(0)
    a = np.array([2.548, 0, 0, 0])
    b0 = rk.beta0(a, R_REF)
    pts = gen.standard_normal((2000, 4))
    pts *= R_REF * gen.random((2000, 1)) ** 0.25 / np.linalg.norm(pts, axis=1, keepdims=True)
    vals = rk.population_risk_of_beta(pts, a)
    assert np.all(vals < math.log(2))
    assert vals.min() >= rk.population_risk_of_beta(b0, a) - 1e-12


def test_excess_risk_at_zero_and_beta0():
    a = np.array([2.548, 0.0, 0.0])
    assert rk.excess_risk(rk.beta0(a, R_REF), a, R_REF) == pytest.approx(0.0, abs=1e-15)
    # frozen: beta = 0 has risk log 2
    e0 = rk.excess_risk(np.zeros(3), a, R_REF)
    assert e0 == pytest.approx(math.log(2) - rk.population_risk(2.548 * R_REF, R_REF), abs=1e-15)
    assert e0 == pytest.approx(0.48678713917171396, abs=1e-12)
    with pytest.raises(DomainError):
        rk.excess_risk(np.array([2.0, 0, 0]), a, R_REF)


# ---------------------------------------------------------------- derivatives


def _fd_grad(f, x, h=1e-5):
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_population_gradient_and_hessian_fd(seed):
    gen = np.random.default_rng(seed)
    d = int(gen.integers(2, 7))
    a = gen.standard_normal(d) * 1.5
    beta = gen.standard_normal(d)
    beta *= gen.uniform(0.2, 1.5) / np.linalg.norm(beta)
    g = rk.population_gradient(beta, a)
    fd = _fd_grad(lambda b: rk.population_risk_of_beta(b, a), beta)
    assert np.linalg.norm(fd - g) <= 1e-6 * np.linalg.norm(g)
    H = rk.population_hessian(beta, a)
    fdH = np.column_stack([_fd_grad(lambda b: rk.population_gradient(b, a)[i], beta) for i in range(d)])
    assert np.abs(fdH - H).max() <= 1e-6 * np.abs(H).max()
    np.testing.assert_allclose(H, H.T, atol=1e-15)


def test_hessian_sign_convention_negative_control():
    # the -alpha convention disagrees with finite differences
    a = np.array([2.0, 0.5, 0.0])
    beta = np.array([0.8, 0.1, 0.3])
    H = rk.population_hessian(beta, a)
    fdH = np.column_stack([_fd_grad(lambda b: rk.population_gradient(b, a)[i], beta) for i in range(3)])
    assert np.abs(fdH - H).max() < 1e-7
    assert np.abs(fdH + H).max() > 1e-2


def test_third_derivative_fd():
    a = np.array([3.0, 0.0, 1.0])
    beta = np.array([0.9, -0.2, 0.4])
    v = np.array([0.3, 0.8, -0.5])
    v /= np.linalg.norm(v)
    h = 1e-2

    def f(t):
        return rk.population_risk_of_beta(beta + t * v, a)

    fd = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
    assert rk.third_derivative_along(beta, a, v) == pytest.approx(fd, rel=1e-3)


def test_empirical_gradient_fd_and_dimension_check():
    gen = np.random.default_rng(1)
    X = gen.standard_normal((80, 4)) + 1.0
    beta = np.array([0.3, -0.2, 0.5, 0.1])
    fd = _fd_grad(lambda b: rk.empirical_risk(b, X), beta)
    g = rk.empirical_gradient(beta, X)
    assert np.linalg.norm(fd - g) <= 1e-8 * np.linalg.norm(g)
    f, g2 = rk.empirical_risk_and_gradient(beta, X)
    assert f == pytest.approx(rk.empirical_risk(beta, X), rel=1e-15)
    np.testing.assert_allclose(g2, g, rtol=1e-14)
    with pytest.raises(DomainError):
        rk.empirical_risk(np.ones(3), X)


def test_empirical_risk_converges_to_population():
    gen = np.random.default_rng(2)
    a = np.array([2.0, 1.0])
    n = 200_000
    eps = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    X = eps[:, None] * (a + gen.standard_normal((n, 2)))
    beta = np.array([0.7, -0.4])
    vals = sf.rho(X @ beta)
    se = vals.std() / math.sqrt(n)
    assert abs(vals.mean() - rk.population_risk_of_beta(beta, a)) < 5 * se


# ---------------------------------------------------------------- curvature at beta0


def test_particular_case_frozen():
    chk = rk.condition_inequality(2 * R_REF, R_REF, 0.95)
    assert chk.holds
    assert chk.lhs == pytest.approx(1.2741289724, abs=1e-8)
    assert chk.rhs == pytest.approx(1.2668393304, abs=1e-8)
    chk2 = rk.condition_inequality(*REF, 0.95)
    assert chk2.lhs == pytest.approx(1.2736667, abs=1e-6)
    assert chk2.rhs == pytest.approx(1.2670072, abs=1e-6)


def test_condition_fails_for_large_nu():
    # negative control: a large nu makes the condition false
    assert not rk.condition_inequality_holds(2 * R_REF, R_REF, 100.0)


@pytest.mark.parametrize("a_norm,scan,bound", [
    (2 * R_REF, 0.0411415, 0.0215032),
    (3.0, 0.0440989, 0.0087453),
    (5.0, 0.0137173, 1.7986e-5),
])
def test_hessian_scan_frozen(a_norm, scan, bound):
    etas = np.linspace(0, 1, 1001)
    m = np.min(rk.hessian_quadratic_form_at_beta0(a_norm, R_REF, etas))
    assert m == pytest.approx(scan, rel=1e-5)
    assert rk.lambda_min_lower_bound(a_norm, R_REF) == pytest.approx(bound, rel=1e-4)
    assert m >= bound


def test_hypotheses_enforced():
    with pytest.raises(HypothesisError):
        rk.lambda_min_lower_bound(1.0, R_REF)
    with pytest.raises(HypothesisError):
        rk.growth_constants(3.0, 1.0)
    # the quoted reference point sits a hair under 2R; accepted within HYPOTHESIS_RTOL
    rk.check_theorem_hypotheses(*REF)


def test_growth_constants_frozen():
    gc = rk.growth_constants(*REF)
    assert gc.c0 == pytest.approx(5.942968e-14, rel=1e-6)
    assert gc.eps_max == pytest.approx(3.597728e-05, rel=1e-6)
    assert gc.local_coefficient == pytest.approx(0.0071816, rel=1e-4)
    assert gc.lambda_min_bound == pytest.approx(0.0215142, rel=1e-4)


def test_tail_gap_lower_bound_property():
    for a_norm, R in [(2.548, 1.2741), (0.5, 3.0), (6.0, 0.2)]:
        assert rk.tail_gap(a_norm, R) >= rk.tail_gap_lower_bound(a_norm, R)


# ---------------------------------------------------------------- J, K


@given(st.floats(0, 2), st.floats(0, 3), st.floats(1, 5), st.floats(0.5, 2))
@settings(max_examples=25, deadline=None)
def test_J_K_closed_forms(xi, z, a_norm, R):
    def dens(x):
        return math.exp(-0.5 * (x / R - a_norm) ** 2) / (math.sqrt(2 * math.pi) * R)

    top = max(z, R * a_norm) + 40 * R
    K, _ = integrate.quad(lambda x: math.exp(-xi * x) * dens(x), z, top, epsabs=0, epsrel=1e-12, limit=400)
    J, _ = integrate.quad(lambda x: x * math.exp(-xi * x) * dens(x), z, top, epsabs=0, epsrel=1e-12, limit=400)
    assert rk.K_integral(xi, z, a_norm, R) == pytest.approx(K, rel=1e-9)
    assert rk.J_integral(xi, z, a_norm, R) == pytest.approx(J, rel=1e-9)


def test_beginning_minoration_frozen():
    x1 = sf.solve_x1()
    v = rk.J_integral(1.0, x1, 1.0 * REF[0], REF[1]) - (x1 + 0.08) * rk.K_integral(1.0, x1, *REF)
    assert v > 0


# ---------------------------------------------------------------- first and third order bounds


def test_linear_form_bound_along_ray():
    a = np.array([3.0, 0.0, 0.0])
    beta = np.array([0.5, 0.3, 0.0])
    v = -beta
    assert rk.population_gradient(beta, a) @ v >= rk.linear_form_lower_bound(beta, v, a)


def test_linear_form_fails_for_directions_with_mean_component():
    # v_perp with a^t v_perp != 0 shifts the derivative by -E[g] a^t v_perp
    a = np.array([3.0, 0.0, 0.0])
    beta = np.array([0.5, 0.3, 0.0])
    v = np.array([0.0, -1.0, 0.0]) - 0.2 * beta
    v_perp = v - (v @ beta) / (beta @ beta) * beta
    assert a @ v_perp != 0
    gaps = []
    for s in (-5.0, 5.0):
        w = v_perp * s - 0.2 * beta
        gaps.append(rk.population_gradient(beta, a) @ w - rk.linear_form_lower_bound(beta, w, a))
    assert min(gaps) < 0


def test_linear_form_preconditions():
    a = np.array([1.0, 0.0])
    with pytest.raises(HypothesisError):
        rk.linear_form_lower_bound(np.array([1.0, 0.0]), np.array([-1.0, 0.0]), a)
    a = np.array([4.0, 0.0])
    with pytest.raises(HypothesisError):
        rk.linear_form_lower_bound(np.array([0.5, 0.0]), np.array([1.0, 0.0]), a)


def test_trilinear_bound_and_c3a():
    a = np.array([3.0, 0.0, 0.0, 0.0])
    gen = np.random.default_rng(3)
    for _ in range(5):
        beta = gen.standard_normal(4) * 0.5
        bound = rk.trilinear_norm_bound(beta, a)
        for _ in range(5):
            v = gen.standard_normal(4)
            v /= np.linalg.norm(v)
            assert abs(rk.third_derivative_along(beta, a, v)) <= bound
        assert rk.c3a(beta, a) <= 3 * 3.0**4
