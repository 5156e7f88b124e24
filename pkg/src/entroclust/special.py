"""Scalar kernel: logistic entropy, its derivatives and Gaussian tail functions.

Every function accepts a float or an ndarray and returns the same shape.
Logistic quantities are written in terms of e^{-|x|} so that nothing
overflows for |x| up to the double-precision limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import DomainError

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
X1_SHIFT = 0.08


def _finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite input")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _sech2_quarter(ax):
    # sigma(x) * sigma(-x), evaluated from |x|
    e = np.exp(-ax)
    return e / (1.0 + e) ** 2


def rho(x):
    """Binary entropy of the logistic probabilities, log(1+e^x) - x e^x/(1+e^x)."""
    arr = _finite(x)
    ax = np.abs(arr)
    e = np.exp(-ax)
    val = np.log1p(e) + ax * e / (1.0 + e)
    return _out(val, x)


def g(x):
    """g(x) = x e^x / (1+e^x)^2, so that rho' = -g."""
    arr = _finite(x)
    return _out(arr * _sech2_quarter(np.abs(arr)), x)


def alpha(x):
    """alpha = -g'; negative on (-x1, x1), positive beyond."""
    arr = _finite(x)
    ax = np.abs(arr)
    return _out(-_sech2_quarter(ax) * (1.0 - ax * np.tanh(ax / 2.0)), x)


def alpha_prime(x):
    arr = _finite(x)
    t = np.tanh(arr / 2.0)
    s = _sech2_quarter(np.abs(arr))
    return _out(s * (0.5 * arr * (1.0 - 3.0 * t * t) + 2.0 * t), x)


def alpha_second(x):
    """Second derivative of alpha (used for the concavity check on [x1, 3])."""
    arr = _finite(x)
    t = np.tanh(arr / 2.0)
    s = _sech2_quarter(np.abs(arr))
    h = 0.5 * arr * (1.0 - 3.0 * t * t) + 2.0 * t
    dh = 0.5 * (1.0 - 3.0 * t * t) - 1.5 * arr * t * (1.0 - t * t) + (1.0 - t * t)
    return _out(s * (dh - t * h), x)


def solve_x1(tol=1e-13):
    """Positive root of alpha by bisection on [1.5, 1.6]."""
    return _solve_x1_cached(tol)


@lru_cache(maxsize=None)
def _solve_x1_cached(tol):
    # on x > 0 alpha has the sign of x*tanh(x/2) - 1, which is cheaper to bisect
    def f(x):
        return x * math.tanh(x / 2.0) - 1.0

    lo, hi = 1.5, 1.6
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise RuntimeError("x1 bracket does not straddle the root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def reference_radius():
    """R = sqrt(x1 + 0.08), the radius at which the curvature theorem is stated."""
    return math.sqrt(solve_x1() + X1_SHIFT)


@dataclass(frozen=True)
class TheoryConstants:
    x1: float
    L: float
    lipschitz_mode: str = "exact"

    def __post_init__(self):
        if self.lipschitz_mode not in ("exact", "paper_bound"):
            raise DomainError(f"unknown lipschitz_mode {self.lipschitz_mode!r}")
        if not self.L > 0:
            raise DomainError("L must be positive")


COARSE_BOUND_L = 2.5


@lru_cache(maxsize=None)
def theory_constants(lipschitz_mode="exact"):
    """Constants with L = max|g| = g(x1) (exact) or L = 2.5 (paper_bound)."""
    x1 = solve_x1()
    if lipschitz_mode == "exact":
        L = g(x1)
    elif lipschitz_mode == "paper_bound":
        L = COARSE_BOUND_L
    else:
        raise DomainError(f"unknown lipschitz_mode {lipschitz_mode!r}")
    return TheoryConstants(x1=x1, L=float(L), lipschitz_mode=lipschitz_mode)


def gaussian_pdf(x):
    arr = _finite(x)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * arr * arr), x)


def gaussian_tail(x):
    """Upper tail P(N > x)."""
    arr = _finite(x)
    return _out(sp.ndtr(-arr), x)


def log_gaussian_tail(x):
    arr = _finite(x)
    return _out(sp.log_ndtr(-arr), x)


def mills_ratio(x):
    """G(x) = P(N > x) / gamma(x), via the scaled complementary error function."""
    arr = _finite(x)
    return _out(SQRT_HALF_PI * sp.erfcx(arr / math.sqrt(2.0)), x)


def log_mills_ratio(x):
    arr = _finite(x)
    return _out(math.log(SQRT_HALF_PI) + np.log(sp.erfcx(arr / math.sqrt(2.0))), x)


def mills_sandwich(x):
    """Lower and upper bounds 2/(x+sqrt(x^2+4)) and 2/(x+sqrt(x^2+8/pi)), x >= 0."""
    arr = _finite(x)
    lo = 2.0 / (arr + np.sqrt(arr * arr + 4.0))
    hi = 2.0 / (arr + np.sqrt(arr * arr + 8.0 / math.pi))
    return _out(lo, x), _out(hi, x)


def _richardson_derivs(f, x, h):
    """First three derivatives by central differences, two Richardson levels."""

    def d1(step):
        return (f(x + step) - f(x - step)) / (2 * step)

    def d2(step):
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2

    def d3(step):
        return (f(x + 2 * step) - 2 * f(x + step) + 2 * f(x - step) - f(x - 2 * step)) / (2 * step**3)

    out = []
    for d in (d1, d2, d3):
        a0, a1, a2 = d(h), d(h / 2), d(h / 4)
        b1 = (4 * a1 - a0) / 3
        b2 = (4 * a2 - a1) / 3
        out.append((16 * b2 - b1) / 15)
    return out


def mills_ode_residuals(x, h=None):
    """Residuals of xG - G' - 1, G'' - xG' - G and G''' - 2G' - xG''.

    Derivatives come from finite differences of ``mills_ratio``, so the
    residuals test the ODE rather than restate it. For x < 0, where G grows
    like e^{x^2/2}, residuals are divided by G(x) so that they measure
    relative error; for x >= 0 they are absolute.
    """
    arr = _finite(x)
    if h is None:
        h = 2e-2
    G = np.asarray(mills_ratio(arr))
    G1, G2, G3 = _richardson_derivs(lambda t: np.asarray(mills_ratio(t)), arr, h)
    scale = np.where(arr < 0, np.maximum(1.0, G), 1.0)
    r1 = (arr * G - G1 - 1.0) / scale
    r2 = (G2 - arr * G1 - G) / scale
    r3 = (G3 - 2.0 * G1 - arr * G2) / scale
    return _out(r1, x), _out(r2, x), _out(r3, x)
