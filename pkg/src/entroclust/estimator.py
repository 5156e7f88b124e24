"""Penalized entropy estimator over a half ball.

    beta_hat = argmin_{beta in B(0,R), beta^t U > 0}  R_n(beta) + lam ||beta||_1

Solved by projected proximal gradient from several starting points. Because
both terms are even in beta, the search runs over the whole ball and the
winner is flipped into the half space at the end.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import special as sf
from .datagen import rng_stream
from .errors import DomainError
from .risk import empirical_risk_and_gradient

ACTIVITY_RTOL = 1e-8


@dataclass(frozen=True)
class FitConfig:
    R: float = field(default_factory=sf.reference_radius)
    lam: float = 0.0
    T: float = 1.5
    step_init: Optional[float] = None
    backtrack_factor: float = 0.5
    tol_objective: float = 1e-12
    max_iter: int = 5000
    restarts: int = 4
    seed: int = 0
    u_direction: Union[str, tuple] = "random"
    workers: int = 1

    def validate(self):
        errs = []
        if not self.R > 0:
            errs.append("R must be positive")
        if not self.lam >= 0:
            errs.append("lam must be nonnegative")
        if not self.T > 1:
            errs.append("T must exceed 1")
        if self.step_init is not None and not self.step_init > 0:
            errs.append("step_init must be positive")
        if not 0 < self.backtrack_factor < 1:
            errs.append("backtrack_factor must lie in (0, 1)")
        if not self.tol_objective > 0:
            errs.append("tol_objective must be positive")
        if not self.max_iter >= 1:
            errs.append("max_iter must be at least 1")
        if not self.restarts >= 1:
            errs.append("restarts must be at least 1")
        if not (self.u_direction == "random" or isinstance(self.u_direction, (tuple, list))):
            errs.append("u_direction must be 'random' or a vector")
        if errs:
            raise DomainError("; ".join(errs))
        return self


@dataclass
class FitResult:
    beta_hat: np.ndarray
    objective: float
    objective_trace: list
    n_iter_total: int
    restart_winner: int
    active_set: list
    aligned: bool
    converged: bool
    u: np.ndarray
    config: FitConfig
    extra: dict = field(default_factory=dict)

    def to_dict(self, spec=None):
        out = {
            "beta_hat": [float(v) for v in self.beta_hat],
            "objective": float(self.objective),
            "n_iter_total": int(self.n_iter_total),
            "restart_winner": int(self.restart_winner),
            "active_set": [int(i) for i in self.active_set],
            "converged": bool(self.converged),
        }
        if spec is not None:
            out["l1_off_support"] = support_error(self.beta_hat, spec, self.config.R)[0]
        else:
            out["l1_off_support"] = None
        echo = asdict(self.config)
        if isinstance(echo.get("u_direction"), tuple):
            echo["u_direction"] = list(echo["u_direction"])
        echo.update(self.extra)
        out["config_echo"] = echo
        return out

    def to_json(self, spec=None):
        return json.dumps(self.to_dict(spec), indent=2, sort_keys=True)


# ---------------------------------------------------------------- constants


def m_n(n, d, a_inf):
    return a_inf + math.sqrt(2 * math.log(d)) + math.sqrt(2 * math.log(1 + n))


def lambda0(n, d, a_inf, constants=None):
    """3 L M_n (5 sqrt(3 log 2d) log n + 4) / sqrt(n)."""
    if n < 2:
        raise DomainError("lambda0 needs n >= 2")
    if d < 1:
        raise DomainError("lambda0 needs d >= 1")
    if constants is None:
        constants = sf.theory_constants("exact")
    return 3 * constants.L * m_n(n, d, a_inf) * (5 * math.sqrt(3 * math.log(2 * d)) * math.log(n) + 4) / math.sqrt(n)


def plugin_a_inf(rows):
    """Data-driven stand-in for ||a||_inf: 95th percentile of per-coordinate median |X|.

    Not a theory quantity; for experiments where a is unknown.
    """
    med = np.median(np.abs(np.asarray(rows)), axis=0)
    return float(np.percentile(med, 95))


# ---------------------------------------------------------------- prox operators


def soft_threshold(z, t):
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def project_ball(z, R):
    nrm = float(np.linalg.norm(z))
    if nrm > R:
        return z * (R / nrm)
    return z


def proximal_step(beta, grad, step, lam, R):
    """Project onto B(0,R) after soft-thresholding a gradient step.

    Projecting after shrinking gives the exact prox of lam||.||_1 plus the
    ball indicator: the ball is sign-symmetric and coordinatewise monotone.
    """
    if not step > 0:
        raise DomainError("step must be positive")
    return project_ball(soft_threshold(np.asarray(beta) - step * np.asarray(grad), step * lam), R)


# ---------------------------------------------------------------- solver


def _unit_u(config, d):
    if config.u_direction == "random":
        u = rng_stream(config.seed, 0xC0FFEE).standard_normal(d)
    else:
        u = np.asarray(config.u_direction, dtype=float)
        if u.shape != (d,):
            raise DomainError("u_direction has the wrong dimension")
    nrm = np.linalg.norm(u)
    if nrm == 0:
        raise DomainError("u_direction must be nonzero")
    return u / nrm


def _spectral_start(X, R):
    M = X.T @ X / X.shape[0]
    _, vecs = np.linalg.eigh(M)
    return R * vecs[:, -1]


def _ball_point(gen, d, R):
    v = gen.standard_normal(d)
    v /= np.linalg.norm(v)
    return R * gen.random() ** (1.0 / d) * v


def _descend(X, lam, R, beta, step0, config):
    """Monotone projected proximal gradient with BB trial steps and backtracking."""
    f, grad = empirical_risk_and_gradient(beta, X)
    obj = f + lam * np.abs(beta).sum()
    trace = [obj]
    step = step0
    prev_beta = prev_grad = None
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        if prev_beta is not None:
            sb = beta - prev_beta
            yb = grad - prev_grad
            sy = float(sb @ yb)
            if sy > 0:
                step = min(max(float(sb @ sb) / sy, 1e-8 * step0), 1e4 * step0)
        while True:
            cand = proximal_step(beta, grad, step, lam, R)
            diff = cand - beta
            f_c, g_c = empirical_risk_and_gradient(cand, X)
            # sufficient decrease for a composite step
            if f_c <= f + grad @ diff + (diff @ diff) / (2 * step) + 1e-15:
                break
            step *= config.backtrack_factor
            if step < 1e-20:
                break
        obj_c = f_c + lam * np.abs(cand).sum()
        if obj_c > obj:
            # numerical stall: keep the current point
            converged = True
            break
        prev_beta, prev_grad = beta, grad
        beta, f, grad = cand, f_c, g_c
        decrease = obj - obj_c
        obj = obj_c
        trace.append(obj)
        if decrease <= config.tol_objective * max(1.0, abs(obj)) and float(np.abs(diff).max()) <= 1e-9 * R:
            converged = True
            break
    return beta, obj, trace, it, converged


def fit(data, config, lam=None):
    """Fit beta_hat on ``data`` (a Dataset or an n x d array).

    Only the rows are read; labels never reach the solver.
    """
    config.validate()
    X = np.ascontiguousarray(getattr(data, "rows", data), dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DomainError("data must be a nonempty n x d array")
    n, d = X.shape
    lam = config.lam if lam is None else lam
    R = config.R
    u = _unit_u(config, d)

    L = sf.theory_constants("exact").L
    step0 = config.step_init
    if step0 is None:
        step0 = 1.0 / (L * float(np.mean(np.sum(X * X, axis=1))))

    starts = [_spectral_start(X, R)]
    for k in range(1, config.restarts + 1):
        starts.append(_ball_point(rng_stream(config.seed, 1000 + k), d, R))

    def run(b):
        return _descend(X, lam, R, b, step0, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(run, starts))
    else:
        runs = [run(b) for b in starts]

    winner = 0
    for k, r in enumerate(runs):
        if r[1] < runs[winner][1]:
            winner = k
    beta, obj, trace, _, converged = runs[winner]
    n_iter_total = sum(r[3] for r in runs)

    if float(beta @ u) < 0:
        beta = -beta
    beta = beta + 0.0  # normalizes -0.0
    thr = ACTIVITY_RTOL * R
    active = [int(i) for i in np.flatnonzero(np.abs(beta) > thr)]
    f, _ = empirical_risk_and_gradient(beta, X)
    obj = f + lam * float(np.abs(beta).sum())
    return FitResult(
        beta_hat=beta,
        objective=obj,
        objective_trace=[float(v) for v in trace],
        n_iter_total=int(n_iter_total),
        restart_winner=int(winner),
        active_set=active,
        aligned=bool(beta @ u >= 0),
        converged=bool(converged),
        u=u,
        config=config,
        extra={"lambda": float(lam)},
    )


def predict(beta_hat, X_new):
    z = np.asarray(X_new, dtype=float) @ np.asarray(beta_hat, dtype=float)
    return np.where(z >= 0, 1, -1)


def support_error(beta_hat, spec, R=None):
    """(sum of |beta_i| off the support, whether the active set equals the support)."""
    if R is None:
        R = sf.reference_radius()
    beta_hat = np.asarray(beta_hat, dtype=float)
    mask = np.ones(beta_hat.size, dtype=bool)
    mask[list(spec.support)] = False
    off = float(np.abs(beta_hat[mask]).sum())
    active = set(np.flatnonzero(np.abs(beta_hat) > ACTIVITY_RTOL * R).tolist())
    return off, active == set(spec.support)
