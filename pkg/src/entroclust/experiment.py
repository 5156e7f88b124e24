"""Rate sweeps: fit the estimator over a grid of sample sizes and replicates."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import risk as rk
from . import special as sf
from .datagen import make_spec, misclassification, sample
from .errors import DomainError
from .estimator import FitConfig, fit, lambda0, m_n, plugin_a_inf, predict, support_error
from .verification import default_workers

RESULT_COLUMNS = (
    "n", "replicate", "excess_risk", "l1_off_support", "exact_recovery",
    "misclassification", "lambda", "lambda0", "wall_ms",
)
LAMBDA_RULES = ("theory", "fixed", "scaled")
N_TEST = 2000


@dataclass
class ExperimentPlan:
    """Flat, JSON-serializable description of a sweep.

    lambda_rule "theory" uses lam = 3 T lambda0; "fixed" uses lambda_value;
    "scaled" uses lambda_value * sqrt(log d / n).
    """

    name: str = "sweep"
    d: int = 200
    s: int = 5
    a_norm: float = 2.548
    placement: str = "first_s"
    n_grid: list = field(default_factory=lambda: [500, 1000, 2000, 4000, 8000])
    replicates: int = 20
    R: float = field(default_factory=sf.reference_radius)
    T: float = 1.5
    lambda_rule: str = "theory"
    lambda_value: float = 0.0
    lipschitz_mode: str = "exact"
    mode: str = "oracle"
    restarts: int = 4
    outputs: str = "out"
    master_seed: int = 0

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise DomainError("plan must be a JSON object")
        known = {f.name for f in fields(cls)}
        errs = [f"unknown key {k!r}" for k in doc if k not in known]
        kwargs = {k: v for k, v in doc.items() if k in known}
        try:
            plan = cls(**kwargs)
        except TypeError as exc:
            errs.append(str(exc))
            raise DomainError("; ".join(errs)) from None
        errs.extend(plan.problems())
        if errs:
            raise DomainError("invalid plan: " + "; ".join(errs))
        return plan

    def problems(self):
        errs = []

        def is_int(v):
            return isinstance(v, int) and not isinstance(v, bool)

        if not isinstance(self.name, str) or not self.name:
            errs.append("name must be a nonempty string")
        if not (is_int(self.d) and self.d >= 1):
            errs.append("d must be a positive integer")
        if not (is_int(self.s) and self.s >= 1):
            errs.append("s must be a positive integer")
        elif is_int(self.d) and self.s > self.d:
            errs.append(f"s={self.s} exceeds d={self.d}")
        if not (isinstance(self.a_norm, (int, float)) and self.a_norm > 0):
            errs.append("a_norm must be positive")
        if self.placement not in ("first_s", "random"):
            errs.append("placement must be 'first_s' or 'random'")
        grid = self.n_grid
        if not (isinstance(grid, list) and grid and all(is_int(v) and v >= 2 for v in grid)):
            errs.append("n_grid must be a nonempty list of integers >= 2")
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            errs.append("n_grid must be strictly increasing")
        if not (is_int(self.replicates) and self.replicates >= 1):
            errs.append("replicates must be at least 1")
        if not (isinstance(self.R, (int, float)) and self.R > 0):
            errs.append("R must be positive")
        if not (isinstance(self.T, (int, float)) and self.T > 1):
            errs.append("T must exceed 1")
        if self.lambda_rule not in LAMBDA_RULES:
            errs.append(f"lambda_rule must be one of {LAMBDA_RULES}")
        if not (isinstance(self.lambda_value, (int, float)) and self.lambda_value >= 0):
            errs.append("lambda_value must be nonnegative")
        if self.lipschitz_mode not in ("exact", "paper_bound"):
            errs.append("lipschitz_mode must be 'exact' or 'paper_bound'")
        if self.mode not in ("oracle", "plugin"):
            errs.append("mode must be 'oracle' or 'plugin'")
        if not (is_int(self.restarts) and self.restarts >= 1):
            errs.append("restarts must be at least 1")
        if not isinstance(self.outputs, str) or not self.outputs:
            errs.append("outputs must be a directory path")
        if not is_int(self.master_seed):
            errs.append("master_seed must be an integer")
        return errs

    def to_dict(self):
        return asdict(self)


def load_plan(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from None
    return ExperimentPlan.from_dict(doc)


def task_seed(master_seed, n, replicate):
    return int(np.random.SeedSequence([master_seed, n, replicate]).generate_state(1)[0])


def choose_lambda(plan, n, lam0):
    if plan.lambda_rule == "theory":
        return 3 * plan.T * lam0
    if plan.lambda_rule == "fixed":
        return float(plan.lambda_value)
    return float(plan.lambda_value) * math.sqrt(math.log(plan.d) / n)


def run_task(plan, spec, n, replicate):
    t0 = time.perf_counter()
    seed = task_seed(plan.master_seed, n, replicate)
    ds = sample(spec, n, seed)
    consts = sf.theory_constants(plan.lipschitz_mode)
    a_inf = spec.a_norm_inf if plan.mode == "oracle" else plugin_a_inf(ds.rows)
    lam0 = lambda0(n, spec.d, a_inf, consts)
    lam = choose_lambda(plan, n, lam0)
    cfg = FitConfig(R=plan.R, lam=lam, T=plan.T, restarts=plan.restarts, seed=seed)
    res = fit(ds.without_labels(), cfg)
    excess = float(rk.excess_risk(res.beta_hat, spec.a, plan.R))
    off, exact = support_error(res.beta_hat, spec, plan.R)
    test = sample(spec, N_TEST, seed ^ 0x5EED)
    if np.any(res.beta_hat):
        mis = misclassification(predict(res.beta_hat, test.rows), test.labels)
    else:
        mis = 0.5  # beta_hat = 0 carries no direction
    wall = (time.perf_counter() - t0) * 1000.0
    row = {
        "n": n, "replicate": replicate, "excess_risk": excess, "l1_off_support": off,
        "exact_recovery": bool(exact), "misclassification": mis, "lambda": lam,
        "lambda0": lam0, "wall_ms": wall,
    }
    return row, res


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def results_csv(rows):
    lines = [",".join(RESULT_COLUMNS)]
    for r in rows:
        lines.append(",".join(_fmt(r[c]) for c in RESULT_COLUMNS))
    return "\n".join(lines) + "\n"


def loglog_slope(ns, values):
    x = np.log(np.asarray(ns, float))
    y = np.log(np.asarray(values, float))
    return float(np.polyfit(x, y, 1)[0])


def summarize(plan, rows):
    per_n = []
    for n in plan.n_grid:
        sub = [r for r in rows if r["n"] == n]
        per_n.append({
            "n": n,
            "median_excess_risk": float(np.median([r["excess_risk"] for r in sub])),
            "median_l1_off_support": float(np.median([r["l1_off_support"] for r in sub])),
            "exact_recovery_rate": float(np.mean([r["exact_recovery"] for r in sub])),
            "median_misclassification": float(np.median([r["misclassification"] for r in sub])),
            "lambda_median": float(np.median([r["lambda"] for r in sub])),
            "lambda0_median": float(np.median([r["lambda0"] for r in sub])),
        })
    ex = [p["median_excess_risk"] for p in per_n]
    off = [p["median_l1_off_support"] for p in per_n]
    slope = loglog_slope(plan.n_grid, ex) if len(ex) > 1 and min(ex) > 0 else None
    echo = plan.to_dict()
    echo.pop("outputs")  # where results go is not part of the result
    return {
        "plan": echo,
        "per_n": per_n,
        "excess_strictly_decreasing": all(b < a for a, b in zip(ex, ex[1:])),
        "l1_off_strictly_decreasing": all(b < a for a, b in zip(off, off[1:])),
        "loglog_slope_excess": slope,
        "bayes_error": float(sf.gaussian_tail(plan.a_norm)),
    }


def run_sweep(plan, workers=None, write=True):
    """Run every (n, replicate) task; returns (rows, summary, fits).

    Rows come back in (n, replicate) order whatever the completion order.
    """
    spec = make_spec(plan.d, plan.s, float(plan.a_norm), plan.placement, plan.master_seed)
    tasks = [(n, k) for n in plan.n_grid for k in range(plan.replicates)]
    workers = default_workers() if workers is None else workers
    t0 = time.time()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(lambda t: run_task(plan, spec, *t), tasks))
    else:
        out = [run_task(plan, spec, *t) for t in tasks]
    rows = [o[0] for o in out]
    fits = [o[1] for o in out]
    summary = summarize(plan, rows)
    if write:
        os.makedirs(plan.outputs, exist_ok=True)
        _write(os.path.join(plan.outputs, "results.csv"), results_csv(rows))
        _write(os.path.join(plan.outputs, "summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
        meta = {
            "started_unix": t0,
            "wall_seconds": time.time() - t0,
            "workers": workers,
        }
        _write(os.path.join(plan.outputs, "metadata.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return rows, summary, fits


def _write(path, text):
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


__all__ = [
    "ExperimentPlan", "load_plan", "run_sweep", "run_task", "summarize", "results_csv",
    "loglog_slope", "task_seed", "choose_lambda", "RESULT_COLUMNS", "m_n",
]
