"""Acceptance criteria 1-12, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from entroclust import risk as rk
from entroclust import special as sf
from entroclust import verification as vf
from entroclust.datagen import make_spec, sample
from entroclust.experiment import ExperimentPlan, run_sweep, task_seed

from conftest import ACCEPTANCE_LINES

R_REF = sf.reference_radius()


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    return ok


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_c01_x1_root():
    x1, dt = timed(sf._solve_x1_cached.__wrapped__, 1e-13)
    ok = 1.54340462 <= x1 <= 1.54340464 and dt < 1e-3
    assert record(1, ok, f"x1={x1:.10f} time={dt * 1e3:.3f} ms")


def test_c02_particular_case():
    sf.solve_x1()  # warm the root cache; the budget covers the inequality itself
    chk, dt = timed(rk.condition_inequality, 2 * R_REF, R_REF, 0.95)
    ok = chk.holds and abs(chk.lhs - 1.2741) <= 5e-4 and abs(chk.rhs - 1.2668) <= 5e-4 and dt < 1e-3
    assert record(2, ok, f"lhs={chk.lhs:.6f} rhs={chk.rhs:.6f} time={dt * 1e3:.3f} ms")


def test_c03_mills_ratio():
    xs = np.linspace(0, 40, 500)
    G = sf.mills_ratio(xs)
    lo, hi = sf.mills_sandwich(xs)
    sandwich = bool(np.all(lo <= G) and np.all(G <= hi))
    decreasing = bool(np.all(np.diff(G) < 0))
    ode = max(float(np.max(np.abs(r))) for r in sf.mills_ode_residuals(np.linspace(-5, 10, 301)))
    ok = sandwich and decreasing and ode <= 1e-6
    assert record(3, ok, f"sandwich={sandwich} decreasing={decreasing} max ODE residual={ode:.2e}")


def test_c04_hessian_theorem():
    rep, dt = timed(vf.check_hessian_theorem, (2 * R_REF, 3.0, 5.0), R_REF)
    ok = rep.status == "pass" and dt < 10
    assert record(4, ok, f"{rep.status} worst={rep.worst_violation:.3e} time={dt:.2f} s | {rep.notes.split('| ')[-1]}")


def test_c05_derivatives():
    rep, dt = timed(vf.check_derivative_formulas)
    neg = vf.check_derivative_formulas(hessian_sign=-1.0)
    ok = rep.status == "pass" and neg.status == "fail" and dt < 5
    assert record(5, ok, f"{rep.status} worst={rep.worst_violation:.3e} (-alpha convention: {neg.status}) time={dt:.2f} s")


def test_c06_j_k_closed_forms():
    t0 = time.perf_counter()
    j = vf.check_j_closed_form(quick=True)
    k = vf.check_k_closed_form(quick=True)
    dt = time.perf_counter() - t0
    ok = j.status == "pass" and k.status == "pass" and dt < 2
    assert record(6, ok, f"J worst rel={j.worst_violation:.2e} K worst rel={k.worst_violation:.2e} time={dt:.2f} s")


def test_c07_risk_geometry():
    t0 = time.perf_counter()
    sym = vf.check_risk_symmetry()
    ray = vf.check_ray_monotonicity()
    glob = vf.check_global_minimizer(n_samples=10_000)
    dt = time.perf_counter() - t0
    ok = all(r.status == "pass" for r in (sym, ray, glob)) and dt < 30
    assert record(7, ok, f"symmetry/sphere={sym.status} ray={ray.status} global={glob.status} time={dt:.2f} s")


def test_c08_quadratic_growth():
    rep, dt = timed(vf.check_quadratic_growth, 2.548, 1.2741, 10_000)
    c0 = rk.c0_constant(2.548, 1.2741)
    min_ratio = c0 - rep.worst_violation
    margin = min_ratio / c0
    ok = rep.status == "pass" and margin >= 1e3 and dt < 60
    assert record(8, ok, f"min ratio={min_ratio:.4g} c0={c0:.4g} margin={margin:.3g}x time={dt:.2f} s")


RATE_PLAN = dict(name="acceptance_rate", d=200, s=5, a_norm=2.548, n_grid=[500, 1000, 2000, 4000, 8000],
                 replicates=20, T=1.5, lambda_rule="theory", lipschitz_mode="exact", mode="oracle",
                 restarts=4, master_seed=2024)


@pytest.fixture(scope="module")
def rate_run(tmp_path_factory):
    plan = ExperimentPlan(**RATE_PLAN, outputs=str(tmp_path_factory.mktemp("rate")))
    t0 = time.perf_counter()
    rows, summary, fits = run_sweep(plan)
    return plan, rows, summary, fits, time.perf_counter() - t0


def test_c09_rate_experiment(rate_run):
    plan, rows, summary, fits, dt = rate_run
    ex = [p["median_excess_risk"] for p in summary["per_n"]]
    off = [p["median_l1_off_support"] for p in summary["per_n"]]
    slope = summary["loglog_slope_excess"]
    ok = (summary["excess_strictly_decreasing"] and summary["l1_off_strictly_decreasing"]
          and slope is not None and slope <= -0.6 and dt < 600)
    detail = (f"median excess={[f'{v:.4g}' for v in ex]} median l1_off={[f'{v:.3g}' for v in off]} "
              f"slope={slope if slope is None else round(slope, 3)} time={dt:.1f} s "
              f"zero fits={sum(not np.any(f.beta_hat) for f in fits)}/{len(fits)}")
    assert record(9, ok, detail)


def test_c10_essential_and_oracle(rate_run):
    plan, rows, summary, fits, _ = rate_run
    spec = make_spec(plan.d, plan.s, plan.a_norm, plan.placement, plan.master_seed)
    n_ok = 0
    worst_ess = -math.inf
    worst_ratio = 0.0
    for row, res in zip(rows, fits):
        ds = sample(spec, row["n"], task_seed(plan.master_seed, row["n"], row["replicate"]))
        ess, orc = vf.check_essential_and_oracle_inequalities(res, ds, spec, row["lambda"], row["lambda0"], plan.T)
        n_ok += ess.status == "pass" and orc.status == "pass"
        worst_ess = max(worst_ess, ess.worst_violation)
        ratio = float(orc.notes.split("lhs/rhs = ")[1].split(";")[0])
        worst_ratio = max(worst_ratio, ratio)
    ok = n_ok == len(rows)
    assert record(10, ok, f"{n_ok}/{len(rows)} fits pass; worst essential lhs-rhs={worst_ess:.3e}; "
                          f"max oracle lhs/rhs={worst_ratio:.3e}")


def test_c11_sign_lemma():
    rep, dt = timed(vf.check_sign_lemma)
    ok = rep.status == "pass" and rep.grid_size == 200 and dt < 10
    assert record(11, ok, f"{rep.status} worst={rep.worst_violation:.3e} 100 points x (sign, MC) time={dt:.2f} s")


def test_c12_verify_quick(tmp_path):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "entroclust", "verify", "--quick", "--out",
                           str(tmp_path / "lemma-report.json")], capture_output=True, text=True,
                          env={**os.environ, "ENTROCLUST_THREADS": "1"})
    dt = time.perf_counter() - t0
    ok = proc.returncode == 0 and dt < 120
    n_pass = proc.stdout.count("pass ")
    assert record(12, ok, f"exit={proc.returncode} passed={n_pass} time={dt:.1f} s"), proc.stdout + proc.stderr
