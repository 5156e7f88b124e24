#!/usr/bin/env python3
"""When is beta_hat = 0 forced by the penalty?

Since rho'' = alpha >= -1/4, rho(x) >= log 2 - x^2/8, so for beta in the ball
    R_n(beta) + lam |beta|_1 - log 2 >= |beta|_2 (lam - |S_n|_op R / 8),
with S_n the sample second-moment matrix. Above lam* = |S_n|_op R / 8 the
unique minimizer is 0. This script compares lam* with 3 T lambda0.
"""
import numpy as np

from entroclust import special as sf
from entroclust.datagen import make_spec, sample
from entroclust.estimator import lambda0

d, s, a_norm, T = 200, 5, 2.548, 1.5
R = sf.reference_radius()
spec = make_spec(d, s, a_norm)
print(f"{'n':>9} {'|S_n|_op':>9} {'lam*':>8} {'3T lambda0':>11}")
for n in (500, 1000, 2000, 4000, 8000):
    X = sample(spec, n, seed=n).rows
    op = np.linalg.eigvalsh(X.T @ X / n)[-1]
    print(f"{n:>9} {op:>9.3f} {op * R / 8:>8.3f} {3 * T * lambda0(n, d, spec.a_norm_inf):>11.3f}")

# population value of |S|_op is |a|^2 + 1
thr = (a_norm**2 + 1) * R / 8
n = 1000
while 3 * T * lambda0(n, d, spec.a_norm_inf) > thr:
    n = int(n * 1.05)
print(f"3T lambda0 first falls below the population lam* = {thr:.3f} near n = {n:.3g}")
