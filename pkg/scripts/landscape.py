#!/usr/bin/env python3
"""Tabulate R(mu, r) on the feasible region for |a| = 2.548 and print ray checks."""
import numpy as np

from entroclust import risk as rk
from entroclust.cli import main

if __name__ == "__main__":
    main(["landscape", "--a-norm", "2.548", "--mu-grid=-3.3:3.3:67", "--r-grid", "0.05:1.2741:50",
          "--out", "landscape.csv"])
    print("wrote landscape.csv")
    u = 2.0
    for lam in np.linspace(0.1, 1.5, 8):
        print(f"lambda={lam:.2f}  R(lambda beta)={rk.population_risk(u * lam, lam):.8f}")
