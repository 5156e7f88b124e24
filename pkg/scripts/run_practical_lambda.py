#!/usr/bin/env python3
"""Supplementary sweep with lambda = c sqrt(log d / n), c = 0.1.

Not the theory choice of lambda. With lambda = 3 T lambda0 the penalty
dominates at every desk-scale n and the estimator is identically zero (see
zero_solution_threshold.py); this run shows the same estimator and solver
at a penalty level of the usual sqrt(log d / n) order.
"""
import os
import runpy
import sys

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    if not any(a.endswith(".json") for a in sys.argv[1:]):
        sys.argv.insert(1, os.path.join(HERE, "plans", "rate_practical.json"))
    runpy.run_path(os.path.join(HERE, "run_rate_experiment.py"), run_name="__main__")
