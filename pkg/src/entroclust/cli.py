"""entroclust command line: generate, fit, sweep, verify, landscape, report show.

Exit codes: 0 success, 1 failed check or experiment, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import risk as rk
from . import special as sf
from .datagen import MixtureSpec, load_dataset, make_spec, sample, save_dataset
from .errors import DatasetParseError, DomainError
from .estimator import FitConfig, fit, lambda0, m_n, plugin_a_inf
from .experiment import load_plan, run_sweep
from .verification import LEMMA_IDS, emit_report, load_report, run_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _spec_path(data_path):
    return data_path + ".spec.json"


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------- subcommands


def cmd_generate(args):
    if args.d < 1 or args.s < 1 or args.n < 1:
        raise UsageError("--d, --s and --n must be positive")
    if args.s > args.d:
        raise UsageError(f"--s {args.s} exceeds --d {args.d}")
    if not args.a_norm > 0:
        raise UsageError("--a-norm must be positive")
    spec = make_spec(args.d, args.s, args.a_norm, args.placement, args.seed)
    ds = sample(spec, args.n, args.seed)
    if not args.labels:
        ds = ds.without_labels()
    out = args.out or f"data_n{args.n}_d{args.d}_seed{args.seed}.csv"
    save_dataset(ds, out)
    with open(_spec_path(out), "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"n={args.n} d={args.d} s={args.s} anorm={args.a_norm!r} seed={args.seed}")
    return EXIT_OK


def _load_spec(path):
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return MixtureSpec.from_vector(json.load(fh)["a"])


def cmd_fit(args):
    if not os.path.exists(args.data):
        raise UsageError(f"data file not found: {args.data}")
    ds = load_dataset(args.data)
    spec = _load_spec(_spec_path(args.data))
    if spec is not None and spec.d != ds.d:
        raise UsageError(f"dimension mismatch: data has d={ds.d}, spec sidecar has d={spec.d}")
    consts = sf.theory_constants(args.lipschitz_mode)
    extra = {}
    if args.lambda_auto:
        if args.mode == "oracle":
            a_inf = args.a_inf if args.a_inf is not None else (spec.a_norm_inf if spec else None)
            if a_inf is None:
                raise UsageError("--mode oracle needs --a-inf or a spec sidecar next to the data")
        else:
            a_inf = plugin_a_inf(ds.rows)
        lam0 = lambda0(ds.n, ds.d, a_inf, consts)
        lam = 3 * args.T * lam0
        extra = {"lambda0": lam0, "M_n": m_n(ds.n, ds.d, a_inf), "a_inf": a_inf, "mode": args.mode,
                 "L": consts.L, "lipschitz_mode": consts.lipschitz_mode}
    else:
        lam = args.lam
    cfg = FitConfig(R=args.R, lam=lam, T=args.T, restarts=args.restarts, seed=args.seed)
    res = fit(ds.without_labels(), cfg)
    res.extra.update(extra)
    _emit(res.to_json(spec) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args):
    plan = load_plan(args.plan)
    if args.outputs:
        plan.outputs = args.outputs
    _, summary, _ = run_sweep(plan, workers=args.workers)
    for p in summary["per_n"]:
        print(f"n={p['n']} median_excess={p['median_excess_risk']:.6g} "
              f"median_l1_off={p['median_l1_off_support']:.6g} recovery={p['exact_recovery_rate']:.2f}")
    print(f"slope={summary['loglog_slope_excess']} outputs={plan.outputs}")
    return EXIT_OK


def cmd_verify(args):
    only = None
    if args.only:
        only = [s.strip() for s in args.only.split(",") if s.strip()]
        unknown = [s for s in only if s not in LEMMA_IDS]
        if unknown:
            raise UsageError(f"unknown lemma id(s): {', '.join(unknown)}\nvalid ids: {', '.join(sorted(LEMMA_IDS))}")
    reports = run_checks(only=only, quick=args.quick, workers=args.workers)
    code = emit_report(reports, args.out)
    for r in reports:
        wv = "-" if r.worst_violation is None else f"{r.worst_violation:.3e}"
        print(f"{r.status:7s} {r.lemma_id:28s} worst={wv} tol={r.tolerance:g} n={r.grid_size}")
    return code


def _grid(text, name):
    """'a:b:k' (k evenly spaced points) or a comma list."""
    try:
        if ":" in text:
            lo, hi, k = text.split(":")
            k = int(k)
            if k < 1:
                raise ValueError
            vals = np.linspace(float(lo), float(hi), k)
        else:
            vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"bad {name} {text!r}; use start:stop:count or a comma list") from None
    if vals.size == 0:
        raise UsageError(f"{name} is empty")
    if not np.all(np.isfinite(vals)):
        raise UsageError(f"{name} has non-finite values")
    return vals


def cmd_landscape(args):
    mus = _grid(args.mu_grid, "--mu-grid")
    rs = _grid(args.r_grid, "--r-grid")
    if np.any(rs <= 0):
        raise UsageError("--r-grid values must be positive")
    lines = ["mu,r,risk,d_mu,d_r,feasible"]
    for r in rs:
        for mu in mus:
            p = rk.risk_point(float(mu), float(r))
            d_r = rk.risk_partial_r(float(mu), float(r))
            feasible = abs(mu) <= r * args.a_norm + 1e-12 and r <= args.R + 1e-12
            lines.append(",".join([repr(float(mu)), repr(float(r)), repr(float(p.value)),
                                   repr(float(p.d_mu)), repr(float(d_r)), "1" if feasible else "0"]))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_report_show(args):
    try:
        reports = load_report(args.path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {args.path}: {exc}") from None
    for r in reports:
        wv = "-" if r.worst_violation is None else f"{r.worst_violation:.3e}"
        print(f"{r.status:7s} {r.lemma_id:28s} worst={wv} tol={r.tolerance:g} n={r.grid_size}")
        if args.verbose:
            print(f"        {r.notes}")
    n_fail = sum(r.status == "fail" for r in reports)
    print(f"{len(reports)} checks, {n_fail} failed")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser():
    p = _Parser(prog="entroclust", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="sample a sparse symmetric mixture to CSV")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--a-norm", type=float, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--placement", choices=("first_s", "random"), default="first_s")
    g.add_argument("--labels", action="store_true", help="append the true component labels")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit the penalized estimator")
    f.add_argument("--data", required=True)
    f.add_argument("--R", type=float, default=sf.reference_radius())
    lam = f.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=float)
    lam.add_argument("--lambda-auto", action="store_true", help="lambda = 3 T lambda0")
    f.add_argument("--T", type=float, default=1.5)
    f.add_argument("--restarts", type=int, default=4)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--mode", choices=("oracle", "plugin"), default="oracle")
    f.add_argument("--a-inf", type=float, help="||a||_inf for --mode oracle")
    f.add_argument("--lipschitz-mode", choices=("exact", "paper_bound"), default="exact")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", help="run an experiment plan")
    s.add_argument("plan")
    s.add_argument("--outputs", help="override the plan's output directory")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the numerical inequality checks")
    v.add_argument("--only", help="comma-separated lemma ids")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--workers", type=int)
    v.add_argument("--out", default="lemma-report.json")
    v.set_defaults(func=cmd_verify)

    ls = sub.add_parser("landscape", help="tabulate R(mu, r) and its derivatives")
    ls.add_argument("--a-norm", type=float, required=True)
    ls.add_argument("--R", type=float, default=sf.reference_radius())
    ls.add_argument("--mu-grid", required=True)
    ls.add_argument("--r-grid", required=True)
    ls.add_argument("--out")
    ls.set_defaults(func=cmd_landscape)

    rp = sub.add_parser("report", help="inspect a lemma report")
    rsub = rp.add_subparsers(dest="report_command", parser_class=_Parser)
    rsub.required = True
    show = rsub.add_parser("show")
    show.add_argument("path")
    show.add_argument("--verbose", "-v", action="store_true")
    show.set_defaults(func=cmd_report_show)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, DatasetParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
