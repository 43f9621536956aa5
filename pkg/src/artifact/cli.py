"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import mpmath
import numpy as np

from . import approxcalc, gridsim, peaksim, pipeline, spectral, verify
from .params import resolve

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
MAX_DISTRIBUTION_POINTS = 10 ** 7


class CliError(Exception):
    """Bad flags or inputs; reported with exit code 1."""


def _num(v):
    """JSON-safe number: floats stay floats, mpmath values that underflow become strings."""
    if isinstance(v, mpmath.mpf):
        f = float(v)
        return f if f != 0.0 or v == 0 else mpmath.nstr(v, 20)
    return v


def _dump_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_num) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _require(cond, msg):
    if not cond:
        raise CliError(msg)


def _params(args, N):
    try:
        return resolve(args.params, N)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read parameters: {exc}") from None


def _check_Na(N, a):
    _require(N >= 4, "--N must be at least 4")
    _require(1 <= a < N, "--a must lie in [1, N)")
    _require(math.gcd(a, N) == 1, "--a must be coprime to --N")


# ---------------------------------------------------------------- commands

def cmd_factor(args):
    _require(args.N >= 2, "--N must be at least 2")
    _require(args.attempts is None or args.attempts >= 1, "--attempts must be positive")
    params = args.params
    if params not in ("table", "desk-strict", "desk-loose"):
        params = _params(args, args.N)
    cfg = pipeline.RunConfig(args.N, params, args.attempts, args.seed, args.sampler)
    tr = pipeline.factor(cfg)
    if args.out:
        _dump_json(tr.to_dict(), args.out)
    print(tr.factor if tr.factor is not None else "none")
    return EXIT_OK


def cmd_distribution(args):
    _check_Na(args.N, args.a)
    _require(args.grid_step > 0, "--grid-step must be positive")
    _require(args.grid_to >= args.grid_from, "--grid-to must not be below --grid-from")
    n = int(math.floor((args.grid_to - args.grid_from) / args.grid_step + 1e-9)) + 1
    _require(n <= MAX_DISTRIBUTION_POINTS, f"grid has {n} points, more than {MAX_DISTRIBUTION_POINTS}")
    model = spectral.build_model(_params(args, args.N), args.a, args.N)
    w = args.grid_from + args.grid_step * np.arange(n)
    p = spectral.pdf(model, w)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "p"])
    for x, y in zip(w, np.atleast_1d(p)):
        wr.writerow([f"{x:.17g}", f"{y:.17g}"])
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def cmd_gamma(args):
    _check_Na(args.N, args.a)
    model = spectral.build_model(_params(args, args.N), args.a, args.N)
    bound = spectral.gamma_bound(model)
    masses = spectral.gamma_masses(model)
    out = {
        "N": args.N, "a": args.a, "r": model.r, "q": model.q,
        "bound": bound,
        "masses": {str(d): m for d, m in masses.items()},
        "slack": {str(d): m - bound for d, m in masses.items()},
        "all_above_bound": all(m > bound for m in masses.values()),
        "total_mass": spectral.total_mass(model),
        "preconditions": model.preconditions,
    }
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_verify(args):
    res = verify.run(args.suite)
    for name, s in res["suites"].items():
        status = "PASS" if s["failed"] == 0 else "FAIL"
        slack = "n/a" if s["min_slack"] is None else f"{s['min_slack']:.3e}"
        print(f"{status} {name}: checked={s['checked']} skipped={s['skipped']} failed={s['failed']} min_slack={slack}")
        for r in s["reports"]:
            if r["valid"] and not r["satisfied"]:
                print(f"  failed {r['name']} {r['params']}: {r['exact_value']!r} vs {r['paper_bound']!r}")
    if args.report:
        _dump_json(res, args.report)
    return EXIT_OK if res["passed"] else EXIT_FAILED


def _grid_specs(G):
    return gridsim.GridSpec(G, 8.0 / G), gridsim.GridSpec(G, 16.0 / G), gridsim.GridSpec(G, 8.0 / G)


def _uanm_states(G, a, N, m, budget):
    sA, sB, sC = _grid_specs(G)
    shapes = (peaksim.ModeShape(sA.spacing / 8), peaksim.ModeShape(4 * sB.spacing), peaksim.ModeShape(sC.spacing / 8))
    xs = range(min(4, 2 ** m))
    start = peaksim.superpose([peaksim.single_term(x, 0.0, 0.0, 0, shapes) for x in xs], [1.0] * len(xs)).normalized()
    grid = gridsim.from_peaks(start, (sA, sB, sC), budget)
    return start, grid


def cmd_gridsim(args):
    G = args.grid
    _require(G >= 16 and G & (G - 1) == 0, "--grid must be a power of two >= 16")
    out = {"circuit": args.circuit, "grid": G}
    try:
        if args.circuit == "lsb":
            eps = 0.1 if args.eps is None else args.eps
            _require(0 < eps < 0.5, "--eps must lie in (0, 1/2)")
            out.update(verify.lsb_experiment(eps, points=G, spacing=4.0 / G))
            out["passed"] = out["trace_distance"] <= out["bound"]
        elif args.circuit == "ctrlm":
            spec = gridsim.GridSpec(G, 16.0 / G)
            psi = gridsim.prepare_mode("position_peak", spec, x=1.0, delta=4 * spec.spacing)
            st = gridsim.product_state([spec], [psi], 0)
            st.block(1)[...] = psi
            st.amp /= st.norm()
            gridsim.ctrlM_alpha(st, 0, 2.0)
            ref = gridsim.product_state([spec], [psi], 0)
            ref.block(1)[...] = gridsim.prepare_mode("position_peak", spec, x=2.0, delta=8 * spec.spacing)
            ref.amp /= ref.norm()
            out.update(alpha=2.0, fidelity=gridsim.fidelity(st, ref), norm=st.norm())
            out["passed"] = out["fidelity"] >= 1 - 1e-3
        elif args.circuit == "valpha":
            sA, sB, sC = _grid_specs(G)
            psis = [gridsim.prepare_mode("position_peak", sA, x=1.0, delta=sA.spacing / 8),
                    gridsim.prepare_mode("position_peak", sB, x=1.0, delta=4 * sB.spacing),
                    gridsim.prepare_mode("position_peak", sC, x=0.0, delta=sC.spacing / 8)]
            st = gridsim.product_state((sA, sB, sC), psis, 0, budget=args.budget)
            gridsim.V_alpha(st, 1.0)
            means = [float(np.sum(st.specs[k].coords() * st.marginal(k)) * st.specs[k].spacing) for k in range(3)]
            out.update(alpha=1.0, means=means, qubit=st.qubit_probabilities().tolist())
            out["passed"] = abs(means[0]) < 1e-6 and abs(means[2] - 1) < 1e-6
        else:
            a, N, m = args.a, args.N, args.m
            _require(N >= 2 and 1 <= a < N and math.gcd(a, N) == 1, "need a coprime a in [1, N)")
            start, st = _uanm_states(G, a, N, m, args.budget)
            gridsim.U_aNm(st, a, N, m)
            ideal = peaksim.apply_UaNm_ideal(start, a, N, m)
            ref = gridsim.from_peaks(ideal, st.specs, args.budget)
            out.update(a=a, N=N, m=m, fidelity=gridsim.fidelity(st, ref), norm=st.norm())
            out["passed"] = out["fidelity"] >= 1 - 1e-3
    except gridsim.GridError as exc:
        raise CliError(str(exc)) from None
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_stages(args):
    _check_Na(args.N, args.a)
    params = _params(args, args.N)
    n = args.N.bit_length()
    budget = approxcalc.stage_errors(params, n, args.N)
    dist = peaksim.analytic_stage_distances(params, args.a, args.N)
    pairs = {}
    for key, j in (("2-3", 2), ("3-4", 3), ("4-5", 4)):
        td, eps = dist[key], budget.eps[j]
        pairs[key] = {"trace_distance": _num(td), "budget": _num(eps), "within": bool(td <= eps)}
    out = {
        "N": args.N, "a": args.a, "n": n, "params": params.to_dict(),
        "pairs": pairs, "budget": budget.to_dict(),
        "note": "2-3 is a certified upper bound; stages 0-1 and 1-2 are not constructed",
    }
    _dump_json(out, args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="artifact", description="CV factoring circuit numerics")
    sub = p.add_subparsers(dest="command", required=True)

    def add_params(sp):
        sp.add_argument("--params", default="desk-strict",
                        help="table | desk-strict | desk-loose | path to a JSON parameter file")

    f = sub.add_parser("factor", help="run the factoring loop")
    f.add_argument("--N", type=int, required=True)
    add_params(f)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--attempts", type=int, default=None)
    f.add_argument("--sampler", choices=["analytic", "grid"], default="analytic")
    f.add_argument("--out")
    f.set_defaults(func=cmd_factor)

    d = sub.add_parser("distribution", help="tabulate the output density as CSV (w,p)")
    d.add_argument("--N", type=int, required=True)
    d.add_argument("--a", type=int, required=True)
    add_params(d)
    d.add_argument("--grid-from", type=float, required=True)
    d.add_argument("--grid-to", type=float, required=True)
    d.add_argument("--grid-step", type=float, required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_distribution)

    g = sub.add_parser("gamma", help="mass near each j + d/r")
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--a", type=int, required=True)
    add_params(g)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gamma)

    v = sub.add_parser("verify", help="run bound lattices")
    v.add_argument("--suite", choices=list(verify.SUITES) + ["all"], default="all")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("gridsim", help="grid simulation of the composite gates")
    s.add_argument("--circuit", choices=["lsb", "ctrlm", "valpha", "uanm"], required=True)
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--eps", type=float)
    s.add_argument("--a", type=int, default=2)
    s.add_argument("--N", type=int, default=3)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--budget", type=int, default=gridsim.DEFAULT_BUDGET)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gridsim)

    t = sub.add_parser("stages", help="stage trace distances against their budgets")
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--a", type=int, required=True)
    add_params(t)
    t.add_argument("--out")
    t.set_defaults(func=cmd_stages)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (CliError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
