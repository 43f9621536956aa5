"""Bound lattices: every inequality the proofs lean on, checked on a grid of inputs.

Each suite returns a list of BoundReport. Reports whose inputs fall outside
the inequality's stated domain are kept with valid=False and count as
skipped, not failed.
"""

from __future__ import annotations

import math
from typing import Callable

import mpmath
import numpy as np

from . import approxcalc, gkpmath, gridsim, numtheory, peaksim, spectral
from .gkpmath import BoundReport
from .params import desk_params, table_params

POW2 = [2.0 ** -i for i in range(2, 13)]


# ------------------------------------------------------------------- gkp

def suite_gkp() -> list:
    out = []
    for delta in POW2:
        eps = math.sqrt(delta)
        if eps < 0.5:
            out.append(gkpmath.truncated_gaussian_report(delta, eps))
    for kappa in POW2:
        for delta in POW2:
            out.extend(gkpmath.norm_const_reports(kappa, delta))
            if kappa < 0.25 and math.sqrt(delta) < 0.5:
                out.append(gkpmath.gkp_truncation_overlap(kappa, delta))
    for kappa in POW2:
        for d in range(21):
            out.append(gkpmath.gkp_shift_overlap(kappa, d))
        for r in (4, 5, 6, 8, 10, 16, 32):
            out.append(gkpmath.gkp_window_mass(kappa, 0.25, r))
    for eps in (0.05, 0.1, 0.2, 0.3, 0.45):
        for d in np.linspace(0, 3, 31):
            d = float(d)
            # overlap of the nearest truncated teeth; must vanish whenever orthogonality is claimed
            ov = max(abs(gkpmath.chi_overlap(0.0, d - k, eps / 2, eps, eps)) for k in range(-1, 5))
            out.append(BoundReport.make("displaced_gkp_orthogonal", ov, 0.0, direction="<=",
                                        valid=gkpmath.displaced_gkp_orthogonal(eps, d), eps=eps, d=d))
    return out


# ---------------------------------------------------------------- bounds

def suite_bounds(jacobi_samples: int = 200, seed: int = 20240611) -> list:
    out = []
    for t in (0.5, 1.0, 2.0):
        out.append(BoundReport.make("poisson_residual", gkpmath.poisson_residual(t), 1e-10, direction="<=", t=t))
    for s in (0.3, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0):
        for k in range(0, 7):
            out.append(gkpmath.discrete_gaussian_tail(s, k * s))
        for t in (0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0):
            out.append(gkpmath.periodic_gaussian_ratio(s, t))
    rng = np.random.default_rng(seed)
    lo = math.log(math.sqrt(2) + 1)
    for _ in range(jacobi_samples):
        mag = math.exp(rng.uniform(lo, 3.0)) ** rng.choice([-1, 1])
        xi = mag * complex(math.cos(p := rng.uniform(0, 2 * math.pi)), math.sin(p))
        b = float(rng.uniform(0, 0.95))
        out.append(gkpmath.jacobi_sum_bound(xi, b))
    for c in (math.pi / 32, 0.01, 0.15):
        out.append(gkpmath.abs_gauss_sum_bound(c))
    return out


# ------------------------------------------------------------ approxcalc

def suite_approxcalc(ns=range(4, 17)) -> list:
    out = []
    for n in ns:
        p = table_params(2 ** n - 1)
        b = approxcalc.stage_errors(p, n)
        target = 364 * mpmath.mpf(2) ** (-2 * n)
        rel = abs(b.total - target) / target
        out.append(BoundReport.make("stage_total_vs_364", float(rel), 1e-12, direction="<=", n=n))
        for j, (g, e) in enumerate(zip(b.general, b.eps), start=1):
            # compare as log2 so values far below double range stay meaningful
            out.append(BoundReport.make(f"stage_general_eps{j}", float(mpmath.log(g, 2)),
                                        float(mpmath.log(e, 2)) + 1e-12, direction="<=", n=n))
    # constructible stage pairs at moderate parameters against their overlap bounds
    mp = peaksim.moderate_params()
    for a in (2, 7):
        N = 15
        d = peaksim.analytic_stage_distances(mp, a, N)
        budget = approxcalc.stage_errors(mp, N.bit_length(), N)
        s3 = peaksim.build_stage(mp, a, N, 3)
        s4 = peaksim.build_stage(mp, a, N, 4)
        s5 = peaksim.build_stage(mp, a, N, 5)
        td34 = peaksim.trace_distance(s3, s4)
        td45 = peaksim.trace_distance(s4, s5)
        out.append(BoundReport.make("stage34_trace_distance", td34, float(budget.general[3]), direction="<=", a=a))
        out.append(BoundReport.make("stage45_trace_distance", td45, float(budget.general[4]), direction="<=", a=a))
        out.append(BoundReport.make("stage34_analytic_agreement", abs(td34 - float(d["3-4"])), 1e-9,
                                    direction="<=", a=a))
    for eps in (2.0 ** -k for k in (4, 8, 16)):
        out.append(BoundReport.make("delta_lsb_sharp", float(approxcalc.delta_lsb(eps, sharp=True)),
                                    float(approxcalc.delta_lsb(eps)), direction="<=", eps=eps))
    return out


# ------------------------------------------------------------------- lsb

def lsb_experiment(eps: float, points: int = 1024, spacing: float = 1 / 256) -> dict:
    """LSB gate on a peak supported in [2, 2 + eps]; compares with the rounded ideal."""
    spec = gridsim.GridSpec(points, spacing, 0.0)
    st = gridsim.prepare("position_peak", spec, x=2 + eps / 2, delta=eps / 4, eps=eps / 2)
    ideal = st.copy()  # round(x) = 2 is even, so the ideal leaves the qubit at 0
    gridsim.lsb_circuit(st)
    td = gridsim.trace_distance(st, ideal)
    x = spec.coords()
    psi = ideal.block(0)
    on = np.abs(psi) > 1e-150
    omega0 = st.block(0)[on] / psi[on]
    dev = x[on] - np.round(x[on])
    pointwise = np.abs(1 - omega0)
    predicted = np.abs(np.sin(math.pi * dev / 2))
    return {
        "eps": eps,
        "trace_distance": td,
        "bound": 7 * eps ** 0.25,
        "pointwise_max_error": float(np.max(np.abs(pointwise - predicted))),
        "pointwise_max_defect": float(np.max(pointwise)),
        "defect_bound": math.pi * eps / 2,
    }


def lsb_integer_fidelities(points: int = 1024, spacing: float = 1 / 256) -> list:
    """Qubit fidelity with x mod 2 xor b for integer-centered peaks."""
    spec = gridsim.GridSpec(points, spacing, 0.0)
    out = []
    for x0 in (1, 2, 3):
        for b in (0, 1):
            st = gridsim.prepare("position_peak", spec, qubit=b, x=float(x0), delta=spacing / 8, eps=spacing / 2)
            gridsim.lsb_circuit(st)
            want = (x0 % 2) ^ b
            out.append((x0, b, float(st.qubit_probabilities()[want])))
    return out


def suite_lsb() -> list:
    out = []
    for eps in (0.02, 0.05, 0.1, 0.2):
        r = lsb_experiment(eps)
        out.append(BoundReport.make("lsb_trace_distance", r["trace_distance"], r["bound"], direction="<=", eps=eps))
        out.append(BoundReport.make("lsb_pointwise_sin", r["pointwise_max_error"], 1e-6, direction="<=", eps=eps))
        out.append(BoundReport.make("lsb_pointwise_defect", r["pointwise_max_defect"], r["defect_bound"],
                                    direction="<=", eps=eps))
    for x0, b, f in lsb_integer_fidelities():
        out.append(BoundReport.make("lsb_integer_fidelity", f, 1 - 1e-9, x=x0, b=b))
    return out


# -------------------------------------------------------------- spectral

def suite_spectral(N: int = 15) -> list:
    out = []
    p = desk_params(N)
    for a in numtheory.units(N):
        m = spectral.build_model(p, a, N)
        bound = spectral.gamma_bound(m)
        for d, mass in spectral.gamma_masses(m).items():
            out.append(BoundReport.make("gamma_mass", mass, bound, valid=all(m.preconditions.values()), a=a, d=d))
        out.append(BoundReport.make("total_mass_error", abs(spectral.total_mass(m) - 1), 1e-3, direction="<=", a=a))
        out.append(BoundReport.make("c_phi_sq", m.c_phi ** 2, 0.25, a=a))
        w = np.linspace(-0.5, 0.5, 257)
        per = float(np.max(np.abs(spectral.comb_power(m, w + 1 / m.r) - spectral.comb_power(m, w))
                           / np.max(spectral.comb_power(m, w))))
        out.append(BoundReport.make("comb_period_1_over_r", per, 1e-10, direction="<=", a=a))
        for k in m.rem[:2]:
            for mm in range(m.r):
                for omega in (m.kappa_A / 4, 3 * m.kappa_A / 8, m.kappa_A / 2):
                    out.append(spectral.theta_lower_bound(m, k, mm, omega))
    return out


SUITES: dict[str, Callable[[], list]] = {
    "gkp": suite_gkp,
    "bounds": suite_bounds,
    "approxcalc": suite_approxcalc,
    "lsb": suite_lsb,
    "spectral": suite_spectral,
}


def run(suite: str = "all") -> dict:
    """Run one suite (or all) and summarize."""
    names = list(SUITES) if suite == "all" else [suite]
    if any(n not in SUITES for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    result = {"suites": {}, "passed": True}
    for name in names:
        reps = SUITES[name]()
        checked = [r for r in reps if r.valid]
        failed = [r for r in checked if not r.satisfied]
        result["suites"][name] = {
            "checked": len(checked),
            "skipped": len(reps) - len(checked),
            "failed": len(failed),
            "min_slack": min((r.slack for r in checked), default=None),
            "reports": [r.to_dict() for r in reps],
        }
        result["passed"] &= not failed
    return result
