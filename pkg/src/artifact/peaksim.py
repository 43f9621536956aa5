"""Structured simulation on superpositions of Gaussian peaks.

A PeakState is a list of terms amp * |peak_A> |peak_B> |peak_C> |q>.
Modes A and C always carry single peaks. Mode B either carries a single
peak or, in comb mode, a whole truncated GKP comb with spacing N whose
y-th tooth sits at cB + spacing * (tB + y) with envelope weight eta(y).
Storing the comb per term keeps states with kappa_B ~ 1e-20 finite.

Ideal gates act on term labels and are exact on integer centers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import mpmath
import numpy as np

from . import gkpmath, numtheory
from .params import CircuitParams

OVERLAP_FLOOR = 1e-300


class DomainViolation(ValueError):
    """An ideal gate was applied outside the integer lattice it is defined on."""


@dataclass(frozen=True)
class ModeShape:
    delta: float
    eps: Optional[float] = None
    spacing: Optional[float] = None
    kappa: Optional[float] = None

    @property
    def comb(self) -> bool:
        return self.spacing is not None

    def scaled(self, alpha: float) -> "ModeShape":
        return ModeShape(
            self.delta * alpha,
            None if self.eps is None else self.eps * alpha,
            None if self.spacing is None else self.spacing * alpha,
            self.kappa,
        )


@dataclass(frozen=True)
class PeakState:
    amp: np.ndarray
    cA: np.ndarray
    cB: np.ndarray
    cC: np.ndarray
    q: np.ndarray
    shapes: tuple
    tB: Optional[np.ndarray] = None
    sB: Optional[np.ndarray] = None
    label: str = ""
    tol: float = 1e-9

    def __post_init__(self):
        n = len(self.amp)
        if self.tB is None:
            object.__setattr__(self, "tB", np.zeros(n))
        if self.sB is None:
            object.__setattr__(self, "sB", np.ones(n))
        for name in ("cA", "cB", "cC", "tB", "sB"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "amp", np.asarray(self.amp, dtype=complex))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=np.int64))

    def __len__(self):
        return len(self.amp)

    def evolve(self, **kw) -> "PeakState":
        return replace(self, **kw)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def normalized(self) -> "PeakState":
        return self.evolve(amp=self.amp / self.norm())

    def terms(self):
        for i in range(len(self)):
            yield (self.amp[i], self.cA[i], self.cB[i], self.cC[i], int(self.q[i]))

    def to_dict(self) -> dict:
        names = "ABC"
        out = {
            "label": self.label,
            "tol": self.tol,
            "shapes": {names[i]: _shape_dict(s) for i, s in enumerate(self.shapes)},
            "terms": [[float(a.real), float(a.imag), float(x), float(y), float(z), int(b)]
                      for a, x, y, z, b in self.terms()],
        }
        if np.any(self.tB):
            out["tB"] = self.tB.tolist()
        if np.any(self.sB != 1):
            out["sB"] = self.sB.tolist()
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _shape_dict(s: ModeShape):
    return {"delta": s.delta, "eps": s.eps, "spacing": s.spacing, "kappa": s.kappa}


def single_term(xA=0.0, xB=0.0, xC=0.0, qubit=0, shapes=None, amp=1.0) -> PeakState:
    """One product of narrow truncated peaks; handy for gate tests."""
    if shapes is None:
        s = ModeShape(1e-3, 0.05)
        shapes = (s, s, s)
    return PeakState(np.array([amp]), np.array([xA]), np.array([xB]), np.array([xC]),
                     np.array([qubit]), shapes)


def superpose(states, weights) -> PeakState:
    """Linear combination of states that share their mode shapes."""
    first = states[0]
    for s in states[1:]:
        if s.shapes != first.shapes:
            raise ValueError("cannot superpose states with different mode shapes")
    cat = lambda name: np.concatenate([getattr(s, name) for s in states])
    amp = np.concatenate([w * s.amp for s, w in zip(states, weights)])
    return PeakState(amp, cat("cA"), cat("cB"), cat("cC"), cat("q"), first.shapes, cat("tB"), cat("sB"),
                     label=first.label)


# ------------------------------------------------------------ inner product

def _reach(s1: ModeShape, s2: ModeShape) -> float:
    if s1.delta != s2.delta:
        raise ValueError("peaks of different widths are not supported")
    gauss = 2 * s1.delta * math.sqrt(-math.log(OVERLAP_FLOOR))
    if s1.eps is not None and s2.eps is not None:
        return min(gauss, s1.eps + s2.eps)
    return gauss


def _mode_overlap(x, y, s1: ModeShape, s2: ModeShape):
    return gkpmath.chi_overlap(x, y, s1.delta, s1.eps, s2.eps)


def comb_shift_overlap(kappa, t):
    """<comb, comb shifted by t teeth> for equal truncated combs (vectorized over t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    uniq, inv = np.unique(t, return_inverse=True)
    vals = np.array([gkpmath.shift_overlap_exact(kappa, u) for u in uniq])
    return vals[inv]


def _comb_overlap(i, j, st1: PeakState, st2: PeakState):
    b1, b2 = st1.shapes[1], st2.shapes[1]
    if b1 != b2 or b1.eps is None:
        raise ValueError("comb overlaps need identical truncated combs")
    if b1.eps >= 0.5 * b1.spacing:
        raise ValueError("comb teeth overlap; truncation must be below half the spacing")
    dc = st1.cB[i] - st2.cB[j]
    same = dc == 0
    out = np.zeros(len(i))
    if np.any(same):
        out[same] = comb_shift_overlap(b1.kappa, st1.tB[i][same] - st2.tB[j][same])
    if np.any(~same):
        # closest approach of two teeth from different residues
        off = np.abs(np.remainder(dc[~same] + 0.5 * b1.spacing, b1.spacing) - 0.5 * b1.spacing)
        if np.any(off <= 2 * b1.eps):
            raise NotImplementedError("partially overlapping combs")
    return out


def inner_product(s1: PeakState, s2: PeakState) -> complex:
    """<s1, s2> summed over term pairs whose peaks can overlap."""
    if len(s1) == 0 or len(s2) == 0:
        return 0j
    reachA = _reach(s1.shapes[0], s2.shapes[0])
    order = np.argsort(s2.cA, kind="stable")
    sorted_cA = s2.cA[order]
    lo = np.searchsorted(sorted_cA, s1.cA - reachA, side="left")
    hi = np.searchsorted(sorted_cA, s1.cA + reachA, side="right")
    counts = hi - lo
    if counts.sum() == 0:
        return 0j
    i = np.repeat(np.arange(len(s1)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    j = order[np.repeat(lo, counts) + offs]
    keep = s1.q[i] == s2.q[j]
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return 0j
    ov = np.asarray(_mode_overlap(s1.cA[i], s2.cA[j], s1.shapes[0], s2.shapes[0]), dtype=float)
    ov = ov * np.asarray(_mode_overlap(s1.cC[i], s2.cC[j], s1.shapes[2], s2.shapes[2]), dtype=float)
    nz = ov != 0
    i, j, ov = i[nz], j[nz], ov[nz]
    if len(i) == 0:
        return 0j
    if s1.shapes[1].comb or s2.shapes[1].comb:
        if np.any(s1.sB[i] != 1) or np.any(s2.sB[j] != 1):
            raise ValueError("rescaled combs are not supported")
        ov = ov * _comb_overlap(i, j, s1, s2)
    else:
        if np.any(s1.sB[i] != s2.sB[j]):
            raise ValueError("mode-B peaks have different widths")
        sc = s1.sB[i]
        ov = ov * np.asarray(_mode_overlap(s1.cB[i] / sc, s2.cB[j] / sc, s1.shapes[1], s2.shapes[1]), dtype=float)
    prod = np.conj(s1.amp[i]) * s2.amp[j] * ov
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


def fidelity(s1: PeakState, s2: PeakState) -> float:
    ip = inner_product(s1, s2)
    return abs(ip) ** 2 / (inner_product(s1, s1).real * inner_product(s2, s2).real)


def trace_distance(s1: PeakState, s2: PeakState) -> float:
    """2 sqrt(1 - |<s1, s2>|^2) for normalized pure states."""
    return 2.0 * math.sqrt(max(0.0, 1.0 - fidelity(s1, s2)))


# ------------------------------------------------------------ ideal gates

def _mode_index(mode):
    try:
        return "ABC".index(mode)
    except ValueError:
        raise ValueError(f"unknown mode {mode!r}") from None


def _set_center(state, k, values):
    return state.evolve(**{"c" + "ABC"[k]: values})


def _renorm_comb(state: PeakState) -> PeakState:
    sp = state.shapes[1].spacing
    carry = np.floor(state.cB / sp)
    return state.evolve(cB=state.cB - carry * sp, tB=state.tB + carry)


def apply_scalar_mult(state: PeakState, mode: str, alpha: float) -> PeakState:
    """M_alpha on one mode: centers, widths and truncations scale by alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    k = _mode_index(mode)
    shapes = list(state.shapes)
    shapes[k] = shapes[k].scaled(alpha)
    c = getattr(state, "c" + mode) * alpha
    if k == 1 and not shapes[1].comb:
        return state.evolve(cB=c, sB=state.sB * alpha, shapes=tuple(shapes[:1]) + (state.shapes[1],) + tuple(shapes[2:]))
    return _set_center(state, k, c).evolve(shapes=tuple(shapes))


def apply_shift(state: PeakState, mode: str, t: float) -> PeakState:
    """exp(-itP) on one mode: every center moves by t."""
    k = _mode_index(mode)
    out = _set_center(state, k, getattr(state, "c" + mode) + t)
    if k == 1 and state.shapes[1].comb:
        out = _renorm_comb(out)
    return out


def _require_integer(arr, name):
    if not np.all(arr == np.round(arr)):
        raise DomainViolation(f"mode-{name} centers must be integers")


def _pseudomod_values(cA, a, N, m):
    xs = cA.astype(np.int64)
    if m <= 16:
        tab = numtheory.pseudomodular_table(a, N, m)
        return [tab[x % (1 << m)] for x in xs]
    return [numtheory.pseudomodular_power(a, N, m, int(x)) for x in xs]


def apply_UaNm_ideal(state: PeakState, a: int, N: int, m: int) -> PeakState:
    """Add f_{a,N,m}(x_A) to the mode-B center of each term."""
    _require_integer(state.cA, "A")
    if np.any(state.cA < 0):
        raise DomainViolation("mode-A centers must be nonnegative")
    if np.any(state.cC != 0) or np.any(state.q != 0):
        raise DomainViolation("mode C must sit at 0 and the qubit in |0>")
    if np.any(state.sB != 1):
        raise DomainViolation("mode B must be unscaled")
    fs = _pseudomod_values(state.cA, a, N, m)
    if state.shapes[1].comb:
        sp = state.shapes[1].spacing
        if sp != round(sp):
            raise DomainViolation("comb spacing must be an integer")
        _require_integer(state.cB, "B")
        cB, tB = np.empty(len(state)), np.array(state.tB)
        for idx, (c, f) in enumerate(zip(state.cB, fs)):
            t, k = divmod(int(c) + f, int(sp))
            cB[idx] = k
            tB[idx] += t
        return state.evolve(cB=cB, tB=tB)
    return state.evolve(cB=state.cB + np.array([float(f) for f in fs]))


def apply_lsb_ideal(state: PeakState) -> PeakState:
    """|x>|b> -> |x>|b xor (x mod 2)> on integer mode-A centers."""
    _require_integer(state.cA, "A")
    return state.evolve(q=state.q ^ (state.cA.astype(np.int64) % 2))


def _check_V_domain(state):
    _require_integer(state.cA, "A")
    _require_integer(state.cC, "C")
    if np.any(state.q != 0):
        raise DomainViolation("the qubit must start in |0>")
    if state.shapes[1].comb:
        raise DomainViolation("term-dependent scaling of a comb is not represented")


def apply_Valpha_ideal(state: PeakState, alpha: float) -> PeakState:
    """(x, y, z) -> ((x - x0)/2, alpha^x0 y, 2z + x0) with x0 the parity of x."""
    _check_V_domain(state)
    x0 = state.cA.astype(np.int64) % 2
    f = np.where(x0 == 1, float(alpha), 1.0)
    A, B, C = state.shapes
    return state.evolve(cA=(state.cA - x0) / 2, cB=state.cB * f, sB=state.sB * f,
                        cC=2 * state.cC + x0, shapes=(A.scaled(0.5), B, C.scaled(2.0)))


def apply_Valpha_dag_ideal(state: PeakState, alpha: float) -> PeakState:
    """Inverse of apply_Valpha_ideal: the parity bit moves from C back to A."""
    _check_V_domain(state)
    z0 = state.cC.astype(np.int64) % 2
    f = np.where(z0 == 1, float(alpha), 1.0)
    A, B, C = state.shapes
    return state.evolve(cA=2 * state.cA + z0, cB=state.cB / f, sB=state.sB / f,
                        cC=(state.cC - z0) / 2, shapes=(A.scaled(2.0), B, C.scaled(0.5)))


def apply_VaNm_ideal(state: PeakState, a: int, N: int, m: int) -> PeakState:
    """m parity extractions with alpha_i = a^(2^i) mod N, then m V_1^dagger steps."""
    for alpha in numtheory.power_table(a, N, m):
        state = apply_Valpha_ideal(state, alpha)
    for _ in range(m):
        state = apply_Valpha_dag_ideal(state, 1)
    return state


def apply_VaNm_dag_ideal(state: PeakState, a: int, N: int, m: int) -> PeakState:
    for _ in range(m):
        state = apply_Valpha_ideal(state, 1)
    for alpha in reversed(numtheory.power_table(a, N, m)):
        state = apply_Valpha_dag_ideal(state, alpha)
    return state


def apply_UaNm_circuit_ideal(state: PeakState, a: int, N: int, m: int) -> PeakState:
    """V_{a,N,m} exp(-iP_B) V_{a,N,m}^dagger, gate by gate."""
    state = apply_VaNm_dag_ideal(state, a, N, m)
    state = apply_shift(state, "B", 1.0)
    return apply_VaNm_ideal(state, a, N, m)


# ------------------------------------------------------------ stage states

def moderate_params() -> CircuitParams:
    """Parameters small enough to enumerate every peak (N = 15 scale)."""
    return CircuitParams(m=8, R=128, kappa_A=2.0 ** -6, delta_A=2.0 ** -6, kappa_B=2.0 ** -40,
                         delta_B=2.0 ** -40, delta_C=2.0 ** -24, label="moderate")


def envelope_radius(kappa: float, cutoff: float) -> int:
    """Largest |u| with eta(u) >= cutoff * eta(0)."""
    return int(math.floor(math.sqrt(-2 * math.log(cutoff)) / kappa))


def build_stage(params: CircuitParams, a: int, N: int, j: int) -> PeakState:
    """The proof-chain state Psi^(j) as explicit peaks (j = 0 is returned as j = 1)."""
    if j not in range(6):
        raise ValueError("j must be in 0..5")
    p = params.as_float() if not params.exact else params
    if math.gcd(a, N) != 1:
        raise ValueError("a must be a unit modulo N")
    R = p.R
    rad = envelope_radius(p.kappa_A, p.envelope_cutoff)
    if j <= 3:
        z = np.arange(max(0, R - rad), min(2 * R - 1, R + rad) + 1)
    else:
        z = np.arange(R - rad, R + rad + 1)
    amp = gkpmath.eta_kappa(z - R, p.kappa_A).astype(complex)
    # dropped envelope mass relative to the kept one
    dropped = 2 * math.exp(-(p.kappa_A * rad) ** 2) / max(1e-300, 1 - math.exp(-p.kappa_A ** 2))
    dropped *= p.kappa_A / math.sqrt(math.pi)
    shapeA = ModeShape(p.delta_A, None if j == 5 else p.eps_A)
    shapeB = ModeShape(N * p.delta_B, N * p.eps_B, spacing=float(N), kappa=p.kappa_B)
    shapeC = ModeShape(p.delta_C, p.eps_C)
    cB = np.zeros(len(z))
    tB = np.zeros(len(z))
    if j == 2:
        tab = _pseudomod_values(z.astype(float), a, N, p.m)
        for i, f in enumerate(tab):
            t, k = divmod(f, N)
            cB[i], tB[i] = k, t
    elif j >= 3:
        cB = np.array([pow(a, int(x), N) for x in z], dtype=float)
    st = PeakState(amp, z.astype(float), cB, np.zeros(len(z)), np.zeros(len(z), dtype=np.int64),
                   (shapeA, shapeB, shapeC), tB=tB, label=f"Psi{j}", tol=1e-9 + dropped)
    return st.normalized()


def modular_measurement(state: PeakState, rng, N: Optional[int] = None):
    """Measure the mode-B residue k; returns (k, collapsed state)."""
    B = state.shapes[1]
    if not B.comb:
        raise ValueError("modular measurement needs a comb in mode B")
    N = int(B.spacing) if N is None else N
    ks = np.unique(state.cB)
    masses = []
    for k in ks:
        sub = _select(state, state.cB == k)
        masses.append(inner_product(sub, sub).real)
    masses = np.array(masses)
    total = masses.sum()
    if not abs(total - 1) < 1e-6:
        raise ValueError("state is not normalized or residues overlap")
    idx = rng.choice(len(ks), p=masses / total)
    k = int(ks[idx])
    return k, _select(state, state.cB == k).normalized()


def residue_masses(state: PeakState) -> dict:
    out = {}
    for k in np.unique(state.cB):
        sub = _select(state, state.cB == k)
        out[int(k)] = inner_product(sub, sub).real
    return out


def _select(state: PeakState, mask) -> PeakState:
    return state.evolve(amp=state.amp[mask], cA=state.cA[mask], cB=state.cB[mask], cC=state.cC[mask],
                        q=state.q[mask], tB=state.tB[mask], sB=state.sB[mask])


# --------------------------------------------- analytic stage overlaps (mpmath)

def _tail_sum(kappa, a):
    """sum_{u >= a} exp(-kappa^2 u^2) for integer a >= 0, in mpmath."""
    kappa = mpmath.mpf(kappa)
    a = mpmath.mpf(a)
    if 60 / kappa < 200000:
        hi = int(a + 12 / kappa) + 2
        return mpmath.fsum(mpmath.exp(-(kappa * u) ** 2) for u in range(int(a), hi))
    # Euler-Maclaurin; further corrections are smaller by powers of kappa
    f = mpmath.exp(-(kappa * a) ** 2)
    integral = mpmath.sqrt(mpmath.pi) / (2 * kappa) * mpmath.erfc(kappa * a)
    fp = -2 * kappa ** 2 * a * f
    return integral + f / 2 - fp / 12


def _full_sum(kappa, shift=0):
    """sum_{u in Z} exp(-kappa^2 (u - shift)^2) via the dual lattice."""
    kappa = mpmath.mpf(kappa)
    s = mpmath.mpf(shift)
    c = kappa ** 2
    terms = [1]
    k = 1
    while True:
        t = 2 * mpmath.exp(-mpmath.pi ** 2 * k * k / c) * mpmath.cos(2 * mpmath.pi * k * s)
        terms.append(t)
        if abs(t) < mpmath.mpf(10) ** (-mpmath.mp.dps - 5):
            break
        k += 1
    return mpmath.sqrt(mpmath.pi / c) * mpmath.fsum(terms)


def stage34_defect(params: CircuitParams):
    """1 - |<Psi3, Psi4>|^2: the envelope mass outside the window, exactly."""
    with mpmath.workdps(40):
        k = mpmath.mpf(params.kappa_A)
        R = params.R
        tail = _tail_sum(k, R) + _tail_sum(k, R + 1)
        return tail / _full_sum(k)


def _shift_ratio(kappa, d):
    """sum eta(z) eta(z - d) / sum eta^2 in mpmath."""
    kappa = mpmath.mpf(kappa)
    return mpmath.exp(-(kappa * d) ** 2 / 4) * _full_sum(kappa, mpmath.mpf(d) / 2) / _full_sum(kappa)


def stage45_defect(params: CircuitParams, r: int):
    """1 - |<Psi4, Psi5>|^2 from the residue-class double sums, exactly."""
    with mpmath.workdps(40):
        D = mpmath.mpf(params.delta_A)
        eps = mpmath.mpf(params.eps_A)
        e = mpmath.erfc(eps / D)
        g0 = mpmath.sqrt(1 - e)
        A = mpmath.mpf(0)
        B = mpmath.mpf(0)
        dmax = int(mpmath.ceil(2 * D * 30)) + r
        for d in range(r, dmax + 1, r):
            rho = _shift_ratio(params.kappa_A, d)
            gauss = mpmath.exp(-mpmath.mpf(d) ** 2 / (4 * D * D))
            # truncated peak at 0 against a full peak at d
            mass = (mpmath.erf((eps + mpmath.mpf(d) / 2) / D) - mpmath.erf((-eps + mpmath.mpf(d) / 2) / D)) / 2
            A += 2 * gauss * mass / g0 * rho
            B += 2 * gauss * rho
        return (e + B - 2 * g0 * A - A * A) / (1 + B)


def stage23_overlap_bounds(params: CircuitParams, a: int, N: int):
    """Certified (lower, upper, 1 - lower^2) for <Psi2, Psi3> without enumerating the window."""
    with mpmath.workdps(40):
        prod = 1
        for f in numtheory.power_table(a, N, params.m):
            prod *= f
        tmax = mpmath.mpf(prod - 1) / N
        kB = mpmath.mpf(params.kappa_B)
        dual = 2 * mpmath.exp(-mpmath.pi ** 2 / kB ** 2)
        x = (kB * tmax) ** 2 / 4
        lower = mpmath.exp(-x) * (1 - dual) / (1 + dual)
        # 1 - lower^2 without cancellation
        defect = -mpmath.expm1(-2 * x) + mpmath.exp(-2 * x) * 4 * dual / (1 + dual) ** 2
        return lower, mpmath.mpf(1), defect


def analytic_stage_distances(params: CircuitParams, a: int, N: int) -> dict:
    """Trace distances (upper bounds for 2-3) between adjacent constructible stages."""
    r = numtheory.order(a, N)
    with mpmath.workdps(40):
        _, _, defect23 = stage23_overlap_bounds(params, a, N)
        td23 = 2 * mpmath.sqrt(defect23)
        td34 = 2 * mpmath.sqrt(stage34_defect(params))
        td45 = 2 * mpmath.sqrt(max(mpmath.mpf(0), stage45_defect(params, r)))
    return {"2-3": td23, "3-4": td34, "4-5": td45}


def exact_stage23_overlap(params: CircuitParams, a: int, N: int) -> float:
    """<Psi2, Psi3> by enumerating the window (small m only)."""
    p = params
    R = p.R
    z = np.arange(0, 2 * R)
    w = np.exp(-(p.kappa_A * (z - R)) ** 2)
    tab = numtheory.pseudomodular_table(a, N, p.m)
    t = np.array([(tab[x] - pow(a, int(x), N)) // N for x in z], dtype=float)
    return math.fsum(w * comb_shift_overlap(p.kappa_B, t)) / math.fsum(w)
