"""Gaussian peaks, approximate GKP combs and the sums that bound them.

Positions use integer comb spacing. Fourier transforms follow
fhat(w) = int f(x) exp(2 pi i x w) dx.

Operations that compare an exactly computed quantity with an analytic
inequality return a BoundReport.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erf, erfc

from .kernels import gauss_sum

SQRT_PI = math.sqrt(math.pi)
PI_14 = math.pi ** 0.25
TERM_FLOOR = 1e-30
CLAMP = 1e-300


@dataclass
class BoundReport:
    """An exactly computed value next to the inequality it should obey."""

    exact_value: float
    paper_bound: float
    satisfied: bool
    slack: float
    name: str = ""
    direction: str = ">="
    valid: bool = True
    params: dict = field(default_factory=dict)

    @classmethod
    def make(cls, name, exact, bound, direction=">=", valid=True, **params):
        exact, bound = float(exact), float(bound)
        if direction == ">=":
            slack = exact - bound
        else:
            slack = bound - exact
        return cls(exact, bound, bool(slack >= 0), slack, name, direction, valid, params)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GkpParams:
    kappa: float
    delta: float
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kappa <= 0 or self.delta <= 0:
            raise ValueError("kappa and delta must be positive")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", math.sqrt(self.delta))
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")


# ---------------------------------------------------------------- basic shapes

def psi_delta(x, delta):
    """Centered Gaussian peak (pi delta^2)^(-1/4) exp(-x^2 / (2 delta^2))."""
    x = np.asarray(x, dtype=float)
    return (math.pi * delta * delta) ** -0.25 * np.exp(-x * x / (2 * delta * delta))


def eta_kappa(z, kappa):
    """Envelope sqrt(kappa) pi^(-1/4) exp(-kappa^2 z^2 / 2)."""
    z = np.asarray(z, dtype=float)
    return math.sqrt(kappa) / PI_14 * np.exp(-kappa * kappa * z * z / 2)


def psi_hat(w, delta):
    """Fourier transform of psi_delta."""
    w = np.asarray(w, dtype=float)
    return math.sqrt(2) * PI_14 * math.sqrt(delta) * np.exp(-2 * math.pi ** 2 * w * w * delta * delta)


def eta_hat(w, kappa):
    """Fourier transform of eta_kappa."""
    w = np.asarray(w, dtype=float)
    return math.sqrt(2) * PI_14 / math.sqrt(kappa) * np.exp(-2 * math.pi ** 2 * w * w / (kappa * kappa))


def truncated_peak(x, center, delta, eps):
    """Peak restricted to [center - eps, center + eps] and renormalized."""
    x = np.asarray(x, dtype=float)
    u = x - center
    v = psi_delta(u, delta) / math.sqrt(erf(eps / delta))
    return np.where(np.abs(u) <= eps, v, 0.0)


# --------------------------------------------------------------- peak overlaps

def _interval_mass(lo, hi):
    """0.5 (erf(hi) - erf(lo)) evaluated without cancellation in the tails."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    right = 0.5 * (erfc(lo) - erfc(hi))
    left = 0.5 * (erfc(-hi) - erfc(-lo))
    mid = 0.5 * (erf(hi) - erf(lo))
    out = np.where(lo >= 0, right, np.where(hi <= 0, left, mid))
    return np.clip(out, 0.0, 1.0)


def peak_overlap(y, z, delta):
    """<chi_delta(y), chi_delta(z)> = exp(-(y - z)^2 / (4 delta^2))."""
    d = np.asarray(y, dtype=float) - np.asarray(z, dtype=float)
    return np.exp(-d * d / (4 * delta * delta))


def chi_overlap(y, z, delta, eps1=None, eps2=None):
    """Overlap of two equal-width peaks, each optionally truncated.

    The product of two Gaussians of width delta is a Gaussian of variance
    delta^2/2 about the midpoint, so the truncated overlap is the closed
    form times the mass of that Gaussian in the common support.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    mid = 0.5 * (y + z)
    lo = np.full(np.broadcast(y, z).shape, -np.inf)
    hi = np.full(lo.shape, np.inf)
    norm = 1.0
    if eps1 is not None:
        lo = np.maximum(lo, y - eps1)
        hi = np.minimum(hi, y + eps1)
        norm *= erf(eps1 / delta)
    if eps2 is not None:
        lo = np.maximum(lo, z - eps2)
        hi = np.minimum(hi, z + eps2)
        norm *= erf(eps2 / delta)
    with np.errstate(invalid="ignore"):
        mass = _interval_mass((lo - mid) / delta, (hi - mid) / delta)
    mass = np.where(hi > lo, mass, 0.0)
    out = peak_overlap(y, z, delta) * mass / math.sqrt(norm)
    return out if out.ndim else float(out)


def truncated_gaussian_overlap(delta, epsilon):
    """|<psi_delta, psi_delta^eps>|^2, the central-window mass erf(eps/delta)."""
    if delta <= 0 or not 0 < epsilon < 0.5:
        raise ValueError("need delta > 0 and epsilon in (0, 1/2)")
    return float(erf(epsilon / delta))


def truncated_gaussian_report(delta, epsilon):
    v = truncated_gaussian_overlap(delta, epsilon)
    return BoundReport.make("truncated_gaussian_overlap", v, 1 - 2 * delta,
                            valid=epsilon >= math.sqrt(delta), delta=delta, epsilon=epsilon)


# ------------------------------------------------------------ envelope sums

def sum_radius(c, floor_radius=0.0):
    """Half-width beyond which exp(-c u^2) < 1e-30 of the peak term."""
    r = math.sqrt(-math.log(TERM_FLOOR) / c) if c > 0 else math.inf
    return int(math.ceil(max(r, floor_radius))) + 2


def theta_sum(c, shift=0.0):
    """S = sum_{z in Z} exp(-c (z - shift)^2)."""
    if c <= 0:
        raise ValueError("c must be positive")
    if c < 1e-8:  # 1/sqrt(c) terms would be too many; use the dual sum
        return theta_sum_dual(c, shift)
    k0 = math.floor(shift)
    rad = sum_radius(c, 10.0 / math.sqrt(c))
    return gauss_sum(c, shift, k0 - rad, k0 + rad)


def theta_sum_dual(c, shift=0.0):
    """The same sum via Poisson: sqrt(pi/c) sum_k exp(-pi^2 k^2 / c) cos(2 pi k shift)."""
    kmax = int(math.ceil(math.sqrt(c * 70.0) / math.pi)) + 1
    k = np.arange(1, kmax + 1)
    tail = 2.0 * np.exp(-(math.pi ** 2) * k * k / c) * np.cos(2 * math.pi * k * (shift % 1.0))
    return math.sqrt(math.pi / c) * (1.0 + math.fsum(tail))


def envelope_norm_sq(kappa):
    """C_kappa^(-2) = sum_z eta_kappa(z)^2."""
    return kappa / SQRT_PI * theta_sum(kappa * kappa)


def shift_overlap_exact(kappa, d):
    """sum_z eta(z) eta(z - d) / sum_z eta(z)^2 for real d."""
    c = kappa * kappa
    return math.exp(-c * d * d / 4) * theta_sum(c, d / 2) / theta_sum(c, 0.0)


def shift_overlap_direct(kappa, d):
    """Reference: literal double-precision sum over z (small 1/kappa only)."""
    rad = sum_radius(kappa * kappa / 2, 10.0 / kappa) + abs(int(d))
    z = np.arange(-rad, rad + 1)
    num = math.fsum(eta_kappa(z, kappa) * eta_kappa(z - d, kappa))
    return num / math.fsum(eta_kappa(z, kappa) ** 2)


def _cross_band(delta):
    """Largest integer separation whose peak overlap exceeds 1e-30."""
    return int(math.ceil(2 * delta * math.sqrt(-math.log(TERM_FLOOR)))) + 1


def norm_const_gkp(kappa, delta):
    """C_{kappa,delta} from the double sum over peak pairs.

    Grouping pairs by separation d gives
    sum_d exp(-d^2/(4 delta^2)) sum_y eta(y) eta(y - d).
    """
    c = kappa * kappa
    total = []
    for d in range(-_cross_band(delta), _cross_band(delta) + 1):
        w = math.exp(-d * d / (4 * delta * delta))
        if w < CLAMP:
            continue
        total.append(w * math.exp(-c * d * d / 4) * theta_sum(c, d / 2))
    inv_sq = kappa / SQRT_PI * math.fsum(total)
    return 1.0 / math.sqrt(inv_sq)


def norm_ratio(kappa, delta):
    """C_{kappa,delta}^2 / C_kappa^2."""
    C = norm_const_gkp(kappa, delta)
    return C * C * envelope_norm_sq(kappa)


def norm_const_reports(kappa, delta):
    C = norm_const_gkp(kappa, delta)
    ratio = C * C * envelope_norm_sq(kappa)
    return [
        BoundReport.make("norm_const_sq", C * C, 0.25, valid=kappa < 0.125 and delta < 0.125,
                         kappa=kappa, delta=delta),
        BoundReport.make("norm_const_ratio", ratio, 1 - 7 * delta, valid=kappa < 0.25 and delta < 0.25,
                         kappa=kappa, delta=delta),
    ]


def gkp_truncation_overlap(kappa, delta, epsilon=None):
    """|<GKP, GKP^eps>|^2 against 1 - 9 delta."""
    epsilon = math.sqrt(delta) if epsilon is None else epsilon
    if not (0 < kappa < 0.25) or not (math.sqrt(delta) <= epsilon < 0.5):
        raise ValueError("need kappa in (0, 1/4) and epsilon in [sqrt(delta), 1/2)")
    c = kappa * kappa
    band = _cross_band(delta) + int(math.ceil(2 * epsilon))
    terms = []
    for d in range(-band, band + 1):
        g = chi_overlap(float(d), 0.0, delta, None, epsilon)
        if g < CLAMP:
            continue
        terms.append(g * math.exp(-c * d * d / 4) * theta_sum(c, d / 2))
    inner_sum = kappa / SQRT_PI * math.fsum(terms)
    C = norm_const_gkp(kappa, delta)
    Ck = 1.0 / math.sqrt(envelope_norm_sq(kappa))
    value = (C * Ck * inner_sum) ** 2
    return BoundReport.make("gkp_truncation_overlap", value, 1 - 9 * delta,
                            kappa=kappa, delta=delta, epsilon=epsilon)


def gkp_shift_overlap(kappa, d):
    """Overlap with the d-shifted comb against both the quadratic and exponential forms."""
    v = shift_overlap_exact(kappa, d)
    lin = 1 - kappa * kappa * d * d / 2
    ex = math.exp(-kappa * kappa * d * d / 2)
    return BoundReport.make("gkp_shift_overlap", v, max(lin, ex), kappa=kappa, d=d,
                            linear_bound=lin, exp_bound=ex)


def gkp_window_mass(kappa, epsilon, r):
    """Mass of the comb inside [-r, r], taken as the peaks with |z| <= floor(r) - 1."""
    if r < 4 or kappa <= 0 or not 0 < epsilon < 0.5:
        raise ValueError("need r >= 4, kappa > 0, epsilon in (0, 1/2)")
    c = kappa * kappa
    zmax = int(math.floor(r)) - 1
    total = theta_sum(c)
    # the defect is summed from the tail itself so tiny values stay accurate
    tail = 2 * gauss_sum(c, 0.0, zmax + 1, zmax + 1 + sum_radius(c))
    value = 1.0 - tail / total
    return BoundReport.make("gkp_window_mass", value, 1 - 2 * math.exp(-(kappa * r) ** 2),
                            kappa=kappa, epsilon=epsilon, r=r, defect=tail / total)


def displaced_gkp_orthogonal(epsilon, d):
    """True iff the supports of the comb and its d-shift are disjoint."""
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    return abs(d - round(d)) > 2 * epsilon


# ------------------------------------------------------ lattice Gaussian sums

def rho_sum(s, shift=0.0):
    """rho_s(Z + shift) = sum_z exp(-pi (z + shift)^2 / s^2)."""
    return theta_sum(math.pi / (s * s), -shift)


def poisson_residual(t):
    """|rho_t(Z) - t rho_{1/t}(Z)| with both sides summed directly."""
    if t <= 0:
        raise ValueError("t must be positive")
    a = rho_sum(t)
    b = t * rho_sum(1.0 / t)
    return abs(a - b)


def discrete_gaussian_tail(s, r):
    """Pr[|X_s| >= r] for the discrete Gaussian on Z against 2 exp(-3 pi (r/s)^2 / 4)."""
    if s <= 0 or r < 0:
        raise ValueError("need s > 0 and r >= 0")
    c = math.pi / (s * s)
    zr = int(math.ceil(r))
    total = rho_sum(s)
    if zr == 0:
        tail = total
    else:
        tail = 2 * gauss_sum(c, 0.0, zr, zr + sum_radius(c, 10 * s))
    p = tail / total
    return BoundReport.make("discrete_gaussian_tail", p, 2 * math.exp(-0.75 * math.pi * (r / s) ** 2),
                            direction="<=", valid=r > 0, s=s, r=r)


def periodic_gaussian_ratio(s, t):
    """f_s(t) / f_s(0) against exp(-pi t^2 / s^2)."""
    if s <= 0:
        raise ValueError("s must be positive")
    v = rho_sum(s, t) / rho_sum(s)
    return BoundReport.make("periodic_gaussian_ratio", v, math.exp(-math.pi * t * t / (s * s)), s=s, t=t)


def _jacobi_K(xi, b):
    big = max(abs(xi), 1 / abs(xi))
    if b == 0:
        return 1
    K = 1
    # |xi|^k b^(k^2) must be negligible at both ends
    while K * math.log(big) + K * K * math.log(b) > math.log(TERM_FLOOR) or b ** (K * K) > TERM_FLOOR:
        K += 1
    return K


def jacobi_sum(xi, b, K=None):
    """sum_{|k| <= K} xi^k b^(k^2)."""
    K = _jacobi_K(xi, b) if K is None else K
    k = np.arange(-K, K + 1)
    return complex(*map(math.fsum, _jacobi_terms(xi, b, k)))


def _jacobi_terms(xi, b, k):
    logb = math.log(b) if b > 0 else -np.inf
    with np.errstate(invalid="ignore"):
        t = np.exp(k * np.log(complex(xi)) + np.where(k == 0, 0.0, k * k * logb))
    return t.real, t.imag


def jacobi_product(xi, b, M=None):
    """prod_{m >= 1} (1 - b^(2m)) (1 + xi b^(2m-1)) (1 + b^(2m-1) / xi)."""
    if b == 0:
        return 1.0 + 0j
    big = max(abs(xi), 1 / abs(xi))
    M = M or max(4, int(math.ceil((math.log(TERM_FLOOR) - math.log(big)) / (2 * math.log(b)))) + 2)
    m = np.arange(1, M + 1)
    f = (1 - b ** (2 * m)) * (1 + xi * b ** (2 * m - 1)) * (1 + b ** (2 * m - 1) / xi)
    return complex(np.prod(f))


def jacobi_sum_bound(xi, b, K=None):
    """|sum xi^k b^(k^2)| against 1 - 2 b max(|xi|, 1/|xi|); also checks the triple product."""
    if xi == 0 or not 0 <= b < 1:
        raise ValueError("need xi != 0 and b in [0, 1)")
    big = max(abs(xi), 1 / abs(xi))
    if big < math.sqrt(2) + 1:
        raise ValueError("need max(|xi|, 1/|xi|) >= sqrt(2) + 1")
    K = _jacobi_K(xi, b) if K is None else K
    s = jacobi_sum(xi, b, K)
    p = jacobi_product(xi, b)
    # error relative to the l1 mass of the series, so cancellation does not inflate it
    re, im = _jacobi_terms(xi, b, np.arange(-K, K + 1))
    rel = abs(s - p) / max(math.fsum(np.hypot(re, im)), CLAMP)
    rep = BoundReport.make("jacobi_sum_bound", abs(s), 1 - 2 * b * big, xi=[complex(xi).real, complex(xi).imag],
                           b=b, K=K, product_rel_err=rel)
    if rel > 1e-10:
        rep.satisfied = False
    return rep


def abs_gauss_sum(c):
    """sum_z exp(-c (|z| + 1)^2)."""
    rad = sum_radius(c, 10.0 / math.sqrt(c))
    return 2 * gauss_sum(c, -1.0, 0, rad) - 1.0 * math.exp(-c)


def abs_gauss_sum_bound(c):
    if not 0 < c < math.pi / 16:
        raise ValueError("need c in (0, pi/16)")
    return BoundReport.make("abs_gauss_sum_bound", abs_gauss_sum(c), SQRT_PI / (4 * math.sqrt(c)), c=c)
