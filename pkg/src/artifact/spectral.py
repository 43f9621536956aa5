"""Output distribution of the momentum measurement on Phi_a.

w is in unit-period convention: peaks sit near j + d/r. The main-text
homodyne momentum is p = 2 pi w.

For k in <a> with index i = ind_a(k),
    |Theta_k(w)| = |c| |psihat(w)| / r * |S_k(w)|,
    S_k(w) = sum_z exp(2 pi i (R - i) z / r) etahat(w + z/r).
Summing |S_k|^2 over the r residues (Parseval on Z_r) gives
    G(w) = r * sum_{s in Z_r} (sum_t etahat(w + s/r + t))^2,
which is exactly 1/r-periodic, so
    pdf(w) = |c|^2 |psihat(w)|^2 G(w) / r^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import gkpmath, numtheory
from .kernels import comb_sum
from .params import CircuitParams

GL_NODES, GL_WEIGHTS = leggauss(24)


@dataclass(frozen=True)
class SpectralModel:
    N: int
    a: int
    r: int
    rem: tuple
    ind: dict
    kappa_A: float
    delta_A: float
    R: int
    c_phi: float
    z_cut: float = 8.0
    preconditions: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return numtheory.smallest_q(self.N)


def c_phi_inverse_sq(kappa, delta, r):
    """|c_phi|^-2 = sum_z eta^2 * sum_{d in rZ} exp(-d^2/(4 delta^2)) rho(d)."""
    base = gkpmath.envelope_norm_sq(kappa)
    band = gkpmath._cross_band(delta)
    terms = [1.0]
    for d in range(r, band + 1, r):
        g = math.exp(-d * d / (4 * delta * delta))
        if g < 1e-300:
            break
        terms.append(2 * g * gkpmath.shift_overlap_exact(kappa, d))
    return base * math.fsum(terms)


def build_model(params: CircuitParams, a: int, N: int, z_cut: float = 8.0) -> SpectralModel:
    kappa, delta = float(params.kappa_A), float(params.delta_A)
    if kappa == 0.0 or delta == 0.0:
        raise OverflowError("kappa_A or delta_A underflows double precision")
    if math.gcd(a, N) != 1:
        raise ValueError("a must be a unit modulo N")
    r = numtheory.order(a, N) if N > 1 else 1
    rem = tuple(pow(a, i, N) for i in range(r))
    ind = {k: i for i, k in enumerate(rem)}
    c_phi = 1.0 / math.sqrt(c_phi_inverse_sq(kappa, delta, r))
    q = numtheory.smallest_q(N)
    pre = {
        "kappa_A<=1/q": kappa <= 1.0 / q,
        "kappa_A<=2/r": kappa <= 2.0 / r,
        "1/kappa_A>N^2": 1.0 / kappa > N * N,
        "4pi^2 delta_A^2<pi/16": 4 * math.pi ** 2 * delta ** 2 < math.pi / 16,
        "N>=4": N >= 4,
    }
    return SpectralModel(N, a, r, rem, ind, kappa, delta, params.R, c_phi, z_cut, pre)


def psi_hat_sq(model, w):
    return gkpmath.psi_hat(w, model.delta_A) ** 2


def comb_factor(model: SpectralModel, k: int, w) -> np.ndarray:
    """S_k(w) as complex values (direct z-sum through the kernel)."""
    phase = 2 * math.pi * ((model.R - model.ind[k]) % model.r) / model.r
    w = np.ascontiguousarray(np.atleast_1d(np.asarray(w, dtype=float)))
    return comb_sum(w, phase, model.kappa_A, model.r, model.z_cut)


def theta_hat_abs(model: SpectralModel, k: int, w):
    w = np.asarray(w, dtype=float)
    s = np.abs(comb_factor(model, k, w))
    out = model.c_phi * gkpmath.psi_hat(w, model.delta_A) / model.r * s.reshape(w.shape)
    return out if out.ndim else float(out)


def comb_power(model: SpectralModel, w) -> np.ndarray:
    """G(w) = sum_k |S_k(w)|^2 in the Parseval form."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    r = model.r
    # only t with |w + s/r + t| <= z_cut*kappa contribute; at most two t per s when kappa is small
    reach = model.z_cut * model.kappa_A
    tmax = int(math.ceil(reach)) + 1
    base = w[..., None] + np.arange(r) / r
    frac = base - np.round(base)
    acc = np.zeros(base.shape)
    for t in range(-tmax, tmax + 1):
        u = frac + t
        acc += np.where(np.abs(u) <= reach, gkpmath.eta_hat(u, model.kappa_A), 0.0)
    return r * np.sum(acc * acc, axis=-1)


def pdf(model: SpectralModel, w):
    w = np.asarray(w, dtype=float)
    out = model.c_phi ** 2 * psi_hat_sq(model, w) * comb_power(model, w).reshape(w.shape) / model.r ** 2
    return out if out.ndim else float(out)


def pdf_direct(model: SpectralModel, w):
    """sum_k |Theta_k(w)|^2 term by term; slower reference for pdf."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    return sum(theta_hat_abs(model, k, w) ** 2 for k in model.rem)


def envelope_sum(model: SpectralModel, v):
    """E(v) = |c|^2 / r^2 * sum_j |psihat(j + v)|^2 via its Poisson dual."""
    v = np.asarray(v, dtype=float)
    D = model.delta_A
    # sum_j 2 sqrt(pi) D exp(-4 pi^2 D^2 (j+v)^2) = 1 + 2 sum_k exp(-k^2/(4 D^2)) cos(2 pi k v)
    s = np.ones_like(v)
    k = 1
    while True:
        g = math.exp(-k * k / (4 * D * D))
        if g < 1e-30:
            break
        s = s + 2 * g * np.cos(2 * math.pi * k * v)
        k += 1
    return model.c_phi ** 2 / model.r ** 2 * s


def _panels(lo, hi, width):
    n = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * GL_NODES[None, :]).ravel()
    wts = (half[:, None] * GL_WEIGHTS[None, :]).ravel()
    return x, wts


def local_mass(model: SpectralModel, center: float, half_width: float) -> float:
    """sum_j of the pdf mass within half_width of j + center (any center)."""
    # the comb factor vanishes farther than z_cut*kappa from the 1/r lattice
    span = min(half_width, model.z_cut * model.kappa_A) if _on_lattice(model, center) else half_width
    x, wts = _panels(-span, span, model.kappa_A / 8)
    v = center + x
    vals = comb_power(model, v) * envelope_sum(model, v)
    return math.fsum(vals * wts)


def _on_lattice(model, center):
    return abs(center * model.r - round(center * model.r)) < 1e-12


def gamma_mass(model: SpectralModel, d: int) -> float:
    """Probability that w lies within 1/(2q) of some j + d/r."""
    if not 0 <= d < model.r:
        raise ValueError("d must be in Z_r")
    return local_mass(model, d / model.r, 1.0 / (2 * model.q))


def gamma_masses(model: SpectralModel) -> dict:
    return {d: gamma_mass(model, d) for d in range(model.r)}


def gamma_bound(model: SpectralModel) -> float:
    """The proof constant e^{-pi^2}/64 times 1/r."""
    return math.exp(-math.pi ** 2) / 64 / model.r


def total_mass(model: SpectralModel) -> float:
    """Integral of the pdf over one 1/r cell times r, i.e. over the whole line."""
    r = model.r
    return r * local_mass(model, 0.0, 0.5 / r) if r > 1 else local_mass(model, 0.0, 0.5)


def theta_lower_bound(model: SpectralModel, k: int, m: int, omega: float):
    """Compare |Theta_k(omega + m/r)| with e^{-pi^2/2} kappa^{-1/2} |c| |psihat| / r."""
    w = omega + m / model.r
    val = theta_hat_abs(model, k, w)
    bound = math.exp(-math.pi ** 2 / 2) / math.sqrt(model.kappa_A) * model.c_phi * float(
        gkpmath.psi_hat(w, model.delta_A)) / model.r
    return gkpmath.BoundReport.make("theta_lower_bound", val, bound, k=k, m=m, omega=omega)


# ----------------------------------------------------------------- sampling

class Sampler:
    """Exact sampler for the pdf by a site-then-offset proposal and rejection.

    Every w is uniquely w0 + u with w0 = j + s/r and |u| <= 1/(2r). The
    comb factor depends only on u, the envelope only slowly on w0 + u, so
    a site is drawn with weight max|psihat|^2 over its cell, u is drawn
    from the tabulated comb inverse CDF (resolution kappa/64), and the draw
    is accepted with probability |psihat(w0 + u)|^2 / max|psihat|^2.

    When the envelope spans more than max_sites sites (tiny delta), w
    itself is not representable in doubles; the sampler then draws the
    fractional part v = w mod 1, whose density is G(v) E(v), using the
    global maximum of E for the rejection step. Only v enters the
    discretization, so post-processing is unaffected.
    """

    def __init__(self, model: SpectralModel, resolution: float = 1 / 64, env_floor: float = 1e-15,
                 max_sites: int = 10 ** 6):
        self.model = model
        r = model.r
        reach = min(model.z_cut * model.kappa_A, 0.5 / r)
        h = model.kappa_A * resolution
        n = int(math.ceil(2 * reach / h))
        self.u = np.linspace(-reach, reach, n + 1)
        g = comb_power(model, self.u)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(self.u))])
        self.g_mass = cdf[-1]
        self.cdf = cdf / cdf[-1]
        D = model.delta_A
        wmax = math.sqrt(-math.log(env_floor)) / (2 * math.pi * D) + 1
        self.fractional = 2 * wmax * r > max_sites
        if self.fractional:
            self.sites = np.arange(r) / r
            self.env_max = np.full(r, float(envelope_sum(model, 0.0)))
        else:
            jmax = int(math.ceil(wmax))
            sites = (np.arange(-jmax * r, jmax * r + 1)) / r
            half = 0.5 / r
            # envelope is monotone in |w|: its cell maximum is at the point closest to 0
            near = np.clip(np.abs(sites) - min(half, reach), 0.0, None)
            self.sites = sites
            self.env_max = gkpmath.psi_hat(near, D) ** 2
        self.site_cdf = np.cumsum(self.env_max) / self.env_max.sum()

    def _draw_u(self, rng, size):
        x = rng.random(size)
        return np.interp(x, self.cdf, self.u)

    def _envelope(self, w):
        if self.fractional:
            return envelope_sum(self.model, w)
        return gkpmath.psi_hat(w, self.model.delta_A) ** 2

    def sample(self, rng, size=None):
        n = 1 if size is None else int(size)
        out = np.empty(0)
        while out.size < n:
            k = max(16, int(1.2 * (n - out.size)))
            idx = np.searchsorted(self.site_cdf, rng.random(k), side="right")
            idx = np.minimum(idx, len(self.sites) - 1)
            w = self.sites[idx] + self._draw_u(rng, k)
            acc = rng.random(k) * self.env_max[idx] <= self._envelope(w)
            out = np.concatenate([out, w[acc]])
        out = out[:n]
        if self.fractional:
            out = out - np.floor(out)
            out[out >= 1.0] = 0.0  # tiny negative draws round up to 1.0
        return float(out[0]) if size is None else out


def sample(model: SpectralModel, rng, size=None):
    """Draw w from the pdf (builds a Sampler; reuse one for many draws)."""
    return Sampler(model).sample(rng, size)


def dense_cdf(model: SpectralModel, points_per_kappa: int = 64):
    """Tabulated CDF of the pdf on a grid fine near every peak, coarse between."""
    s = Sampler(model)
    if s.fractional:
        raise ValueError("the envelope is too wide for a dense CDF")
    grid_u = s.u
    parts_x, parts_m = [], []
    for w0 in s.sites:
        x = w0 + grid_u
        parts_x.append(x)
        parts_m.append(pdf(model, x))
    x = np.concatenate(parts_x)
    p = np.concatenate(parts_m)
    order = np.argsort(x, kind="stable")
    x, p = x[order], p[order]
    cell = np.concatenate([[0.0], 0.5 * (p[1:] + p[:-1]) * np.diff(x)])
    cdf = np.cumsum(cell)
    return x, cdf / cdf[-1], cdf[-1]
