"""Pure numpy versions of the compiled kernels (same signatures)."""

import math

import numpy as np


def gauss_sum(c, shift, zlo, zhi):
    """sum_{z=zlo}^{zhi} exp(-c (z - shift)^2), exactly rounded via fsum."""
    z = np.arange(zlo, zhi + 1, dtype=np.float64)
    return math.fsum(np.exp(-c * (z - shift) ** 2))


def comb_sum(w, phase, kappa, r, zcut):
    """S(w) = sum_z exp(i phase z) etahat_kappa(w + z/r) over |w + z/r| <= zcut kappa."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    half = zcut * kappa
    zlo = np.ceil(r * (-w - half)).astype(np.int64)
    zhi = np.floor(r * (-w + half)).astype(np.int64)
    width = int((zhi - zlo).max(initial=-1)) + 1
    if width <= 0:
        return np.zeros(w.shape, dtype=np.complex128)
    z = zlo[:, None] + np.arange(width)[None, :]
    mask = z <= zhi[:, None]
    u = w[:, None] + z / r
    amp = math.sqrt(2.0) * math.pi ** 0.25 / math.sqrt(kappa) * np.exp(-2 * math.pi ** 2 * u * u / kappa ** 2)
    amp = np.where(mask, amp, 0.0)
    return (amp * np.exp(1j * phase * z)).sum(axis=1)
