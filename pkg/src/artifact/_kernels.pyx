# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: compensated Gaussian sums and Fourier-comb sums."""

import numpy as np
from libc.math cimport exp, fabs, cos, sin, sqrt, ceil, floor, M_PI


def gauss_sum(double c, double shift, long zlo, long zhi):
    """sum_{z=zlo}^{zhi} exp(-c (z - shift)^2) with Neumaier compensation."""
    cdef double s = 0.0, comp = 0.0, t, y, u
    cdef long z
    for z in range(zlo, zhi + 1):
        u = z - shift
        y = exp(-c * u * u)
        t = s + y
        if fabs(s) >= fabs(y):
            comp += (s - t) + y
        else:
            comp += (y - t) + s
        s = t
    return s + comp


def comb_sum(double[::1] w, double phase, double kappa, long r, double zcut):
    """S(w) = sum_z exp(i phase z) etahat_kappa(w + z/r) over |w + z/r| <= zcut kappa."""
    cdef Py_ssize_t n = w.shape[0], i
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double pref = sqrt(2.0) * M_PI ** 0.25 / sqrt(kappa)
    cdef double g = 2.0 * M_PI * M_PI / (kappa * kappa)
    cdef double half = zcut * kappa, u, amp, re, im
    cdef long z, zlo, zhi
    for i in range(n):
        zlo = <long> ceil(r * (-w[i] - half))
        zhi = <long> floor(r * (-w[i] + half))
        re = 0.0
        im = 0.0
        for z in range(zlo, zhi + 1):
            u = w[i] + (<double> z) / r
            amp = pref * exp(-g * u * u)
            re += amp * cos(phase * z)
            im += amp * sin(phase * z)
        o[i] = re + 1j * im
    return out
