"""Squeezing and truncation parameters of the factoring circuit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace

import mpmath

from . import numtheory

FIELDS = ("m", "R", "kappa_A", "delta_A", "kappa_B", "delta_B", "delta_C", "eps_A", "eps_B", "eps_C")


@dataclass(frozen=True)
class CircuitParams:
    """(m, R, kappa_A, delta_A, kappa_B, delta_B, delta_C, eps_A, eps_B, eps_C).

    Real fields are floats at desk scale and mpmath numbers for the
    asymptotic table, whose values underflow doubles.
    """

    m: int
    R: int
    kappa_A: object
    delta_A: object
    kappa_B: object
    delta_B: object
    delta_C: object
    eps_A: object = None
    eps_B: object = None
    eps_C: object = None
    envelope_cutoff: float = 1e-10
    label: str = "custom"

    def __post_init__(self):
        for mode in "ABC":
            if getattr(self, "eps_" + mode) is None:
                object.__setattr__(self, "eps_" + mode, _sqrt(getattr(self, "delta_" + mode)))

    @property
    def exact(self) -> bool:
        """True when every real field is a double."""
        return all(isinstance(getattr(self, f), float) for f in FIELDS[2:])

    def as_float(self) -> "CircuitParams":
        vals = {}
        for f in FIELDS[2:]:
            v = float(getattr(self, f))
            if v == 0.0:
                raise OverflowError(f"{f} underflows double precision")
            vals[f] = v
        return replace(self, **vals)

    def to_dict(self) -> dict:
        out = {"label": self.label, "m": self.m, "R": self.R, "envelope_cutoff": self.envelope_cutoff}
        for f in FIELDS[2:]:
            out[f] = _jsonable(getattr(self, f))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameter fields: {sorted(unknown)}")
        missing = [f for f in FIELDS[:7] if f not in d]
        if missing:
            raise ValueError(f"missing parameter fields: {missing}")
        vals = dict(d)
        vals["m"] = int(vals["m"])
        vals["R"] = int(vals["R"])
        for f in FIELDS[2:]:
            if vals.get(f) is not None:
                vals[f] = _parse_real(vals[f])
                if not vals[f] > 0:
                    raise ValueError(f"{f} must be positive")
        if vals["m"] < 1 or vals["R"] < 1:
            raise ValueError("m and R must be positive")
        return cls(**vals)

    @classmethod
    def from_json(cls, path) -> "CircuitParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _sqrt(x):
    return mpmath.sqrt(x) if isinstance(x, mpmath.mpf) else math.sqrt(x)


def _parse_real(v):
    if isinstance(v, str):
        x = mpmath.mpf(v)
        f = float(x)
        return f if f != 0.0 and mpmath.mpf(f) == x else x
    return float(v)


def _jsonable(v):
    if isinstance(v, float):
        return v
    f = float(v)
    if f != 0.0 and mpmath.mpf(f) == v:
        return f
    return mpmath.nstr(v, 30)


def table_params(N: int) -> CircuitParams:
    """The asymptotic parameter table for an n-bit N."""
    if N < 2:
        raise ValueError("N must be at least 2")
    n = N.bit_length()
    two = mpmath.mpf(2)
    m = 17 * n
    return CircuitParams(
        m=m, R=2 ** (m - 1),
        kappa_A=two ** (-16 * n), delta_A=two ** (-16 * n),
        kappa_B=two ** (-18 * n * n), delta_B=two ** (-18 * n * n),
        delta_C=two ** (-50 * n),
        label="table",
    )


def desk_params(N: int, profile: str = "strict") -> CircuitParams:
    """Small parameters that still satisfy the inequalities the proofs rely on.

    kappa_A = delta_A = 1/(4q), so kappa_A <= 1/q, 1/kappa_A > N^2,
    kappa_A <= 2/r and 4 pi^2 delta_A^2 < pi/16. m is the smallest window
    exponent whose envelope tail 3 exp(-kappa_A^2 R^2 / 8) is below the
    profile tolerance, kappa_B the largest power of two with
    2 kappa_B N^m below it, and delta_C = 2^-(2m+8) (strict m) keeps the mode-C
    truncation below 2^-(m+2).
    """
    if profile not in ("strict", "loose"):
        raise ValueError("profile must be 'strict' or 'loose'")
    if not 2 <= N <= 10 ** 4:
        raise ValueError("desk parameters support 2 <= N <= 10^4")
    tol = 1e-3 if profile == "strict" else 0.1
    q = numtheory.smallest_q(N)
    kA = 1.0 / (4 * q)
    m = _window_exponent(kA, tol)
    # 2 kappa_B N^m < tol with kappa_B a power of two
    kb_exp = math.floor(math.log2(tol / (2 * N ** m)))
    if 2.0 ** kb_exp * 2 * N ** m >= tol:
        kb_exp -= 1
    kB = 2.0 ** kb_exp
    # shared by both profiles so they differ only in (m, kappa_B, delta_B)
    dC = 2.0 ** -(2 * _window_exponent(kA, 1e-3) + 8)
    p = CircuitParams(m=m, R=2 ** (m - 1), kappa_A=kA, delta_A=kA, kappa_B=kB, delta_B=kB,
                      delta_C=dC, label=f"desk-{profile}")
    if not N * p.eps_B < 0.5 or not p.eps_C < 2.0 ** -(m + 2):
        raise ValueError("infeasible desk profile")
    return p


def _window_exponent(kappa, tol):
    m = 1
    while 3 * math.exp(-(kappa * 2 ** (m - 1)) ** 2 / 8) >= tol:
        m += 1
    return m


def resolve(spec, N: int) -> CircuitParams:
    """Map 'table', 'desk-strict', 'desk-loose', a path, or a CircuitParams to parameters."""
    if isinstance(spec, CircuitParams):
        return spec
    if spec in (None, "desk-strict", "desk"):
        return desk_params(N, "strict")
    if spec == "desk-loose":
        return desk_params(N, "loose")
    if spec == "table":
        return table_params(N)
    return CircuitParams.from_json(spec)
