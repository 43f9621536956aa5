"""Error calculus for approximately computed functions.

delta_* give the trace-distance bounds of the composite gates, compose
chains gate specifications, and stage_errors evaluates the per-stage
budget of the state sequence Psi^(0) .. Psi^(5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .params import CircuitParams, table_params


class DomainError(ValueError):
    """Raised when a gate's output does not fit the next gate's input."""


def _check_eps(name, eps, hi):
    if not 0 < eps < hi:
        raise ValueError(f"{name} must lie in (0, {hi})")


def _root4(x):
    return mpmath.root(x, 4) if isinstance(x, mpmath.mpf) else x ** 0.25


def delta_lsb(eps, sharp=False):
    """7 eps^(1/4), or 6 (pi eps / 2)^(1/4) with sharp=True."""
    _check_eps("eps", eps, 0.5)
    if sharp:
        return 6 * _root4(eps * mpmath.pi / 2 if isinstance(eps, mpmath.mpf) else eps * math.pi / 2)
    return 7 * _root4(eps)


def delta_V(eps_A, eps_C):
    _check_eps("eps_A", eps_A, 0.5)
    _check_eps("eps_C", eps_C, 0.25)
    return 7 * _root4(eps_A) + 7 * _root4(2 * eps_C)


def delta_Vdag(eps_A, eps_C):
    _check_eps("eps_A", eps_A, 0.25)
    _check_eps("eps_C", eps_C, 0.5)
    return 7 * _root4(2 * eps_A) + 7 * _root4(eps_C)


def delta_VaNm(eps_A, eps_C, m):
    """Bound for V_{a,N,m}; the adjoint has the same bound."""
    _check_eps("eps_A", eps_A, 0.25)
    _check_eps("eps_C", eps_C, 2.0 ** -(m + 2))
    return 88 * _root4(eps_A) + 88 * _root4(2 ** m * eps_C)


delta_VaNm_dag = delta_VaNm


def delta_UaNm(eps_A, eps_C, m):
    """V_{a,N,m}, a shift, then its adjoint: twice delta_VaNm."""
    v = delta_VaNm(eps_A, eps_C, m)
    return v + v


# ------------------------------------------------------------------ domains

@dataclass(frozen=True)
class Region:
    """One mode's input set.

    kind is 'N0' (within eps of the nonnegative integers), 'Z' (within eps
    of the integers), 'zero' (within eps of 0) or 'R' (all reals).
    """

    kind: str
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("N0", "Z", "zero", "R"):
            raise ValueError(f"unknown region kind {self.kind!r}")

    def covers_reals(self):
        return self.kind == "R" or (self.kind == "Z" and self.eps >= 0.5)

    def __le__(self, other: "Region") -> bool:
        if other.covers_reals():
            return True
        if self.covers_reals():
            return False
        order = {"zero": 0, "N0": 1, "Z": 2}
        if order[self.kind] > order[other.kind]:
            return False
        return self.eps <= other.eps


@dataclass(frozen=True)
class Domain:
    modes: tuple
    qubit: frozenset = frozenset({0, 1})

    def __le__(self, other: "Domain") -> bool:
        if len(self.modes) != len(other.modes):
            return False
        return all(a <= b for a, b in zip(self.modes, other.modes)) and self.qubit <= other.qubit


@dataclass(frozen=True)
class ApproxGateSpec:
    name: str
    domain: Domain
    output_domain: Domain
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


def compose(specs: Sequence[ApproxGateSpec]) -> ApproxGateSpec:
    """Chain specs left to right; errors add when each output fits the next input."""
    specs = list(specs)
    if not specs:
        raise ValueError("nothing to compose")
    out = specs[0]
    for nxt in specs[1:]:
        if not out.output_domain <= nxt.domain:
            raise DomainError(f"output of {out.name} is not inside the domain of {nxt.name}")
        out = ApproxGateSpec(f"{nxt.name}*{out.name}", out.domain, nxt.output_domain, out.delta + nxt.delta)
    return out


def lsb_spec(eps):
    d = Domain((Region("Z", eps),), frozenset({0, 1}))
    return ApproxGateSpec("LSB", d, d, delta_lsb(eps))


def UaNm_spec(eps_A, eps_C, m):
    dom = Domain((Region("N0", eps_A), Region("R"), Region("zero", eps_C)), frozenset({0}))
    return ApproxGateSpec("U_aNm", dom, dom, delta_UaNm(eps_A, eps_C, m))


# ------------------------------------------------------------ stage budget

@dataclass
class StageErrorBudget:
    eps: list
    total: object
    general: list = field(default_factory=list)
    eps4_display: object = None
    table: bool = False
    preconditions: dict = field(default_factory=dict)

    @property
    def valid(self):
        return all(self.preconditions.values())

    def to_dict(self):
        f = _num
        return {
            "eps": [f(e) for e in self.eps],
            "total": f(self.total),
            "general": [f(e) for e in self.general],
            "eps4_display": f(self.eps4_display),
            "table": self.table,
            "preconditions": self.preconditions,
            "valid": self.valid,
        }


def _num(v):
    if v is None or isinstance(v, (int, float)):
        return v
    x = float(v)
    return x if x != 0.0 or v == 0 else mpmath.nstr(v, 20)


def is_table(params: CircuitParams, n: int) -> bool:
    ref = table_params(2 ** (n - 1))
    keys = ("m", "R", "kappa_A", "delta_A", "kappa_B", "delta_B", "delta_C", "eps_A", "eps_B", "eps_C")
    return all(mpmath.mpf(getattr(params, k)) == mpmath.mpf(getattr(ref, k)) for k in keys)


def stage_errors(params: CircuitParams, n: int, N: int | None = None) -> StageErrorBudget:
    """Five per-stage trace-distance bounds and their sum.

    The general forms are always evaluated. At table parameters the closed-form
    values (which dominate the general forms) are used, so the total is
    364 * 2^(-2n). N defaults to the worst n-bit value 2^n - 1 in the
    third bound.
    """
    mp = mpmath.mpf
    kA, dA, kB, dB, dC = (mp(params.kappa_A), mp(params.delta_A), mp(params.kappa_B),
                          mp(params.delta_B), mp(params.delta_C))
    eA, eB, eC = mp(params.eps_A), mp(params.eps_B), mp(params.eps_C)
    m, R = params.m, params.R
    Nw = N if N is not None else 2 ** n - 1
    tail = 3 * mpmath.exp(-(kA * R) ** 2 / 8)
    g1 = 6 * (mpmath.sqrt(dA) + mpmath.sqrt(dB)) + 3 * mpmath.sqrt(dC) + tail
    g2 = 176 * mpmath.root(eA, 4) + 176 * mpmath.root(2 ** m * eC, 4)
    g3 = 2 * kB * mp(Nw) ** m
    g4 = tail
    g5 = 6 * mpmath.sqrt(dA)
    general = [g1, g2, g3, g4, g5]

    pre = {
        "n>=4": n >= 4,
        "kappa_A<1/4": kA < 0.25,
        "kappa_B<1/4": kB < 0.25,
        "eps_A in [sqrt(delta_A),1/4)": mpmath.sqrt(dA) <= eA < 0.25,
        "eps_B in [sqrt(delta_B),1/2)": mpmath.sqrt(dB) <= eB < 0.5,
        "eps_C in [sqrt(delta_C),2^-(m+2))": mpmath.sqrt(dC) <= eC < mp(2) ** -(m + 2),
        "N*eps_B<1/2": Nw * eB < 0.5,
        "kappa_A*R>=4": kA * R >= 4,
    }
    if N is not None:
        pre["N has n bits"] = N.bit_length() == n
    table = is_table(params, n)
    unit = mp(2) ** (-2 * n)
    if table:
        eps = [9 * unit, 352 * unit, unit, unit, unit]
        for j, (g, e) in enumerate(zip(general, eps), start=1):
            pre[f"general eps{j} <= closed-form value"] = bool(g <= e * (1 + mp(10) ** -20))
    else:
        eps = list(general)
    return StageErrorBudget(eps=eps, total=mpmath.fsum(eps), general=general,
                            eps4_display=mp(2) ** (-n) if table else g4, table=table,
                            preconditions=pre)
