"""Integer arithmetic and classical post-processing for period finding.

Everything here works on Python ints, so values such as the
pseudomodular power (which can reach N**m) never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


@dataclass(frozen=True)
class FactorInstance:
    N: int
    n: int
    q: int

    @classmethod
    def from_N(cls, N: int) -> "FactorInstance":
        if N < 1:
            raise ValueError("N must be positive")
        return cls(N=N, n=N.bit_length(), q=smallest_q(N))


@dataclass(frozen=True)
class PeriodResult:
    a: int
    r: int
    parity: str
    half_power: Optional[int]


def smallest_q(N: int) -> int:
    """Smallest power of two strictly greater than N**2."""
    if N < 1:
        raise ValueError("N must be positive")
    return 1 << (N * N).bit_length()


def order(a: int, N: int) -> int:
    """Multiplicative order of a modulo N by repeated multiplication."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if not 1 <= a < N or math.gcd(a, N) != 1:
        raise ValueError(f"a={a} is not a unit modulo {N}")
    r, x = 1, a % N
    while x != 1:
        x = (x * a) % N
        r += 1
    return r


def period(a: int, N: int) -> PeriodResult:
    r = order(a, N)
    if r % 2 == 0:
        return PeriodResult(a, r, "even", pow(a, r // 2, N))
    return PeriodResult(a, r, "odd", None)


def power_table(a: int, N: int, m: int) -> list[int]:
    """The factors a^(2^i) mod N for i < m."""
    out = []
    x = a % N
    for _ in range(m):
        out.append(x)
        x = (x * x) % N
    return out


def pseudomodular_power(a: int, N: int, m: int, x: int) -> int:
    """prod_i (a^(2^i) mod N)^(x_i) over the m low bits of x.

    Congruent to a^x mod N for x < 2^m, but not reduced.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    out = 1
    for i, f in enumerate(power_table(a, N, m)):
        if (x >> i) & 1:
            out *= f
    return out


def pseudomodular_table(a: int, N: int, m: int) -> list[int]:
    """f_{a,N,m}(x) for every x in [0, 2^m), built bit by bit."""
    vals = [1]
    for f in power_table(a, N, m):
        vals = vals + [v * f for v in vals]
    return vals


def fra(x: float) -> float:
    return x - math.floor(x)


def discretize(x: float, q: int) -> int:
    """Nearest multiple of 1/q to the fractional part of x, as an element of Z_q.

    Ties go to the smaller index.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    f = Fraction(x) - math.floor(x)
    t = f * q
    lo = math.floor(t)
    # distances to lo/q and (lo+1)/q in units of 1/q
    c = lo if t - lo <= (lo + 1) - t else lo + 1
    return c % q


def _closest_below(c: int, q: int, N: int) -> Fraction:
    return Fraction(c, q).limit_denominator(N - 1)


def cf_denominator_recovery(c: int, q: int, N: int) -> tuple[int, int]:
    """Fraction d/r with r < N closest to c/q, found from the continued fraction.

    Among equally close candidates the one with the smaller denominator wins.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if not 0 <= c < q:
        raise ValueError("need 0 <= c < q")
    if c == 0:
        return 0, 1
    x = Fraction(c, q)
    bound = N - 1
    # convergents p/k and the two best approximations bracketing x
    p0, k0, p1, k1 = 0, 1, 1, 0
    n, d = x.numerator, x.denominator
    while True:
        a = n // d
        k2 = k0 + a * k1
        if k2 > bound:
            break
        p0, k0, p1, k1 = p1, k1, p0 + a * p1, k2
        n, d = d, n - a * d
        if d == 0:
            break
    cands = [Fraction(p1, k1)]
    if d != 0:
        t = (bound - k0) // k1
        cands.append(Fraction(p0 + t * p1, k0 + t * k1))
    best = min(cands, key=lambda f: (abs(f - x), f.denominator))
    return best.numerator, best.denominator


def brute_force_recovery(c: int, q: int, N: int) -> tuple[int, int]:
    """Reference minimizer over all d/r with 1 <= r < N."""
    x = Fraction(c, q)
    best = None
    for r in range(1, N):
        fl = (c * r) // q
        for d in (fl, fl + 1):
            f = Fraction(d, r)
            key = (abs(f - x), f.denominator)
            if best is None or key < best[0]:
                best = (key, f)
    f = best[1]
    return f.numerator, f.denominator


def miller_factor(a: int, N: int, r: int) -> Optional[int]:
    """Nontrivial divisor from an even period, or None."""
    if r % 2:
        return None
    h = pow(a, r // 2, N)
    if h == N - 1:
        return None
    for g in (math.gcd(h - 1, N), math.gcd(h + 1, N)):
        if 1 < g < N:
            return g
    return None


def postprocess_from_c(c: int, a: int, N: int, q: Optional[int] = None):
    """Run the three-candidate continued-fraction pass on an integer c.

    Returns (divisor or None, recovered r' or None).
    """
    q = smallest_q(N) if q is None else q
    for ell in (-1, 0, 1):
        cc = (c + ell) % q
        d, rp = cf_denominator_recovery(cc, q, N)
        if rp == 1:  # an integer carries no period information
            continue
        k = 1
        while k * rp <= N:
            s = k * rp
            if pow(a, s, N) == 1:
                g = miller_factor(a, N, s)
                if g is not None:
                    return g, rp
            k += 1
    return None, None


def shor_postprocess3(w: float, a: int, N: int) -> Optional[int]:
    """Factor of N from one real sample w, or None."""
    q = smallest_q(N)
    return postprocess_from_c(discretize(w, q), a, N, q)[0]


def gamma_contains(w: float, d: int, r: int, q: int) -> bool:
    """Whether w lies within 1/(2q) of some j + d/r."""
    x = Fraction(w) - Fraction(d, r)
    j = round(x)
    return abs(x - j) <= Fraction(1, 2 * q)


def good_set(a: int, N: int) -> list[int]:
    """The integers c in Z_q lying within 1/(2q) of some d/r."""
    q = smallest_q(N)
    r = order(a, N)
    out = set()
    for d in range(r):
        lo = Fraction(d, r) - Fraction(1, 2 * q)
        hi = Fraction(d, r) + Fraction(1, 2 * q)
        for c in range(math.ceil(lo * q), math.floor(hi * q) + 1):
            out.add(c % q)
    return sorted(out)


def units(N: int) -> list[int]:
    return [a for a in range(1, N) if math.gcd(a, N) == 1]
