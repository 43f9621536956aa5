"""End-to-end factoring loop on top of the analytic output distribution.

Each attempt draws a in {2, ..., N-1}, takes the gcd shortcut when it
applies, otherwise samples w from the momentum distribution of Phi_a and
runs the three-candidate continued-fraction post-processing.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import numtheory, spectral
from .params import CircuitParams, desk_params, resolve, table_params

__all__ = [
    "RunConfig", "AttemptRecord", "RunTranscript", "GapReport", "factor", "run_attempt",
    "attempt_statistics", "success_probability_oracle", "attempt_success_oracle",
    "perturbed_distribution_gap", "default_attempts", "table_params", "desk_params",
]


def default_attempts(N: int) -> int:
    return 10 * max(1, math.ceil(math.log2(N)))


@dataclass
class RunConfig:
    N: int
    params: Union[str, CircuitParams, None] = "desk-strict"
    max_attempts: Optional[int] = None
    seed: int = 0
    sampler: str = "analytic"

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        if self.max_attempts is None:
            self.max_attempts = default_attempts(self.N)
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.sampler not in ("analytic", "grid"):
            raise ValueError("sampler must be 'analytic' or 'grid'")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        p = self.params
        return {
            "N": self.N,
            "params": p.to_dict() if isinstance(p, CircuitParams) else p,
            "max_attempts": self.max_attempts,
            "seed": self.seed,
            "sampler": self.sampler,
        }


@dataclass
class AttemptRecord:
    a: Optional[int]
    w: Optional[float]
    c: Optional[int]
    r_prime: Optional[int]
    outcome: str           # factor | gcd | parity | fail
    divisor: Optional[int] = None


@dataclass
class RunTranscript:
    config: dict
    attempts: list = field(default_factory=list)
    factor: Optional[int] = None
    stats: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config": self.config,
            "attempts": [asdict(a) for a in self.attempts],
            "factor": self.factor,
            "stats": self.stats,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


class _SamplerCache:
    """One spectral sampler per base a."""

    def __init__(self, params, N, kind):
        self.params, self.N, self.kind = params, N, kind
        self._cache = {}

    def get(self, a):
        if a not in self._cache:
            model = spectral.build_model(self.params, a, self.N)
            if self.kind == "grid":
                self._cache[a] = _GridSampler(model)
            else:
                self._cache[a] = spectral.Sampler(model)
        return self._cache[a]


class _GridSampler:
    """Inverse-transform sampling from the tabulated CDF (small N cross-check)."""

    def __init__(self, model):
        self.x, self.cdf, _ = spectral.dense_cdf(model)

    def sample(self, rng, size=None):
        u = rng.random(1 if size is None else size)
        w = np.interp(u, self.cdf, self.x)
        return float(w[0]) if size is None else w


def run_attempt(N: int, rng, samplers: _SamplerCache) -> AttemptRecord:
    """One draw of a and, if needed, one quantum sample."""
    a = int(rng.integers(2, N))
    g = math.gcd(a, N)
    if g > 1:
        return AttemptRecord(a, None, None, None, "gcd", g)
    q = numtheory.smallest_q(N)
    w = float(samplers.get(a).sample(rng))
    c = numtheory.discretize(w, q)
    divisor, rp = numtheory.postprocess_from_c(c, a, N, q)
    return AttemptRecord(a, w, c, rp, "factor" if divisor else "fail", divisor)


def factor(config: RunConfig) -> RunTranscript:
    """Repeat attempts until a nontrivial divisor of N turns up or attempts run out."""
    N = config.N
    tr = RunTranscript(config.to_dict())
    if N % 2 == 0:
        tr.attempts.append(AttemptRecord(None, None, None, None, "parity", 2 if N > 2 else None))
        tr.factor = 2 if N > 2 else None
        tr.stats = _stats(tr)
        return tr
    if N == 3:
        tr.attempts.append(AttemptRecord(2, None, None, None, "fail"))
        tr.stats = _stats(tr)
        return tr
    params = resolve(config.params, N)
    samplers = _SamplerCache(params, N, config.sampler)
    streams = np.random.SeedSequence(config.seed).spawn(config.max_attempts)
    for ss in streams:
        rec = run_attempt(N, np.random.default_rng(ss), samplers)
        tr.attempts.append(rec)
        if rec.divisor is not None:
            assert N % rec.divisor == 0 and 1 < rec.divisor < N
            tr.factor = rec.divisor
            break
    tr.stats = _stats(tr)
    return tr


def _stats(tr: RunTranscript) -> dict:
    out = {"attempts": len(tr.attempts)}
    for kind in ("factor", "gcd", "parity", "fail"):
        out[kind] = sum(1 for a in tr.attempts if a.outcome == kind)
    return out


def attempt_statistics(N: int, params=None, attempts: int = 2000, seed: int = 0,
                       sampler: str = "analytic") -> dict:
    """Run independent single attempts and count successes (shortcut included)."""
    p = resolve(params, N)
    samplers = _SamplerCache(p, N, sampler)
    streams = np.random.SeedSequence(seed).spawn(attempts)
    success = 0
    per_a = {}
    for ss in streams:
        rec = run_attempt(N, np.random.default_rng(ss), samplers)
        ok = rec.divisor is not None
        success += ok
        n, k = per_a.get(rec.a, (0, 0))
        per_a[rec.a] = (n + 1, k + ok)
    return {"attempts": attempts, "successes": success, "rate": success / attempts, "per_a": per_a}


def success_probability_oracle(N: int, a: int, params=None, model=None) -> float:
    """Probability that one sample for base a yields a factor.

    Every c in Z_q is pushed through the post-processing; the pdf mass of
    its discretization preimage (all w within 1/(2q) of j + c/q) is
    integrated by quadrature and summed over the successful c.
    """
    if math.gcd(a, N) != 1:
        raise ValueError("a must be a unit modulo N (the gcd shortcut handles the rest)")
    model = model or spectral.build_model(resolve(params, N), a, N)
    if model.r == 1:
        return 0.0
    q = numtheory.smallest_q(N)
    half = 1.0 / (2 * q)
    good = [c for c in range(q) if numtheory.postprocess_from_c(c, a, N, q)[0] is not None]
    return math.fsum(spectral.local_mass(model, c / q, half) for c in good)


def attempt_success_oracle(N: int, params=None) -> float:
    """Success probability of one attempt, averaged over a in {2, ..., N-1}."""
    p = resolve(params, N)
    vals = []
    for a in range(2, N):
        vals.append(1.0 if math.gcd(a, N) > 1 else success_probability_oracle(N, a, p))
    return math.fsum(vals) / len(vals)


@dataclass
class GapReport:
    degradation: float
    masses: dict
    lower_bounds: dict
    void: bool

    def to_dict(self):
        return asdict(self)


def perturbed_distribution_gap(model: spectral.SpectralModel, input_trace_distance: float) -> GapReport:
    """Worst-case effect of an imperfect input state on every gamma mass.

    Measurement statistics cannot separate states better than their trace
    distance, so each mass drops by at most input_trace_distance. At 2 or
    more nothing survives and the report is flagged void.
    """
    t = float(input_trace_distance)
    if not 0 <= t <= 2:
        raise ValueError("trace distance must lie in [0, 2]")
    masses = spectral.gamma_masses(model)
    lower = {d: max(0.0, m - t) for d, m in masses.items()}
    return GapReport(t, masses, lower, t >= 2)
