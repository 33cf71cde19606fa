"""Seeded synthetic members of the sequence class via Sato-Tate angle sampling.

Angles are drawn by rejection from density (2/pi) sin^2(theta) on [0, pi]:
propose theta uniform, accept with probability sin^2(theta) (envelope area
2, target area 1, so the long-run acceptance rate is 1/2).

Randomness is counter-based: every uniform is a pure function of
(seed, p, attempt, component) through a splitmix-style 64-bit finalizer,
so the draw for prime p never depends on evaluation order, chunking, or
thread count.  Same (limit, seed, rule) in, bit-identical sequence out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math
import numpy as np

from .arith import (
    AngleSeries,
    NormalizedSequence,
    PrimePowerRule,
    SpfSieve,
    assemble_multiplicative,
    growth_violations,
    primes_up_to,
)

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MAX_ATTEMPTS = 512


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on uint64 (wrapping arithmetic)."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _keyed_u01(seed: int, p: np.ndarray, attempt: int, component: int) -> np.ndarray:
    """Uniform [0,1) doubles keyed by (seed, p, attempt, component)."""
    base = mix64(np.uint64(seed) ^ (p.astype(np.uint64) * _GAMMA))
    # scalar counter mixed in Python ints (numpy warns on scalar wraparound)
    ctr = np.uint64(((2 * attempt + component) * 0xBF58476D1CE4E5B9) % 2**64)
    bits = mix64(base ^ ctr)
    return (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass
class StRngStream:
    """Counter-based stream; holds only the seed, all state is in the keys."""

    seed: int

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def sample_st_angles(
    stream: StRngStream, primes: np.ndarray, return_stats: bool = False
):
    """Vectorized rejection sampler over a prime array.

    Returns theta (float64 per prime), plus (n_accepted, n_proposed) when
    return_stats is set.
    """
    primes = np.asarray(primes, dtype=np.int64)
    theta = np.empty(len(primes), dtype=np.float64)
    pending = np.arange(len(primes))
    proposed = 0
    attempt = 0
    while len(pending):
        if attempt >= _MAX_ATTEMPTS:
            raise RuntimeError("rejection sampler exceeded the attempt cap")
        u1 = _keyed_u01(stream.seed, primes[pending], attempt, 0)
        u2 = _keyed_u01(stream.seed, primes[pending], attempt, 1)
        prop = math.pi * u1
        accept = u2 < np.sin(prop) ** 2
        theta[pending[accept]] = prop[accept]
        proposed += len(pending)
        pending = pending[~accept]
        attempt += 1
    if return_stats:
        return theta, len(primes), proposed
    return theta


def sample_st_angle(stream: StRngStream, p: int) -> float:
    """Single-prime form; identical value to the vectorized path."""
    return float(sample_st_angles(stream, np.array([p], dtype=np.int64))[0])


@dataclass
class SyntheticSpec:
    """Same (limit, seed, rule) always yields a bit-identical sequence."""

    limit: int
    seed: int
    rule: PrimePowerRule = field(default_factory=PrimePowerRule)


def build_synthetic_sequence(
    spec: SyntheticSpec, sieve: SpfSieve, max_exponent_checked: int = 6
) -> tuple[AngleSeries, NormalizedSequence]:
    """Sample angles for every prime <= limit, then assemble the sequence.

    Growth-bound violations of the chosen rule (possible at small primes
    with near-boundary angles) are counted into the sequence metadata.
    """
    if sieve.limit < spec.limit:
        raise ValueError(f"sieve limit {sieve.limit} < spec limit {spec.limit}")
    ps = primes_up_to(spec.limit)
    stream = StRngStream(spec.seed)
    theta, n_acc, n_prop = sample_st_angles(stream, ps, return_stats=True)
    angles = AngleSeries.from_theta(ps, theta, source="synthetic", limit=spec.limit)
    seq = assemble_multiplicative(angles, spec.rule, spec.limit, sieve=sieve, source="synthetic")
    violations = (
        growth_violations(spec.rule, angles, max_exponent_checked) if len(ps) else []
    )
    seq.meta.update(
        {
            "seed": spec.seed,
            "rule": spec.rule.kind,
            "rho": spec.rule.rho,
            "proposals": n_prop,
            "accepted": n_acc,
            "acceptance_rate": (n_acc / n_prop) if n_prop else 0.0,
            "growth_violations": len(violations),
        }
    )
    return angles, seq
