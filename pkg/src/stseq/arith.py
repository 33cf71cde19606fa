"""Sieves, factorization, and assembly of multiplicative sequences.

Everything downstream builds on three primitives: a smallest-prime-factor
table, exact factorization against it, and the assembly of a multiplicative
sequence a_n from prime angles plus a prime-power rule.  Prime values are
a_p = 2 cos(theta_p) in [-2, 2]; higher prime powers come from the selected
rule.  All heavy loops are vectorized; results are independent of evaluation
order and thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, IncompleteInputError

# Sieve entries are uint32 (largest prime below 2^32 fits), 4 bytes each.
DEFAULT_SIEVE_BUDGET_BYTES = 2 * 1024**3

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain boolean sieve)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


@dataclass
class SpfSieve:
    """Smallest-prime-factor table for 2..limit.

    spf[n] is the least prime dividing n; spf[n] == n exactly when n is
    prime.  Entries 0 and 1 are 0.
    """

    limit: int
    spf: np.ndarray

    def primes(self) -> np.ndarray:
        n = np.arange(2, self.limit + 1, dtype=np.int64)
        return n[self.spf[2:] == n]

    def __post_init__(self):
        if self.limit < 2:
            raise CapacityError(f"sieve limit must be >= 2, got {self.limit}")


def build_spf_sieve(limit: int, budget_bytes: int = DEFAULT_SIEVE_BUDGET_BYTES) -> SpfSieve:
    """Fill a smallest-prime-factor table up to `limit`.

    Vectorized Eratosthenes over the odd part: even slots get 2 up front,
    then each odd prime p claims the still-unmarked odd multiples from p^2
    (any smaller odd composite already belongs to a smaller prime).
    """
    if limit < 2:
        raise CapacityError(f"limit must be >= 2, got {limit}")
    if limit > 2**32 - 1:
        raise CapacityError(f"limit {limit} exceeds the 32-bit table format")
    need = 4 * (limit + 1)
    if need > budget_bytes:
        raise CapacityError(
            f"sieve of {limit + 1} entries needs {need} bytes, budget is {budget_bytes}"
        )
    spf = np.zeros(limit + 1, dtype=np.uint32)
    spf[2::2] = 2
    for p in range(3, math.isqrt(limit) + 1, 2):
        if spf[p] == 0:
            spf[p] = p
            sl = spf[p * p :: 2 * p]
            sl[sl == 0] = p
    odd = spf[3::2]
    rest = np.nonzero(odd == 0)[0]
    odd[rest] = (2 * rest + 3).astype(np.uint32)
    return SpfSieve(limit=limit, spf=spf)


@dataclass
class Factorization:
    """Canonical factorization: (prime, exponent) pairs, strictly increasing."""

    n: int
    pairs: list[tuple[int, int]]

    def reconstruct(self) -> int:
        out = 1
        for p, k in self.pairs:
            out *= p**k
        return out

    def __iter__(self):
        return iter(self.pairs)


def factorize(n: int, sieve: SpfSieve) -> Factorization:
    """Factor n by chasing the sieve; n == 1 gives the empty product."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > sieve.limit:
        raise ValueError(f"n={n} exceeds sieve limit {sieve.limit}")
    pairs: list[tuple[int, int]] = []
    m = n
    spf = sieve.spf
    while m > 1:
        p = int(spf[m])
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        pairs.append((p, k))
    return Factorization(n=n, pairs=pairs)


def exponent_core_tables(sieve: SpfSieve) -> tuple[np.ndarray, np.ndarray]:
    """Per-n decomposition n = spf(n)^e * core with spf(n) not dividing core.

    Returns (e, core) arrays indexed 0..limit (entries below 2 are 0/1
    placeholders).  Filled in dyadic blocks so every lookup lands in an
    already-final earlier block: n // spf(n) <= n/2.
    """
    limit = sieve.limit
    spf = sieve.spf
    e = np.zeros(limit + 1, dtype=np.int8)
    core = np.zeros(limit + 1, dtype=np.int64)
    core[1] = 1
    lo = 2
    while lo <= limit:
        hi = min(2 * lo, limit + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi].astype(np.int64)
        m = n // p
        same = spf[m] == p
        e[lo:hi] = np.where(same, e[m] + 1, 1)
        core[lo:hi] = np.where(same, core[m], m)
        lo = hi
    return e, core


def largest_prime_factor_table(sieve: SpfSieve) -> np.ndarray:
    """P(n) for all n <= limit, with P(1) = 1 (same dyadic-block scheme)."""
    limit = sieve.limit
    spf = sieve.spf
    lpf = np.zeros(limit + 1, dtype=np.int64)
    lpf[1] = 1
    lo = 2
    while lo <= limit:
        hi = min(2 * lo, limit + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi].astype(np.int64)
        lpf[lo:hi] = np.maximum(p, lpf[n // p])
        lo = hi
    return lpf


# ---------------------------------------------------------------------------
# Prime-power rules and sequence assembly
# ---------------------------------------------------------------------------

RULE_KINDS = ("hecke-chebyshev", "truncate-zero", "exact-integer-hecke")

# Below SIN_EPS the sine ratio switches to its analytic limit +-(k+1); in the
# band up to SIN_STABLE the ratio loses ~eps/|sin theta| absolute accuracy to
# cancellation, so the stable three-term recurrence takes over there.
SIN_EPS = 1e-12
SIN_STABLE = 1e-2


def chebyshev_sin_ratio(theta, k):
    """sin((k+1) theta) / sin(theta), elementwise.

    Equals U_k(cos theta).  At theta ~ 0 the limit is k+1; at theta ~ pi it
    is (-1)^k (k+1); near both endpoints the value comes from the recurrence
    so the result stays accurate to ~1e-13 absolute on the whole domain.
    """
    scalar = np.ndim(theta) == 0 and np.ndim(k) == 0
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    k = np.broadcast_to(np.asarray(k, dtype=np.int64), theta.shape)
    s = np.sin(theta)
    tiny = np.abs(s) < SIN_EPS
    shaky = (np.abs(s) < SIN_STABLE) & ~tiny
    safe = np.where(tiny | shaky, 1.0, s)
    out = np.sin((k + 1) * theta) / safe
    if np.any(shaky):
        out[shaky] = chebyshev_recurrence(2.0 * np.cos(theta[shaky]), k[shaky])
    if np.any(tiny):
        sign = np.where((theta > math.pi / 2) & (k % 2 == 1), -1.0, 1.0)
        out = np.where(tiny, sign * (k + 1), out)
    if scalar:
        return float(out[0])
    return out


def chebyshev_recurrence(a, k, k_max: int | None = None):
    """U_k evaluated from a = 2 cos(theta) by u_{j+1} = a u_j - u_{j-1}."""
    a = np.asarray(a, dtype=np.float64)
    k = np.asarray(k)
    if k_max is None:
        k_max = int(k.max()) if k.size else 0
    u_prev = np.zeros_like(a)  # U_{-1}
    u_cur = np.ones_like(a)  # U_0
    out = np.where(k == 0, 1.0, 0.0)
    for j in range(1, k_max + 1):
        u_prev, u_cur = u_cur, a * u_cur - u_prev
        out = np.where(k == j, u_cur, out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class PrimePowerRule:
    """How a_{p^k} extends beyond k = 1 for a sequence with a_p = 2 cos(theta_p).

    kind:
      hecke-chebyshev     sin((k+1)theta)/sin(theta), the normalized Hecke
                          recursion obeyed by the real coefficient sequences
      truncate-zero       2 cos(theta) at k = 1 and 0 for k >= 2
      exact-integer-hecke same values as hecke-chebyshev, evaluated by the
                          recurrence from a = 2 cos(theta) instead of the
                          sine ratio
    rho: growth-condition exponent, must be > 0; the admissible bound at
         (p, k >= 2) is p^((k-1)/2 - rho).
    """

    kind: str = "hecke-chebyshev"
    rho: float = 0.25

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")

    def value(self, theta, k):
        """Rule value at (theta, k), elementwise over arrays."""
        if self.kind == "hecke-chebyshev":
            return chebyshev_sin_ratio(theta, k)
        if self.kind == "exact-integer-hecke":
            return chebyshev_recurrence(2.0 * np.cos(np.asarray(theta, dtype=np.float64)), k)
        k_arr = np.asarray(k)
        out = np.where(k_arr == 1, 2.0 * np.cos(np.asarray(theta, dtype=np.float64)), 0.0)
        if out.ndim == 0:
            return float(out)
        return out


@dataclass
class AngleSeries:
    """Per-prime records (p, a_p, theta_p) covering all primes <= limit."""

    primes: np.ndarray
    a: np.ndarray
    theta: np.ndarray
    source: str = ""
    limit: int = 0  # coverage bound; defaults to the largest prime present

    def __post_init__(self):
        self.primes = np.asarray(self.primes, dtype=np.int64)
        self.a = np.asarray(self.a, dtype=np.float64)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if not (len(self.primes) == len(self.a) == len(self.theta)):
            raise ValueError("primes, a, theta must have equal length")
        if self.a.size and np.max(np.abs(self.a)) > 2.0 + 1e-12:
            raise ValueError("|a_p| <= 2 violated")
        if self.theta.size and (self.theta.min() < -1e-12 or self.theta.max() > math.pi + 1e-12):
            raise ValueError("theta outside [0, pi]")
        if self.limit <= 0:
            self.limit = int(self.primes.max()) if len(self.primes) else 0

    @classmethod
    def from_theta(cls, primes, theta, source: str = "", limit: int = 0) -> "AngleSeries":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(primes=primes, a=2.0 * np.cos(theta), theta=theta, source=source, limit=limit)

    @classmethod
    def from_a(cls, primes, a, source: str = "", limit: int = 0) -> "AngleSeries":
        a = np.asarray(a, dtype=np.float64)
        return cls(primes=primes, a=a, theta=np.arccos(np.clip(a / 2.0, -1.0, 1.0)),
                   source=source, limit=limit)

    def __len__(self) -> int:
        return len(self.primes)

    def restrict(self, limit: int) -> "AngleSeries":
        keep = self.primes <= limit
        return AngleSeries(self.primes[keep], self.a[keep], self.theta[keep], self.source,
                           limit=min(limit, self.limit))


@dataclass
class NormalizedSequence:
    """a_1..a_limit as float64 with a_1 = 1; values[0] is a NaN sentinel."""

    limit: int
    values: np.ndarray
    source: str  # one of: tau, elliptic, synthetic
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.values) != self.limit + 1:
            raise ValueError("values must have length limit + 1 (index 0 unused)")
        if self.limit >= 1 and self.values[1] != 1.0:
            raise ValueError("a_1 must equal 1")

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])


def assemble_multiplicative(
    angles: AngleSeries,
    rule: PrimePowerRule,
    limit: int,
    sieve: SpfSieve | None = None,
    source: str = "synthetic",
) -> NormalizedSequence:
    """Build a_n = prod over p^k || n of rule(theta_p, k); a_1 = 1.

    Angles must cover every prime <= limit.  Vectorized over dyadic blocks:
    each n is split into spf(n)^e * core with core < block start, so one
    gather per block resolves the recursion.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if sieve is None:
        sieve = build_spf_sieve(max(limit, 2))
    if sieve.limit < limit:
        raise IncompleteInputError(f"sieve limit {sieve.limit} < requested {limit}")

    theta_at = np.full(limit + 1, np.nan)
    in_range = angles.primes <= limit
    theta_at[angles.primes[in_range]] = angles.theta[in_range]
    sieve_primes = sieve.primes()
    sieve_primes = sieve_primes[sieve_primes <= limit]
    missing = sieve_primes[np.isnan(theta_at[sieve_primes])]
    if missing.size:
        raise IncompleteInputError(
            f"angles missing for {missing.size} primes <= {limit} (first: {int(missing[0])})"
        )

    values = np.empty(limit + 1, dtype=np.float64)
    values[0] = np.nan
    values[1] = 1.0
    spf = sieve.spf
    e = np.zeros(limit + 1, dtype=np.int8)
    core = np.zeros(limit + 1, dtype=np.int64)
    core[1] = 1
    lo = 2
    while lo <= limit:
        hi = min(2 * lo, limit + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi].astype(np.int64)
        m = n // p
        same = spf[m] == p
        e_blk = np.where(same, e[m] + 1, 1)
        core_blk = np.where(same, core[m], m)
        e[lo:hi] = e_blk
        core[lo:hi] = core_blk
        pv = rule.value(theta_at[p], e_blk.astype(np.int64))
        values[lo:hi] = pv * values[core_blk]
        lo = hi
    return NormalizedSequence(limit=limit, values=values, source=source)


def growth_violations(
    rule: PrimePowerRule,
    angles: AngleSeries,
    max_exponent: int,
    rho: float | None = None,
) -> list[tuple[int, int, float, float]]:
    """All (p, k, |a_{p^k}|, bound) with 2 <= k <= max_exponent breaking
    |a_{p^k}| <= p^((k-1)/2 - rho), sorted by p then k."""
    if max_exponent < 2:
        raise ValueError("max_exponent must be >= 2")
    rho = rule.rho if rho is None else rho
    if not rho > 0:
        raise ValueError("rho must be > 0")
    out: list[tuple[int, int, float, float]] = []
    p = angles.primes.astype(np.float64)
    for k in range(2, max_exponent + 1):
        vals = np.abs(rule.value(angles.theta, k))
        bound = p ** ((k - 1) / 2.0 - rho)
        bad = np.nonzero(vals > bound)[0]
        for i in bad:
            out.append((int(angles.primes[i]), k, float(vals[i]), float(bound[i])))
    out.sort(key=lambda r: (r[0], r[1]))
    return out
