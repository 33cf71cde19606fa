"""Exact integer convolution: multi-prime NTT with CRT reconstruction.

Moduli are primes p = k*2^m + 1 below 2^31, so butterfly products stay
inside uint64 and every array op vectorizes.  Residue vectors of the true
integer coefficients are carried through all stages mod each prime; only
the final Garner lift needs the capacity guarantee (the configured prime
product is nevertheless checked against per-stage bounds up front).
"""

from __future__ import annotations

import math

import numpy as np

from .arith import is_prime
from .errors import ConfigurationError


def find_ntt_primes(transform_len: int, count: int) -> list[int]:
    """`count` primes p < 2^31 with p = 1 (mod transform_len), descending."""
    if transform_len & (transform_len - 1):
        raise ValueError("transform_len must be a power of two")
    out: list[int] = []
    k = (2**31 - 2) // transform_len
    while k >= 1 and len(out) < count:
        p = k * transform_len + 1
        if is_prime(p):
            out.append(p)
        k -= 1
    if len(out) < count:
        raise ConfigurationError(
            f"only {len(out)} NTT primes available below 2^31 for length {transform_len}"
        )
    return out


def _factor_small(n: int) -> set[int]:
    fac = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            fac.add(d)
            n //= d
        d += 1
    if n > 1:
        fac.add(n)
    return fac


def primitive_root(p: int) -> int:
    fac = _factor_small(p - 1)
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
        g += 1


def _bitrev_permutation(length: int) -> np.ndarray:
    bits = length.bit_length() - 1
    idx = np.arange(length, dtype=np.int64)
    rev = np.zeros(length, dtype=np.int64)
    for i in range(bits):
        rev = (rev << 1) | ((idx >> i) & 1)
    return rev


def _power_table(w: int, half: int, p: int) -> np.ndarray:
    """[1, w, w^2, ..., w^(half-1)] mod p by doubling, uint64."""
    arr = np.array([1], dtype=np.uint64)
    wk = w
    pw = np.uint64(p)
    while len(arr) < half:
        arr = np.concatenate([arr, (arr * np.uint64(wk)) % pw])
        wk = wk * wk % p
    return arr[:half]


class NttPlan:
    """Cached twiddle tables for one (prime, length) pair."""

    def __init__(self, p: int, length: int):
        if (p - 1) % length:
            raise ConfigurationError(f"{p} is not 1 mod {length}")
        self.p = p
        self.length = length
        self.rev = _bitrev_permutation(length)
        g = primitive_root(p)
        w = pow(g, (p - 1) // length, p)
        w_inv = pow(w, p - 2, p)
        self.fwd = self._level_tables(w)
        self.inv = self._level_tables(w_inv)
        self.len_inv = np.uint64(pow(length, p - 2, p))

    def _level_tables(self, w: int) -> list[np.ndarray]:
        tabs = []
        m = 2
        while m <= self.length:
            wm = pow(w, self.length // m, self.p)
            tabs.append(_power_table(wm, m // 2, self.p))
            m *= 2
        return tabs

    def _transform(self, a: np.ndarray, tabs: list[np.ndarray]) -> np.ndarray:
        p = np.uint64(self.p)
        a = a[self.rev]
        m, s = 2, 0
        while m <= self.length:
            half = m // 2
            a = a.reshape(-1, m)
            even = a[:, :half]
            t = (a[:, half:] * tabs[s]) % p
            hi = even + (p - t)
            np.subtract(hi, p, out=hi, where=hi >= p)
            lo = even + t
            np.subtract(lo, p, out=lo, where=lo >= p)
            a[:, :half] = lo
            a[:, half:] = hi
            a = a.reshape(-1)
            m *= 2
            s += 1
        return a

    def forward(self, a: np.ndarray) -> np.ndarray:
        return self._transform(a, self.fwd)

    def inverse(self, a: np.ndarray) -> np.ndarray:
        out = self._transform(a, self.inv)
        return (out * self.len_inv) % np.uint64(self.p)


_PLAN_CACHE: dict[tuple[int, int], NttPlan] = {}


def get_plan(p: int, length: int) -> NttPlan:
    key = (p, length)
    if key not in _PLAN_CACHE:
        _PLAN_CACHE[key] = NttPlan(p, length)
    return _PLAN_CACHE[key]


def cyclic_square_truncated(res: np.ndarray, plan: NttPlan, keep: int) -> np.ndarray:
    """Square a residue polynomial (degree < keep <= length/2), return the
    first `keep` coefficients mod plan.p."""
    a = np.zeros(plan.length, dtype=np.uint64)
    a[: len(res)] = res
    fa = plan.forward(a)
    fa = (fa * fa) % np.uint64(plan.p)
    sq = plan.inverse(fa)
    return sq[:keep].copy()


def garner_lift(residues: list[np.ndarray], primes: list[int]) -> np.ndarray:
    """Centered CRT lift of per-prime residue vectors to Python ints.

    Mixed-radix digits are computed in uint64 (all moduli < 2^31 so every
    intermediate product fits); the final Horner evaluation runs on an
    object array.  Values above prod/2 map to negatives.
    """
    k = len(primes)
    if k == 0:
        raise ValueError("no primes")
    digits = [residues[0].astype(np.uint64)]
    for i in range(1, k):
        pi = np.uint64(primes[i])
        # evaluate d_0 + d_1 p_0 + ... + d_{i-1} p_0..p_{i-2}  (mod p_i)
        acc = digits[i - 1] % pi
        for j in range(i - 2, -1, -1):
            acc = (acc * np.uint64(primes[j] % primes[i]) + digits[j]) % pi
        prod_inv = pow(math.prod(primes[:i]) % primes[i], primes[i] - 2, primes[i])
        d = ((residues[i] + (pi - acc % pi)) * np.uint64(prod_inv)) % pi
        digits.append(d)
    big = digits[-1].astype(object)
    for j in range(k - 2, -1, -1):
        big = big * primes[j] + digits[j].astype(object)
    modulus = math.prod(primes)
    half = modulus // 2
    big = np.where(big > half, big - modulus, big)
    return big
