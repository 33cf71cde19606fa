"""Executable verifiers for the distributional claims about sequence members.

Each verifier is a pure fold over a NormalizedSequence (plus sieve-derived
tables) and emits a VerificationReport whose flags are reproducible from
the rows and the declared tolerances.  The asymptotic statements cannot fix
desk-scale targets by themselves, so flags are opt-in where a tolerance is
not intrinsic; callers (CLI, acceptance suite) pass the bands they commit
to.

Supports three notions of support for the size statistics:

  all       every n (distributional checks still skip a_n = 0)
  nonzero   {n <= x : a_n != 0}
  floor-A   nonzero n whose every prime factor p has |a_p| > (log_2 x)^-A
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .arith import (
    AngleSeries,
    NormalizedSequence,
    SpfSieve,
    build_spf_sieve,
    largest_prime_factor_table,
    primes_up_to,
)
from .report import VerificationReport
from .stats import (
    ks_statistic,
    log1,
    log2_iter,
    log3_iter,
    normal_cdf,
    prime_log_moments,
    st_cdf,
)

STANDARDIZATIONS = ("asymptotic", "finite-size", "self")
CLT_C = 0.5 + math.pi**2 / 12.0


def validate_checkpoints(checkpoints: list[int], limit: int) -> list[int]:
    cps = [int(x) for x in checkpoints]
    if not cps:
        raise ValueError("need at least one checkpoint")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if cps[-1] > limit:
        raise ValueError(f"checkpoint {cps[-1]} beyond sequence limit {limit}")
    if cps[0] < 3:
        raise ValueError("checkpoints must be >= 3")
    return cps


@dataclass
class SupportFilter:
    """Which n enter the size statistics; see module docstring."""

    mode: str = "nonzero"
    A: float = 2.0

    def __post_init__(self):
        if self.mode not in ("all", "nonzero", "floor-A"):
            raise ValueError(f"unknown support mode {self.mode!r}")
        if self.mode == "floor-A" and not self.A > 1:
            raise ValueError("floor-A needs A > 1")

    def floor(self, x: int) -> float:
        if self.mode == "floor-A":
            return log2_iter(x) ** (-self.A)
        return 0.0

    def mask(self, seq: NormalizedSequence, x: int) -> np.ndarray:
        """Boolean include-mask over indices 0..x (0 always False)."""
        m = np.zeros(x + 1, dtype=bool)
        m[1:] = True
        if self.mode == "all":
            return m
        vals = seq.values[: x + 1]
        m[1:] &= vals[1:] != 0.0
        if self.mode == "floor-A":
            floor = self.floor(x)
            for p in primes_up_to(x):
                if abs(seq.values[p]) <= floor:
                    m[p::p] = False
        return m


def prime_values_of(seq: NormalizedSequence, x: int) -> AngleSeries:
    """Angle records read off the sequence's own prime entries."""
    ps = primes_up_to(min(x, seq.limit))
    a = np.clip(seq.values[ps], -2.0, 2.0)
    return AngleSeries.from_a(ps, a, source=seq.source, limit=min(x, seq.limit))


# ---------------------------------------------------------------------------
# thm1: typical size of |a_n|
# ---------------------------------------------------------------------------


def verify_thm1(
    seq: NormalizedSequence,
    eps: float,
    checkpoints: list[int],
    monotone_slack: float | None = None,
) -> VerificationReport:
    """Exceedance fractions against the (log n)^(-1/2 +- eps) thresholds.

    Per checkpoint x: fraction of 3 <= n <= x with |a_n| > (log n)^(-1/2+eps)
    and the complementary fraction below (log n)^(-1/2-eps).  For n >= 3 the
    upper threshold increases with eps, so exceedance fractions shrink as
    eps grows; with `monotone_slack` set, consecutive checkpoints are
    additionally flagged for frac(x_{i+1}) <= frac(x_i) + slack.
    """
    t0 = time.perf_counter()
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    cps = validate_checkpoints(checkpoints, seq.limit)
    top = cps[-1]
    n = np.arange(3, top + 1, dtype=np.float64)
    ln = np.log(n)
    a = np.abs(seq.values[3 : top + 1])
    exceed = a > ln ** (-0.5 + eps)
    below = a < ln ** (-0.5 - eps)
    cum_ex = np.cumsum(exceed)
    cum_be = np.cumsum(below)
    rows = []
    for x in cps:
        count = x - 2
        rows.append(
            {
                "x": x,
                "exceed_fraction": float(cum_ex[x - 3] / count),
                "below_fraction": float(cum_be[x - 3] / count),
            }
        )
    flags = []
    for row in rows:
        ok = 0.0 <= row["exceed_fraction"] <= 1.0 and 0.0 <= row["below_fraction"] <= 1.0
        assert ok, "fractions must lie in [0, 1]"
    if monotone_slack is not None:
        for prev, cur in zip(rows, rows[1:]):
            flags.append(
                {
                    "name": f"nonincreasing_{prev['x']}_to_{cur['x']}",
                    "passed": cur["exceed_fraction"] <= prev["exceed_fraction"] + monotone_slack,
                    "observed": cur["exceed_fraction"] - prev["exceed_fraction"],
                    "tolerance": f"<= +{monotone_slack}",
                }
            )
    return VerificationReport(
        name="thm1-typical-size",
        parameters={"eps": eps, "source": seq.source, "checkpoints": cps},
        rows=rows,
        flags=flags,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# thm2: cancellation in dyadic windows
# ---------------------------------------------------------------------------


def smoothness_cutoff(x: int) -> float:
    """y = exp(4 log x log_3 x / log_2 x), the window smoothness diagnostic."""
    return math.exp(4.0 * log1(x) * log3_iter(x) / log2_iter(x))


def verify_thm2(
    seq: NormalizedSequence,
    checkpoints: list[int],
    sieve: SpfSieve | None = None,
    ratio_tol: float | None = None,
) -> VerificationReport:
    """Window sums S = sum a_n and T = sum |a_n| over (x/2, x].

    Reports |S|/T per checkpoint plus the fraction of window integers whose
    largest prime factor is below the smoothness cutoff y(x).  |S| <= T is a
    hard assertion; the cancellation ratio becomes a flag only when a
    tolerance is supplied (applied at the last checkpoint).
    """
    t0 = time.perf_counter()
    cps = validate_checkpoints(checkpoints, seq.limit)
    if sieve is None or sieve.limit < cps[-1]:
        sieve = build_spf_sieve(max(cps[-1], 2))
    lpf = largest_prime_factor_table(sieve)
    rows = []
    for x in cps:
        lo = x // 2 + 1
        window = seq.values[lo : x + 1]
        S = float(np.sum(window))
        T = float(np.sum(np.abs(window)))
        assert abs(S) <= T + 1e-9 * (1.0 + T), "triangle inequality |S| <= T violated"
        y = smoothness_cutoff(x)
        frac_smooth = float(np.mean(lpf[lo : x + 1] <= y)) if x >= lo else 0.0
        rows.append(
            {
                "x": x,
                "S": S,
                "T": T,
                "ratio": (abs(S) / T) if T > 0 else 0.0,
                "support_empty": int(T == 0.0),
                "y_smooth": y,
                "smooth_fraction": frac_smooth,
            }
        )
    flags = [
        {
            "name": "triangle_inequality",
            "passed": True,
            "observed": max(r["ratio"] for r in rows),
            "tolerance": "|S| <= T (hard assertion)",
        }
    ]
    if ratio_tol is not None:
        last = rows[-1]
        flags.append(
            {
                "name": f"cancellation_ratio_at_{last['x']}",
                "passed": last["ratio"] <= ratio_tol and not last["support_empty"],
                "observed": last["ratio"],
                "tolerance": f"<= {ratio_tol}",
            }
        )
    return VerificationReport(
        name="thm2-cancellation",
        parameters={"source": seq.source, "checkpoints": cps},
        rows=rows,
        flags=flags,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# thm3: normality of log |a_n|
# ---------------------------------------------------------------------------


@dataclass
class StrongMultApprox:
    """Per-n gaps c(n) = log|h(n)| - log|a_n| for the strongly multiplicative
    companion h (h(p) = a_p, h(p^k) = h(p)); zero on squarefree n."""

    ns: np.ndarray
    gaps: np.ndarray

    def quantiles(self, qs=(0.5, 0.9, 0.99, 1.0)) -> dict:
        absg = np.abs(self.gaps)
        if absg.size == 0:
            return {f"gap_q{int(q * 100)}": 0.0 for q in qs}
        return {f"gap_q{int(q * 100)}": float(np.quantile(absg, q)) for q in qs}


def strongly_multiplicative_log(
    seq: NormalizedSequence, x: int
) -> tuple[np.ndarray, np.ndarray]:
    """log|h(n)| for n <= x by prime-slice accumulation.

    Returns (logh, alive) where alive marks n free of zero prime values
    (h(n) != 0).  Cost is sum over p <= x of x/p array ops.
    """
    logh = np.zeros(x + 1, dtype=np.float64)
    alive = np.ones(x + 1, dtype=bool)
    alive[0] = False
    for p in primes_up_to(x):
        ap = seq.values[p]
        if ap == 0.0:
            alive[p::p] = False
        else:
            logh[p::p] += math.log(abs(ap))
    return logh, alive


def verify_thm3(
    seq: NormalizedSequence,
    x: int,
    support: SupportFilter | None = None,
    standardization: str = "self",
    identity_rtol: float = 1e-6,
    ks_tol: float | None = None,
    skew_tol: float | None = None,
) -> VerificationReport:
    """Normality of standardized log |a_n| over the filtered support.

    Standardization modes:
      asymptotic   mu = -1/2 log_2 x, sigma^2 = (1/2 + pi^2/12) log_2 x
      finite-size  Mertens-weighted prime log moments at the filter floor
      self         sample mean and variance

    Also checks the exact additive identity
    sum_{n<=x} log|h(n)| = sum_p log|h(p)| * floor(x/p) for the strongly
    multiplicative companion (multiples counted inside the support when
    zero prime values exist), and tabulates the |c(n)| gap profile.
    """
    t0 = time.perf_counter()
    if standardization not in STANDARDIZATIONS:
        raise ValueError(f"unknown standardization {standardization!r}")
    if x > seq.limit:
        raise ValueError(f"cutoff {x} beyond sequence limit {seq.limit}")
    support = support or SupportFilter()
    mask = support.mask(seq, x)
    vals = seq.values[: x + 1]
    mask = mask & np.concatenate([[False], vals[1:] != 0.0])
    ns = np.nonzero(mask)[0]
    if ns.size == 0:
        raise ValueError("filtered support is empty")
    log_abs = np.log(np.abs(vals[ns]))

    L2 = log2_iter(x)
    if standardization == "asymptotic":
        mu, sigma2 = -0.5 * L2, CLT_C * L2
    elif standardization == "finite-size":
        moments = prime_log_moments(prime_values_of(seq, x), x, support.floor(x))
        mu, sigma2 = moments.mu, moments.sigma2
    else:
        mu, sigma2 = float(np.mean(log_abs)), float(np.var(log_abs))
    if sigma2 <= 0:
        raise ValueError("degenerate standardization variance")
    z = (log_abs - mu) / math.sqrt(sigma2)

    ks = ks_statistic(z, normal_cdf)
    centered = log_abs - np.mean(log_abs)
    m2 = float(np.mean(centered**2))
    skew = float(np.mean(centered**3) / m2**1.5) if m2 > 0 else 0.0
    kurt = float(np.mean(centered**4) / m2**2 - 3.0) if m2 > 0 else 0.0

    # additive identity over the zero-free part of [1, x]
    logh, alive = strongly_multiplicative_log(seq, x)
    lhs = float(np.sum(logh[1:][alive[1:]]))
    ps = primes_up_to(x)
    if bool(np.all(alive[1:])):
        counts = x // ps
    else:
        counts = np.array([int(np.count_nonzero(alive[p::p])) for p in ps], dtype=np.int64)
    ap = seq.values[ps]
    nz = ap != 0.0
    rhs = float(np.sum(np.log(np.abs(ap[nz])) * counts[nz]))
    rel_err = abs(lhs - rhs) / max(1.0, abs(lhs))

    both = mask[ns] & alive[ns]
    approx = StrongMultApprox(ns=ns[both], gaps=logh[ns[both]] - np.log(np.abs(vals[ns[both]])))
    row = {
        "x": x,
        "n_support": int(ns.size),
        "mu": mu,
        "sigma2": sigma2,
        "ks_vs_normal": ks,
        "skewness": skew,
        "excess_kurtosis": kurt,
        "identity_lhs": lhs,
        "identity_rhs": rhs,
        "identity_rel_err": rel_err,
    }
    row.update(approx.quantiles())
    flags = [
        {
            "name": "additive_identity",
            "passed": rel_err <= identity_rtol,
            "observed": rel_err,
            "tolerance": f"rel err <= {identity_rtol}",
        }
    ]
    if ks_tol is not None:
        flags.append(
            {"name": "ks_vs_normal", "passed": ks <= ks_tol, "observed": ks,
             "tolerance": f"<= {ks_tol}"}
        )
    if skew_tol is not None:
        flags.append(
            {"name": "abs_skewness", "passed": abs(skew) <= skew_tol, "observed": skew,
             "tolerance": f"|skew| <= {skew_tol}"}
        )
    return VerificationReport(
        name="thm3-clt",
        parameters={
            "source": seq.source,
            "standardization": standardization,
            "support_mode": support.mode,
            "support_A": support.A,
        },
        rows=[row],
        flags=flags,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Moment-sum lemmas and the nonnegative-multiplicative bound
# ---------------------------------------------------------------------------


def verify_lemma_sums(
    seq: NormalizedSequence,
    gammas: list[float],
    checkpoints: list[int],
    ratio_band: tuple[float, float] | None = None,
) -> VerificationReport:
    """Partial sums sum |a_n|/n, sum |a_n|^2, sum |a_n|^2/n, sum |a_n|^gamma.

    Fitted log-power exponents between consecutive checkpoints go to the
    parameters as diagnostics.  With `ratio_band` = (lo, hi), the quantity
    (sum |a_n|^2 / n) / log x at the last checkpoint is flagged against it.
    """
    t0 = time.perf_counter()
    if any(not 0.0 < g <= 2.0 for g in gammas):
        raise ValueError("gammas must lie in (0, 2]")
    cps = validate_checkpoints(checkpoints, seq.limit)
    top = cps[-1]
    n = np.arange(1, top + 1, dtype=np.float64)
    a = np.abs(seq.values[1 : top + 1])
    cum_h = np.cumsum(a / n)
    cum_s2 = np.cumsum(a**2)
    cum_s2n = np.cumsum(a**2 / n)
    cum_g = {g: np.cumsum(a**g) for g in gammas}
    rows = []
    for x in cps:
        i = x - 1
        row = {
            "x": x,
            "sum_abs_over_n": float(cum_h[i]),
            "sum_sq": float(cum_s2[i]),
            "sum_sq_over_n": float(cum_s2n[i]),
            "sum_sq_over_n_per_logx": float(cum_s2n[i] / math.log(x)),
        }
        for g in gammas:
            row[f"sum_gamma_{g:g}"] = float(cum_g[g][i])
        rows.append(row)
    fits = []
    for r1, r2 in zip(rows, rows[1:]):
        x1, x2 = r1["x"], r2["x"]
        dlog = math.log(math.log(x2) / math.log(x1))
        fit = {"x_lo": x1, "x_hi": x2}
        if dlog > 0:
            fit["exp_sum_sq_over_n"] = math.log(r2["sum_sq_over_n"] / r1["sum_sq_over_n"]) / dlog \
                if r1["sum_sq_over_n"] > 0 and r2["sum_sq_over_n"] > 0 else 0.0
            for g in gammas:
                s1, s2 = r1[f"sum_gamma_{g:g}"], r2[f"sum_gamma_{g:g}"]
                fit[f"exp_gamma_{g:g}"] = (
                    math.log((s2 / x2) / (s1 / x1)) / dlog if s1 > 0 and s2 > 0 else 0.0
                )
        fits.append(fit)
    flags = []
    if ratio_band is not None:
        lo, hi = ratio_band
        obs = rows[-1]["sum_sq_over_n_per_logx"]
        flags.append(
            {
                "name": f"sum_sq_over_n_per_logx_at_{rows[-1]['x']}",
                "passed": lo <= obs <= hi,
                "observed": obs,
                "tolerance": f"in [{lo}, {hi}]",
            }
        )
    return VerificationReport(
        name="lemma-moment-sums",
        parameters={"source": seq.source, "gammas": gammas, "checkpoints": cps, "fits": fits},
        rows=rows,
        flags=flags,
        runtime=time.perf_counter() - t0,
    )


def verify_hall_tenenbaum(
    f: np.ndarray, x: int, label: str = "f"
) -> VerificationReport:
    """Mean-value bound for a nonnegative multiplicative f on [1, x]:

        sum_{n<=x} f(n) <= (A + B + 1) (x / log x) sum_{n<=x} f(n)/n

    with A the best prefix constant of sum_{p<=x'} f(p) log p <= A x' and
    B = sum_p sum_{k>=2, p^k<=x} f(p^k) log(p^k) / p^k, both measured from
    the input itself.
    """
    t0 = time.perf_counter()
    f = np.asarray(f, dtype=np.float64)
    if len(f) < x + 1:
        raise ValueError("f must cover indices 0..x")
    if np.any(f[1 : x + 1] < 0):
        raise ValueError("f must be nonnegative")
    ps = primes_up_to(x)
    if ps.size:
        contrib = f[ps] * np.log(ps.astype(np.float64))
        A = float(np.max(np.cumsum(contrib) / ps.astype(np.float64)))
    else:
        A = 0.0
    B = 0.0
    for p in ps:
        p = int(p)
        if p * p > x:
            break
        pk = p * p
        k = 2
        while pk <= x:
            B += f[pk] * math.log(pk) / pk
            pk *= p
            k += 1
    n = np.arange(1, x + 1, dtype=np.float64)
    lhs = float(np.sum(f[1 : x + 1]))
    mean_term = float(np.sum(f[1 : x + 1] / n))
    rhs = (A + B + 1.0) * (x / math.log(x)) * mean_term
    ok = lhs <= rhs * (1.0 + 1e-12)
    rows = [{"x": x, "A": A, "B": B, "lhs": lhs, "rhs": rhs,
             "ratio": lhs / rhs if rhs > 0 else 0.0}]
    flags = [
        {
            "name": "mean_value_bound",
            "passed": ok,
            "observed": rows[0]["ratio"],
            "tolerance": "lhs <= (A+B+1)(x/log x) sum f(n)/n",
        }
    ]
    return VerificationReport(
        name="hall-tenenbaum-bound",
        parameters={"label": label, "x": x},
        rows=rows,
        flags=flags,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Assumption diagnostics
# ---------------------------------------------------------------------------


def check_assumptions(
    seq: NormalizedSequence,
    angles: AngleSeries,
    A: float,
    grid: int | np.ndarray = 512,
    checkpoints: list[int] | None = None,
    a2_gap_tol: float | None = None,
) -> VerificationReport:
    """Three diagnostic panels for the auxiliary hypotheses.

    Panel 1 (prime-power lower bound): empirical C = max over p^k <= limit
    with a_p != 0 of -log|a_{p^k}| / (k log p); prime powers where the
    sequence value vanishes exactly are counted separately (the bound is
    conditional on a_p != 0, so primes with a_p = 0 never enter).

    Panel 2 (convergence rate): sup-gap between the angle ECDF and the
    exact CDF on a grid, per checkpoint x, against (log_2 x)^-A.

    Panel 3 (reciprocal tail): sum of 1/p over p >= y with
    |a_p| < (log_2 p)^-A against (log_2 y)^-(A-1), y running over the
    checkpoints.
    """
    t0 = time.perf_counter()
    if not A > 1:
        raise ValueError("A must be > 1")
    limit = seq.limit
    if checkpoints is None:
        checkpoints = [limit]
    cps = validate_checkpoints(checkpoints, angles.limit if len(angles) else limit)

    # Panel 1
    c_emp = 0.0
    zero_pk = 0
    examined = 0
    k = 1
    while 2**k <= limit:
        ps_k = angles.primes[angles.primes <= int(limit ** (1.0 / k))]
        if ps_k.size == 0:
            break
        ap = seq.values[ps_k]
        cond = ap != 0.0
        pk_idx = ps_k[cond] ** k
        vals = np.abs(seq.values[pk_idx])
        zero_here = vals == 0.0
        zero_pk += int(np.count_nonzero(zero_here))
        good = ~zero_here
        if np.any(good):
            cand = -np.log(vals[good]) / (k * np.log(ps_k[cond][good].astype(np.float64)))
            c_emp = max(c_emp, float(np.max(cand)))
        examined += int(np.count_nonzero(cond))
        k += 1

    if isinstance(grid, (int, np.integer)):
        alphas = np.linspace(0.0, math.pi, int(grid) + 1)
    else:
        alphas = np.asarray(grid, dtype=np.float64)
    lg_p = np.array([log2_iter(float(p)) for p in angles.primes])
    tail_term = np.abs(angles.a) < lg_p ** (-A)
    rows = []
    for x in cps:
        sub = np.sort(angles.theta[angles.primes <= x])
        n = len(sub)
        if n == 0:
            raise ValueError(f"no angles below checkpoint {x}")
        ecdf = np.searchsorted(sub, alphas, side="right") / n
        supgap = float(np.max(np.abs(ecdf - st_cdf(alphas))))
        a2_bound = log2_iter(x) ** (-A)
        y = x
        tail_mask = (angles.primes >= y) & tail_term
        tail_sum = float(np.sum(1.0 / angles.primes[tail_mask].astype(np.float64)))
        tail_bound = log2_iter(y) ** (-(A - 1.0))
        rows.append(
            {
                "x": x,
                "a2_sup_gap": supgap,
                "a2_bound": a2_bound,
                "a2_ratio": supgap / a2_bound,
                "tail_sum": tail_sum,
                "tail_bound": tail_bound,
                "tail_ratio": tail_sum / tail_bound,
            }
        )
    flags = []
    if a2_gap_tol is not None:
        last = rows[-1]
        flags.append(
            {
                "name": f"a2_sup_gap_at_{last['x']}",
                "passed": last["a2_sup_gap"] <= a2_gap_tol,
                "observed": last["a2_sup_gap"],
                "tolerance": f"<= {a2_gap_tol}",
            }
        )
    return VerificationReport(
        name="assumption-diagnostics",
        parameters={
            "source": seq.source,
            "A": A,
            "empirical_C": c_emp,
            "zero_prime_power_values": zero_pk,
            "prime_powers_examined": examined,
            "grid_points": int(len(alphas)),
        },
        rows=rows,
        flags=flags,
        runtime=time.perf_counter() - t0,
    )
