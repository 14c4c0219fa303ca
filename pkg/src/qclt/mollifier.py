"""Auxiliary prime series and mollifier polynomials.

The prime-power series P(s, chi) = sum_{2<=n<=X} Lambda(n) chi(n) /
(n^s log n) and its restrictions below/above the inner cutoff Y; the
mollifier M(s, chi) = sum mu(n) a(n) chi(n) n^{-s} over the sieved
support; the truncated exponentials that tie the two together; and the
coefficient-level convolution machinery used as the oracle for all of
it.  Every Dirichlet sum is evaluated in ascending-n order (numpy
pairwise reduction), so family statistics are byte-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arith import (
    MollifierSpec,
    SieveTables,
    default_k1,
    default_k2,
    default_support_cap,
    list_support,
    mangoldt_array,
    moebius_array,
    omega_in_range_array,
    support_mask,
)
from .characters import Character, CharacterGroup, batch_twisted_sums, character_values

__all__ = [
    "CoeffSeries",
    "DeskParams",
    "desk_params",
    "P_RANGES",
    "p_series_coeffs",
    "p_series",
    "p_series_family",
    "truncated_exp",
    "script_M",
    "script_m_family",
    "mollifier_coeff_arrays",
    "mollifier_value",
    "mollifier_family",
    "mollifier_product_complete",
    "dirichlet_convolve",
    "power_coeffs",
    "McoeffCheck",
    "m_script_coeff_check",
]

P_RANGES = ("full_X", "below_Y", "between_Y_X", "primes_only")

WHICH_M = ("full", "one", "two")


@dataclass(frozen=True)
class CoeffSeries:
    """Finite Dirichlet-series coefficient table: n -> complex, sparse.

    Absent indices mean coefficient 0; all indices lie in [1, limit].
    """

    limit: int
    coeffs: dict[int, complex]

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be >= 1")
        for n in self.coeffs:
            if not 1 <= n <= self.limit:
                raise ValueError(f"coefficient index {n} outside [1, {self.limit}]")

    @classmethod
    def from_arrays(cls, idx, val, limit: int) -> "CoeffSeries":
        return cls(limit, {int(n): complex(v) for n, v in zip(idx, val)})

    def __call__(self, n: int) -> complex:
        return self.coeffs.get(n, 0.0 + 0.0j)


@dataclass(frozen=True)
class DeskParams:
    """Desk-scale parameter tuple for one modulus.

    sigma0 is pinned to 1/2 + W/log q; the caps K1/K2 and the series
    truncation lengths default to 100 * loglog q and 100 * logloglog q
    with the iterated logs floored at 1, which keeps the asymptotic
    shape finite at q <= 1e6.
    """

    q: int
    t: float
    W: float
    X: int
    Y: int
    sigma0: float
    K1: int
    K2: int
    trunc_k1: int
    trunc_k2: int
    support_cap: int

    def __post_init__(self):
        if self.q < 3:
            raise ValueError("q must be >= 3")
        if abs(self.sigma0 - (0.5 + self.W / math.log(self.q))) > 1e-12:
            raise ValueError("sigma0 must equal 1/2 + W/log q")
        if not 1 <= self.Y <= self.X:
            raise ValueError(f"need 1 <= Y <= X, got Y={self.Y}, X={self.X}")
        if self.trunc_k1 < 1 or self.trunc_k2 < 1:
            raise ValueError("truncation lengths must be >= 1")
        if self.support_cap < 1:
            raise ValueError("support_cap must be >= 1")

    @property
    def s0(self) -> complex:
        return complex(self.sigma0, self.t)

    def spec(self) -> MollifierSpec:
        return MollifierSpec(self.X, self.Y, self.K1, self.K2, self.support_cap)

    def with_q(self, q: int) -> "DeskParams":
        return desk_params(
            q,
            t=self.t,
            W=self.W,
            X=self.X,
            Y=self.Y,
            trunc_k1=self.trunc_k1,
            trunc_k2=self.trunc_k2,
        )


def desk_params(
    q: int,
    t: float = 0.0,
    W: float = 3.0,
    X: int = 100,
    Y: int = 20,
    K1: int | None = None,
    K2: int | None = None,
    trunc_k1: int | None = None,
    trunc_k2: int | None = None,
    support_cap: int | None = None,
) -> DeskParams:
    """DeskParams with desk defaults; sigma0 is always derived from W."""
    return DeskParams(
        q=q,
        t=t,
        W=W,
        X=X,
        Y=Y,
        sigma0=0.5 + W / math.log(q),
        K1=default_k1(q) if K1 is None else K1,
        K2=default_k2(q) if K2 is None else K2,
        trunc_k1=default_k1(q) if trunc_k1 is None else trunc_k1,
        trunc_k2=default_k2(q) if trunc_k2 is None else trunc_k2,
        support_cap=default_support_cap(q) if support_cap is None else support_cap,
    )


# ---------------------------------------------------------------------------
# prime series


def p_series_coeffs(
    range_kind: str, params: DeskParams, tables: SieveTables
) -> tuple[np.ndarray, np.ndarray]:
    """(indices, values) of the selected prime sum, ascending in n.

    full_X / below_Y / between_Y_X carry Lambda(n)/log n on prime powers
    (1/j at n = p^j); primes_only carries 1 on primes p <= X.
    """
    if range_kind not in P_RANGES:
        raise ValueError(f"range must be one of {P_RANGES}, got {range_kind!r}")
    if params.X > tables.limit:
        raise ValueError(f"X={params.X} exceeds sieve limit {tables.limit}")
    if range_kind == "primes_only":
        pr = tables.primes[tables.primes <= params.X]
        return pr.astype(np.int64), np.ones(pr.size, dtype=np.float64)
    lo, hi = {
        "full_X": (2, params.X),
        "below_Y": (2, params.Y),
        "between_Y_X": (params.Y + 1, params.X),
    }[range_kind]
    if hi < lo:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64)
    lam = mangoldt_array(hi, tables)
    n = np.arange(lo, hi + 1, dtype=np.int64)
    vals = lam[lo : hi + 1]
    keep = vals != 0.0
    n = n[keep]
    return n, vals[keep] / np.log(n.astype(np.float64))


def p_series(
    s, chi: Character, range_kind: str, params: DeskParams, tables: SieveTables
) -> complex:
    """The selected prime sum twisted by one character at the point s.

    full_X is evaluated as below_Y + between_Y_X, so the range partition
    is exact by construction.
    """
    if range_kind == "full_X":
        return p_series(s, chi, "below_Y", params, tables) + p_series(
            s, chi, "between_Y_X", params, tables
        )
    idx, base = p_series_coeffs(range_kind, params, tables)
    if idx.size == 0:
        return 0.0 + 0.0j
    sc = complex(s)
    return complex(np.sum(character_values(chi, idx) * base * np.power(idx.astype(np.float64), -sc)))


def p_series_family(
    s, group: CharacterGroup, range_kind: str, params: DeskParams, tables: SieveTables
) -> np.ndarray:
    """Batched prime sums over the whole character family."""
    if range_kind == "full_X":
        return p_series_family(s, group, "below_Y", params, tables) + p_series_family(
            s, group, "between_Y_X", params, tables
        )
    idx, base = p_series_coeffs(range_kind, params, tables)
    if idx.size == 0:
        return np.zeros(group.phi, dtype=np.complex128)
    sc = complex(s)
    return batch_twisted_sums((idx, base * np.power(idx.astype(np.float64), -sc)), group)


# ---------------------------------------------------------------------------
# truncated exponentials


def truncated_exp(z: complex, K: int) -> complex:
    """sum_{0 <= k <= K} (-1)^k z^k / k!  (partial sum of exp(-z))."""
    if K < 0:
        raise ValueError("K must be >= 0")
    term = 1.0 + 0.0j
    total = term
    for k in range(1, K + 1):
        term *= -z / k
        total += term
    return total


def script_M(
    s, chi: Character, which: str, params: DeskParams, tables: SieveTables
) -> complex:
    """Truncated exponential of the inner (which="one") or outer
    (which="two") prime sum."""
    if which == "one":
        return truncated_exp(p_series(s, chi, "below_Y", params, tables), params.trunc_k1)
    if which == "two":
        return truncated_exp(p_series(s, chi, "between_Y_X", params, tables), params.trunc_k2)
    raise ValueError(f"which must be 'one' or 'two', got {which!r}")


def script_m_family(
    s, group: CharacterGroup, which: str, params: DeskParams, tables: SieveTables
) -> np.ndarray:
    if which == "one":
        z = p_series_family(s, group, "below_Y", params, tables)
        K = params.trunc_k1
    elif which == "two":
        z = p_series_family(s, group, "between_Y_X", params, tables)
        K = params.trunc_k2
    else:
        raise ValueError(f"which must be 'one' or 'two', got {which!r}")
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, K + 1):
        term = term * (-z) / k
        total += term
    return total


# ---------------------------------------------------------------------------
# mollifier polynomials


def mollifier_coeff_arrays(
    which: str, params: DeskParams, tables: SieveTables
) -> tuple[np.ndarray, np.ndarray]:
    """(indices, mu-weights) of the mollifier sum for the selected part,
    ascending, restricted to squarefree support (mu annihilates the rest)."""
    if which not in WHICH_M:
        raise ValueError(f"which must be one of {WHICH_M}, got {which!r}")
    kind = {"full": "full", "one": "below_Y", "two": "between_Y_X"}[which]
    support = list_support(params.spec(), kind, tables)
    mu = moebius_array(int(support.max(initial=1)), tables)[support]
    keep = mu != 0
    return support[keep], mu[keep].astype(np.float64)


def mollifier_value(
    s, chi: Character, which: str, params: DeskParams, tables: SieveTables
) -> complex:
    """M(s, chi) (or its inner/outer factor) as a finite Dirichlet sum."""
    idx, mu = mollifier_coeff_arrays(which, params, tables)
    sc = complex(s)
    return complex(np.sum(character_values(chi, idx) * mu * np.power(idx.astype(np.float64), -sc)))


def mollifier_family(
    s, group: CharacterGroup, which: str, params: DeskParams, tables: SieveTables
) -> np.ndarray:
    """Batched mollifier values over the whole character family."""
    idx, mu = mollifier_coeff_arrays(which, params, tables)
    sc = complex(s)
    return batch_twisted_sums((idx, mu * np.power(idx.astype(np.float64), -sc)), group)


def mollifier_product_complete(params: DeskParams, tables: SieveTables) -> bool:
    """True when support_cap covers the full product of the two partial
    supports, so that M = M1 * M2 holds as an identity of finite sums."""
    primes = tables.primes
    below = primes[primes <= params.Y]
    mid = primes[(primes > params.Y) & (primes <= params.X)]
    max1 = int(below.max()) ** params.K1 if below.size and params.K1 > 0 else 1
    max2 = int(mid.max()) ** params.K2 if mid.size and params.K2 > 0 else 1
    return max1 * max2 <= params.support_cap


# ---------------------------------------------------------------------------
# coefficient machinery (convolution oracle)


def dirichlet_convolve(A: CoeffSeries, B: CoeffSeries, limit: int) -> CoeffSeries:
    """(A*B)(n) = sum_{d e = n} A(d) B(e), for n <= limit."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    out: dict[int, complex] = {}
    small, big = (A.coeffs, B.coeffs) if len(A.coeffs) <= len(B.coeffs) else (B.coeffs, A.coeffs)
    for na, va in small.items():
        if na > limit:
            continue
        cap = limit // na
        for nb, vb in big.items():
            if nb > cap:
                continue
            n = na * nb
            out[n] = out.get(n, 0.0 + 0.0j) + va * vb
    return CoeffSeries(limit, out)


def power_coeffs(k: int, params: DeskParams, tables: SieveTables, limit: int) -> CoeffSeries:
    """Coefficients of (sum_{p <= X} chi(p) p^{-s})^k as a function of n:
    the multinomial counts on n with exactly k prime factors, all <= X."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > 20:
        raise ValueError("k > 20 would overflow the exact integer range")
    if params.X > tables.limit:
        raise ValueError(f"X={params.X} exceeds sieve limit {tables.limit}")
    pr = tables.primes[tables.primes <= min(params.X, limit)]
    base = CoeffSeries(limit, {int(p): 1.0 + 0.0j for p in pr})
    acc = CoeffSeries(limit, {1: 1.0 + 0.0j})
    for _ in range(k):
        acc = dirichlet_convolve(acc, base, limit)
    return acc


@dataclass(frozen=True)
class McoeffCheck:
    """Coefficient-level comparison of the truncated exponential of the
    inner prime sum against the inner mollifier factor."""

    statistic: float  # sum |c(n)|^2 / n^{2 sigma0}
    property1_ok: bool  # |b(n)| <= 1 everywhere computed
    property3_ok: bool  # c(n) = 0 off the allowed exception set
    complete: bool  # truncation depth resolved every coefficient <= limit
    limit: int


def m_script_coeff_check(params: DeskParams, tables: SieveTables) -> McoeffCheck:
    """Expand the truncated exponential of the inner prime sum into
    Dirichlet coefficients b(n), compare with mu(n) a1(n), and score the
    difference c(n) = b(n) - mu(n) a1(n) in the n^{-2 sigma0} metric."""
    limit = min(params.support_cap, tables.limit)
    idx, base = p_series_coeffs("below_Y", params, tables)
    p1 = CoeffSeries(limit, {int(n): complex(v) for n, v in zip(idx, base) if n <= limit})
    b = np.zeros(limit + 1, dtype=np.float64)
    b[1] = 1.0
    acc = CoeffSeries(limit, {1: 1.0 + 0.0j})
    sign_over_fact = 1.0
    deepest_needed = int(math.log2(limit)) if limit > 1 else 0
    for k in range(1, params.trunc_k1 + 1):
        acc = dirichlet_convolve(acc, p1, limit)
        if not acc.coeffs:
            break
        sign_over_fact *= -1.0 / k
        for n, v in acc.coeffs.items():
            b[n] += sign_over_fact * v.real
    complete = params.trunc_k1 >= deepest_needed or not p1.coeffs

    mu = moebius_array(limit, tables).astype(np.float64)
    a1 = support_mask(replace_cap(params.spec(), limit), "below_Y", tables).astype(np.float64)
    c = b - mu[: limit + 1] * a1
    n = np.arange(limit + 1, dtype=np.float64)
    n[0] = 1.0
    statistic = float(np.sum(np.abs(c[1:]) ** 2 * n[1:] ** (-2.0 * params.sigma0)))

    property1_ok = bool(np.all(np.abs(b[1:]) <= 1.0 + 1e-9))
    omega = omega_in_range_array(limit, 0, limit, tables)
    blocked = _blocked_power_mask(limit, params.Y, tables)
    allowed = (omega > params.K1) | blocked
    property3_ok = bool(np.all(np.abs(c[1:][~allowed[1:]]) <= 1e-12))
    return McoeffCheck(statistic, property1_ok, property3_ok, complete, limit)


def _blocked_power_mask(limit: int, Y: int, tables: SieveTables) -> np.ndarray:
    """mask[n]: some prime p <= Y divides n to a power exceeding Y."""
    out = np.zeros(limit + 1, dtype=bool)
    for p in tables.primes:
        p = int(p)
        if p > Y or p > limit:
            break
        # smallest power of p exceeding Y
        pk = p
        while pk <= Y:
            pk *= p
        if pk <= limit:
            out[pk::pk] = True
    return out


def replace_cap(spec: MollifierSpec, cap: int) -> MollifierSpec:
    return replace(spec, support_cap=cap)
