"""Sieved integer arithmetic.

Smallest-prime-factor sieve plus the multiplicative/additive functions
built on it: von Mangoldt Lambda(n), Moebius mu(n), restricted
prime-factor counts, and the 0/1 mollifier coefficient functions a(n),
a1(n), a2(n) that gate which n enter the mollifier polynomial.

All sieve arrays are numpy-backed and immutable after construction;
scalar operations factor single integers through the spf table, array
builders sieve whole ranges at once for the batched paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SieveTables",
    "MollifierSpec",
    "build_sieve",
    "factorize",
    "mangoldt",
    "moebius",
    "big_omega",
    "mollifier_coeff",
    "list_support",
    "support_mask",
    "mangoldt_array",
    "moebius_array",
    "omega_in_range_array",
    "has_factor_above_array",
    "default_k1",
    "default_k2",
    "default_support_cap",
]

KINDS = ("full", "below_Y", "between_Y_X")


@dataclass(frozen=True)
class SieveTables:
    """Precomputed factorization tables up to `limit`.

    Attributes:
        limit: largest integer covered.
        spf: int64 array of length limit+1; spf[n] is the smallest prime
            factor of n for 2 <= n <= limit (spf[0] = spf[1] = 0).
        primes: ascending int64 array of all primes <= limit.
    """

    limit: int
    spf: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.spf.setflags(write=False)
        self.primes.setflags(write=False)


def build_sieve(limit: int) -> SieveTables:
    """Smallest-prime-factor sieve of Eratosthenes up to `limit`.

    Raises ValueError for limit < 2.
    """
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    # anything still unmarked (>= 2) has no prime factor <= sqrt(limit): prime
    rest = np.nonzero(spf[2:] == 0)[0] + 2
    spf[rest] = rest
    primes = np.nonzero(spf[2:] == np.arange(2, limit + 1))[0].astype(np.int64) + 2
    return SieveTables(limit=limit, spf=spf, primes=primes)


def _check_range(n: int, tables: SieveTables) -> None:
    if not 1 <= n <= tables.limit:
        raise ValueError(f"n={n} outside sieve range [1, {tables.limit}]")


def factorize(n: int, tables: SieveTables) -> list[tuple[int, int]]:
    """Prime factorization [(p, e), ...] with p ascending."""
    _check_range(n, tables)
    out: list[tuple[int, int]] = []
    spf = tables.spf
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def mangoldt(n: int, tables: SieveTables) -> float:
    """von Mangoldt Lambda(n): log p when n = p^k, else 0."""
    _check_range(n, tables)
    if n == 1:
        return 0.0
    p = int(tables.spf[n])
    m = n
    while m % p == 0:
        m //= p
    return math.log(p) if m == 1 else 0.0


def moebius(n: int, tables: SieveTables) -> int:
    """Moebius mu(n) in {-1, 0, 1}."""
    _check_range(n, tables)
    r = 0
    for _, e in factorize(n, tables):
        if e > 1:
            return 0
        r += 1
    return -1 if r % 2 else 1


def big_omega(n: int, tables: SieveTables) -> int:
    """Number of prime factors of n counted with multiplicity."""
    _check_range(n, tables)
    return sum(e for _, e in factorize(n, tables))


def default_k1(q: int) -> int:
    """100 * loglog q, iterated logs floored at 1, rounded up."""
    lq = math.log(q) if q > 1 else 1.0
    llq = math.log(lq) if lq > 1.0 else 1.0
    return math.ceil(100.0 * max(1.0, llq))


def default_k2(q: int) -> int:
    """100 * logloglog q, iterated logs floored at 1, rounded up."""
    lq = math.log(q) if q > 1 else 1.0
    llq = math.log(lq) if lq > 1.0 else 1.0
    lllq = math.log(llq) if llq > 1.0 else 1.0
    return math.ceil(100.0 * max(1.0, lllq))


def default_support_cap(q: int) -> int:
    return min(q, 10**6)


@dataclass(frozen=True)
class MollifierSpec:
    """Support rules for the mollifier coefficients.

    a(n) = 1 iff every prime factor of n is <= X, the number of prime
    factors <= Y (with multiplicity) is <= K1, and the number in (Y, X]
    is <= K2.  a1 / a2 keep one of the two ranges each.  Y = 1 is the
    degenerate empty inner range (useful for trivial-configuration
    self-tests); the meaningful regime is 2 <= Y <= X.

    Attributes:
        X: outer prime cutoff.
        Y: inner prime cutoff, 1 <= Y <= X.
        K1: cap on prime factors <= Y (with multiplicity).
        K2: cap on prime factors in (Y, X].
        support_cap: hard truncation on n.
    """

    X: int
    Y: int
    K1: int
    K2: int
    support_cap: int

    def __post_init__(self):
        if not 1 <= self.Y <= self.X:
            raise ValueError(f"need 1 <= Y <= X, got Y={self.Y}, X={self.X}")
        if self.K1 < 0 or self.K2 < 0:
            raise ValueError("K1, K2 must be >= 0")
        if self.support_cap < 1:
            raise ValueError("support_cap must be >= 1")


def mollifier_coeff(n: int, spec: MollifierSpec, kind: str, tables: SieveTables) -> int:
    """0/1 coefficient a(n), a1(n) or a2(n) depending on `kind`.

    kind: "full" (a), "below_Y" (a1), "between_Y_X" (a2).
    n = 1 is in the support for every kind.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if not 1 <= n <= min(tables.limit, spec.support_cap):
        raise ValueError(
            f"n={n} outside [1, min(limit={tables.limit}, cap={spec.support_cap})]"
        )
    count_low = 0  # multiplicity of primes <= Y
    count_mid = 0  # multiplicity of primes in (Y, X]
    for p, e in factorize(n, tables):
        if p <= spec.Y:
            count_low += e
        elif p <= spec.X:
            count_mid += e
        else:
            return 0
    if kind == "full":
        ok = count_low <= spec.K1 and count_mid <= spec.K2
    elif kind == "below_Y":
        ok = count_mid == 0 and count_low <= spec.K1
    else:
        ok = count_low == 0 and count_mid <= spec.K2
    return 1 if ok else 0


def omega_in_range_array(limit: int, p_lo: int, p_hi: int, tables: SieveTables) -> np.ndarray:
    """Array over n = 0..limit counting prime factors p with p_lo < p <= p_hi,
    with multiplicity.  Sieved by adding 1 on multiples of every prime power."""
    if limit > tables.limit:
        raise ValueError(f"limit={limit} exceeds sieve limit {tables.limit}")
    out = np.zeros(limit + 1, dtype=np.int32)
    for p in tables.primes:
        p = int(p)
        if p > p_hi or p > limit:
            break
        if p <= p_lo:
            continue
        pk = p
        while pk <= limit:
            out[pk::pk] += 1
            pk *= p
    return out


def has_factor_above_array(limit: int, bound: int, tables: SieveTables) -> np.ndarray:
    """Boolean array over n = 0..limit; True iff some prime factor exceeds `bound`."""
    if limit > tables.limit:
        raise ValueError(f"limit={limit} exceeds sieve limit {tables.limit}")
    out = np.zeros(limit + 1, dtype=bool)
    for p in tables.primes[tables.primes > bound]:
        p = int(p)
        if p > limit:
            break
        out[p::p] = True
    return out


def support_mask(spec: MollifierSpec, kind: str, tables: SieveTables) -> np.ndarray:
    """Boolean mask over n = 0..support_cap of the selected coefficient support."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if spec.support_cap > tables.limit:
        raise ValueError(
            f"support_cap={spec.support_cap} exceeds sieve limit {tables.limit}"
        )
    cap = spec.support_cap
    low = omega_in_range_array(cap, 0, spec.Y, tables)
    mid = omega_in_range_array(cap, spec.Y, spec.X, tables)
    rough = has_factor_above_array(cap, spec.X, tables)
    if kind == "full":
        mask = ~rough & (low <= spec.K1) & (mid <= spec.K2)
    elif kind == "below_Y":
        mask = ~has_factor_above_array(cap, spec.Y, tables) & (low <= spec.K1)
    else:
        mask = ~rough & (low == 0) & (mid <= spec.K2)
    mask[0] = False
    mask[1] = True
    return mask


def list_support(spec: MollifierSpec, kind: str, tables: SieveTables) -> np.ndarray:
    """Ascending array of all n <= support_cap with coefficient 1."""
    return np.nonzero(support_mask(spec, kind, tables))[0].astype(np.int64)


def mangoldt_array(limit: int, tables: SieveTables) -> np.ndarray:
    """float64 array over n = 0..limit with Lambda(n)."""
    if limit > tables.limit:
        raise ValueError(f"limit={limit} exceeds sieve limit {tables.limit}")
    out = np.zeros(limit + 1, dtype=np.float64)
    for p in tables.primes:
        p = int(p)
        if p > limit:
            break
        lp = math.log(p)
        pk = p
        while pk <= limit:
            out[pk] = lp
            pk *= p
    return out


def moebius_array(limit: int, tables: SieveTables) -> np.ndarray:
    """int8 array over n = 0..limit with mu(n).

    Standard squarefree sieve: flip sign per prime divisor, zero out
    multiples of squares.
    """
    if limit > tables.limit:
        raise ValueError(f"limit={limit} exceeds sieve limit {tables.limit}")
    out = np.ones(limit + 1, dtype=np.int8)
    out[0] = 0
    for p in tables.primes:
        p = int(p)
        if p > limit:
            break
        out[p::p] *= -1
        if p * p <= limit:
            out[p * p :: p * p] = 0
    return out
