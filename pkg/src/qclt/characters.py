"""Exact Dirichlet characters mod q.

Representation: (Z/qZ)* is decomposed by CRT into cyclic factors with
fixed generators; a character is an exponent vector against those
generators.  Character values are exact roots of unity (integer
numerator over an integer denominator dividing the group exponent) and
are rounded to complex only at the last step.  Cyclic factors:

    odd p^e          -> one factor of order phi(p^e), generator = smallest
                        primitive root (lifted to p^e when needed)
    2^2              -> one factor of order 2, generator -1
    2^e, e >= 3      -> two factors <-1> x <5>, orders 2 and 2^(e-2)

Character enumeration is lexicographic in the exponent vector (C-order
over the factor lattice), so family reductions and batched transforms
are byte-reproducible.  The batched twisted sum buckets coefficients
into residue classes and runs one DFT per cyclic factor (a
multidimensional FFT over the exponent lattice).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "UnitRoot",
    "CyclicFactor",
    "CharacterGroup",
    "Character",
    "build_group",
    "gauss_sum",
    "gauss_sums_all",
    "batch_twisted_sums",
    "value_table",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class UnitRoot:
    """Exact root of unity e^{2 pi i num/den}, 0 <= num < den."""

    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(self.num % self.den, self.den)
        object.__setattr__(self, "num", (self.num % self.den) // g)
        object.__setattr__(self, "den", self.den // g)

    def value(self) -> complex:
        return cmath.exp(2j * math.pi * self.num / self.den)

    def __mul__(self, other: "UnitRoot") -> "UnitRoot":
        den = self.den * other.den // math.gcd(self.den, other.den)
        num = self.num * (den // self.den) + other.num * (den // other.den)
        return UnitRoot(num % den, den)

    def conj(self) -> "UnitRoot":
        return UnitRoot((-self.num) % self.den, self.den)


@dataclass(frozen=True)
class CyclicFactor:
    """One cyclic factor of (Z/qZ)*: <generator> of the given order inside
    the unit group mod `modulus` (a prime power dividing q)."""

    modulus: int
    generator: int
    order: int


def _trial_factor(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root(p: int, e: int) -> int:
    """Smallest primitive root mod p, lifted so it stays primitive mod p^e."""
    if p == 2:
        raise ValueError("no single primitive root machinery for p = 2")
    phi = p - 1
    prime_divs = [r for r, _ in _trial_factor(phi)]
    g = 2
    while True:
        if all(pow(g, phi // r, p) != 1 for r in prime_divs):
            break
        g += 1
    if e >= 2 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


class CharacterGroup:
    """The dual of (Z/qZ)*: factors, discrete-log tables, enumeration.

    Immutable after construction; all derived arrays are cached lazily
    and safe for concurrent reads.
    """

    def __init__(self, q: int):
        if q < 1:
            raise ValueError(f"modulus must be >= 1, got {q}")
        self.q = q
        factors: list[CyclicFactor] = []
        tables: list[np.ndarray] = []
        two_pair: tuple[int, int] | None = None
        phi = 1

        for p, e in _trial_factor(q):
            mod = p**e
            if p == 2:
                if e == 1:
                    continue
                if e == 2:
                    factors.append(CyclicFactor(4, 3, 2))
                    t = np.full(4, -1, dtype=np.int64)
                    t[1], t[3] = 0, 1
                    tables.append(t)
                    phi *= 2
                else:
                    half = 2 ** (e - 2)
                    two_pair = (len(factors), len(factors) + 1)
                    factors.append(CyclicFactor(mod, mod - 1, 2))
                    factors.append(CyclicFactor(mod, 5, half))
                    t_neg = np.full(mod, -1, dtype=np.int64)
                    t_five = np.full(mod, -1, dtype=np.int64)
                    x = 1
                    for b in range(half):
                        t_neg[x], t_five[x] = 0, b
                        t_neg[mod - x], t_five[mod - x] = 1, b
                        x = (x * 5) % mod
                    tables.append(t_neg)
                    tables.append(t_five)
                    phi *= 2 * half
            else:
                order = mod // p * (p - 1)
                g = _primitive_root(p, e)
                factors.append(CyclicFactor(mod, g, order))
                t = np.full(mod, -1, dtype=np.int64)
                x = 1
                for j in range(order):
                    t[x] = j
                    x = (x * g) % mod
                tables.append(t)
                phi *= order

        self.factors = tuple(factors)
        self.orders = tuple(f.order for f in factors)
        self.phi = phi
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        self._tables = tables
        self._two_pair = two_pair
        # weight of each factor when angles are expressed over the exponent
        self._units = tuple(self.exponent // m for m in self.orders)
        self._strides = tuple(
            int(np.prod(self.orders[i + 1 :], dtype=np.int64)) for i in range(len(self.orders))
        )
        self._dlog_flat: np.ndarray | None = None
        self._conductors: np.ndarray | None = None
        self._parities: np.ndarray | None = None

    # -- residue side -------------------------------------------------

    def dlog(self, n: int) -> tuple[int, ...] | None:
        """Exponent vector of n mod q, or None when gcd(n, q) > 1."""
        r = n % self.q
        if math.gcd(r, self.q) != 1:
            return None
        return tuple(int(t[r % f.modulus]) for t, f in zip(self._tables, self.factors))

    def dlog_flat(self) -> np.ndarray:
        """int64 array over residues 0..q-1: flat lattice index of the
        exponent vector, or -1 for residues not coprime to q."""
        if self._dlog_flat is None:
            res = np.arange(self.q, dtype=np.int64)
            coprime = np.gcd(res, self.q) == 1
            idx = np.zeros(self.q, dtype=np.int64)
            for t, f, s in zip(self._tables, self.factors, self._strides):
                idx += t[res % f.modulus] * s
            idx[~coprime] = -1
            self._dlog_flat = idx
            idx.setflags(write=False)
        return self._dlog_flat

    # -- character side -----------------------------------------------

    def character(self, index: int) -> "Character":
        if not 0 <= index < self.phi:
            raise ValueError(f"character index {index} outside [0, {self.phi})")
        expo = tuple(
            int(v) for v in np.unravel_index(index, self.orders)
        ) if self.orders else ()
        return Character(self, expo, index)

    def characters(self) -> Iterator["Character"]:
        for i in range(self.phi):
            yield self.character(i)

    def index_of(self, expo: tuple[int, ...]) -> int:
        if not self.orders:
            return 0
        return int(np.ravel_multi_index(expo, self.orders))

    def conj_indices(self) -> np.ndarray:
        """Array mapping character index -> index of the conjugate character."""
        if not self.orders:
            return np.zeros(1, dtype=np.int64)
        grids = np.unravel_index(np.arange(self.phi), self.orders)
        neg = tuple((-g) % m for g, m in zip(grids, self.orders))
        return np.ravel_multi_index(neg, self.orders).astype(np.int64)

    def _lattice_sum(self, per_factor: list[np.ndarray], mod: int) -> np.ndarray:
        """Sum per-factor integer contributions over the whole exponent
        lattice, reduced mod `mod`; returns flat int64 array of length phi."""
        acc = np.zeros((1,) * max(len(self.orders), 1), dtype=np.int64)
        for axis, vec in enumerate(per_factor):
            shape = [1] * len(self.orders)
            shape[axis] = self.orders[axis]
            acc = (acc + vec.reshape(shape)) % mod
        return np.broadcast_to(acc, self.orders or (1,)).reshape(-1) % mod

    def parities(self) -> np.ndarray:
        """int8 array per character: 0 if chi(-1) = 1, 1 if chi(-1) = -1."""
        if self._parities is None:
            if self.q <= 2:
                out = np.zeros(self.phi, dtype=np.int8)
            else:
                d_m1 = self.dlog(self.q - 1)
                assert d_m1 is not None
                per = [
                    (np.arange(m, dtype=np.int64) * d * u) % self.exponent
                    for m, d, u in zip(self.orders, d_m1, self._units)
                ]
                num = self._lattice_sum(per, self.exponent)
                out = (num != 0).astype(np.int8)
            self._parities = out
            out.setflags(write=False)
        return self._parities

    def conductors(self) -> np.ndarray:
        """int64 array per character: conductor of chi (smallest inducing
        modulus), computed factor by factor from character orders."""
        if self._conductors is None:
            cond = np.ones((1,) * max(len(self.orders), 1), dtype=np.int64)
            skip = set(self._two_pair) if self._two_pair else set()
            for axis, f in enumerate(self.factors):
                if axis in skip:
                    continue
                p = _trial_factor(f.modulus)[0][0]
                vec = np.empty(f.order, dtype=np.int64)
                for x in range(f.order):
                    d = f.order // math.gcd(f.order, x)
                    if d == 1:
                        vec[x] = 1
                    else:
                        v = 0
                        dd = d
                        while dd % p == 0:
                            dd //= p
                            v += 1
                        vec[x] = p ** (1 + v)
                shape = [1] * len(self.orders)
                shape[axis] = f.order
                cond = cond * vec.reshape(shape)
            if self._two_pair is not None:
                i_neg, i_five = self._two_pair
                half = self.orders[i_five]
                joint = np.empty((2, half), dtype=np.int64)
                for eps in range(2):
                    for b in range(half):
                        d5 = half // math.gcd(half, b)
                        if d5 == 1:
                            joint[eps, b] = 1 if eps == 0 else 4
                        else:
                            joint[eps, b] = 4 * d5
                shape = [1] * len(self.orders)
                shape[i_neg], shape[i_five] = 2, half
                cond = cond * joint.reshape(shape)
            out = np.broadcast_to(cond, self.orders or (1,)).reshape(-1).copy()
            self._conductors = out
            out.setflags(write=False)
        return self._conductors

    def primitive_indices(self) -> np.ndarray:
        return np.nonzero(self.conductors() == self.q)[0].astype(np.int64)

    def __repr__(self):
        return f"CharacterGroup(q={self.q}, phi={self.phi}, orders={self.orders})"


@dataclass(frozen=True)
class Character:
    """One Dirichlet character mod group.q, identified by its exponent
    vector against the group's fixed generators."""

    group: CharacterGroup
    expo: tuple[int, ...]
    index: int

    def evaluate_exact(self, n: int) -> UnitRoot | None:
        """chi(n) as an exact root of unity; None encodes chi(n) = 0."""
        if n < 0:
            raise ValueError("n must be >= 0")
        d = self.group.dlog(n)
        if d is None:
            return None
        L = self.group.exponent
        num = sum(e * di * u for e, di, u in zip(self.expo, d, self.group._units)) % L
        return UnitRoot(num, L)

    def __call__(self, n: int) -> complex:
        root = self.evaluate_exact(n)
        return root.value() if root is not None else 0.0j

    @property
    def parity(self) -> int:
        return int(self.group.parities()[self.index])

    @property
    def conductor(self) -> int:
        return int(self.group.conductors()[self.index])

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.group.q

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.expo)

    def conj(self) -> "Character":
        expo = tuple((-e) % m for e, m in zip(self.expo, self.group.orders))
        return Character(self.group, expo, self.group.index_of(expo))


@lru_cache(maxsize=64)
def build_group(q: int) -> CharacterGroup:
    """Construct (and memoize) the character group mod q.  q >= 1."""
    return CharacterGroup(q)


# ---------------------------------------------------------------------------
# batched transforms


def _as_index_value_arrays(coeffs) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(coeffs, "coeffs"):
        coeffs = coeffs.coeffs
    if isinstance(coeffs, Mapping):
        if not coeffs:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128)
        idx = np.fromiter(coeffs.keys(), dtype=np.int64, count=len(coeffs))
        val = np.fromiter(coeffs.values(), dtype=np.complex128, count=len(coeffs))
        return idx, val
    idx, val = coeffs
    return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.complex128)


def batch_twisted_sums(coeffs, group: CharacterGroup) -> np.ndarray:
    """All-character twisted sums: result[i] = sum_n c(n) chi_i(n).

    `coeffs` is a mapping n -> coefficient (or a CoeffSeries, or an
    (indices, values) pair), n >= 1.  Coefficients are bucketed into
    residue classes mod q, then one DFT per cyclic factor evaluates
    every character at once.  The result array is indexed in the
    group's character enumeration order.
    """
    if group is None or group.phi < 1:
        raise ValueError("character group is empty")
    idx, val = _as_index_value_arrays(coeffs)
    if idx.size and idx.min() < 1:
        raise ValueError("coefficient indices must be >= 1")
    flat = group.dlog_flat()[idx % group.q]
    mask = flat >= 0
    bucket = np.zeros(group.phi, dtype=np.complex128)
    np.add.at(bucket, flat[mask], val[mask])
    if not group.orders:
        return bucket
    spectrum = np.conj(np.fft.fftn(np.conj(bucket.reshape(group.orders))))
    return np.ascontiguousarray(spectrum).reshape(-1)


def twisted_sums_direct(coeffs, group: CharacterGroup) -> np.ndarray:
    """Oracle twin of batch_twisted_sums: per-character direct summation."""
    idx, val = _as_index_value_arrays(coeffs)
    out = np.zeros(group.phi, dtype=np.complex128)
    for chi in group.characters():
        out[chi.index] = sum(
            v * chi(int(n)) for n, v in zip(idx, val)
        )
    return out


def character_row(chi: Character) -> np.ndarray:
    """chi's values over the flat exponent lattice (index = dlog_flat entry)."""
    g = chi.group
    if not g.orders:
        return np.ones(1, dtype=np.complex128)
    L = g.exponent
    grids = np.unravel_index(np.arange(g.phi), g.orders)
    num = np.zeros(g.phi, dtype=np.int64)
    for e, gr, u in zip(chi.expo, grids, g._units):
        num += e * gr * u
    return np.exp(2j * np.pi * (num % L) / L)


def character_values(chi: Character, n) -> np.ndarray:
    """Vectorized chi(n) over an integer array (0 where gcd(n, q) > 1)."""
    g = chi.group
    n = np.asarray(n, dtype=np.int64)
    flat = g.dlog_flat()[n % g.q]
    row = character_row(chi)
    return np.where(flat >= 0, row[np.maximum(flat, 0)], 0.0)


def gauss_sum(chi: Character) -> complex:
    """tau(chi) = sum over x mod q of chi(x) e^{2 pi i x/q}.

    Each term's angle is an exact rational (character angle plus x/q over
    the common denominator); rounding to complex happens once per term.
    """
    g = chi.group
    q = g.q
    L = g.exponent
    total = 0.0 + 0.0j
    flat = g.dlog_flat()
    for x in range(q):
        if flat[x] < 0:
            continue
        root = chi.evaluate_exact(x)
        num = (root.num * (L // root.den) * q + x * L) % (L * q)
        total += cmath.exp(2j * math.pi * num / (L * q))
    return total


def gauss_sums_all(group: CharacterGroup) -> np.ndarray:
    """tau(chi) for every character at once via the batched transform."""
    if group.q == 1:
        return np.array([1.0 + 0.0j])
    n = np.arange(1, group.q, dtype=np.int64)
    vals = np.exp(2j * np.pi * n / group.q)
    return batch_twisted_sums((n, vals), group)


def value_table(group: CharacterGroup) -> np.ndarray:
    """Full (phi x q) table of complex character values.

    Angles are assembled exactly as integers over the group exponent, so
    each entry is rounded exactly once.  Intended for small q (tests,
    orthogonality sweeps, naive baselines); memory is phi * q.
    """
    q, phi, L = group.q, group.phi, group.exponent
    if not group.orders:
        table = np.zeros((phi, q), dtype=np.complex128)
        cop = np.gcd(np.arange(q), q) == 1 if q > 1 else np.array([True])
        table[0, cop] = 1.0
        return table
    res = np.arange(q, dtype=np.int64)
    coprime = np.gcd(res, q) == 1
    D = np.stack(
        [t[res % f.modulus] for t, f in zip(group._tables, group.factors)]
    )  # (nf, q), -1 on non-coprime entries
    grids = np.unravel_index(np.arange(phi), group.orders)
    E = np.stack(grids).astype(np.int64)  # (nf, phi)
    W = E * np.array(group._units, dtype=np.int64)[:, None]
    num = (W.T @ np.where(D < 0, 0, D)) % L
    table = np.exp(2j * np.pi * num / L)
    table[:, ~coprime] = 0.0
    return table
