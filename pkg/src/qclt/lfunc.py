"""Dirichlet L-function evaluation.

Two routes to L(s, chi):

  truncated  the crude sum over n <= q (error O(q^{-1/2})), valid for
             any character; mirrors the coarse route used by the
             statistics that only need family-level accuracy.
  smoothed   a balanced two-sided sum with incomplete-gamma cutoff
             weights and the root number eps(chi) = tau(chi)/(i^a
             sqrt(q)); valid for primitive chi mod q > 1 and accurate to
             ~1e-10 relative at desk scale.  This is the accuracy
             oracle for everything near the critical line.

The smoothed weights depend only on (q, s, parity, split), not on the
character, so a whole family is evaluated with four batched twisted
sums.  Per-character entry points wrap the same kernel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma as _loggamma

from .arith import SieveTables
from .characters import (
    Character,
    CharacterGroup,
    batch_twisted_sums,
    build_group,
    character_values,
    gauss_sum,
    gauss_sums_all,
)

__all__ = [
    "ComplexPoint",
    "LValue",
    "RootNumber",
    "log_gamma",
    "upper_gamma",
    "gamma_factor",
    "root_number",
    "root_numbers_all",
    "L_value",
    "l_values_family",
    "completed_xi",
    "log_abs_L",
    "log_abs_l_family",
    "Prop1Stat",
    "prop1_statistic",
    "euler_product_value",
]

EULER_GAMMA = 0.5772156649015328606

_SIGMA_WINDOW = 2.0  # smoothed method is tuned for |sigma - 1/2| <= 2


@dataclass(frozen=True)
class ComplexPoint:
    """The point s = sigma + i t."""

    sigma: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.t)):
            raise ValueError("sigma and t must be finite")

    def to_complex(self) -> complex:
        return complex(self.sigma, self.t)

    @classmethod
    def from_complex(cls, s: complex) -> "ComplexPoint":
        return cls(s.real, s.imag)


def _as_complex(s) -> complex:
    if isinstance(s, ComplexPoint):
        return s.to_complex()
    return complex(s)


@dataclass(frozen=True)
class LValue:
    """One evaluated L-value with its method and error estimate."""

    s: ComplexPoint
    chi_index: int
    value: complex
    method: str
    err_estimate: float


@dataclass(frozen=True)
class RootNumber:
    """eps(chi) = tau(chi) / (i^a sqrt(q)); unimodular for primitive chi."""

    value: complex


# ---------------------------------------------------------------------------
# gamma machinery


def log_gamma(s) -> complex:
    """Principal branch of log Gamma(s); raises at the poles."""
    z = _as_complex(s)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real):
        raise ValueError(f"log_gamma pole at s={z}")
    return complex(_loggamma(z))


def _cexpm1(z: complex) -> complex:
    """exp(z) - 1 without cancellation for small complex z."""
    if abs(z) < 0.05:
        # Taylor tail; |z|^9/9! < 6e-17 at the threshold
        total = 0.0 + 0.0j
        term = 1.0 + 0.0j
        for k in range(1, 9):
            term *= z / k
            total += term
        return total
    return cmath.exp(z) - 1.0


def _upper_gamma_series(z: complex, w: float) -> complex:
    """Gamma(z, w) for small w via the lower-incomplete series."""
    if abs(z) >= 0.25:
        # Kummer ascending series for gamma(z, w), then complement.
        term = 1.0 / z
        total = term
        k = 0
        while abs(term) > 1e-18 * abs(total) and k < 500:
            k += 1
            term *= w / (z + k)
            total += term
        lower = cmath.exp(-w + z * cmath.log(w)) * total
        return cmath.exp(_loggamma(z)) - lower
    # near z = 0 the pole of Gamma(z) cancels against the k = 0 series term;
    # group the difference analytically before summing the alternating tail
    lw = math.log(w)
    if z == 0:
        g1 = -EULER_GAMMA
        g2 = -lw
    else:
        g1 = _cexpm1(complex(_loggamma(z + 1.0))) / z
        g2 = -_cexpm1(z * lw) / z
    s1 = 0.0 + 0.0j
    term = 1.0
    for k in range(1, 300):
        term *= -w / k
        piece = term / (z + k)
        s1 += piece
        if abs(piece) < 1e-18 * max(1.0, abs(s1)):
            break
    return g1 + g2 - cmath.exp(z * lw) * s1


def _upper_gamma_cf(z: complex, w) -> np.ndarray:
    """Gamma(z, w) by modified Lentz continued fraction; w (array) >= |z|+1."""
    w = np.asarray(w, dtype=np.float64)
    tiny = 1e-300
    b = w + 1.0 - z
    c = np.full(w.shape, 1e300, dtype=np.complex128)
    d = 1.0 / np.where(np.abs(b) < tiny, tiny, b)
    h = d.copy()
    for i in range(1, 1000):
        an = -i * (i - z)
        b = b + 2.0
        d = b + an * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = c * d
        h = h * delta
        if np.max(np.abs(delta - 1.0)) < 4e-16:
            break
    return np.exp(-w + z * np.log(w)) * h


def upper_gamma(z: complex, w):
    """Upper incomplete gamma Gamma(z, w) for complex z and real w > 0.

    Series for w < |z| + 1, continued fraction otherwise; target
    absolute error 1e-12 over the desk range |Re z| <= 2.5, |Im z| <= 5.
    Accepts scalar or array w.
    """
    z = complex(z)
    w_arr = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if np.any(w_arr <= 0.0):
        raise ValueError("w must be > 0")
    out = np.empty(w_arr.shape, dtype=np.complex128)
    small = w_arr < abs(z) + 1.0
    if np.any(small):
        out[small] = [_upper_gamma_series(z, float(x)) for x in w_arr[small]]
    if np.any(~small):
        out[~small] = _upper_gamma_cf(z, w_arr[~small])
    if np.isscalar(w) or np.asarray(w).ndim == 0:
        return complex(out[0])
    return out


def gamma_factor(s, chi: Character) -> complex:
    """G(s, chi) = (pi/q)^{-(s+a)/2} Gamma((s+a)/2), a = parity(chi)."""
    z = (_as_complex(s) + chi.parity) / 2.0
    if z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real):
        raise ValueError(f"gamma factor pole at s={_as_complex(s)}, a={chi.parity}")
    return cmath.exp(-z * math.log(math.pi / chi.group.q) + _loggamma(z))


def root_number(chi: Character) -> RootNumber:
    """eps(chi) from the Gauss sum."""
    tau = gauss_sum(chi)
    return RootNumber(tau / (1j ** chi.parity * math.sqrt(chi.group.q)))


def root_numbers_all(group: CharacterGroup) -> np.ndarray:
    """eps(chi) for every character index (unimodular on primitive ones)."""
    taus = gauss_sums_all(group)
    a = group.parities().astype(np.float64)
    return taus / (np.power(1j, a) * math.sqrt(group.q))


# ---------------------------------------------------------------------------
# smoothed approximate functional equation

# cutoff for the incomplete-gamma weights: exp(-w) below ~1e-26 kills the tail
_W_DECAY = 60.0


def _afe_weights(q: int, s: complex, a: int, split: float):
    """Weight arrays (n, W1), (m, W2) for parity a at the point s.

    W1[n] = n^{-s}     (q/pi)^{(s+a)/2}   Gamma((s+a)/2,   pi n^2 split / q)
    W2[n] = n^{s-1}    (q/pi)^{(1-s+a)/2} Gamma((1-s+a)/2, pi n^2 / (split q))
    """
    z1 = (s + a) / 2.0
    z2 = (1.0 - s + a) / 2.0
    wmax = _W_DECAY + 6.0 * abs(s.imag)
    n1 = max(4, math.ceil(math.sqrt(wmax * q / (math.pi * split))))
    n2 = max(4, math.ceil(math.sqrt(wmax * q * split / math.pi)))
    n = np.arange(1, n1 + 1, dtype=np.float64)
    m = np.arange(1, n2 + 1, dtype=np.float64)
    w1 = upper_gamma(z1, math.pi * split / q * n * n)
    w2 = upper_gamma(z2, math.pi / (split * q) * m * m)
    pref1 = cmath.exp(z1 * math.log(q / math.pi))
    pref2 = cmath.exp(z2 * math.log(q / math.pi))
    W1 = pref1 * np.power(n, -s) * w1
    W2 = pref2 * np.power(m, s - 1.0) * w2
    return (n.astype(np.int64), W1), (m.astype(np.int64), W2)


def _lambda_family(group: CharacterGroup, s: complex, split: float) -> np.ndarray:
    """Completed-L values Lambda(s, chi) = G(s, chi) L(s, chi) for every
    character index; correct only where the character is primitive."""
    q = group.q
    parities = group.parities()
    eps = root_numbers_all(group)
    conj_idx = group.conj_indices()
    out = np.zeros(group.phi, dtype=np.complex128)
    for a in (0, 1):
        sel = np.nonzero(parities == a)[0]
        if sel.size == 0:
            continue
        (n, W1), (m, W2) = _afe_weights(q, s, a, split)
        S1 = batch_twisted_sums((n, W1), group)
        S2 = batch_twisted_sums((m, W2), group)
        out[sel] = S1[sel] + eps[sel] * S2[conj_idx[sel]]
    return out


def _smoothed_err_estimate(q: int, s: complex, split: float) -> float:
    # heuristic float-noise + tail scale; the weights decay like exp(-60)
    return max(1e-13 * math.sqrt(q), 1e-12)


def _check_smoothed_ok(group: CharacterGroup, s: complex) -> None:
    if group.q == 1:
        raise ValueError("smoothed method unsupported for q = 1")
    if abs(s.real - 0.5) > _SIGMA_WINDOW:
        raise ValueError(
            f"smoothed method supports sigma in [{0.5 - _SIGMA_WINDOW}, "
            f"{0.5 + _SIGMA_WINDOW}], got sigma={s.real}"
        )


def l_values_family(
    s,
    group: CharacterGroup,
    method: str = "smoothed",
    split: float = 1.0,
) -> np.ndarray:
    """L(s, chi) for every character index of the group, batched.

    method "truncated": sum_{n <= q} chi(n) n^{-s}, defined for all chi.
    method "smoothed": the balanced two-sided formula; entries for
    non-primitive characters are set to NaN.
    """
    sc = _as_complex(s)
    q = group.q
    if method == "truncated":
        n = np.arange(1, q + 1, dtype=np.int64)
        vals = np.power(n.astype(np.float64), -sc)
        return batch_twisted_sums((n, vals), group)
    if method != "smoothed":
        raise ValueError(f"unknown method {method!r}")
    _check_smoothed_ok(group, sc)
    lam = _lambda_family(group, sc, split)
    parities = group.parities()
    out = np.full(group.phi, np.nan + 0j, dtype=np.complex128)
    prim = group.conductors() == q
    for a in (0, 1):
        z = (sc + a) / 2.0
        G = cmath.exp(-z * math.log(math.pi / q) + _loggamma(z))
        sel = prim & (parities == a)
        out[sel] = lam[sel] / G
    return out


def L_value(s, chi: Character, method: str = "truncated", split: float = 1.0) -> LValue:
    """Single-character L(s, chi); see l_values_family for the two methods."""
    sc = _as_complex(s)
    point = s if isinstance(s, ComplexPoint) else ComplexPoint.from_complex(sc)
    group = chi.group
    q = group.q
    if method == "truncated":
        n = np.arange(1, q + 1, dtype=np.int64)
        vals = character_values(chi, n)
        value = complex(np.sum(vals * np.power(n.astype(np.float64), -sc)))
        return LValue(point, chi.index, value, "truncated", q**-0.5)
    if method != "smoothed":
        raise ValueError(f"unknown method {method!r}")
    _check_smoothed_ok(group, sc)
    if not chi.is_primitive:
        raise ValueError(
            f"smoothed method requires a primitive character; chi has conductor "
            f"{chi.conductor} < q={q}"
        )
    a = chi.parity
    eps = root_numbers_all(group)[chi.index]
    (n, W1), (m, W2) = _afe_weights(q, sc, a, split)
    chi_n = character_values(chi, n)
    chibar_m = np.conj(character_values(chi, m))
    lam = complex(np.sum(chi_n * W1) + eps * np.sum(chibar_m * W2))
    z = (sc + a) / 2.0
    G = cmath.exp(-z * math.log(math.pi / q) + _loggamma(z))
    return LValue(point, chi.index, lam / G, "smoothed", _smoothed_err_estimate(q, sc, split))


def completed_xi(s, chi: Character, split: float = 1.0) -> complex:
    """xi(s, chi) = G(s, chi) L(s, chi) with the smoothed L."""
    return gamma_factor(s, chi) * L_value(s, chi, "smoothed", split=split).value


def log_abs_L(s, chi: Character, method: str = "smoothed", floor: float = 1e-12):
    """log|L(s, chi)|, or None when |L| falls below `floor` (the flag is
    counted separately by the statistics; it never enters a sample)."""
    if floor <= 0:
        raise ValueError("floor must be > 0")
    v = abs(L_value(s, chi, method).value)
    return math.log(v) if v >= floor else None


def log_abs_l_family(
    s,
    group: CharacterGroup,
    method: str = "smoothed",
    floor: float = 1e-12,
    indices: np.ndarray | None = None,
):
    """(values, flagged) arrays over the selected character indices.

    values[i] = log|L(s, chi_i)| where |L| >= floor; flagged[i] marks the
    below-floor exclusions (values[i] is NaN there).
    """
    if floor <= 0:
        raise ValueError("floor must be > 0")
    vals = l_values_family(s, group, method)
    if indices is None:
        indices = np.arange(group.phi)
    sub = np.abs(vals[indices])
    flagged = ~(sub >= floor)  # catches NaN as flagged
    out = np.where(flagged, np.nan, np.log(np.maximum(sub, 1e-300)))
    return out, flagged


@dataclass(frozen=True)
class Prop1Stat:
    """Family-average closeness of log|L| at sigma to its value at 1/2."""

    statistic: float
    ratio: float
    sample_size: int
    flagged: int


def prop1_statistic(
    q: int,
    sigma: float,
    t: float = 0.0,
    family: str = "primitive",
    method: str = "smoothed",
    floor: float = 1e-12,
    group: CharacterGroup | None = None,
) -> Prop1Stat:
    """Mean over the family of |log|L(1/2+it)| - log|L(sigma+it)|| and its
    ratio to (sigma - 1/2) log q."""
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2")
    if group is None:
        group = build_group(q)
    if family == "primitive":
        idx = group.primitive_indices()
    elif family == "all":
        idx = np.arange(group.phi)
    else:
        raise ValueError(f"unknown family {family!r}")
    if idx.size == 0:
        raise ValueError(f"family {family!r} mod {q} is empty")
    if method == "smoothed" and family == "all":
        idx = group.primitive_indices()
        if idx.size == 0:
            raise ValueError("smoothed method needs primitive characters")
    half, fl_half = log_abs_l_family(complex(0.5, t), group, method, floor, idx)
    there, fl_there = log_abs_l_family(complex(sigma, t), group, method, floor, idx)
    ok = ~(fl_half | fl_there)
    if not np.any(ok):
        raise ValueError("every character was flagged below the floor")
    stat = float(np.mean(np.abs(half[ok] - there[ok])))
    ratio = stat / ((sigma - 0.5) * math.log(q))
    return Prop1Stat(stat, ratio, int(np.sum(ok)), int(np.sum(~ok)))


def euler_product_value(
    s, chi: Character, tables: SieveTables, pmax: int
) -> complex:
    """Euler product over p <= pmax; cross-check in the absolutely
    convergent regime sigma >= 1.5."""
    sc = _as_complex(s)
    out = 1.0 + 0.0j
    for p in tables.primes:
        p = int(p)
        if p > pmax:
            break
        out /= 1.0 - chi(p) * p ** (-sc)
    return out
