"""Family statistics: moments, Gaussian predictions, EDF and KS distance.

Predictions use the exact prime sum V_X = sum_{p <= X} p^{-2 sigma0} in
place of its asymptotic stand-in loglog q; the two are reported side by
side where a comparison is wanted, but no equality between them is ever
asserted at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .arith import SieveTables
from .mollifier import DeskParams

__all__ = [
    "MomentReport",
    "EdfReport",
    "mixed_moment",
    "prime_sum_variance",
    "predicted_diag_moment",
    "predicted_real_moment",
    "gaussian_tail",
    "ks_distance",
    "edf_report",
]

NORMALIZATIONS = ("paper_scale", "empirical_scale")

TAIL_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)


@dataclass(frozen=True)
class MomentReport:
    """Empirical mixed moment mean(z^k conj(z)^l) with its standard error."""

    k: int
    l: int
    empirical: complex
    predicted: float
    stderr: float
    sample_size: int


@dataclass(frozen=True)
class EdfReport:
    """Sorted normalized sample with Gaussian-closeness summaries.

    mean/variance describe the raw (unnormalized) sample; `samples` holds
    the normalized sorted values; the tail table compares empirical
    upper-tail frequencies with the Gaussian tail on the normalized scale.
    """

    samples: np.ndarray
    mean: float
    variance: float
    ks_distance: float
    flagged_count: int
    normalization: str
    scale: float
    tail_table: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        self.samples.setflags(write=False)


def mixed_moment(samples, k: int, l: int, predicted: float = float("nan")) -> MomentReport:
    """Family average of z^k conj(z)^l with plug-in standard error."""
    if k < 0 or l < 0:
        raise ValueError("moment orders must be >= 0")
    z = np.asarray(samples, dtype=np.complex128)
    if z.size == 0:
        raise ValueError("empty sample")
    w = z**k * np.conj(z) ** l
    emp = complex(np.mean(w))
    if z.size > 1:
        stderr = float(
            math.sqrt(np.sum(np.abs(w - emp) ** 2) / (z.size - 1)) / math.sqrt(z.size)
        )
    else:
        stderr = 0.0
    return MomentReport(k, l, emp, predicted, stderr, int(z.size))


def prime_sum_variance(params: DeskParams, tables: SieveTables) -> float:
    """V_X = sum_{p <= X} p^{-2 sigma0}, computed exactly from the sieve."""
    if params.X > tables.limit:
        raise ValueError(f"X={params.X} exceeds sieve limit {tables.limit}")
    p = tables.primes[tables.primes <= params.X].astype(np.float64)
    return float(np.sum(p ** (-2.0 * params.sigma0)))


def predicted_diag_moment(k: int, params: DeskParams, tables: SieveTables) -> float:
    """k! V_X^k: the diagonal prediction for the 2k-th absolute moment."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return math.factorial(k) * prime_sum_variance(params, tables) ** k


def predicted_real_moment(k: int, V: float) -> float:
    """k-th moment of a centered Gaussian with variance V/2:
    0 for odd k, 2^{-k} C(k, k/2) (k/2)! V^{k/2} for even k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k % 2 == 1:
        return 0.0
    h = k // 2
    return math.comb(k, h) * math.factorial(h) * V**h / 2**k


def gaussian_tail(V: float) -> float:
    """P(Z >= V) for standard normal Z, via the complementary error function."""
    return 0.5 * math.erfc(V / math.sqrt(2.0))


def ks_distance(sorted_samples: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance of an ascending sample against N(0,1)."""
    x = np.asarray(sorted_samples, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    cdf = ndtr(x)
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1.0) / n)
    return float(max(d_plus, d_minus))


def edf_report(
    samples,
    normalization: str,
    params: DeskParams | None = None,
    paper_scale: float | None = None,
    flagged_count: int = 0,
) -> EdfReport:
    """Empirical-distribution report of a real sample.

    paper_scale mode divides by sqrt(0.5 loglog q) (or by the explicit
    `paper_scale` when the analytic prediction is a different quantity,
    e.g. sqrt(V_X/2) for the prime sums); empirical_scale divides by the
    sample standard deviation.  A zero scale (degenerate sample) leaves
    the values unscaled.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    x = np.asarray(samples, dtype=np.float64)
    x = x[np.isfinite(x)]
    if x.size < 2:
        raise ValueError("need at least 2 unflagged samples")
    mean = float(np.mean(x))
    variance = float(np.var(x, ddof=1))
    if normalization == "paper_scale":
        if paper_scale is not None:
            scale = float(paper_scale)
        else:
            if params is None:
                raise ValueError("paper_scale normalization needs params or an explicit scale")
            scale = math.sqrt(0.5 * math.log(math.log(params.q)))
    else:
        scale = math.sqrt(variance)
    if scale <= 0.0:
        scale = 1.0
    norm = np.sort(x / scale)
    ks = ks_distance(norm)
    n = norm.size
    tails = tuple(
        (v, float(np.sum(norm >= v)) / n, gaussian_tail(v)) for v in TAIL_GRID
    )
    return EdfReport(
        samples=norm,
        mean=mean,
        variance=variance,
        ks_distance=ks,
        flagged_count=int(flagged_count),
        normalization=normalization,
        scale=scale,
        tail_table=tails,
    )
