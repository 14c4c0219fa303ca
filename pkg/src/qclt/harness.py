"""Experiment orchestration.

Each runner takes an ExperimentConfig, loops over the configured moduli
(continuing past per-q failures), and returns a RunRecord whose payload
is pure-JSON data (lists and floats only).  Reruns with an identical
config produce identical payloads, and therefore byte-identical CSV and
JSONL files.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .arith import build_sieve
from .characters import CharacterGroup, build_group
from .lfunc import l_values_family, log_abs_l_family, prop1_statistic
from .mollifier import (
    DeskParams,
    desk_params,
    m_script_coeff_check,
    mollifier_family,
    p_series_family,
)
from .stats import (
    edf_report,
    mixed_moment,
    predicted_diag_moment,
    predicted_real_moment,
    prime_sum_variance,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "SmoothWindow",
    "RunRecord",
    "LValueCache",
    "ConfigError",
    "run_experiment",
    "run_theorem1",
    "run_prop1",
    "run_prop2",
    "run_prop3",
    "run_prop4",
    "run_prop4_smoothed",
    "run_lemma1",
    "benchmark_truncated_lsum",
]

EXPERIMENTS = (
    "theorem1",
    "prop1",
    "prop2",
    "prop3",
    "prop4",
    "prop4_smoothed",
    "lemma1",
)

_L_EXPERIMENTS = {"theorem1", "prop1", "prop4", "prop4_smoothed"}

SCHEMA = "qclt/1"


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: the family, the desk parameters, the outputs."""

    experiment: str
    q_list: tuple[int, ...]
    family: str = "primitive"
    t: float = 0.0
    method: str = "smoothed"
    W: float = 3.0
    X: int = 100
    Y: int = 20
    K1: int | None = None
    K2: int | None = None
    trunc_k1: int | None = None
    trunc_k2: int | None = None
    support_cap: int | None = None
    floor: float = 1e-12
    normalization: str = "empirical_scale"
    out_dir: str = "out"
    seed: int = 0
    max_chars: int | None = None
    formats: tuple[str, ...] = ("csv", "jsonl")
    window_T: float = 1.0
    quad_nodes: int = 64
    sigma_grid: tuple[float, ...] | None = None
    selftest: bool = False
    cache_dir: str | None = None

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.q_list:
            raise ConfigError("q_list must be nonempty")
        if any(q < 3 for q in self.q_list):
            raise ConfigError("every q must be >= 3")
        if self.family not in ("primitive", "all"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.method not in ("truncated", "smoothed"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.normalization not in ("paper_scale", "empirical_scale"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.floor <= 0:
            raise ConfigError("floor must be > 0")
        if self.experiment in _L_EXPERIMENTS and self.method == "smoothed" and self.family == "all":
            raise ConfigError(
                "smoothed L-evaluation is defined for primitive characters; "
                "use --family primitive or --method truncated"
            )
        bad = set(self.formats) - {"csv", "jsonl", "svg"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        if self.quad_nodes < 64:
            raise ConfigError("quadrature needs at least 64 nodes")

    def desk(self, q: int) -> DeskParams:
        return desk_params(
            q,
            t=self.t,
            W=self.W,
            X=self.X,
            Y=self.Y,
            K1=self.K1,
            K2=self.K2,
            trunc_k1=self.trunc_k1,
            trunc_k2=self.trunc_k2,
            support_cap=self.support_cap,
        )

    def snapshot(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        d = dict(d)
        for key in ("q_list", "formats", "sigma_grid"):
            if key in d and d[key] is not None:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class SmoothWindow:
    """Compact polynomial bump (1 - (t/T)^2)^3 on [-T, T]; C^2 at the edge,
    nonnegative, with integral 32 T / 35."""

    T: float = 1.0
    shape: str = "compact_bump"

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("window width T must be > 0")
        if self.shape != "compact_bump":
            raise ValueError(f"unknown window shape {self.shape!r}")

    @property
    def support(self) -> tuple[float, float]:
        return (-self.T, self.T)

    def __call__(self, t) -> np.ndarray:
        u = np.asarray(t, dtype=np.float64) / self.T
        return np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 3, 0.0)

    def integral(self) -> float:
        """hat(Phi)(1) = integral of Phi over the line."""
        return 32.0 * self.T / 35.0


@dataclass
class RunRecord:
    """Configuration snapshot plus per-q results (JSON-native payload)."""

    config: dict
    results: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    version: str = __version__
    wall_time_s: float = 0.0

    def payload(self) -> dict:
        return {
            "schema": SCHEMA,
            "experiment": self.config["experiment"],
            "version": self.version,
            "config": self.config,
            "results": self.results,
            "errors": self.errors,
        }


class LValueCache:
    """Flat-file cache of batched L-value arrays (full double precision)."""

    def __init__(self, directory):
        from pathlib import Path

        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str):
        safe = key.replace("/", "_").replace(" ", "_")
        return self.dir / f"{safe}.npz"

    def get(self, key: str) -> np.ndarray | None:
        p = self._path(key)
        if not p.exists():
            return None
        with np.load(p) as z:
            return z["values"]

    def put(self, key: str, values: np.ndarray) -> None:
        np.savez(self._path(key), values=values)


def _cache_key(q: int, s: complex, method: str) -> str:
    return f"lvals_q{q}_sigma{s.real!r}_t{s.imag!r}_{method}"


def _l_family_cached(
    group: CharacterGroup, s: complex, method: str, cache: LValueCache | None
) -> np.ndarray:
    if cache is None:
        return l_values_family(s, group, method)
    key = _cache_key(group.q, s, method)
    hit = cache.get(key)
    if hit is not None:
        return hit
    vals = l_values_family(s, group, method)
    cache.put(key, vals)
    return vals


def _family_indices(group: CharacterGroup, config: ExperimentConfig) -> np.ndarray:
    idx = (
        group.primitive_indices()
        if config.family == "primitive"
        else np.arange(group.phi, dtype=np.int64)
    )
    if config.max_chars is not None and idx.size > config.max_chars:
        rng = np.random.default_rng(config.seed)
        keep = rng.choice(idx.size, size=config.max_chars, replace=False)
        idx = idx[np.sort(keep)]
    return idx


def _np_list(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=np.float64)]


def _np_list_nullable(a) -> list:
    return [None if not math.isfinite(x) else float(x) for x in np.asarray(a, dtype=np.float64)]


def _edf_dict(rep) -> dict:
    return {
        "sample_size": int(rep.samples.size),
        "flagged_count": rep.flagged_count,
        "mean": rep.mean,
        "variance": rep.variance,
        "ks_distance": rep.ks_distance,
        "scale": rep.scale,
        "normalization": rep.normalization,
        "tails": [[float(v), float(e), float(g)] for v, e, g in rep.tail_table],
    }


def _run_over_q(config: ExperimentConfig, per_q) -> RunRecord:
    config.validate()
    record = RunRecord(config=config.snapshot())
    start = time.perf_counter()
    for q in config.q_list:
        try:
            record.results[str(q)] = per_q(q)
        except ConfigError:
            raise
        except Exception as exc:  # per-q failure, run continues
            record.errors[str(q)] = f"{type(exc).__name__}: {exc}"
    record.wall_time_s = time.perf_counter() - start
    return record


# ---------------------------------------------------------------------------
# experiments


def run_theorem1(config: ExperimentConfig) -> RunRecord:
    """Empirical distribution of log|L(1/2 + it, chi)| over the family."""
    cache = LValueCache(config.cache_dir) if config.cache_dir else None

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        if idx.size == 0:
            raise ValueError(f"family {config.family!r} mod {q} is empty")
        s = complex(0.5, config.t)
        vals = _l_family_cached(group, s, config.method, cache)
        sub = np.abs(vals[idx])
        flagged = ~(sub >= config.floor)
        logs = np.where(flagged, np.nan, np.log(np.maximum(sub, 1e-300)))
        params = config.desk(q)
        rep = edf_report(
            logs[~flagged],
            config.normalization,
            params=params,
            flagged_count=int(np.sum(flagged)),
        )
        return {
            "phi": group.phi,
            "family_size": int(idx.size),
            "paper_variance": 0.5 * math.log(math.log(q)),
            "edf": _edf_dict(rep),
            "chi_indices": [int(i) for i in idx],
            "log_abs_l": _np_list_nullable(logs),
        }

    return _run_over_q(config, per_q)


def run_prop1(config: ExperimentConfig) -> RunRecord:
    """Closeness of log|L| at sigma > 1/2 to its value at 1/2, on a grid."""

    def per_q(q: int) -> dict:
        if config.sigma_grid is not None:
            grid = list(config.sigma_grid)
        else:
            # (1/2, 1/2 + 10/log q], clipped to the smoothed method's window
            lg = math.log(q)
            top = min(10.0 / lg, 1.9)
            grid = [0.5 + j * top / 8.0 for j in range(1, 9)]
        rows = []
        group = build_group(q)
        for sigma in grid:
            st = prop1_statistic(
                q,
                sigma,
                t=config.t,
                family=config.family,
                method=config.method,
                floor=config.floor,
                group=group,
            )
            rows.append(
                {
                    "sigma": float(sigma),
                    "statistic": st.statistic,
                    "ratio": st.ratio,
                    "sample_size": st.sample_size,
                    "flagged": st.flagged,
                }
            )
        return {"grid": rows}

    return _run_over_q(config, per_q)


def _moment_rows(z: np.ndarray, params, tables, diag_k: int = 3, real_k: int = 6) -> list[dict]:
    V = prime_sum_variance(params, tables)
    rows = []
    for k in range(1, diag_k + 1):
        rep = mixed_moment(z, k, k, predicted=predicted_diag_moment(k, params, tables))
        rows.append(_moment_dict(rep))
    for k in range(1, real_k + 1):
        rep = mixed_moment(z.real.astype(np.complex128), k, 0, predicted=predicted_real_moment(k, V))
        rows.append(_moment_dict(rep))
    return rows


def _moment_dict(rep) -> dict:
    return {
        "k": rep.k,
        "l": rep.l,
        "empirical_re": rep.empirical.real,
        "empirical_im": rep.empirical.imag,
        "predicted": rep.predicted,
        "stderr": rep.stderr,
        "sample_size": rep.sample_size,
    }


def run_prop2(config: ExperimentConfig) -> RunRecord:
    """Moments and empirical law of the prime sum P0(sigma0 + it, chi)."""
    tables = build_sieve(max(config.X, 4))

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        params = config.desk(q)
        p0 = p_series_family(params.s0, group, "primes_only", params, tables)[idx]
        V = prime_sum_variance(params, tables)
        rep = edf_report(
            p0.real,
            config.normalization,
            params=params,
            paper_scale=math.sqrt(V / 2.0),
        )
        return {
            "family_size": int(idx.size),
            "v_x": V,
            "loglog_q": math.log(math.log(q)),
            "moments": _moment_rows(p0, params, tables),
            "edf": _edf_dict(rep),
            "re_p0": _np_list(p0.real),
            "im_p0": _np_list(p0.imag),
        }

    return _run_over_q(config, per_q)


def run_lemma1(config: ExperimentConfig) -> RunRecord:
    """Mixed-moment table of P0 over the family: (k, l) for k, l <= 3."""
    tables = build_sieve(max(config.X, 4))

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        params = config.desk(q)
        p0 = p_series_family(params.s0, group, "primes_only", params, tables)[idx]
        rows = []
        for k in range(0, 4):
            for l in range(0, 4):
                pred = predicted_diag_moment(k, params, tables) if k == l else 0.0
                rows.append(_moment_dict(mixed_moment(p0, k, l, predicted=pred)))
        return {
            "family_size": int(idx.size),
            "v_x": prime_sum_variance(params, tables),
            "loglog_q": math.log(math.log(q)),
            "moments": rows,
        }

    return _run_over_q(config, per_q)


def run_prop3(config: ExperimentConfig) -> RunRecord:
    """Per-character closeness of the mollifier to exp(-P), plus the
    coefficient-level comparison of the truncated exponentials."""
    caps = [config.desk(q).support_cap for q in config.q_list]
    tables = build_sieve(max(max(caps), config.X, 4))

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        params = config.desk(q)
        P = p_series_family(params.s0, group, "full_X", params, tables)[idx]
        M = mollifier_family(params.s0, group, "full", params, tables)[idx]
        dev = np.abs(M * np.exp(P) - 1.0)
        dev_sorted = np.sort(dev)
        check = m_script_coeff_check(params, tables)
        return {
            "family_size": int(idx.size),
            "median_dev": float(np.quantile(dev, 0.5)),
            "q90_dev": float(np.quantile(dev, 0.9)),
            "q99_dev": float(np.quantile(dev, 0.99)),
            "coeff_statistic": check.statistic,
            "coeff_property1": bool(check.property1_ok),
            "coeff_property3": bool(check.property3_ok),
            "coeff_complete": bool(check.complete),
            "chi_indices": [int(i) for i in idx],
            "deviations": _np_list(dev),
            "deviations_sorted": _np_list(dev_sorted),
        }

    return _run_over_q(config, per_q)


def run_prop4(config: ExperimentConfig) -> RunRecord:
    """Family mean square of 1 - L(sigma0+it) M(sigma0+it)."""
    caps = [config.desk(q).support_cap for q in config.q_list]
    tables = build_sieve(max(max(caps), config.X, 4))
    cache = LValueCache(config.cache_dir) if config.cache_dir else None

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        params = config.desk(q)
        if config.selftest:
            # identity configuration: L and M forced to 1, statistic must vanish
            L = np.ones(idx.size, dtype=np.complex128)
            M = np.ones(idx.size, dtype=np.complex128)
            flagged = np.zeros(idx.size, dtype=bool)
        else:
            vals = _l_family_cached(group, params.s0, config.method, cache)
            L = vals[idx]
            flagged = ~(np.abs(L) >= config.floor)
            M = mollifier_family(params.s0, group, "full", params, tables)[idx]
        z = 1.0 - L[~flagged] * M[~flagged]
        a = np.abs(z)
        return {
            "family_size": int(idx.size),
            "flagged": int(np.sum(flagged)),
            "mean_sq": float(np.mean(a**2)) if a.size else 0.0,
            "frac_below_1": float(np.mean(a < 1.0)) if a.size else 1.0,
            "dev_median": float(np.quantile(a, 0.5)) if a.size else 0.0,
            "dev_q90": float(np.quantile(a, 0.9)) if a.size else 0.0,
            "abs_residuals": _np_list(a),
        }

    return _run_over_q(config, per_q)


def _gauss_legendre_panels(T: float, panels: int, per_panel: int):
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(-T, T, panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _smoothed_ratio(
    group: CharacterGroup,
    idx: np.ndarray,
    params,
    tables,
    window: SmoothWindow,
    nodes_total: int,
    selftest: bool,
) -> float:
    per_panel = 16
    panels = max(4, math.ceil(nodes_total / per_panel))
    t_nodes, t_weights = _gauss_legendre_panels(window.T, panels, per_panel)
    acc = np.zeros(idx.size, dtype=np.float64)
    for tj, wj in zip(t_nodes, t_weights):
        phi = float(window(tj))
        if phi == 0.0:
            continue
        s = complex(params.sigma0, params.t + tj)
        if selftest:
            lm = np.ones(idx.size, dtype=np.complex128)
        else:
            L = l_values_family(s, group, "smoothed")[idx]
            M = mollifier_family(s, group, "full", params, tables)[idx]
            lm = L * M
        acc += wj * phi * np.abs(lm) ** 2
    return float(np.mean(acc) / window.integral())


def run_prop4_smoothed(config: ExperimentConfig) -> RunRecord:
    """Windowed mean square of L*M around sigma0: (1/phi) sum I_chi / Phi_hat(1),
    with node-doubling convergence and a T -> T/2 robustness probe."""
    caps = [config.desk(q).support_cap for q in config.q_list]
    tables = build_sieve(max(max(caps), config.X, 4))

    def per_q(q: int) -> dict:
        group = build_group(q)
        idx = _family_indices(group, config)
        params = config.desk(q)
        window = SmoothWindow(T=config.window_T)
        half = SmoothWindow(T=config.window_T / 2.0)
        r1 = _smoothed_ratio(group, idx, params, tables, window, config.quad_nodes, config.selftest)
        r1d = _smoothed_ratio(
            group, idx, params, tables, window, 2 * config.quad_nodes, config.selftest
        )
        converged = abs(r1d - r1) <= 1e-6 * max(abs(r1d), 1e-30)
        r_half = _smoothed_ratio(
            group, idx, params, tables, half, config.quad_nodes, config.selftest
        )
        return {
            "family_size": int(idx.size),
            "ratio": r1d,
            "ratio_coarse": r1,
            "ratio_half_T": r_half,
            "rel_change_half_T": abs(r_half - r1d) / max(abs(r1d), 1e-30),
            "phi_hat_1": window.integral(),
            "window_T": window.T,
            "nodes": int(config.quad_nodes),
            "converged": bool(converged),
        }

    return _run_over_q(config, per_q)


_RUNNERS = {
    "theorem1": run_theorem1,
    "prop1": run_prop1,
    "prop2": run_prop2,
    "prop3": run_prop3,
    "prop4": run_prop4,
    "prop4_smoothed": run_prop4_smoothed,
    "lemma1": run_lemma1,
}


def run_experiment(config: ExperimentConfig) -> RunRecord:
    config.validate()
    return _RUNNERS[config.experiment](config)


# ---------------------------------------------------------------------------
# benchmark (all-character truncated L-sum)


def benchmark_truncated_lsum(q: int, sigma: float = 0.5, t: float = 0.0) -> dict:
    """Time the batched all-character truncated L-sum against the naive
    per-character summation loop; both produce the same array."""
    from .characters import batch_twisted_sums, character_values

    group = build_group(q)
    s = complex(sigma, t)
    n = np.arange(1, q + 1, dtype=np.int64)
    coeffs = np.power(n.astype(np.float64), -s)

    start = time.perf_counter()
    batched = batch_twisted_sums((n, coeffs), group)
    t_batch = time.perf_counter() - start

    start = time.perf_counter()
    naive = np.empty(group.phi, dtype=np.complex128)
    for chi in group.characters():
        naive[chi.index] = np.sum(character_values(chi, n) * coeffs)
    t_naive = time.perf_counter() - start

    err = float(np.max(np.abs(batched - naive)) / np.max(np.abs(naive)))
    return {
        "q": q,
        "phi": group.phi,
        "batch_seconds": t_batch,
        "naive_seconds": t_naive,
        "speedup": t_naive / t_batch if t_batch > 0 else float("inf"),
        "max_rel_disagreement": err,
    }
