"""Deterministic emission of run artifacts: CSV, JSONL, SVG.

CSV schemas (headers are a public contract, covered by golden tests):

    theorem1_summary.csv   q,phi,family_size,sample_size,flagged_count,
                           mean_log_abs_l,variance_log_abs_l,paper_variance,
                           ks_distance,normalization,scale
    theorem1_tails.csv     q,v,empirical_tail,gaussian_tail
    prop1_grid.csv         q,sigma,statistic,ratio,sample_size,flagged
    prop2_moments.csv      q,k,l,empirical_re,empirical_im,predicted,stderr,
                           sample_size
    prop2_edf.csv          q,family_size,sample_size,flagged_count,v_x,
                           loglog_q,mean,variance,ks_distance,scale,
                           normalization
    lemma1_moments.csv     same schema as prop2_moments.csv
    prop3_summary.csv      q,family_size,median_dev,q90_dev,q99_dev,
                           coeff_statistic,coeff_property1,coeff_property3,
                           coeff_complete
    prop4_summary.csv      q,family_size,flagged,mean_sq,frac_below_1,
                           dev_median,dev_q90,method
    prop4_smoothed_summary.csv  q,family_size,ratio,ratio_half_T,
                           rel_change_half_T,phi_hat_1,window_T,nodes,
                           converged

Floats are serialized with 17 significant digits, so every double
round-trips exactly.  JSONL carries one run row (config + version), one
summary row per q, and one row per (q, chi) statistic; the payload is
reconstructible from the JSONL alone (payload_from_jsonl).  SVG output
is self-contained 800x600 XML with no external references.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .harness import RunRecord, SCHEMA

__all__ = [
    "emit_outputs",
    "payload_from_jsonl",
    "read_jsonl",
    "histogram_svg",
    "qq_svg",
    "trend_svg",
]

WIDTH, HEIGHT = 800, 600
MARGIN = 70

# per-experiment map: payload array key -> (chi-row field, id key or None)
_CHI_FIELDS = {
    "theorem1": (("chi_indices", "chi_index"), ("log_abs_l", "log_abs_l")),
    "prop2": (("re_p0", "re_p0"), ("im_p0", "im_p0")),
    "prop3": (("chi_indices", "chi_index"), ("deviations", "deviation"), ("deviations_sorted", None)),
    "prop4": (("abs_residuals", "abs_residual"),),
}


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def _summary_row_dict(experiment: str, q: str, res: dict) -> dict:
    skip = {key for key, *_ in _CHI_FIELDS.get(experiment, ())}
    return {k: v for k, v in res.items() if k not in skip}


def _jsonl_lines(record: RunRecord) -> list[str]:
    experiment = record.config["experiment"]
    rows: list[dict] = [
        {
            "schema": SCHEMA,
            "experiment": experiment,
            "kind": "run",
            "version": record.version,
            "config": record.config,
            "errors": record.errors,
        }
    ]
    for q, res in record.results.items():
        rows.append(
            {
                "schema": SCHEMA,
                "experiment": experiment,
                "kind": "summary",
                "q": int(q),
                **_summary_row_dict(experiment, q, res),
            }
        )
        chi_fields = [cf for cf in _CHI_FIELDS.get(experiment, ()) if cf[1] is not None]
        if chi_fields:
            length = len(res[chi_fields[0][0]])
            for i in range(length):
                row = {
                    "schema": SCHEMA,
                    "experiment": experiment,
                    "kind": "chi",
                    "q": int(q),
                    "i": i,
                }
                for key, field_name in chi_fields:
                    row[field_name] = res[key][i]
                rows.append(row)
    return [json.dumps(r, sort_keys=True, allow_nan=False) for r in rows]


def read_jsonl(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines()]


def payload_from_jsonl(rows: list[dict]) -> dict:
    """Invert the JSONL emission back into a RunRecord payload."""
    run = next(r for r in rows if r["kind"] == "run")
    experiment = run["experiment"]
    results: dict = {}
    for r in rows:
        if r["kind"] != "summary":
            continue
        q = str(r["q"])
        res = {
            k: v
            for k, v in r.items()
            if k not in ("schema", "experiment", "kind", "q")
        }
        results[q] = res
    chi_fields = [cf for cf in _CHI_FIELDS.get(experiment, ()) if cf[1] is not None]
    derived = [cf[0] for cf in _CHI_FIELDS.get(experiment, ()) if cf[1] is None]
    if chi_fields:
        for r in rows:
            if r["kind"] != "chi":
                continue
            res = results[str(r["q"])]
            for key, field_name in chi_fields:
                res.setdefault(key, []).append(r[field_name])
        for q, res in results.items():
            for key in derived:
                if key == "deviations_sorted":
                    res[key] = sorted(res["deviations"])
    return {
        "schema": run["schema"],
        "experiment": experiment,
        "version": run["version"],
        "config": run["config"],
        "results": results,
        "errors": run["errors"],
    }


# ---------------------------------------------------------------------------
# SVG


def _svg_header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="30" text-anchor="middle" font-family="monospace" '
        f'font-size="16">{title}</text>',
    ]


def _axes(x0: float, x1: float, y0: float, y1: float) -> tuple[list[str], callable]:
    """Axis frame plus data->canvas transform for the fixed margins."""
    iw, ih = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def tf(x, y):
        px = MARGIN + (x - x0) / (x1 - x0) * iw
        py = HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ih
        return px, py

    parts = [
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{iw}" height="{ih}" fill="none" '
        'stroke="black" stroke-width="1"/>'
    ]
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        px, _ = tf(xv, y0)
        _, py = tf(x0, yv)
        parts.append(
            f'<text x="{px:.2f}" y="{HEIGHT - MARGIN + 20}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{MARGIN - 8}" y="{py:.2f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{yv:.3g}</text>'
        )
    return parts, tf


def histogram_svg(samples, title: str, bins: int = 40) -> str:
    x = np.asarray(samples, dtype=np.float64)
    lo, hi = -4.0, 4.0
    counts, edges = np.histogram(np.clip(x, lo, hi), bins=bins, range=(lo, hi))
    density = counts / max(1, x.size) / (edges[1] - edges[0])
    ymax = max(float(density.max()) if density.size else 1.0, 0.45) * 1.1
    parts = _svg_header(title)
    frame, tf = _axes(lo, hi, 0.0, ymax)
    parts += frame
    for c, a, b in zip(density, edges[:-1], edges[1:]):
        if c <= 0:
            continue
        px0, py0 = tf(a, 0.0)
        px1, py1 = tf(b, float(c))
        parts.append(
            f'<rect x="{px0:.2f}" y="{py1:.2f}" width="{px1 - px0:.2f}" '
            f'height="{py0 - py1:.2f}" fill="steelblue" fill-opacity="0.7" '
            'stroke="none"/>'
        )
    # standard normal density overlay
    grid = np.linspace(lo, hi, 161)
    pdf = np.exp(-grid * grid / 2.0) / math.sqrt(2.0 * math.pi)
    pts = " ".join(f"{tf(gx, gy)[0]:.2f},{tf(gx, gy)[1]:.2f}" for gx, gy in zip(grid, pdf))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="crimson" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def qq_svg(samples, title: str, max_points: int = 400) -> str:
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n > max_points:
        pick = np.linspace(0, n - 1, max_points).round().astype(int)
        x = x[pick]
        probs = (pick + 0.5) / n
    else:
        probs = (np.arange(n) + 0.5) / n
    theo = ndtri(probs)
    lo = float(min(theo.min(), x.min(), -3.0))
    hi = float(max(theo.max(), x.max(), 3.0))
    parts = _svg_header(title)
    frame, tf = _axes(lo, hi, lo, hi)
    parts += frame
    p0, p1 = tf(lo, lo), tf(hi, hi)
    parts.append(
        f'<line x1="{p0[0]:.2f}" y1="{p0[1]:.2f}" x2="{p1[0]:.2f}" y2="{p1[1]:.2f}" '
        'stroke="gray" stroke-dasharray="5,4"/>'
    )
    for tx, sx in zip(theo, x):
        px, py = tf(float(tx), float(sx))
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trend_svg(qs, values, title: str, ylabel: str = "") -> str:
    xs = np.log10(np.asarray(qs, dtype=np.float64))
    ys = np.asarray(values, dtype=np.float64)
    ylo = float(min(ys.min(), 0.0))
    yhi = float(ys.max()) * 1.15 if ys.max() > 0 else 1.0
    parts = _svg_header(title)
    frame, tf = _axes(float(xs.min()) - 0.1, float(xs.max()) + 0.1, ylo, yhi)
    parts += frame
    pts = " ".join(f"{tf(float(a), float(b))[0]:.2f},{tf(float(a), float(b))[1]:.2f}" for a, b in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>')
    for a, b in zip(xs, ys):
        px, py = tf(float(a), float(b))
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="crimson"/>')
    parts.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 20}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">log10 q{(" / " + ylabel) if ylabel else ""}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# per-experiment CSV tables


def _tables(record: RunRecord) -> dict[str, tuple[list[str], list[list]]]:
    exp = record.config["experiment"]
    results = record.results
    out: dict[str, tuple[list[str], list[list]]] = {}
    if exp == "theorem1":
        header = [
            "q", "phi", "family_size", "sample_size", "flagged_count",
            "mean_log_abs_l", "variance_log_abs_l", "paper_variance",
            "ks_distance", "normalization", "scale",
        ]
        rows, tails = [], []
        for q, r in results.items():
            e = r["edf"]
            rows.append([
                int(q), r["phi"], r["family_size"], e["sample_size"], e["flagged_count"],
                e["mean"], e["variance"], r["paper_variance"], e["ks_distance"],
                e["normalization"], e["scale"],
            ])
            for v, emp, gauss in e["tails"]:
                tails.append([int(q), v, emp, gauss])
        out["theorem1_summary.csv"] = (header, rows)
        out["theorem1_tails.csv"] = (["q", "v", "empirical_tail", "gaussian_tail"], tails)
    elif exp == "prop1":
        rows = []
        for q, r in results.items():
            for g in r["grid"]:
                rows.append([int(q), g["sigma"], g["statistic"], g["ratio"],
                             g["sample_size"], g["flagged"]])
        out["prop1_grid.csv"] = (
            ["q", "sigma", "statistic", "ratio", "sample_size", "flagged"], rows)
    elif exp in ("prop2", "lemma1"):
        mrows = []
        for q, r in results.items():
            for m in r["moments"]:
                mrows.append([int(q), m["k"], m["l"], m["empirical_re"], m["empirical_im"],
                              m["predicted"], m["stderr"], m["sample_size"]])
        out[f"{exp}_moments.csv"] = (
            ["q", "k", "l", "empirical_re", "empirical_im", "predicted", "stderr",
             "sample_size"], mrows)
        if exp == "prop2":
            erows = []
            for q, r in results.items():
                e = r["edf"]
                erows.append([int(q), r["family_size"], e["sample_size"], e["flagged_count"],
                              r["v_x"], r["loglog_q"], e["mean"], e["variance"],
                              e["ks_distance"], e["scale"], e["normalization"]])
            out["prop2_edf.csv"] = (
                ["q", "family_size", "sample_size", "flagged_count", "v_x", "loglog_q",
                 "mean", "variance", "ks_distance", "scale", "normalization"], erows)
    elif exp == "prop3":
        rows = [[int(q), r["family_size"], r["median_dev"], r["q90_dev"], r["q99_dev"],
                 r["coeff_statistic"], r["coeff_property1"], r["coeff_property3"],
                 r["coeff_complete"]] for q, r in results.items()]
        out["prop3_summary.csv"] = (
            ["q", "family_size", "median_dev", "q90_dev", "q99_dev", "coeff_statistic",
             "coeff_property1", "coeff_property3", "coeff_complete"], rows)
    elif exp == "prop4":
        rows = [[int(q), r["family_size"], r["flagged"], r["mean_sq"], r["frac_below_1"],
                 r["dev_median"], r["dev_q90"], record.config["method"]]
                for q, r in results.items()]
        out["prop4_summary.csv"] = (
            ["q", "family_size", "flagged", "mean_sq", "frac_below_1", "dev_median",
             "dev_q90", "method"], rows)
    elif exp == "prop4_smoothed":
        rows = [[int(q), r["family_size"], r["ratio"], r["ratio_half_T"],
                 r["rel_change_half_T"], r["phi_hat_1"], r["window_T"], r["nodes"],
                 r["converged"]] for q, r in results.items()]
        out["prop4_smoothed_summary.csv"] = (
            ["q", "family_size", "ratio", "ratio_half_T", "rel_change_half_T",
             "phi_hat_1", "window_T", "nodes", "converged"], rows)
    return out


def _svgs(record: RunRecord) -> dict[str, str]:
    exp = record.config["experiment"]
    out: dict[str, str] = {}
    if exp in ("theorem1", "prop2"):
        for q, r in record.results.items():
            e = r["edf"]
            if exp == "theorem1":
                samples = [v / e["scale"] for v in r["log_abs_l"] if v is not None]
            else:
                samples = [v / e["scale"] for v in r["re_p0"]]
            out[f"{exp}_q{q}_hist.svg"] = histogram_svg(
                samples, f"{exp} q={q} normalized sample vs N(0,1)")
            out[f"{exp}_q{q}_qq.svg"] = qq_svg(samples, f"{exp} q={q} QQ vs N(0,1)")
    elif exp == "prop3" and record.results:
        qs = [int(q) for q in record.results]
        med = [r["median_dev"] for r in record.results.values()]
        out["prop3_trend.svg"] = trend_svg(qs, med, "prop3 median |M exp(P) - 1|")
    elif exp == "prop4" and record.results:
        qs = [int(q) for q in record.results]
        ms = [r["mean_sq"] for r in record.results.values()]
        out["prop4_trend.svg"] = trend_svg(qs, ms, "prop4 mean |1 - LM|^2")
    return out


def emit_outputs(record: RunRecord, formats=None, out_dir=None) -> list[Path]:
    """Write the requested artifact files; returns the paths written."""
    formats = tuple(formats) if formats is not None else tuple(record.config["formats"])
    base = Path(out_dir if out_dir is not None else record.config["out_dir"])
    exp = record.config["experiment"]
    try:
        base.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {base}: {exc}") from exc
    written: list[Path] = []
    if "csv" in formats:
        for name, (header, rows) in _tables(record).items():
            path = base / name
            _csv(path, header, rows)
            written.append(path)
    if "jsonl" in formats:
        path = base / f"{exp}.jsonl"
        _write_text(path, "\n".join(_jsonl_lines(record)) + "\n")
        written.append(path)
    if "svg" in formats:
        for name, text in _svgs(record).items():
            path = base / name
            _write_text(path, text)
            written.append(path)
    return written
