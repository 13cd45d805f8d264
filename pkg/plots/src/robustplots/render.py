"""Renderers for robustlab CSV output.

Each renderer validates the documented schema, draws the figure, and
writes a deterministic text-form plot description next to the image
(`<out>.json`). Every number in the description and on the figure comes
from the CSV; nothing is recomputed here.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

THRESHOLD_HEADER = [
    "family",
    "n",
    "d",
    "lambda",
    "property",
    "p",
    "trials",
    "successes",
    "phat",
    "ci_lo",
    "ci_hi",
    "reference_value",
]
SCALING_HEADER = [
    "property",
    "n",
    "d",
    "p_half",
    "reference_value",
    "corrected_p_half",
    "slope_raw",
    "slope_corrected",
]
EVENTS_HEADER = [
    "family",
    "n",
    "d",
    "p",
    "C",
    "delta",
    "eps",
    "event",
    "trials",
    "failures",
    "frequency",
]


class SchemaError(ValueError):
    pass


def _read_rows(path: str, header: list[str]) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty CSV")
    if rows[0] != header:
        raise SchemaError(f"{path}: header {rows[0]} does not match {header}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    return [dict(zip(header, row)) for row in rows[1:]]


def _write_outputs(fig, description: dict, out: str) -> dict:
    fig.savefig(out, dpi=120)
    plt.close(fig)
    with open(out + ".json", "w") as fh:
        json.dump(description, fh, sort_keys=True, indent=1)
    return description


def render_threshold_curve(in_path: str, out_path: str, title: str | None = None) -> dict:
    """Success-probability curves with Wilson CI bands and a vertical
    line at the stored reference value; one labeled curve per family."""
    rows = _read_rows(in_path, THRESHOLD_HEADER)
    families: dict[str, list[dict]] = {}
    for row in rows:
        families.setdefault(row["family"], []).append(row)
    fig, ax = plt.subplots(figsize=(6, 4))
    described = []
    for family, frows in sorted(families.items()):
        try:
            ps = [float(r["p"]) for r in frows]
            phat = [float(r["phat"]) for r in frows]
            lo = [float(r["ci_lo"]) for r in frows]
            hi = [float(r["ci_hi"]) for r in frows]
            ref = float(frows[0]["reference_value"])
        except ValueError as exc:
            raise SchemaError(f"{in_path}: non-numeric field ({exc})") from exc
        order = sorted(range(len(ps)), key=lambda i: ps[i])
        ps = [ps[i] for i in order]
        phat = [phat[i] for i in order]
        lo = [lo[i] for i in order]
        hi = [hi[i] for i in order]
        label = f"{family} {frows[0]['property']}"
        ax.fill_between(ps, lo, hi, alpha=0.25)
        ax.plot(ps, phat, marker="o", label=label)
        ax.axvline(ref, linestyle="--", linewidth=1)
        described.append(
            {
                "family": family,
                "property": frows[0]["property"],
                "p": ps,
                "phat": phat,
                "ci_lo": lo,
                "ci_hi": hi,
                "reference_value": ref,
            }
        )
    ax.set_xlabel("p")
    ax.set_ylabel("success probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    ax.set_title(title or "threshold sweep")
    description = {"kind": "threshold", "curves": described, "title": title or "threshold sweep"}
    return _write_outputs(fig, description, out_path)


def render_scaling_fit(in_path: str, out_path: str, title: str | None = None) -> dict:
    """log-log scatter of the corrected half points with the fitted line;
    the slope annotation is the CSV's fitted slope field."""
    import math

    rows = _read_rows(in_path, SCALING_HEADER)
    if len(rows) < 2:
        raise SchemaError(f"{in_path}: a scaling fit needs at least 2 rows")
    try:
        ns = [int(r["n"]) for r in rows]
        corrected = [float(r["corrected_p_half"]) for r in rows]
        slope = float(rows[0]["slope_corrected"])
        slope_raw = float(rows[0]["slope_raw"])
    except ValueError as exc:
        raise SchemaError(f"{in_path}: non-numeric field ({exc})") from exc
    ln_n = [math.log(x) for x in ns]
    ln_c = [math.log(x) for x in corrected]
    # anchored at the first point; the slope itself comes from the CSV
    line = [ln_c[0] + slope * (x - ln_n[0]) for x in ln_n]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ln_n, ln_c, "o", label="corrected p_half")
    ax.plot(ln_n, line, "-", label=f"slope {slope:.4f}")
    ax.set_xlabel("ln n")
    ax.set_ylabel("ln corrected p_half")
    ax.legend(fontsize=8)
    ax.set_title(title or f"{rows[0]['property']} threshold scaling")
    ax.annotate(f"slope_corrected = {slope:.4f}", xy=(0.05, 0.08), xycoords="axes fraction")
    description = {
        "kind": "scaling",
        "property": rows[0]["property"],
        "n": ns,
        "corrected_p_half": corrected,
        "slope_corrected": slope,
        "slope_raw": slope_raw,
        "title": title or f"{rows[0]['property']} threshold scaling",
    }
    return _write_outputs(fig, description, out_path)


def render_event_frequencies(in_path: str, out_path: str, title: str | None = None) -> dict:
    """Bar chart of per-event empirical failure frequencies."""
    rows = _read_rows(in_path, EVENTS_HEADER)
    try:
        events = [r["event"] for r in rows]
        freqs = [float(r["frequency"]) for r in rows]
    except ValueError as exc:
        raise SchemaError(f"{in_path}: non-numeric field ({exc})") from exc
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(events)), freqs)
    ax.set_xticks(range(len(events)), events, rotation=20, fontsize=8)
    ax.set_ylabel("failure frequency")
    ax.set_title(title or f"{rows[0]['family']} robustness events (p={rows[0]['p']})")
    description = {
        "kind": "events",
        "family": rows[0]["family"],
        "p": rows[0]["p"],
        "events": events,
        "frequencies": freqs,
        "title": title or f"{rows[0]['family']} robustness events (p={rows[0]['p']})",
    }
    return _write_outputs(fig, description, out_path)
