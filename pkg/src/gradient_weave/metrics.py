"""Evaluation quantities: MSE on the 0-255 scale, RGB probes, timing reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import as_array, to_bytes

CSV_COLUMNS = ("mode", "frame", "mse", "r", "g", "b", "time_s")


@dataclass(frozen=True)
class MetricsRecord:
    frame_index: int
    mse_vs_reference: float
    probe_rgb: tuple
    time_seconds: float | None = None


def mse(a, b) -> float:
    """Mean squared difference over all pixels and channels, in 0-255 units."""
    x = as_array(a)
    y = as_array(b)
    if x.shape != y.shape:
        raise ValueError(f"cannot compare frames of shape {x.shape} and {y.shape}")
    d = (x - y) * 255.0
    return float(np.mean(d * d))


def rgb_probe(f, x: int, y: int) -> tuple:
    """8-bit (R, G, B) at pixel (x, y), rounded half up."""
    arr = as_array(f)
    h, w = arr.shape[:2]
    if not (0 <= x < w and 0 <= y < h):
        raise IndexError(f"probe ({x}, {y}) is outside the {w}x{h} frame")
    return tuple(int(v) for v in to_bytes(arr[y, x]))


def reduction_percent(baseline_avg, proposed_avg):
    """Relative MSE reduction (baseline - proposed) / baseline * 100."""
    if baseline_avg is None or proposed_avg is None or baseline_avg == 0:
        return None
    return (baseline_avg - proposed_avg) / baseline_avg * 100.0


def _mean(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def summarize(records: dict) -> dict:
    """Per-mode averages plus the baseline-to-proposed MSE reduction."""
    modes = {}
    for mode, recs in records.items():
        modes[mode] = {
            "frames": len(recs),
            "mse": _mean([r.mse_vs_reference for r in recs]),
            "r": _mean([r.probe_rgb[0] for r in recs]),
            "g": _mean([r.probe_rgb[1] for r in recs]),
            "b": _mean([r.probe_rgb[2] for r in recs]),
            "time_s": _mean([r.time_seconds for r in recs]),
        }
    base = modes.get("baseline", {}).get("mse")
    prop = modes.get("proposed", {}).get("mse")
    return {"modes": modes, "mse_reduction_percent": reduction_percent(base, prop)}


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


def emit_report(records: dict, out_dir) -> tuple:
    """Write ``report.csv`` and ``summary.json`` into ``out_dir``.

    ``records`` maps a mode name to its list of :class:`MetricsRecord`.
    Returns the two written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    json_path = out / "summary.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for mode, recs in records.items():
            for r in recs:
                writer.writerow([mode, r.frame_index, _fmt(r.mse_vs_reference),
                                 *r.probe_rgb, _fmt(r.time_seconds)])
    json_path.write_text(json.dumps(summarize(records), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def read_report(path) -> dict:
    """Load ``report.csv`` back into ``{mode: [MetricsRecord, ...]}``."""
    records = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = row["time_s"]
            records.setdefault(row["mode"], []).append(MetricsRecord(
                int(row["frame"]), float(row["mse"]),
                (int(row["r"]), int(row["g"]), int(row["b"])),
                float(t) if t else None,
            ))
    return records
