"""Machine-readable run reports: stable JSON plus long-format CSV tables.

Two runs with identical config and seeds produce byte-identical files
except for the single timestamp field in the JSON report. Curve tables are
written twice: every raw per-seed row, and per-cell medians.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from statistics import median

from . import __version__

__all__ = ["RunReport", "emit_report", "load_report", "make_row"]

CSV_COLUMNS = ["method", "N", "D", "param", "metric", "value", "seed"]


def make_row(method, n, d, metric, value, seed, param="") -> dict:
    return {"method": method, "N": int(n), "D": int(d), "param": str(param),
            "metric": metric, "value": float(value), "seed": int(seed)}


def not_computed(reason: str = "not-computed") -> dict:
    return {"value": None, "reason": reason}


@dataclass
class RunReport:
    """Everything one experiment run produced."""

    experiment: str
    config: dict
    results: dict
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    artifact_version: str = __version__

    def to_json_dict(self, timestamp: str) -> dict:
        return {
            "artifact_version": self.artifact_version,
            "config": self.config,
            "errors": self.errors,
            "experiment": self.experiment,
            "results": self.results,
            "seeds": list(self.seeds),
            "timestamp": timestamp,
        }


def _json_default(obj):
    import numpy as np

    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["value"] = f"{row['value']:.17g}"
            writer.writerow(out)


_TIMING_KEY = "wall_time_seconds"


def _mask_timings(obj):
    """Replace volatile timing values so report.json is deterministic."""
    if isinstance(obj, dict):
        return {k: ("see timings.csv" if k == _TIMING_KEY
                    else _mask_timings(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [_mask_timings(v) for v in obj]
    return obj


def emit_report(report: RunReport, out_dir, figures: bool = True) -> dict:
    """Write report.json, raw.csv, medians.csv, and figures under out_dir.

    Returns the paths written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ts = datetime.now(timezone.utc).isoformat()
    paths = {}

    json_path = out_dir / "report.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(_mask_timings(report.to_json_dict(ts)), fh,
                  sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")
    paths["report"] = json_path

    key = lambda r: (r["method"], r["N"], r["D"], r["param"], r["metric"],
                     r["seed"])
    all_rows = sorted(report.rows, key=key)
    rows = [r for r in all_rows if r["metric"] != _TIMING_KEY]
    timing_rows = [r for r in all_rows if r["metric"] == _TIMING_KEY]
    raw_path = out_dir / "raw.csv"
    _write_csv(raw_path, rows)
    paths["raw"] = raw_path
    if timing_rows:
        timings_path = out_dir / "timings.csv"
        _write_csv(timings_path, timing_rows)
        paths["timings"] = timings_path

    groups: dict[tuple, list[float]] = {}
    for r in rows:
        groups.setdefault(key(r)[:5], []).append(r["value"])
    med_rows = [
        {"method": k[0], "N": k[1], "D": k[2], "param": k[3], "metric": k[4],
         "value": median(v), "seed": -1}
        for k, v in sorted(groups.items())
    ]
    med_path = out_dir / "medians.csv"
    _write_csv(med_path, med_rows)
    paths["medians"] = med_path

    if figures and all_rows:
        from .figures import render_figures

        paths["figures"] = render_figures(report.experiment, all_rows,
                                          out_dir)
    return paths


def load_report(out_dir) -> dict:
    with open(Path(out_dir) / "report.json", "r", encoding="utf-8") as fh:
        return json.load(fh)
