"""CSV writers for simulation outputs."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .dynamics import CascadeRecord, RunResult
from .metrics import Histogram, PowerLawFit


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _num(x: float) -> str:
    return repr(float(x))


def write_cascades_csv(result: RunResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["cycle_time", "origin", "size", "members"])
        for c in result.cascades:
            w.writerow([_num(c.cycle_time), c.origin, c.size, ";".join(map(str, c.members))])


def read_cascades_csv(path: str | Path) -> list[CascadeRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            members = tuple(int(m) for m in row["members"].split(";"))
            rec = CascadeRecord(int(row["origin"]), members, float(row["cycle_time"]))
            if rec.size != int(row["size"]):
                raise ValueError(f"{path}: size column disagrees with members")
            out.append(rec)
    return out


def write_order_parameter_csv(result: RunResult, path: str | Path) -> None:
    m = result.r_alpha.shape[1]
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["cycle_time", "r"] + [f"r_alpha_{a}" for a in range(m)])
        for k, (t, r) in enumerate(zip(result.sample_times, result.r)):
            w.writerow([_num(t), _num(r)] + [_num(v) for v in result.r_alpha[k]])


def write_raster_csv(result: RunResult, path: str | Path, node_ids: Sequence[str],
                     assignment: Sequence[int] | None = None) -> None:
    """``cycle_time,node,community`` per firing; community is -1 without a partition."""
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["cycle_time", "node", "community"])
        for c in result.cascades:
            t = _num(c.cycle_time)
            for node in c.members:
                w.writerow([t, node_ids[node], -1 if assignment is None else assignment[node]])


def write_histogram_csv(hist: Histogram, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        header = ["bin_low", "bin_high", "count"] + (["cumulative"] if hist.cumulative else [])
        w.writerow(header)
        for row in hist.rows():
            w.writerow([_num(row[0]), _num(row[1])] + list(row[2:]))


def read_histogram_csv(path: str | Path) -> Histogram:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
        cumulative = bool(rows) and "cumulative" in rows[0]
    if not rows:
        return Histogram([0.0], [], cumulative=False)
    edges = [float(r["bin_low"]) for r in rows] + [float(rows[-1]["bin_high"])]
    return Histogram(edges, [int(r["count"]) for r in rows], cumulative=cumulative)


def write_scatter_csv(rows: Sequence[tuple[float, float, int]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["r_global", "r_alpha", "community"])
        for r, ra, alpha in rows:
            w.writerow([_num(r), _num(ra), alpha])


def fit_report(fit: PowerLawFit | None, reason: str | None = None) -> dict:
    if fit is None:
        return {"exponent": None, "intercept": None, "fit_range": None, "r_squared": None,
                "n_points": 0, "error": reason}
    return {"exponent": fit.exponent, "intercept": fit.intercept,
            "fit_range": list(fit.fit_range), "r_squared": fit.r_squared, "n_points": fit.n_points}


def write_fit_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
