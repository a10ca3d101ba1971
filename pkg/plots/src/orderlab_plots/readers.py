"""Readers for the two CSV interfaces this package consumes.

Sweep files start with "# orderlab-sweep v1"; only their aggregate rows
(aggregate=1) are used, so no statistic is ever recomputed from per-run rows.
Max-degree files start with "# orderlab-maxdeg v1" and carry raw points plus
per-size aggregate means.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

SWEEP_MARKER = "# orderlab-sweep v1"
MAXDEG_MARKER = "# orderlab-maxdeg v1"

_REQUIRED_SWEEP = (
    "ensemble", "d", "density_param", "p_int", "aggregate",
    "f_mean", "f_std", "f_iqr", "g_mean", "g_std", "g_iqr", "g_bound",
)


class InputError(ValueError):
    pass


@dataclass
class AggregateRow:
    ensemble: str
    d: int
    density: float
    p_int: float
    stats: dict  # e.g. {"g_mean": ..., "g_iqr": ...}
    g_bound: float


def _to_float(token: str) -> float:
    return math.nan if token == "" else float(token)


def read_sweep_aggregates(path) -> list[AggregateRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SWEEP_MARKER:
        raise InputError(f"{path}: not a sweep CSV (missing {SWEEP_MARKER!r})")
    reader = csv.DictReader(lines[1:])
    missing = [col for col in _REQUIRED_SWEEP if col not in (reader.fieldnames or [])]
    if missing:
        raise InputError(f"{path}: missing required columns {missing}")
    rows = []
    for row in reader:
        if row["aggregate"] != "1":
            continue
        stats = {key: _to_float(row[key])
                 for key in ("f_mean", "f_std", "f_iqr", "g_mean", "g_std", "g_iqr")}
        rows.append(AggregateRow(
            ensemble=row["ensemble"],
            d=int(row["d"]),
            density=float(row["density_param"]),
            p_int=float(row["p_int"]),
            stats=stats,
            g_bound=_to_float(row["g_bound"]),
        ))
    if not rows:
        raise InputError(f"{path}: no aggregate rows to plot")
    return rows


@dataclass
class MaxDegData:
    points: list[tuple[int, int]]      # (d, max_total_deg) raw draws
    means: list[tuple[int, float]]     # (d, mean max degree), sorted by d
    meta: dict


def read_maxdeg(path) -> MaxDegData:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != MAXDEG_MARKER:
        raise InputError(f"{path}: not a max-degree CSV (missing {MAXDEG_MARKER!r})")
    meta: dict = {}
    body_start = 1
    if len(lines) > 1 and lines[1].startswith("#"):
        body_start = 2
        for token in lines[1][1:].split():
            key, _, val = token.partition("=")
            if val:
                try:
                    meta[key] = float(val)
                except ValueError:
                    meta[key] = val
    reader = csv.DictReader(lines[body_start:])
    for col in ("d", "max_total_deg", "aggregate", "mean_max_deg"):
        if col not in (reader.fieldnames or []):
            raise InputError(f"{path}: missing required column {col!r}")
    points: list[tuple[int, int]] = []
    means: list[tuple[int, float]] = []
    for row in reader:
        if row["aggregate"] == "1":
            means.append((int(row["d"]), float(row["mean_max_deg"])))
        else:
            points.append((int(row["d"]), int(row["max_total_deg"])))
    if not means:
        raise InputError(f"{path}: no aggregate mean rows")
    means.sort()
    return MaxDegData(points=points, means=means, meta=meta)
