"""CSV tables and JSON reports.

Tables have fixed headers:

- trajectory: ``t,x1,...,xn``
- itinerary: ``episode_index,equilibrium,t_enter,t_exit,edge_label``
- pentacle: ``t,y1,y2``

Floats are written with 17 significant digits so they read back exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .analysis.itinerary import Itinerary, to_rows
from .integrator import Trajectory

ITINERARY_HEADER = ["episode_index", "equilibrium", "t_enter", "t_exit", "edge_label"]
PENTACLE_HEADER = ["t", "y1", "y2"]


class MalformedTable(ValueError):
    pass


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_header(n: int) -> list[str]:
    return ["t"] + [f"x{i}" for i in range(1, n + 1)]


def write_table(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_trajectory(path, traj: Trajectory) -> None:
    rows = (np.concatenate([[t], x]) for t, x in zip(traj.times, traj.states))
    write_table(path, trajectory_header(traj.n), ([float(v) for v in r] for r in rows))


def write_itinerary(path, it: Itinerary) -> None:
    write_table(path, ITINERARY_HEADER, to_rows(it))


def write_pentacle(path, times: np.ndarray, proj: np.ndarray) -> None:
    write_table(path, PENTACLE_HEADER,
                ([float(t), float(p[0]), float(p[1])] for t, p in zip(times, proj)))


def read_table(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such table: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedTable(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise MalformedTable(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return header, body


def read_numeric_table(path) -> tuple[list[str], np.ndarray]:
    header, body = read_table(path)
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise MalformedTable(f"{path}: {exc}") from None
    return header, data.reshape(len(body), len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        items = sorted(obj) if isinstance(obj, set) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")


def events_report(traj: Trajectory) -> dict:
    return {
        "label": traj.label,
        "termination": traj.termination.value if hasattr(traj.termination, "value") else str(traj.termination),
        "t_end": float(traj.times[-1]),
        "events": [{"kind": e.kind, "time": e.time, "equilibrium": e.equilibrium, "sign": e.sign}
                   for e in traj.events],
    }
