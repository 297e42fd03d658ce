"""Heatmap grids: the shared container for sweep outputs, plus renderers.

A grid is rectangular with two named axes; ``values[i, j]`` belongs to
``axis1_values[i]`` x ``axis2_values[j]``.  Renderers: binary PGM images
(log10 grayscale), marching-squares contour polylines, and a flat CSV
form that round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class HeatmapGrid:
    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        self.axis1_values = np.asarray(self.axis1_values, dtype=float)
        self.axis2_values = np.asarray(self.axis2_values, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.axis1_values.size, self.axis2_values.size)
        if self.values.shape != expected:
            raise ValueError(f"grid shape {self.values.shape} != axes {expected}")

    def same_axes(self, other: "HeatmapGrid") -> bool:
        return (
            self.axis1_values.shape == other.axis1_values.shape
            and self.axis2_values.shape == other.axis2_values.shape
            and np.allclose(self.axis1_values, other.axis1_values)
            and np.allclose(self.axis2_values, other.axis2_values)
        )


def render_pgm(grid: HeatmapGrid, lo_log10: float = -2.0, hi_log10: float = 6.0) -> bytes:
    """8-bit binary PGM (P5) of log10(values), row 0 = first axis1 value.

    pixel = clamp(round(255*(log10(v) - lo)/(hi - lo)), 0, 255); cells
    with v <= 0 or NaN render as 0.
    """
    if hi_log10 <= lo_log10:
        raise ValueError(f"need hi > lo, got [{lo_log10}, {hi_log10}]")
    v = grid.values
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = np.where(v > 0.0, np.log10(np.where(v > 0.0, v, 1.0)), -np.inf)
        scaled = 255.0 * (logv - lo_log10) / (hi_log10 - lo_log10)
    scaled = np.nan_to_num(scaled, nan=-np.inf)
    pixels = np.clip(np.round(scaled), 0.0, 255.0).astype(np.uint8)
    rows, cols = pixels.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def write_grid_csv(grid: HeatmapGrid, path) -> None:
    """Flat CSV `axis1,axis2,value` in row-major order, full precision."""
    lines = ["axis1,axis2,value"]
    for i, a in enumerate(grid.axis1_values):
        for j, b in enumerate(grid.axis2_values):
            lines.append(f"{float(a)!r},{float(b)!r},{float(grid.values[i, j])!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path, axis1_name: str = "axis1", axis2_name: str = "axis2") -> HeatmapGrid:
    """Inverse of :func:`write_grid_csv` (exact value round-trip)."""
    with open(path, encoding="utf-8") as fh:
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if rows[0] != ["axis1", "axis2", "value"]:
        raise ValueError(f"unexpected grid CSV header: {rows[0]}")
    a1 = sorted({float(r[0]) for r in rows[1:]})
    a2 = sorted({float(r[1]) for r in rows[1:]})
    idx1 = {v: i for i, v in enumerate(a1)}
    idx2 = {v: i for i, v in enumerate(a2)}
    values = np.full((len(a1), len(a2)), np.nan)
    for r in rows[1:]:
        values[idx1[float(r[0])], idx2[float(r[1])]] = float(r[2])
    return HeatmapGrid(axis1_name, np.array(a1), axis2_name, np.array(a2), values)


def _interp(p1, p2, v1, v2, level):
    t = 0.5 if v2 == v1 else (level - v1) / (v2 - v1)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def contour_lines(grid: HeatmapGrid, level: float = 1.0) -> list[list[tuple[float, float]]]:
    """Marching-squares iso-contours of the grid at ``level``.

    Returns polylines as lists of (axis1_value, axis2_value) points;
    closed loops have identical first and last points.  NaN cells are
    skipped.
    """
    a1, a2, v = grid.axis1_values, grid.axis2_values, grid.values
    segments = []
    for i in range(len(a1) - 1):
        for j in range(len(a2) - 1):
            corners = [
                ((a1[i], a2[j]), v[i, j]),
                ((a1[i], a2[j + 1]), v[i, j + 1]),
                ((a1[i + 1], a2[j + 1]), v[i + 1, j + 1]),
                ((a1[i + 1], a2[j]), v[i + 1, j]),
            ]
            vals = [c[1] for c in corners]
            if any(not np.isfinite(x) for x in vals):
                continue
            case = sum(1 << idx for idx, x in enumerate(vals) if x > level)
            if case in (0, 15):
                continue
            pts = [c[0] for c in corners]
            edges = {
                0: _interp(pts[0], pts[1], vals[0], vals[1], level),
                1: _interp(pts[1], pts[2], vals[1], vals[2], level),
                2: _interp(pts[3], pts[2], vals[3], vals[2], level),
                3: _interp(pts[0], pts[3], vals[0], vals[3], level),
            }
            table = {
                1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
                6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(0, 2)],
                11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(3, 0)],
            }
            if case in (5, 10):
                center_above = float(np.mean(vals)) > level
                if case == 5:
                    pairs = [(3, 0), (1, 2)] if center_above else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if center_above else [(0, 3), (2, 1)]
            else:
                pairs = table[case]
            for e1, e2 in pairs:
                segments.append((edges[e1], edges[e2]))
    return _chain_segments(segments)


def _key(p):
    return (round(p[0], 10), round(p[1], 10))


def _chain_segments(segments):
    by_end: dict = {}
    for idx, (p, q) in enumerate(segments):
        by_end.setdefault(_key(p), []).append(idx)
        by_end.setdefault(_key(q), []).append(idx)
    used = [False] * len(segments)
    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        p, q = segments[start]
        line = [p, q]
        for endpoint_side in (1, 0):  # extend forward from q, then backward from p
            while True:
                tip = line[-1] if endpoint_side == 1 else line[0]
                nxt = None
                for idx in by_end.get(_key(tip), []):
                    if not used[idx]:
                        nxt = idx
                        break
                if nxt is None:
                    break
                used[nxt] = True
                a, b = segments[nxt]
                other = b if _key(a) == _key(tip) else a
                if endpoint_side == 1:
                    line.append(other)
                else:
                    line.insert(0, other)
        polylines.append(line)
    return polylines


def write_contours_csv(polylines, path) -> None:
    """Polyline CSV `polyline,axis1,axis2`, one row per vertex."""
    lines = ["polyline,axis1,axis2"]
    for pid, line in enumerate(polylines):
        for a, b in line:
            lines.append(f"{pid},{float(a)!r},{float(b)!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
