"""Isoline extraction on meshes and SVG export.

Levels cut each triangle by linear interpolation; the resulting segments
are chained into polylines (closed loops where the level set is a loop).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mesh import TriMesh

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


@dataclass
class Isoline:
    level_index: int
    level: float
    points: np.ndarray  # (k, 3)
    closed: bool


def extract_isolines(mesh: TriMesh, u: np.ndarray, levels) -> list[Isoline]:
    """Cut the scalar field at the given levels (count or explicit values).

    An integer asks for that many levels evenly spaced strictly inside
    (min u, max u). A constant field yields no isolines and a warning.
    """
    u = np.asarray(u, dtype=np.float64)
    lo, hi = float(u.min()), float(u.max())
    if isinstance(levels, (int, np.integer)):
        if levels < 1:
            raise ValueError("need at least one level")
        if hi - lo <= 1e-300:
            warnings.warn("constant field has no isolines", stacklevel=2)
            return []
        vals = lo + (hi - lo) * (np.arange(1, levels + 1) / (levels + 1))
    else:
        vals = np.asarray(levels, dtype=np.float64)
        if hi - lo <= 1e-300:
            warnings.warn("constant field has no isolines", stacklevel=2)
            return []

    out = []
    for li, lvl in enumerate(vals):
        for pts, closed in _trace_level(mesh, u, float(lvl)):
            out.append(Isoline(li, float(lvl), pts, closed))
    return out


def _crossing_point(mesh, u, a, b, lvl):
    t = (lvl - u[a]) / (u[b] - u[a])
    return mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])


def _trace_level(mesh, u, lvl):
    below = u < lvl
    segments = []  # pairs of edge keys
    points = {}  # edge key -> 3D point
    for face in mesh.faces:
        i, j, k = (int(v) for v in face)
        cross = []
        for a, b in ((i, j), (j, k), (k, i)):
            if below[a] != below[b]:
                key = (a, b) if a < b else (b, a)
                if key not in points:
                    points[key] = _crossing_point(mesh, u, a, b, lvl)
                cross.append(key)
        if len(cross) == 2:
            segments.append((cross[0], cross[1]))
    if not segments:
        return []

    # chain segments: graph on edge keys
    adj = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    visited = set()
    chains = []
    # open chains start at odd-degree nodes, then leftover loops
    starts = [k for k, v in adj.items() if len(v) == 1]
    for start in starts + list(adj):
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = next((x for x in adj[cur] if x not in visited), None)
            if nxt is None:
                break
            chain.append(nxt)
            visited.add(nxt)
            cur = nxt
        if len(chain) < 2:
            continue
        closed = chain[0] in adj[chain[-1]] and len(chain) > 2
        pts = np.array([points[k] for k in chain])
        if closed:
            pts = np.vstack([pts, pts[:1]])
        chains.append((pts, closed))
    return chains


def export_svg(isolines: list[Isoline], path, axis: str = "z", size: int = 800):
    """Orthographic projection dropping ``axis``; stroke color per level."""
    keep = {"x": (1, 2), "y": (0, 2), "z": (0, 1)}.get(axis)
    if keep is None:
        raise ValueError("axis must be one of x, y, z")
    if not isolines:
        warnings.warn("no isolines to export; writing empty SVG", stacklevel=2)
        body = ""
        view = "0 0 1 1"
    else:
        pts = np.vstack([iso.points[:, keep] for iso in isolines])
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = max(float((hi - lo).max()), 1e-12)
        pad = 0.03 * span
        scale = size / (span + 2 * pad)

        def to_px(p):
            q = (p - lo + pad) * scale
            return q[:, 0], size - q[:, 1]  # y grows downward in SVG

        parts = []
        for iso in isolines:
            x, y = to_px(iso.points[:, keep])
            d = "M " + " L ".join(f"{xi:.2f},{yi:.2f}" for xi, yi in zip(x, y))
            if iso.closed:
                d += " Z"
            color = _PALETTE[iso.level_index % len(_PALETTE)]
            parts.append(
                f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        body = "\n".join(parts)
        view = f"0 0 {size} {size}"
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{view}" '
        f'width="{size}" height="{size}">\n{body}\n</svg>\n'
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return path
