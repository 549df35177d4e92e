"""Synthetic test meshes: disk fans, rectangle grids, jittered Delaunay.

These keep the oracle and property suites free of external data files.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh


def disk_mesh(rings: int, radius: float = 1.0) -> TriMesh:
    """Fan/ring triangulation of a flat disk with near-uniform edge length.

    Ring k (1 <= k <= rings) carries 6k vertices at radius k*radius/rings,
    giving 6*rings^2 mostly-equilateral faces. Vertex 0 is the center; the
    outermost ring is the boundary.
    """
    if rings < 1:
        raise ValueError("rings must be >= 1")
    verts = [np.zeros((1, 3))]
    for k in range(1, rings + 1):
        cnt = 6 * k
        theta = 2.0 * np.pi * np.arange(cnt) / cnt
        r = radius * k / rings
        verts.append(np.column_stack([r * np.cos(theta), r * np.sin(theta), np.zeros(cnt)]))
    starts = [0, 1]  # starts[k] = index of the first vertex of ring k
    for k in range(1, rings):
        starts.append(starts[-1] + 6 * k)
    vertices = np.concatenate(verts)

    faces = []
    # innermost fan around the center
    for j in range(6):
        faces.append([0, 1 + j, 1 + (j + 1) % 6])
    # annulus strips between ring k-1 and ring k
    for k in range(2, rings + 1):
        n_in, n_out = 6 * (k - 1), 6 * k
        s_in, s_out = starts[k - 1], starts[k]
        i = j = 0  # pointers into inner/outer rings
        ang_in = 2.0 * np.pi * np.arange(n_in + 1) / n_in
        ang_out = 2.0 * np.pi * np.arange(n_out + 1) / n_out
        while i < n_in or j < n_out:
            advance_outer = j < n_out and (i == n_in or ang_out[j + 1] <= ang_in[i + 1])
            if advance_outer:
                faces.append([s_out + j % n_out, s_out + (j + 1) % n_out, s_in + i % n_in])
                j += 1
            else:
                faces.append([s_out + j % n_out, s_in + (i + 1) % n_in, s_in + i % n_in])
                i += 1
    return TriMesh(vertices, np.array(faces, dtype=np.int64))


def rect_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0, height_fn=None) -> TriMesh:
    """Regular grid over [0,width] x [0,height] split into triangles.

    ``nx`` / ``ny`` count cells per side. ``height_fn(x, y)`` optionally
    lifts the sheet out of plane (vectorized over arrays).
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = height_fn(X, Y) if height_fn is not None else np.zeros_like(X)
    vertices = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    faces = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriMesh(vertices, np.array(faces, dtype=np.int64))


def jittered_mesh(nx: int, ny: int, seed: int, jitter: float = 0.35, height_fn=None) -> TriMesh:
    """Delaunay triangulation of a jittered grid; quality stays good.

    Interior points move by up to ``jitter`` cell widths; the boundary is
    kept straight so no sliver triangles appear along it.
    """
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    interior = np.zeros_like(X, dtype=bool)
    interior[1:-1, 1:-1] = True
    dx, dy = 1.0 / nx, 1.0 / ny
    X = X + np.where(interior, rng.uniform(-jitter, jitter, X.shape) * dx, 0.0)
    Y = Y + np.where(interior, rng.uniform(-jitter, jitter, Y.shape) * dy, 0.0)
    pts2 = np.column_stack([X.ravel(), Y.ravel()])
    tri = Delaunay(pts2)
    Z = height_fn(pts2[:, 0], pts2[:, 1]) if height_fn is not None else np.zeros(len(pts2))
    vertices = np.column_stack([pts2, Z])
    return TriMesh(vertices, tri.simplices.astype(np.int64))
