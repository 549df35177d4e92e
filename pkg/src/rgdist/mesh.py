"""Triangle mesh container and OBJ/OFF readers.

Meshes are plain vertex/face arrays; no halfedge structure is built.
Non-manifold and multi-component inputs are accepted as-is, validity
beyond per-face geometry is deferred to the solvers.
"""

from __future__ import annotations

import numpy as np

from .errors import MeshError

# Faces whose area falls below this fraction of the mean face area are
# rejected as degenerate; anisotropic-but-finite triangles pass.
DEGENERATE_AREA_FACTOR = 1e-12


class TriMesh:
    """Immutable triangle mesh.

    Parameters
    ----------
    vertices : (n, 3) array_like
        Vertex coordinates, in length units.
    faces : (m, 3) array_like
        Vertex indices per triangle, 0-based.

    Raises
    ------
    MeshError
        For out-of-range or repeated indices, non-finite coordinates,
        or degenerate (near-zero area) faces.
    """

    def __init__(self, vertices, faces):
        # copy: the arrays are frozen below and must not alias caller data
        v = np.array(vertices, dtype=np.float64, order="C", copy=True)
        f = np.array(faces, dtype=np.int64, order="C", copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError(f"faces must be (m, 3), got {f.shape}")
        if not np.isfinite(v).all():
            raise MeshError("non-finite vertex coordinates")
        n = v.shape[0]
        if f.size and (f.min() < 0 or f.max() >= n):
            raise MeshError(f"face index out of range [0, {n})")
        if f.size:
            same = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if same.any():
                bad = np.nonzero(same)[0]
                raise MeshError(f"faces with repeated vertices: {bad.tolist()[:10]}")
        self.vertices = v
        self.faces = f
        self.vertices.flags.writeable = False
        self.faces.flags.writeable = False
        self._check_degenerate()

    def _check_degenerate(self):
        if self.num_faces == 0:
            return
        areas = self.face_areas()
        floor = DEGENERATE_AREA_FACTOR * areas.mean()
        bad = np.nonzero(areas <= floor)[0]
        if bad.size:
            raise MeshError(
                f"degenerate faces (area <= {floor:.3e}): {bad.tolist()[:10]}"
            )

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_faces(self) -> int:
        return self.faces.shape[0]

    def face_corners(self):
        """Per-face corner coordinates as three (m, 3) arrays."""
        v, f = self.vertices, self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def face_normals_raw(self):
        """Unnormalized face normals (cross product of edge vectors)."""
        p0, p1, p2 = self.face_corners()
        return np.cross(p1 - p0, p2 - p0)

    def face_areas(self):
        return 0.5 * np.linalg.norm(self.face_normals_raw(), axis=1)

    def boundary_vertices(self):
        """Indices of vertices incident to an edge with exactly one adjacent face."""
        f = self.faces
        edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        return np.unique(uniq[counts == 1])

    def scaled(self, s: float) -> "TriMesh":
        """Return a copy with all coordinates multiplied by ``s`` (> 0)."""
        if not s > 0:
            raise ValueError("scale factor must be positive")
        return TriMesh(self.vertices * float(s), self.faces)


def mesh_scale(mesh: TriMesh, s: float) -> TriMesh:
    return mesh.scaled(s)


def mesh_diameter(mesh: TriMesh) -> float:
    """Max pairwise vertex distance (upper bound proxy for geodesic diameter)."""
    pts = mesh.vertices
    n = pts.shape[0]
    if n < 2:
        return 0.0
    if n > 200:
        # Diameter endpoints lie on the convex hull; fall through to the
        # full pairwise scan only for small or hull-degenerate inputs.
        try:
            from scipy.spatial import ConvexHull, QhullError

            try:
                hull = ConvexHull(pts)
            except QhullError:
                hull = ConvexHull(pts, qhull_options="QJ")
            pts = pts[hull.vertices]
            n = pts.shape[0]
        except Exception:
            pass
    best = 0.0
    chunk = max(1, int(2e7) // max(n, 1))
    for start in range(0, n, chunk):
        block = pts[start : start + chunk]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        best = max(best, float(d2.max()))
    return float(np.sqrt(best))


def load_mesh(path) -> TriMesh:
    """Load a triangle mesh from an .obj or .off file.

    Vertex order is preserved. OBJ texture/normal sub-indices are ignored;
    quad or larger faces are rejected.
    """
    path = str(path)
    lower = path.lower()
    if lower.endswith(".obj"):
        return _load_obj(path)
    if lower.endswith(".off"):
        return _load_off(path)
    raise MeshError(f"unsupported mesh extension (want .obj or .off): {path}")


def _load_obj(path) -> TriMesh:
    verts, faces = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    verts.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad vertex: {exc}") from None
            elif tag == "f":
                if len(parts) != 4:
                    raise MeshError(
                        f"{path}:{lineno}: only triangle faces supported "
                        f"(got {len(parts) - 1} corners)"
                    )
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise MeshError(f"{path}:{lineno}: bad face index {tok!r}") from None
                    if i == 0:
                        raise MeshError(f"{path}:{lineno}: OBJ indices are 1-based, got 0")
                    # negative OBJ indices count from the end of the vertex list
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                faces.append(idx)
            # other records (vn, vt, usemtl, ...) are ignored
    try:
        return TriMesh(np.array(verts, dtype=np.float64).reshape(-1, 3), faces or np.zeros((0, 3), int))
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from None


def _load_off(path) -> TriMesh:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        lines = fh.read().splitlines()
    # strip comments, gather whitespace-separated tokens
    for line in lines:
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"{path}:1: missing OFF header")
    pos = 1
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3  # vertex count, face count, edge count
        verts = np.array(tokens[pos : pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise MeshError(f"{path}: only triangle faces supported (got {k}-gon)")
            faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
            pos += 1 + k
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: truncated or malformed OFF data: {exc}") from None
    try:
        return TriMesh(verts, faces or np.zeros((0, 3), int))
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from None
