"""Quadratic smoothness energies 1/2 u^T W u and per-face line fields.

Each constructor returns a :class:`RegularizerMatrix` bundling the sparse
symmetric PSD matrix with the exponent of its area scale rule, so the
dimensionless smoothing weight stays meaningful across mesh rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import MeshError
from .mesh import TriMesh
from .operators import DiffOps

#: area-scale exponents: effective weight = alpha_hat * total_area**exponent
SCALE_EXPONENTS = {"dirichlet": 0.5, "vfa": 0.5, "bilaplacian": 1.5, "external": 1.5}


@dataclass(frozen=True)
class RegularizerMatrix:
    """Symmetric PSD weight matrix of a quadratic smoothness energy."""

    matrix: sp.csr_matrix
    kind: str
    scale_exponent: float

    @property
    def shape(self):
        return self.matrix.shape

    def energy(self, u: np.ndarray) -> float:
        """Evaluate 1/2 u^T W u."""
        return 0.5 * float(u @ (self.matrix @ u))


@dataclass(frozen=True)
class LineField:
    """Per-face tangent directions, sign-ambiguous (lines, not vectors).

    ``vectors`` is (m, 3). Fields coming out of
    :func:`interpolate_line_field` are unit length; fields scaled by
    :func:`localize_field` carry magnitudes in (0, 1].
    """

    vectors: np.ndarray

    def validate_unit(self, mesh: TriMesh, tol: float = 1e-8):
        V = self.vectors
        if V.shape != (mesh.num_faces, 3):
            raise ValueError(f"field shape {V.shape} does not match {mesh.num_faces} faces")
        norms = np.linalg.norm(V, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-10, rtol=0):
            raise ValueError("line field vectors must be unit length")
        nr = mesh.face_normals_raw()
        nr = nr / np.linalg.norm(nr, axis=1)[:, None]
        if np.abs((V * nr).sum(axis=1)).max() > tol:
            raise ValueError("line field vectors must be tangent to their faces")


def dirichlet_matrix(ops: DiffOps) -> RegularizerMatrix:
    """Cotangent Laplacian as the weight matrix of the Dirichlet energy."""
    return RegularizerMatrix(ops.laplacian, "dirichlet", SCALE_EXPONENTS["dirichlet"])


def vfa_matrix(ops: DiffOps, field: LineField, beta: float) -> RegularizerMatrix:
    """Anisotropic smoothing matrix div (I + beta V V^T) grad.

    ``beta`` weighs alignment of isolines to the line field against plain
    smoothness; beta = 0 reproduces the Dirichlet matrix exactly (the
    identity block contributes the cotangent Laplacian itself).
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    V = np.asarray(field.vectors, dtype=np.float64)
    m = ops.num_faces
    if V.shape != (m, 3):
        raise ValueError(f"field shape {V.shape} does not match {m} faces")
    if beta == 0.0:
        return RegularizerMatrix(ops.laplacian, "vfa", SCALE_EXPONENTS["vfa"])
    # block diagonal of V_f V_f^T, one 3x3 block per face
    blocks = V[:, :, None] * V[:, None, :]
    face_ids = np.arange(m)
    r = (3 * face_ids[:, None, None] + np.arange(3)[None, :, None]).repeat(3, axis=2)
    c = (3 * face_ids[:, None, None] + np.arange(3)[None, None, :]).repeat(3, axis=1)
    vhat = sp.csr_matrix((blocks.ravel(), (r.ravel(), c.ravel())), shape=(3 * m, 3 * m))
    W = ops.laplacian + beta * (ops.div @ vhat @ ops.grad)
    W = (W + W.T) * 0.5  # exact symmetry against rounding in the triple product
    return RegularizerMatrix(W.tocsr(), "vfa", SCALE_EXPONENTS["vfa"])


def bilaplacian_matrix(ops: DiffOps) -> RegularizerMatrix:
    """Planar bilaplacian L M_V^{-1} L, the Hessian-energy stand-in.

    Matches the true Hessian energy in the 1D case; a curved-Hessian
    matrix built elsewhere can be supplied via :func:`external_matrix`.
    """
    av = ops.vertex_areas
    if (av <= 0).any():
        raise MeshError("zero vertex area in bilaplacian assembly")
    inv_mass = sp.dia_matrix((1.0 / av, 0), shape=(len(av), len(av)))
    W = (ops.laplacian @ inv_mass @ ops.laplacian).tocsr()
    W = ((W + W.T) * 0.5).tocsr()
    return RegularizerMatrix(W, "bilaplacian", SCALE_EXPONENTS["bilaplacian"])


def external_matrix(path, n: int, scale_exponent: float = SCALE_EXPONENTS["external"]) -> RegularizerMatrix:
    """Load a symmetric sparse n x n matrix from coordinate text format.

    Each line is ``i j value`` with 0-based indices; duplicates are summed;
    an empty file yields the zero matrix. Asymmetry beyond 1e-8 (relative
    to the largest entry) is rejected, then the matrix is symmetrized.
    """
    rows, cols, vals = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j value'")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(
                    f"{path}:{lineno}: index ({i}, {j}) outside mesh dimension {n}"
                )
            rows.append(i)
            cols.append(j)
            vals.append(float(parts[2]))
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    gap = abs(W - W.T).max() if W.nnz else 0.0
    scale = max(abs(W).max(), 1.0) if W.nnz else 1.0
    if gap > 1e-8 * scale:
        raise ValueError(f"{path}: matrix asymmetry {gap:.3e} exceeds tolerance")
    W = ((W + W.T) * 0.5).tocsr()
    return RegularizerMatrix(W, "external", float(scale_exponent))


def _face_frames(mesh: TriMesh):
    """Orthonormal tangent frame (e1, e2) and unit normal per face."""
    p0, p1, p2 = mesh.face_corners()
    e1 = p1 - p0
    e1 = e1 / np.linalg.norm(e1, axis=1)[:, None]
    nr = np.cross(p1 - p0, p2 - p0)
    nr = nr / np.linalg.norm(nr, axis=1)[:, None]
    e2 = np.cross(nr, e1)
    return e1, e2, nr


def _face_adjacency(mesh: TriMesh):
    """Pairs of faces sharing an edge, with the shared edge vertex ids."""
    f = mesh.faces
    m = f.shape[0]
    edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    owner = np.tile(np.arange(m), 3)
    key = np.sort(edges, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, owner, edges = key[order], owner[order], edges[order]
    same = (key[1:] == key[:-1]).all(axis=1)
    idx = np.nonzero(same)[0]
    return owner[idx], owner[idx + 1], key[idx]


def interpolate_line_field(mesh: TriMesh, ops: DiffOps, constraints) -> LineField:
    """Propagate sparse direction constraints to a smooth unit line field.

    Doubled-angle harmonic interpolation: each line becomes the complex
    number exp(2i*theta) in its face frame, angles are transported across
    shared edges by the hinge rotation, and a uniform-weight connection
    Laplacian on the face graph is solved with the constrained faces held
    fixed. Constrained faces reproduce their input direction up to sign.
    """
    constraints = list(constraints)
    if not constraints:
        raise ValueError("at least one line-field constraint is required")
    m = mesh.num_faces
    e1, e2, nr = _face_frames(mesh)

    fixed = {}
    for face, direction in constraints:
        face = int(face)
        if not 0 <= face < m:
            raise ValueError(f"constraint face {face} out of range")
        d = np.asarray(direction, dtype=np.float64)
        t = d - (d @ nr[face]) * nr[face]  # project into the face plane
        norm = np.linalg.norm(t)
        if norm < 1e-12:
            raise ValueError(
                f"constraint direction on face {face} is zero or parallel to the normal"
            )
        t /= norm
        theta = np.arctan2(t @ e2[face], t @ e1[face])
        fixed[face] = np.exp(2j * theta)

    fa, fb, shared = _face_adjacency(mesh)
    # hinge transport: angle of the shared edge in each face frame
    ev = mesh.vertices[shared[:, 1]] - mesh.vertices[shared[:, 0]]
    ang_a = np.arctan2((ev * e2[fa]).sum(1), (ev * e1[fa]).sum(1))
    ang_b = np.arctan2((ev * e2[fb]).sum(1), (ev * e1[fb]).sum(1))
    rot_ab = np.exp(2j * (ang_b - ang_a))  # doubled-angle rotation a -> b

    # connection Laplacian: energy sum |w_b - rot_ab w_a|^2 over dual edges
    rows = np.concatenate([fa, fb, fa, fb])
    cols = np.concatenate([fa, fb, fb, fa])
    vals = np.concatenate(
        [np.ones_like(rot_ab), np.ones_like(rot_ab), -np.conj(rot_ab), -rot_ab]
    )
    L = sp.csr_matrix((vals, (rows, cols)), shape=(m, m), dtype=np.complex128)

    w = np.zeros(m, dtype=np.complex128)
    fixed_idx = np.array(sorted(fixed), dtype=np.int64)
    w[fixed_idx] = [fixed[i] for i in fixed_idx]
    free = np.setdiff1d(np.arange(m), fixed_idx)
    if free.size:
        Lff = L[free][:, free].tocsc()
        rhs = -(L[free][:, fixed_idx] @ w[fixed_idx])
        # regularize exact zero diagonals (isolated faces) to keep splu happy
        diag = Lff.diagonal()
        if np.any(diag == 0):
            raise ValueError("face graph has faces unreachable from any constraint")
        comp_ok = _constrained_components_ok(L, fixed_idx, m)
        if not comp_ok:
            raise ValueError("a connected face component has no constraint")
        w[free] = splu(Lff).solve(rhs)

    mag = np.abs(w)
    dead = mag < 1e-12
    if dead.any():  # ambiguous faces inherit an arbitrary fixed direction
        w[dead] = 1.0
        mag[dead] = 1.0
    theta = np.angle(w / mag) / 2.0
    V = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    return LineField(V)


def _constrained_components_ok(L, fixed_idx, m) -> bool:
    from scipy.sparse.csgraph import connected_components

    ncomp, labels = connected_components(abs(L) > 0, directed=False)
    return set(labels) == set(labels[fixed_idx])


def localize_field(mesh, ops, field: LineField, centers, sigma: float) -> LineField:
    """Scale a line field by a geodesic Gaussian exp(-d^2 / (2 sigma^2)).

    Distances to ``centers`` come from the unregularized solver (alpha = 0);
    each face uses the mean of its vertex distances. The squared magnitude
    of the scaled field is what enters the alignment energy.
    """
    from .fixed_source import AdmmSettings, solve_fixed_source

    if sigma <= 0:
        raise ValueError("sigma must be positive")
    centers = np.atleast_1d(np.asarray(centers, dtype=np.int64))
    if centers.size == 0:
        raise ValueError("centers must be non-empty")
    # tighter than the solver defaults: the Gaussian is sensitive to the
    # distance scale and the unregularized solve is cheap
    settings = AdmmSettings(alpha_hat=0.0, eps_abs=1e-8, eps_rel=1e-4, max_iter=50000)
    res = solve_fixed_source(mesh, ops, None, centers, settings)
    d_face = res.u[mesh.faces].mean(axis=1)
    scale = np.exp(-(d_face**2) / (2.0 * sigma**2))
    return LineField(field.vectors * scale[:, None])


def read_constraints(path):
    """Read 'face_index dx dy dz' lines for :func:`interpolate_line_field`."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'face_index dx dy dz'")
            out.append((int(parts[0]), np.array([float(x) for x in parts[1:4]])))
    return out
