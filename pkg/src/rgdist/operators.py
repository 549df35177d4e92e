"""Discrete differential operators on triangle meshes.

Conventions: piecewise-linear functions (one value per vertex),
piecewise-constant gradients per face expressed in the ambient 3D basis,
so ``grad`` is 3m x n with rows ordered (x, y, z) per face. The
divergence is the mass-weighted adjoint ``div = grad.T @ mass_F`` and the
cotangent Laplacian follows the positive semi-definite sign convention,
``u.T @ laplacian @ u`` being twice the Dirichlet energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import MeshError
from .mesh import TriMesh


@dataclass(frozen=True)
class DiffOps:
    """Assembled sparse operators and area measures for one mesh.

    Attributes
    ----------
    grad : csr_matrix, 3m x n
        Per-face gradient in the ambient basis.
    div : csr_matrix, n x 3m
        ``grad.T @ mass_F`` exactly (shared sparsity).
    laplacian : csr_matrix, n x n
        Cotangent Laplacian, PSD convention; equals ``div @ grad`` up to
        rounding.
    vertex_areas : (n,) ndarray
        One third of the incident face areas.
    face_areas : (m,) ndarray
    mass_V : dia_matrix, n x n
    mass_F : dia_matrix, bm x bm
        Face areas repeated ``block_size`` times.
    total_area : float
    block_size : int
        Components per gradient entry: 3 for surface meshes, 1 for the
        1D ring used by the oracle suite.
    """

    grad: sp.csr_matrix
    div: sp.csr_matrix
    laplacian: sp.csr_matrix
    vertex_areas: np.ndarray
    face_areas: np.ndarray
    mass_V: sp.dia_matrix
    mass_F: sp.dia_matrix
    total_area: float
    block_size: int = 3

    @property
    def num_vertices(self) -> int:
        return self.grad.shape[1]

    @property
    def num_faces(self) -> int:
        return self.grad.shape[0] // self.block_size

    def face_gradients(self, u: np.ndarray) -> np.ndarray:
        """Gradient of a vertex function, reshaped to (m, block_size)."""
        return (self.grad @ u).reshape(-1, self.block_size)

    def gradient_norms(self, u: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.face_gradients(u), axis=1)


def build_ops(mesh: TriMesh) -> DiffOps:
    """Assemble gradient, divergence, cotangent Laplacian, and masses.

    Deterministic: two builds of the same mesh produce bitwise-identical
    sparse structures and values.
    """
    n, m = mesh.num_vertices, mesh.num_faces
    p0, p1, p2 = mesh.face_corners()
    raw_n = np.cross(p1 - p0, p2 - p0)
    double_area = np.linalg.norm(raw_n, axis=1)
    if m and double_area.min() <= 0.0:
        raise MeshError("zero-area face during operator assembly")
    unit_n = raw_n / double_area[:, None]
    areas = 0.5 * double_area

    # grad of the hat function at corner c is (n x e_c) / (2 a_f) with e_c
    # the opposite edge, winding order i -> j -> k
    g0 = np.cross(unit_n, p2 - p1) / double_area[:, None]
    g1 = np.cross(unit_n, p0 - p2) / double_area[:, None]
    g2 = np.cross(unit_n, p1 - p0) / double_area[:, None]

    # 9 entries per face: 3 components x 3 corners
    face_ids = np.arange(m)
    r = (3 * face_ids[:, None, None] + np.arange(3)[None, :, None]).repeat(3, axis=2)
    c = mesh.faces[:, None, :].repeat(3, axis=1)
    vals = np.stack([g0, g1, g2], axis=2)  # (m, 3 components, 3 corners)
    grad = sp.csr_matrix(
        (vals.ravel(), (r.ravel(), c.ravel())), shape=(3 * m, n)
    )

    mass_F = sp.dia_matrix((np.repeat(areas, 3), 0), shape=(3 * m, 3 * m))
    div = (grad.T @ mass_F).tocsr()

    laplacian = _cotangent_laplacian(mesh, n)

    vertex_areas = np.zeros(n)
    np.add.at(vertex_areas, mesh.faces.ravel(), np.repeat(areas / 3.0, 3))
    mass_V = sp.dia_matrix((vertex_areas, 0), shape=(n, n))

    return DiffOps(
        grad=grad,
        div=div,
        laplacian=laplacian,
        vertex_areas=vertex_areas,
        face_areas=areas,
        mass_V=mass_V,
        mass_F=mass_F,
        total_area=float(areas.sum()),
        block_size=3,
    )


def _cotangent_laplacian(mesh: TriMesh, n: int) -> sp.csr_matrix:
    """Classic half-cotangent assembly, independent of grad/div.

    Kept separate from ``div @ grad`` so the identity between the two is a
    testable cross-check rather than a tautology.
    """
    p0, p1, p2 = mesh.face_corners()
    f = mesh.faces
    I, J, S = [], [], []
    for (a, b, c), (pa, pb, pc) in (
        ((0, 1, 2), (p0, p1, p2)),
        ((1, 2, 0), (p1, p2, p0)),
        ((2, 0, 1), (p2, p0, p1)),
    ):
        # cot of the angle at corner a, weighting edge (b, c)
        u = pb - pa
        v = pc - pa
        cross = np.linalg.norm(np.cross(u, v), axis=1)
        cot = (u * v).sum(axis=1) / cross
        w = 0.5 * cot
        I.extend([f[:, b], f[:, c], f[:, b], f[:, c]])
        J.extend([f[:, c], f[:, b], f[:, b], f[:, c]])
        S.extend([-w, -w, w, w])
    L = sp.csr_matrix(
        (np.concatenate(S), (np.concatenate(I), np.concatenate(J))), shape=(n, n)
    )
    return L
