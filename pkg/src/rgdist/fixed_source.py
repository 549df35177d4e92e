"""Fixed-source regularized geodesic distances by ADMM.

Solves, for a vertex set E on a triangle mesh,

    minimize   -A_V^T u + (alpha/2) u^T W u
    subject to |(G u)_f| <= 1 per face,  u_E = 0,

by splitting the gradient into an auxiliary per-face variable that is
projected onto the unit ball each sweep. The u-step matrix
alpha W + rho sqrt(A) W_D is factored once and reused for all iterations
(and refactored only if the optional varying-penalty scheme changes rho).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .operators import DiffOps
from .regularizers import SCALE_EXPONENTS, RegularizerMatrix

PENALTY_GROW = 2.0  # tau of the varying-penalty rule
PENALTY_RATIO = 10.0  # mu: grow/shrink rho when residuals differ by this factor
PENALTY_PERIOD = 25  # iterations between penalty updates (each forces a refactor)


@dataclass(frozen=True)
class AdmmSettings:
    """Solver controls.

    ``alpha_hat`` is the dimensionless smoothing weight, turned into the
    effective weight through the regularizer's area scale rule. Set
    ``alpha_raw`` to bypass that rule and use an absolute weight instead.
    """

    alpha_hat: float = 0.0
    rho: float = 2.0
    eps_abs: float = 5e-6
    eps_rel: float = 1e-2
    max_iter: int = 10000
    over_relaxation: float = 1.5
    penalty_adapt: bool = False
    alpha_raw: Optional[float] = None

    def __post_init__(self):
        if self.alpha_hat < 0:
            raise ValueError("alpha_hat must be >= 0")
        if self.alpha_raw is not None and self.alpha_raw < 0:
            raise ValueError("alpha_raw must be >= 0")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if not 1.0 <= self.over_relaxation <= 1.8:
            raise ValueError("over_relaxation must lie in [1, 1.8]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class DistanceField:
    """Per-vertex distance with convergence diagnostics."""

    u: np.ndarray
    sources: np.ndarray
    iterations: int
    converged: bool
    primal_residuals: np.ndarray
    dual_residuals: np.ndarray
    alpha: float
    eps_pri_final: float
    eps_dual_final: float


def scale_alpha(alpha_hat: float, total_area: float, kind: str) -> float:
    """Effective smoothing weight alpha_hat * A**e for the given kind.

    e = 1/2 for dirichlet/vfa, 3/2 for bilaplacian/external-hessian.
    """
    if total_area <= 0:
        raise ValueError("total area must be positive")
    try:
        e = SCALE_EXPONENTS[kind]
    except KeyError:
        raise ValueError(f"unknown regularizer kind {kind!r}") from None
    return alpha_hat * total_area**e


def project_unit_ball(z: np.ndarray) -> np.ndarray:
    """Project one vector, or each row, onto the unit ball."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        nrm = np.linalg.norm(z)
        return z / nrm if nrm > 1.0 else z.copy()
    nrm = np.linalg.norm(z, axis=1)
    out = z.copy()
    over = nrm > 1.0
    out[over] /= nrm[over, None]
    return out


class Factorization:
    """Prefactored u-step system with the source rows/columns eliminated."""

    def __init__(self, K: sp.spmatrix, sources: np.ndarray):
        n = K.shape[0]
        self.n = n
        self.sources = np.asarray(sources, dtype=np.int64)
        self.free = np.setdiff1d(np.arange(n), self.sources)
        if self.free.size == 0:
            self._lu = None
        else:
            Kff = K.tocsr()[self.free][:, self.free].tocsc()
            try:
                self._lu = spla.splu(Kff)
            except RuntimeError as exc:
                raise SolverError(
                    f"u-step factorization failed (system singular or indefinite): {exc}"
                ) from None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve with a full-length right-hand side; returns u with u_E = 0."""
        u = np.zeros(self.n)
        if self._lu is not None:
            u[self.free] = self._lu.solve(rhs[self.free])
        return u


def _ustep_matrix(ops: DiffOps, W: Optional[RegularizerMatrix], alpha: float, rho_eff: float):
    K = rho_eff * ops.laplacian
    if alpha > 0.0:
        K = alpha * W.matrix + K
    return K


def prefactor_system(
    ops: DiffOps, W: Optional[RegularizerMatrix], alpha: float, rho: float, sources
) -> Factorization:
    """Factor alpha W + rho sqrt(A) W_D restricted to the free vertices."""
    sources = _validate_sources(ops, sources)
    rho_eff = rho * np.sqrt(ops.total_area)
    return Factorization(_ustep_matrix(ops, W, alpha, rho_eff), sources)


def _validate_sources(ops: DiffOps, sources) -> np.ndarray:
    from scipy.sparse.csgraph import connected_components

    sources = np.unique(np.atleast_1d(np.asarray(sources, dtype=np.int64)))
    n = ops.num_vertices
    if sources.size == 0:
        raise SolverError("source set is empty")
    if sources.min() < 0 or sources.max() >= n:
        raise SolverError(f"source index out of range [0, {n})")
    adj = (abs(ops.laplacian) > 0).astype(np.int8)
    ncomp, labels = connected_components(adj, directed=False)
    missing = np.setdiff1d(np.unique(labels), np.unique(labels[sources]))
    if missing.size:
        raise SolverError(
            f"{missing.size} connected component(s) contain no source vertex; "
            "the u-step system would be singular"
        )
    return sources


def _resolve_alpha(ops: DiffOps, W: Optional[RegularizerMatrix], settings: AdmmSettings) -> float:
    if settings.alpha_raw is not None:
        return float(settings.alpha_raw)
    if settings.alpha_hat == 0.0:
        return 0.0
    if W is None:
        raise ValueError("a regularizer matrix is required when alpha_hat > 0")
    return settings.alpha_hat * ops.total_area**W.scale_exponent


def solve_fixed_source(
    mesh,
    ops: DiffOps,
    W: Optional[RegularizerMatrix],
    sources,
    settings: AdmmSettings,
) -> DistanceField:
    """Run the three-step ADMM until the Boyd-style stopping test passes.

    Per sweep: (1) linear solve for u with the prefactored system,
    (2) per-face projection of the (optionally over-relaxed) gradients
    onto the unit ball, (3) dual ascent. Stops when the area-scaled
    primal and dual residual tests both pass.

    ``mesh`` may be None when ``ops`` already describes the domain (the 1D
    ring oracle does this); when given it is only used for sanity checks.

    Returns the last iterate flagged ``converged=False`` if ``max_iter``
    is exhausted.
    """
    if mesh is not None and mesh.num_vertices != ops.num_vertices:
        raise ValueError("mesh and operators disagree on vertex count")
    alpha = _resolve_alpha(ops, W, settings)
    if alpha > 0.0 and W.matrix.shape != (ops.num_vertices, ops.num_vertices):
        raise ValueError("regularizer matrix size does not match the mesh")
    sources = _validate_sources(ops, sources)

    n = ops.num_vertices
    A = ops.total_area
    sqrtA = np.sqrt(A)
    b = ops.block_size
    m = ops.num_faces
    rho = settings.rho
    eta = settings.over_relaxation

    fact = Factorization(_ustep_matrix(ops, W, alpha, rho * sqrtA), sources)

    grad, div, Av = ops.grad, ops.div, ops.vertex_areas
    sqrt_af = np.sqrt(np.repeat(ops.face_areas, b))
    z = np.zeros(b * m)
    y = np.zeros(b * m)
    pri_hist, dual_hist = [], []
    converged = False
    eps_pri = eps_dual = np.inf
    u = np.zeros(n)
    it = 0

    for it in range(1, settings.max_iter + 1):
        rho_eff = rho * sqrtA
        rhs = Av - div @ y + rho_eff * (div @ z)
        u = fact.solve(rhs)
        Gu = grad @ u
        ghat = Gu if eta == 1.0 else eta * Gu + (1.0 - eta) * z
        z_new = _project_rows(y / rho_eff + ghat, b)
        y = y + rho_eff * (ghat - z_new)

        r_norm = np.linalg.norm(sqrt_af * (Gu - z_new))
        s_norm = np.linalg.norm(rho * (div @ (z_new - z)))
        eps_pri = np.sqrt(b * m) * settings.eps_abs * A + settings.eps_rel * sqrtA * max(
            np.linalg.norm(sqrt_af * Gu), np.linalg.norm(sqrt_af * z_new)
        )
        eps_dual = np.sqrt(n) * settings.eps_abs * A + settings.eps_rel * sqrtA * np.linalg.norm(
            div @ y
        )
        z = z_new
        pri_hist.append(r_norm)
        dual_hist.append(s_norm)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break

        if settings.penalty_adapt and it % PENALTY_PERIOD == 0:
            new_rho = rho
            if r_norm > PENALTY_RATIO * s_norm:
                new_rho = rho * PENALTY_GROW
            elif s_norm > PENALTY_RATIO * r_norm:
                new_rho = rho / PENALTY_GROW
            if new_rho != rho:
                rho = new_rho
                fact = Factorization(_ustep_matrix(ops, W, alpha, rho * sqrtA), sources)

    if not np.isfinite(u).all():
        raise SolverError("solver produced non-finite values")
    return DistanceField(
        u=u,
        sources=sources,
        iterations=it,
        converged=converged,
        primal_residuals=np.array(pri_hist),
        dual_residuals=np.array(dual_hist),
        alpha=alpha,
        eps_pri_final=float(eps_pri),
        eps_dual_final=float(eps_dual),
    )


def _project_rows(w: np.ndarray, block: int) -> np.ndarray:
    rows = w.reshape(-1, block)
    nrm = np.linalg.norm(rows, axis=1)
    out = rows.copy()
    over = nrm > 1.0
    out[over] /= nrm[over, None]
    return out.ravel()
