"""Symmetric all-pairs regularized distances by consensus ADMM.

The n x n distance matrix is split into a column view X and a row view R,
each carrying its own gradient variable and duals, coupled through the
consensus variable D that is clamped nonnegative with a zero diagonal
every sweep. Both block solves share one prefactored system matrix
(alpha + rho1 sqrt(A)) W_D + rho2 sqrt(1/A) M_V for all iterations.

From zero initialization the two blocks receive identical inputs whenever
D is symmetric, so R == X, Q == Z, and nu == mu hold exactly along the
iteration; that mirror invariant is what keeps D symmetric at every
sweep. It is recorded (together with the transpose gap, which only closes
at convergence) every ``check_every`` iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .operators import DiffOps

DENSE_CAP_DEFAULT = 5000


@dataclass(frozen=True)
class AllPairsSettings:
    """Controls for the all-pairs solver; only the Dirichlet energy is
    supported, matching the product-manifold formulation."""

    alpha_hat: float = 0.0
    rho1: float = 2.0
    rho2: float = 2.0
    eps_abs: float = 1e-6
    eps_rel: float = 2e-4
    max_iter: int = 20000
    cap: int = DENSE_CAP_DEFAULT
    check_every: int = 50
    stop_every: int = 10  # cadence of the stopping tests (cost, not accuracy)
    regularizer: str = "dirichlet"

    def __post_init__(self):
        if self.alpha_hat < 0:
            raise ValueError("alpha_hat must be >= 0")
        if self.rho1 <= 0 or self.rho2 <= 0:
            raise ValueError("penalties must be positive")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.cap < 1 or self.check_every < 1 or self.stop_every < 1:
            raise ValueError("max_iter, cap, check_every, stop_every must be >= 1")


@dataclass
class DistanceMatrix:
    """Consensus all-pairs distance with structural diagnostics.

    ``matrix`` has an exactly zero diagonal and nonnegative entries; the
    gap histories are sampled every ``check_every`` iterations.
    """

    matrix: np.ndarray
    iterations: int
    converged: bool
    mirror_gaps: np.ndarray
    transpose_gaps: np.ndarray
    symmetry_gaps: np.ndarray


def consensus_update(X, R, mu, nu, rho2: float, total_area: float) -> np.ndarray:
    """One consensus step: averaged blocks plus scaled duals, clamped
    nonnegative, diagonal zeroed."""
    rho2_eff = rho2 / np.sqrt(total_area)
    D = np.maximum((mu + nu.T) / (2.0 * rho2_eff) + (X + R.T) / 2.0, 0.0)
    np.fill_diagonal(D, 0.0)
    return D


def solve_all_pairs(mesh, ops: DiffOps, settings: AllPairsSettings) -> DistanceMatrix:
    """Run the consensus ADMM until all residual tests pass.

    Raises when the vertex count exceeds ``settings.cap`` (the state is
    dense n x n and 3m x n) or a non-Dirichlet regularizer is requested.
    On ``max_iter`` the best iterate is returned flagged unconverged.
    """
    if settings.regularizer != "dirichlet":
        raise ValueError(
            f"all-pairs formulation supports only the dirichlet energy, "
            f"got {settings.regularizer!r}"
        )
    n = ops.num_vertices
    if n > settings.cap:
        raise ValueError(f"vertex count {n} exceeds the all-pairs cap {settings.cap}")
    if mesh is not None and mesh.num_vertices != n:
        raise ValueError("mesh and operators disagree on vertex count")

    m = ops.num_faces
    b = ops.block_size
    A = ops.total_area
    sqrtA = np.sqrt(A)
    alpha = settings.alpha_hat * sqrtA  # dirichlet scale rule
    rho1, rho2 = settings.rho1, settings.rho2
    rho1_eff = rho1 * sqrtA
    rho2_eff = rho2 / sqrtA
    eps_abs, eps_rel = settings.eps_abs, settings.eps_rel

    Av = ops.vertex_areas
    grad, div = ops.grad, ops.div
    W_P = ((alpha + rho1_eff) * ops.laplacian + rho2_eff * ops.mass_V).tocsc()
    try:
        fact = spla.splu(W_P)
    except RuntimeError as exc:
        raise SolverError(f"all-pairs system factorization failed: {exc}") from None

    M_P = 0.5 * np.outer(Av, np.ones(n))  # = 1/2 A_V A_V^T M_V^{-1}
    sqrt_af = np.sqrt(np.repeat(ops.face_areas, b))[:, None]

    X = np.zeros((n, n))
    R = np.zeros((n, n))
    D = np.zeros((n, n))
    Z = np.zeros((b * m, n))
    Q = np.zeros((b * m, n))
    Y = np.zeros((b * m, n))
    P = np.zeros((b * m, n))
    mu = np.zeros((n, n))
    nu = np.zeros((n, n))

    mirror_gaps, transpose_gaps, symmetry_gaps = [], [], []
    converged = False
    it = 0
    Z_prev = Q_prev = D_prev = None
    for it in range(1, settings.max_iter + 1):
        X = fact.solve(M_P - div @ Y + rho1_eff * (div @ Z) - Av[:, None] * mu
                       + rho2_eff * Av[:, None] * D)
        R = fact.solve(M_P - div @ P + rho1_eff * (div @ Q) - Av[:, None] * nu
                       + rho2_eff * Av[:, None] * D.T)

        GX = grad @ X
        GR = grad @ R
        stop_here = it % settings.stop_every == 0
        if stop_here:  # dual residuals need the previous iterate
            Z_prev, Q_prev, D_prev = Z, Q, D
        Z = _project_block_columns(Y / rho1_eff + GX, b)
        Q = _project_block_columns(P / rho1_eff + GR, b)
        D = consensus_update(X, R, mu, nu, rho2, A)

        Y = Y + rho1_eff * (GX - Z)
        P = P + rho1_eff * (GR - Q)
        mu = mu + rho2_eff * (X - D)
        nu = nu + rho2_eff * (R - D.T)

        if it % settings.check_every == 0:
            mirror_gaps.append(float(np.abs(R - X).max()))
            transpose_gaps.append(float(np.abs(R - X.T).max()))
            symmetry_gaps.append(float(np.abs(D - D.T).max()))

        if not stop_here:
            continue
        # gradient-split residual tests for both blocks
        ok = True
        for GU, ZZ, ZZp, YY in ((GX, Z, Z_prev, Y), (GR, Q, Q_prev, P)):
            r = np.linalg.norm(sqrt_af * (GU - ZZ))
            eps_pri = np.sqrt(b * m) * eps_abs * A + eps_rel * max(
                np.linalg.norm(sqrt_af * GU), np.linalg.norm(sqrt_af * ZZ)
            )
            if r > eps_pri:
                ok = False
                break
            s = rho1 * np.linalg.norm(div @ (ZZ - ZZp))
            eps_dual = np.sqrt(n) * eps_abs * A**2 + eps_rel * np.linalg.norm(div @ YY)
            if s > eps_dual:
                ok = False
                break
        if ok:
            # consensus residual tests
            scale_out = Av[:, None] * Av[None, :]
            r1 = np.linalg.norm(scale_out * (X - D))
            r2 = np.linalg.norm(scale_out * (R - D.T))
            eps1 = np.sqrt(n) * eps_abs * np.sqrt(A**3) + eps_rel * max(
                np.linalg.norm(scale_out * X), np.linalg.norm(scale_out * D)
            )
            eps2 = np.sqrt(n) * eps_abs * np.sqrt(A**3) + eps_rel * max(
                np.linalg.norm(scale_out * R), np.linalg.norm(scale_out * D.T)
            )
            s_c = rho2 * np.linalg.norm(scale_out * (D - D_prev))
            sqrt_av = np.sqrt(Av)
            w = sqrt_av[:, None] * sqrt_av[None, :]
            eps_dc = np.sqrt(n) * eps_abs * A + 0.5 * eps_rel * (
                np.linalg.norm(w * mu) + np.linalg.norm(w * nu)
            )
            if r1 <= eps1 and r2 <= eps2 and s_c <= eps_dc:
                converged = True
                break

    if not np.isfinite(D).all():
        raise SolverError("all-pairs solver produced non-finite values")
    return DistanceMatrix(
        matrix=D,
        iterations=it,
        converged=converged,
        mirror_gaps=np.array(mirror_gaps),
        transpose_gaps=np.array(transpose_gaps),
        symmetry_gaps=np.array(symmetry_gaps),
    )


def _project_block_columns(V: np.ndarray, block: int) -> np.ndarray:
    """Unit-ball projection of each (face, column) vector of a bm x n array."""
    n = V.shape[1]
    W = V.reshape(-1, block, n)
    nrm = np.sqrt((W**2).sum(axis=1))
    scale = np.where(nrm > 1.0, 1.0 / np.maximum(nrm, 1e-300), 1.0)
    return (W * scale[:, None, :]).reshape(-1, n)
