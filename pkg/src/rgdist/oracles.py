"""Analytical solutions and an independent reference solver.

These anchor the ADMM solvers: closed-form regularized distances on the
circle (Dirichlet and Hessian energies) and the flat disk, an exhaustive
metric check on the circle, a 1D ring discretization driven through the
same ADMM code path as the mesh solver, and a primal-dual hybrid gradient
reference that shares no linear-solve or factorization code with ADMM.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import SolverError
from .fixed_source import AdmmSettings, solve_fixed_source
from .operators import DiffOps
from .regularizers import RegularizerMatrix, SCALE_EXPONENTS

TWO_PI = 2.0 * np.pi


def circle_dirichlet_exact(x, alpha: float):
    """Dirichlet-regularized distance to the point 0 on the unit circle.

    Piecewise: the exact distance outside a parabolic cap of half-width
    alpha around the antipode; for alpha >= pi the solution saturates at
    the alpha = pi profile.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a = min(float(alpha), np.pi)
    L = np.pi - a
    xh = np.mod(np.asarray(x, dtype=np.float64), TWO_PI)
    mid = np.pi - 0.5 * a - (xh - np.pi) ** 2 / (2.0 * a)
    out = np.where(xh <= L, xh, np.where(xh >= TWO_PI - L, TWO_PI - xh, mid))
    return out if out.ndim else float(out)


def circle_hessian_exact(x, alpha: float):
    """Hessian(= bilaplacian in 1D)-regularized distance on the circle.

    Quartic cap of half-width c = (3 alpha)^(1/3) around the antipode.
    Only valid while the cap stays inside the domain (c < pi).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    c = np.cbrt(3.0 * alpha)
    if c >= np.pi:
        raise ValueError(
            f"smoothing region (3*alpha)^(1/3) = {c:.4f} reaches the source; "
            "the closed form only covers c < pi"
        )
    xh = np.mod(np.asarray(x, dtype=np.float64), TWO_PI)
    t = xh - np.pi
    mid = t**4 / (24.0 * alpha) - c**2 * t**2 / (4.0 * alpha) + np.pi - c + 5.0 * c**4 / (24.0 * alpha)
    out = np.where(xh <= np.pi - c, xh, np.where(xh >= np.pi + c, TWO_PI - xh, mid))
    return out if out.ndim else float(out)


def disk_exact(r, alpha: float, R: float = 1.0):
    """Dirichlet-regularized distance to the boundary of a flat disk.

    Parabolic cap of radius 2 alpha at the center, exact distance R - r
    outside. Requires 0 < 2 alpha < R (larger alpha is outside the
    regime the closed form covers).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if 2.0 * alpha >= R:
        raise ValueError("closed form requires 2*alpha < R")
    r = np.asarray(r, dtype=np.float64)
    if (r < -1e-12).any() or (r > R * (1 + 1e-12)).any():
        raise ValueError("radius outside [0, R]")
    out = np.where(r <= 2.0 * alpha, -(r**2) / (4.0 * alpha) + R - alpha, R - r)
    return out if out.ndim else float(out)


def circle_metric_check(alpha: float, grid: int) -> float:
    """Exhaustive triangle-inequality check of the circle solution.

    Returns max over all grid triplets (x, y, z) of
    u(x - y) - u(x - z) - u(z - y); nonpositive (up to rounding) when the
    regularized distance is a metric.
    """
    if grid < 3:
        raise ValueError("grid must be >= 3")
    x = TWO_PI * np.arange(grid) / grid
    U = circle_dirichlet_exact(x[:, None] - x[None, :], alpha)
    best = np.full((grid, grid), np.inf)
    for k in range(grid):
        np.minimum(best, U[:, k][:, None] + U[k, :][None, :], out=best)
    return float((U - best).max())


def ring_ops(N: int) -> DiffOps:
    """1D differential operators on a uniform N-sample ring of length 2 pi.

    Edges play the role of faces (one gradient component each), edge
    "areas" are the spacing h, and the Laplacian is the second difference
    over h, so all solver identities carry over with block size 1.
    """
    if N < 16:
        raise ValueError("N must be >= 16")
    h = TWO_PI / N
    i = np.arange(N)
    nxt = (i + 1) % N
    grad = sp.csr_matrix(
        (
            np.concatenate([-np.ones(N) / h, np.ones(N) / h]),
            (np.concatenate([i, i]), np.concatenate([i, nxt])),
        ),
        shape=(N, N),
    )
    face_areas = np.full(N, h)
    mass_F = sp.dia_matrix((face_areas, 0), shape=(N, N))
    div = (grad.T @ mass_F).tocsr()
    lap = sp.csr_matrix(
        (
            np.concatenate([np.full(N, 2.0 / h), np.full(N, -1.0 / h), np.full(N, -1.0 / h)]),
            (np.concatenate([i, i, i]), np.concatenate([i, nxt, (i - 1) % N])),
        ),
        shape=(N, N),
    )
    vertex_areas = np.full(N, h)
    mass_V = sp.dia_matrix((vertex_areas, 0), shape=(N, N))
    return DiffOps(
        grad=grad,
        div=div,
        laplacian=lap,
        vertex_areas=vertex_areas,
        face_areas=face_areas,
        mass_V=mass_V,
        mass_F=mass_F,
        total_area=float(N * h),
        block_size=1,
    )


#: tight defaults so the measured error is discretization, not solver slack
RING_SETTINGS = AdmmSettings(eps_abs=1e-9, eps_rel=1e-6, max_iter=100000)


def solve_ring_1d(
    N: int,
    alpha: float,
    kind: str = "dirichlet",
    source: int = 0,
    settings: Optional[AdmmSettings] = None,
):
    """Solve the ring problem with the mesh ADMM on 1D operators.

    ``kind`` selects the Dirichlet or bilaplacian (1D Hessian) energy;
    ``alpha`` is the raw weight matching the analytical formulas. Returns
    the :class:`~rgdist.fixed_source.DistanceField`.
    """
    ops = ring_ops(N)
    if kind == "dirichlet":
        W = RegularizerMatrix(ops.laplacian, "dirichlet", SCALE_EXPONENTS["dirichlet"])
    elif kind == "bilaplacian":
        # The closed-form solution is linear through the source, i.e. its
        # slope jumps there; a curvature penalty at the source sample would
        # be infinite in the limit and the minimizer would flatten out.
        # Summing the squared second difference over the non-source samples
        # realizes the natural (free) conditions the closed form satisfies.
        keep = np.setdiff1d(np.arange(N), [int(source) % N])
        Lk = ops.laplacian.tocsr()[keep]
        inv_mass = sp.dia_matrix((1.0 / ops.vertex_areas[keep], 0), shape=(N - 1, N - 1))
        W = RegularizerMatrix(
            (Lk.T @ inv_mass @ Lk).tocsr(), "bilaplacian", SCALE_EXPONENTS["bilaplacian"]
        )
    else:
        raise ValueError(f"kind must be 'dirichlet' or 'bilaplacian', got {kind!r}")
    if settings is None:
        settings = RING_SETTINGS
    settings = AdmmSettings(
        alpha_raw=alpha,
        rho=settings.rho,
        eps_abs=settings.eps_abs,
        eps_rel=settings.eps_rel,
        max_iter=settings.max_iter,
        over_relaxation=settings.over_relaxation,
        penalty_adapt=settings.penalty_adapt,
    )
    return solve_fixed_source(None, ops, W, [int(source)], settings)


@dataclass
class ReferenceResult:
    u: np.ndarray
    iterations: int
    residual: float


def reference_solve(
    mesh,
    ops: DiffOps,
    W: Optional[RegularizerMatrix],
    sources,
    alpha: float,
    tol: float = 1e-8,
    max_iter: int = 400000,
    check_every: int = 50,
    sigma_scale: float = 0.3,
) -> ReferenceResult:
    """Independent PDHG/Condat-Vu solve of the same convex problem.

    The quadratic term enters through plain gradient steps and the
    constraints through per-face ball projections plus the nonpositivity
    clamp on the sources; no linear system is ever solved, keeping this
    solver maximally independent of the ADMM path. Iterates until the
    primal-dual fixed-point residuals drop below ``tol * total_area``
    (the computable stand-in for the duality gap; see package docs).
    """
    n = ops.num_vertices
    if n > 500:
        raise ValueError("reference solver is restricted to n <= 500 (dense operators)")
    b = ops.block_size
    G = ops.grad.toarray()
    Wd = W.matrix.toarray() if (alpha > 0 and W is not None) else None
    Av = ops.vertex_areas
    srcs = np.unique(np.atleast_1d(np.asarray(sources, dtype=np.int64)))

    Gnorm = np.sqrt(_power_norm(G.T @ G))
    L_h = alpha * _power_norm(Wd) if Wd is not None else 0.0
    # sigma_scale < 1 weights the primal step; tau keeps the Condat-Vu
    # step-size condition 1/tau - sigma |G|^2 >= L_h/2 with 10% slack
    sigma = sigma_scale / Gnorm
    tau = 0.9 / (sigma * Gnorm**2 + 0.5 * L_h)

    u = np.zeros(n)
    p = np.zeros(b * ops.num_faces)
    target = tol * ops.total_area
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        gh = -Av if Wd is None else alpha * (Wd @ u) - Av
        u_new = u - tau * (gh + G.T @ p)
        u_new[srcs] = np.minimum(u_new[srcs], 0.0)
        q = p + sigma * (G @ (2.0 * u_new - u))
        p_new = q - sigma * _project_rows(q / sigma, b)
        if it % check_every == 0:
            rp = np.linalg.norm((u - u_new) / tau - G.T @ (p - p_new))
            rd = np.linalg.norm((p - p_new) / sigma - G @ (u - u_new))
            residual = rp + rd
            if residual <= target:
                u, p = u_new, p_new
                break
        u, p = u_new, p_new
    else:
        raise SolverError(
            f"reference solver did not reach residual {target:.3e} in {max_iter} iterations "
            f"(last {residual:.3e})"
        )
    return ReferenceResult(u=u, iterations=it, residual=float(residual))


def _project_rows(w: np.ndarray, block: int) -> np.ndarray:
    rows = w.reshape(-1, block)
    nrm = np.linalg.norm(rows, axis=1)
    out = rows.copy()
    over = nrm > 1.0
    out[over] /= nrm[over, None]
    return out.ravel()


def _power_norm(M: np.ndarray, iters: int = 60, seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric PSD dense matrix by power iteration."""
    if M is None:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = M @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam
