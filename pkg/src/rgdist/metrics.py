"""Metric-quality audits: symmetry error, triangle-inequality violations,
max-error percentages, gradient-norm fields.

Triplet sampling is exhaustive for small matrices and seeded/chunked
otherwise; chunk seeds derive from the main seed, so results do not
depend on worker count (``RGD_THREADS`` only caps the pool).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .operators import DiffOps

EXHAUSTIVE_LIMIT = 300  # audit all triplets up to this matrix size
_CHUNK = 16384


@dataclass
class AuditReport:
    """Metric-quality numbers for one distance matrix."""

    symmetry_max: float
    symmetry_mean: float
    tri_violation_pct: float
    tri_max_violation: float
    mode: str
    triplets: int
    max_error_pct: Optional[float] = None


def gradient_norm_field(ops: DiffOps, u: np.ndarray) -> np.ndarray:
    """Per-face |grad u|."""
    return ops.gradient_norms(u)


def matrix_gradient_max(ops: DiffOps, D: np.ndarray) -> float:
    """Max per-face gradient norm over all columns of a distance matrix."""
    GD = (ops.grad @ D).reshape(-1, ops.block_size, D.shape[1])
    return float(np.sqrt((GD**2).sum(axis=1)).max())


def symmetry_error(D: np.ndarray, total_area: float):
    """Max and mean of |D(x,y) - D(y,x)| / sqrt(A) over ordered pairs x != y."""
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    M = np.abs(D - D.T) / np.sqrt(total_area)
    mx = float(M.max()) if n else 0.0
    mean = float(M.sum() / (n * (n - 1))) if n > 1 else 0.0
    return mx, mean


def max_error_vs(u: np.ndarray, ref: np.ndarray) -> float:
    """100 * max|u - ref| / max(ref)."""
    u = np.asarray(u, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if u.shape != ref.shape:
        raise ValueError("length mismatch")
    denom = ref.max()
    if not denom > 0:
        raise ValueError("reference field has no positive maximum")
    return float(100.0 * np.abs(u - ref).max() / denom)


def _worker_count() -> int:
    env = os.environ.get("RGD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def fixed_pair_errors(D: np.ndarray, i: int, j: int) -> np.ndarray:
    """Per-vertex one-sided violations max(0, D(i,j) - D(i,k) - D(k,j))."""
    Ds = 0.5 * (D + D.T)
    return np.maximum(Ds[i, j] - Ds[i, :] - Ds[:, j], 0.0)


def triangle_audit(
    D: np.ndarray,
    total_area: float,
    sample_size: int = 100000,
    seed: int = 0,
    eps_scale: float = 1e-9,
    exhaustive: Optional[bool] = None,
) -> AuditReport:
    """Count triangle-inequality violations of a (symmetrized) matrix.

    A triplet (x, y, z) violates when D(x,y) > D(x,z) + D(z,y) + eps with
    eps = ``eps_scale`` * max(D). All triplets are tested when
    n <= EXHAUSTIVE_LIMIT (or ``exhaustive=True``), otherwise
    ``sample_size`` seeded uniform triplets.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    Ds = 0.5 * (D + D.T)
    eps = eps_scale * (Ds.max() if n else 0.0)
    sym_max, sym_mean = symmetry_error(D, total_area)

    if exhaustive is None:
        exhaustive = n <= EXHAUSTIVE_LIMIT
    if exhaustive:
        viol, worst, total = _audit_exhaustive(Ds, eps)
        mode = "exhaustive"
    else:
        viol, worst, total = _audit_sampled(Ds, eps, sample_size, seed)
        mode = "sampled"

    pct = 100.0 * viol / total if total else 0.0
    return AuditReport(
        symmetry_max=sym_max,
        symmetry_mean=sym_mean,
        tri_violation_pct=pct,
        tri_max_violation=worst,
        mode=mode,
        triplets=total,
    )


def _audit_exhaustive(Ds: np.ndarray, eps: float):
    n = Ds.shape[0]
    if n < 3:
        return 0, 0.0, 0
    viol = 0
    worst = 0.0
    iu = np.triu_indices(n, k=1)
    for k in range(n):
        gap = Ds - (Ds[:, k][:, None] + Ds[k, :][None, :])
        g = gap[iu]
        keep = (iu[0] != k) & (iu[1] != k)
        g = g[keep]
        viol += int((g > eps).sum())
        if g.size:
            worst = max(worst, float(g.max()))
    total = (n - 2) * n * (n - 1) // 2
    return viol, max(worst, 0.0), total


def _audit_sampled(Ds: np.ndarray, eps: float, sample_size: int, seed: int):
    n = Ds.shape[0]
    if n < 3 or sample_size < 1:
        return 0, 0.0, 0
    chunks = [(c, min(_CHUNK, sample_size - c * _CHUNK)) for c in range((sample_size + _CHUNK - 1) // _CHUNK)]

    def run_chunk(args):
        cidx, count = args
        rng = np.random.default_rng((seed, cidx))
        need = count
        viol = 0
        worst = 0.0
        while need > 0:
            ijz = rng.integers(0, n, size=(3, need))
            ok = (ijz[0] != ijz[1]) & (ijz[1] != ijz[2]) & (ijz[0] != ijz[2])
            i, j, k = ijz[:, ok]
            gap = Ds[i, j] - Ds[i, k] - Ds[k, j]
            viol += int((gap > eps).sum())
            if gap.size:
                worst = max(worst, float(gap.max()))
            need -= int(ok.sum())
        return viol, worst

    workers = _worker_count()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, chunks))
    else:
        results = [run_chunk(c) for c in chunks]
    viol = sum(r[0] for r in results)
    worst = max((r[1] for r in results), default=0.0)
    return viol, max(worst, 0.0), sample_size
