"""Restarted Lanczos with full reorthogonalization for the lowest eigenpair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NoConvergence

__all__ = ["GroundStateResult", "lanczos_ground_state"]


@dataclass(frozen=True)
class GroundStateResult:
    """Lowest eigenpair of a Hermitian operator.

    ``residual`` is the explicitly recomputed ``||H psi - E psi||``, not the
    Lanczos estimate. ``iterations`` counts matrix-vector products.
    """

    energy: float
    vector: np.ndarray
    residual: float
    converged: bool
    iterations: int = 0


def _apply(op, v):
    return op.matvec(v) if hasattr(op, "matvec") else op @ v


def lanczos_ground_state(
    op,
    dim: int,
    tol: float = 1e-9,
    max_iter: int = 20000,
    krylov_dim: int = 120,
    seed: int = 0,
    v0: np.ndarray | None = None,
    raise_on_failure: bool = True,
) -> GroundStateResult:
    """Lowest eigenpair by explicitly restarted Lanczos.

    Each cycle builds a Krylov basis of at most ``krylov_dim`` vectors with
    two passes of classical Gram-Schmidt against all previous vectors, then
    restarts from the best Ritz vector. The start vector is drawn from a
    seeded generator unless ``v0`` is given, so results are reproducible.

    Parameters
    ----------
    op
        Anything with ``matvec`` (or supporting ``@``) acting on length-``dim`` vectors.
    tol
        Required residual norm.
    max_iter
        Budget of matrix-vector products.

    Raises
    ------
    NoConvergence
        Budget exhausted and ``raise_on_failure`` is set.
    """
    if v0 is None:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    else:
        v = np.asarray(v0, dtype=np.complex128).copy()
    v /= np.linalg.norm(v)
    k = max(2, min(krylov_dim, dim))
    used = 0
    best = None

    while True:
        basis = np.zeros((k + 1, dim), dtype=np.complex128)
        basis[0] = v
        alphas, betas = [], []
        invariant = False
        for j in range(k):
            w = _apply(op, basis[j])
            used += 1
            alpha = np.vdot(basis[j], w).real
            alphas.append(alpha)
            w = w - alpha * basis[j]
            if j > 0:
                w -= betas[-1] * basis[j - 1]
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
            beta = np.linalg.norm(w)
            scale = max(abs(alpha), betas[-1] if betas else 0.0, 1.0)
            if beta <= 1e-13 * scale:
                invariant = True
                break
            betas.append(beta)
            basis[j + 1] = w / beta
            # cheap residual estimate every few steps
            if (j + 1) % 8 == 0 and j + 1 < k:
                theta, s = eigh_tridiagonal(
                    np.array(alphas), np.array(betas[:-1]), select="i", select_range=(0, 0)
                )
                if abs(beta * s[-1, 0]) < 0.1 * tol:
                    break
            if used >= max_iter:
                break

        m = len(alphas)
        if m == 1:
            theta, s = np.array([alphas[0]]), np.ones((1, 1))
        else:
            theta, s = eigh_tridiagonal(
                np.array(alphas), np.array(betas[: m - 1]), select="i", select_range=(0, 0)
            )
        y = s[:, 0] @ basis[:m]
        y /= np.linalg.norm(y)
        hy = _apply(op, y)
        used += 1
        energy = float(np.vdot(y, hy).real)
        res = float(np.linalg.norm(hy - energy * y))
        if best is None or res < best.residual:
            best = GroundStateResult(energy, y, res, res < tol, used)
        if res < tol:
            return best
        if invariant and res < 1e3 * tol:
            # Krylov space exhausted; only rounding is left
            return GroundStateResult(energy, y, res, True, used)
        if used >= max_iter:
            if raise_on_failure:
                raise NoConvergence(
                    f"Lanczos stopped after {used} matvecs with residual {best.residual:.3e}",
                    iterations=used,
                    residual=best.residual,
                )
            return GroundStateResult(best.energy, best.vector, best.residual, False, used)
        v = y
