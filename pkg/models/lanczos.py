"""Restarted Lanczos with full reorthogonalization and locking.

Eigenpairs are found one at a time from the bottom of the spectrum. Each
converged Ritz vector is locked and every later Krylov vector is kept
orthogonal to the locked set, so degenerate levels come out as separate
orthonormal vectors.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

import config
from models.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-13


def _orthogonalize(vector: np.ndarray, basis: List[np.ndarray]) -> np.ndarray:
    # two passes of classical Gram-Schmidt
    for _ in range(2):
        for other in basis:
            vector = vector - other * np.vdot(other, vector)
    return vector


def _krylov_sweep(matvec, start, locked, krylov_dim, projector):
    """One Lanczos run from `start`; returns (lowest Ritz value, Ritz vector, breakdown flag)"""
    basis = [start]
    alphas, betas = [], []
    breakdown = False
    for step in range(krylov_dim):
        w = matvec(basis[-1])
        alpha = float(np.vdot(basis[-1], w).real)
        alphas.append(alpha)
        if step == krylov_dim - 1:
            break
        w = w - alpha * basis[-1]
        if betas:
            w = w - betas[-1] * basis[-2]
        if projector is not None:
            w = projector(w)
        w = _orthogonalize(w, locked + basis)
        beta = float(np.linalg.norm(w))
        if beta < BREAKDOWN_TOL:
            breakdown = True
            break
        betas.append(beta)
        basis.append(w / beta)
    if len(alphas) == 1:
        theta, coords = alphas[0], np.ones((1, 1))
    else:
        theta, coords = eigh_tridiagonal(np.array(alphas), np.array(betas[: len(alphas) - 1]),
                                         select="i", select_range=(0, 0))
        theta = theta[0]
    ritz = np.tensordot(coords[:, 0], np.array(basis[: len(alphas)]), axes=1)
    ritz = _orthogonalize(ritz, locked)
    return float(theta), ritz / np.linalg.norm(ritz), breakdown


def lowest_eigenpairs(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    k: int,
    tol: float,
    seed: int = config.DEFAULT_SEED,
    dtype=complex,
    projector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    krylov_dim: int = config.LANCZOS_KRYLOV_DIM,
    max_restarts: int = config.LANCZOS_MAX_RESTARTS,
) -> Tuple[np.ndarray, List[np.ndarray], List[float]]:
    """k lowest eigenpairs of a Hermitian operator given as a matvec.

    `tol` is the absolute residual bound ||Hv - lambda v||. `projector`, when
    given, must commute with the operator; the search then stays in its range.
    Raises ConvergenceError with every residual attached if a pair does not
    converge within `max_restarts` restarts.
    """
    rng = np.random.default_rng(seed)
    krylov_dim = max(2, min(krylov_dim, dim))
    values, vectors, residuals = [], [], []
    for pair in range(k):
        start = rng.standard_normal(dim)
        if np.issubdtype(np.dtype(dtype), np.complexfloating):
            start = start + 1j * rng.standard_normal(dim)
        start = start.astype(dtype)
        if projector is not None:
            start = projector(start)
        start = _orthogonalize(start, vectors)
        norm = float(np.linalg.norm(start))
        if norm < BREAKDOWN_TOL:
            # the (projected) space holds fewer than k states
            raise DomainError("bad_k", k, pair)
        start = start / norm

        residual = np.inf
        for restart in range(max_restarts + 1):
            theta, ritz, breakdown = _krylov_sweep(matvec, start, vectors, krylov_dim, projector)
            residual = float(np.linalg.norm(matvec(ritz) - theta * ritz))
            logger.debug("pair %d restart %d: theta=%.12g residual=%.3e breakdown=%s",
                         pair, restart, theta, residual, breakdown)
            if residual <= tol:
                break
            start = ritz
        else:
            residuals.append(residual)
            raise ConvergenceError("no_convergence", pair, max_restarts, residual,
                                   residuals=residuals + [np.inf] * (k - pair - 1))
        values.append(theta)
        vectors.append(ritz)
        residuals.append(residual)

    order = np.argsort(values, kind="stable")
    return (np.array(values)[order], [vectors[i] for i in order], [residuals[i] for i in order])
