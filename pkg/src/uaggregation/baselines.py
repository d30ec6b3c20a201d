"""Reference aggregators: simple average, PCA and rank-one HeteroPCA.

All three consume a row-normalized matrix and use the same sign convention
as the AMP estimator (model weights summing to a nonnegative value).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BaselineResult:
    v_hat: np.ndarray
    u_hat: np.ndarray | None
    method: str
    iterations: int = 0
    converged: bool = True


def _values(Ynorm):
    return np.asarray(getattr(Ynorm, "values", Ynorm), dtype=float)


def _top_eigvec(M):
    """Unit eigenvector of the largest eigenvalue, sign-aligned; also returns that eigenvalue."""
    evals, evecs = np.linalg.eigh(M)
    if evals.size > 1 and evals[-1] - evals[-2] < 1e-8 * max(abs(evals[-1]), 1.0):
        warnings.warn("leading eigenvalue is not simple; resolved by index", RuntimeWarning,
                      stacklevel=3)
    x = evecs[:, -1]
    if x.sum() < 0:
        x = -x
    return x, evals[-1]


def simple_average(Ynorm) -> BaselineResult:
    return BaselineResult(_values(Ynorm).mean(axis=0), None, "average")


def pca_aggregate(Ynorm) -> BaselineResult:
    """Top eigenvector of the ``d x d`` Gram matrix as weights; ``v = Y^T u``."""
    X = _values(Ynorm)
    u, _ = _top_eigvec(X @ X.T)
    return BaselineResult(X.T @ u, u, "pca")


def hetero_pca_aggregate(Ynorm, max_iters: int = 100, tol: float = 1e-8) -> BaselineResult:
    """Rank-one HeteroPCA: iteratively re-impute the Gram diagonal from its rank-one fit.

    Starts from the Gram matrix with its diagonal deleted; ``max_iters=1``
    is plain diagonal-deleted PCA.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    X = _values(Ynorm)
    G = X @ X.T
    off = G - np.diag(np.diag(G))
    N = off
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        x, lam = _top_eigvec(N)
        if it == max_iters:
            break
        new_diag = lam * x ** 2
        change = np.linalg.norm(new_diag - np.diag(N))
        N = off + np.diag(new_diag)
        if change < tol:
            x, lam = _top_eigvec(N)
            converged = True
            break
    return BaselineResult(X.T @ x, x, "hetero_pca", it, converged)
