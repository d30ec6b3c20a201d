"""Variance stabilization (bi-whitening) of normalized prediction matrices.

The noise in the row-normalized matrix has an approximately rank-one variance
profile ``S = h f^T / n``.  The diagonal of the resolvent of the symmetrized
matrix, evaluated at ``i * theta_bar`` with ``theta_bar`` the median singular
value, estimates the solution ``g`` of the Dyson equation; for a rank-one
profile ``g`` determines ``h`` and ``f`` up to a common scale.  Rescaling rows
by ``n^{1/4} h^{1/2}`` and columns by ``n^{1/4} f^{1/2}`` then leaves noise of
roughly constant variance ``1/n``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import PredictionMatrix, as_prediction_matrix
from .exceptions import DegenerateSpectrumError, DysonNormalizerError, ZeroNormRowError

logger = logging.getLogger(__name__)

FLOOR_EPS = 1e-8


@dataclass(frozen=True)
class NormalizedMatrix:
    values: np.ndarray
    row_norms: np.ndarray
    centered: bool = False
    model_ids: tuple = ()
    sample_ids: tuple = ()

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class StabilizedMatrix:
    values: np.ndarray
    h_hat: np.ndarray
    f_hat: np.ndarray
    theta_bar: float
    g1: np.ndarray
    g2: np.ndarray
    transposed: bool = False
    singular_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    floor_count: int = 0
    identity: bool = False

    @property
    def shape(self):
        return self.values.shape

    @property
    def row_scale(self) -> np.ndarray:
        """Diagonal of ``H = diag(n^{1/4} h^{1/2})``."""
        n = self.values.shape[1]
        return n ** 0.25 * np.sqrt(self.h_hat)

    @property
    def col_scale(self) -> np.ndarray:
        n = self.values.shape[1]
        return n ** 0.25 * np.sqrt(self.f_hat)

    @classmethod
    def unscaled(cls, values) -> "StabilizedMatrix":
        """Wrap a matrix that needs no whitening (``H = F = I``)."""
        values = np.asarray(values, dtype=float)
        d, n = values.shape
        return cls(values, np.full(d, n ** -0.5), np.full(n, n ** -0.5), float("nan"),
                   np.full(d, np.nan), np.full(n, np.nan), identity=True)

    def reconstruct(self) -> np.ndarray:
        """Undo the whitening, returning the normalized input matrix."""
        return self.row_scale[:, None] * self.values * self.col_scale[None, :]


def normalize_rows(Y, center: bool = False) -> NormalizedMatrix:
    """Scale every model row to unit Euclidean norm, optionally after centering."""
    Y = as_prediction_matrix(Y)
    X = np.array(Y.values, dtype=float)
    if center:
        X -= X.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(X, axis=1)
    scale = np.abs(Y.values).max(axis=1)
    bad = norms <= 1e-12 * np.maximum(scale, np.finfo(float).tiny)
    if np.any(bad):
        raise ZeroNormRowError([Y.model_ids[i] for i in np.flatnonzero(bad)])
    return NormalizedMatrix(X / norms[:, None], norms, center, Y.model_ids, Y.sample_ids)


def resolvent_diagonals(U, theta, V):
    """Imaginary resolvent diagonals at ``i * median(theta)``.

    ``U`` is ``d x d``, ``theta`` holds the ``d`` singular values and ``V`` is
    ``n x d`` (right singular vectors as columns), with ``d <= n``.
    Returns ``(g1, g2, theta_bar)``.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if U.shape[0] > V.shape[0]:
        raise ValueError("resolvent_diagonals expects d <= n; transpose first")
    theta_bar = float(np.median(theta))
    # relative test: a noiseless low-rank matrix has rounding-level trailing values
    if not theta_bar > 1e-10 * float(np.max(theta)):
        raise DegenerateSpectrumError(
            "degenerate spectrum: median singular value is zero (noiseless low-rank input?)")
    weights = theta_bar / (theta ** 2 + theta_bar ** 2)
    g1 = (U ** 2) @ weights
    g2 = 1.0 / theta_bar + (V ** 2) @ (weights - 1.0 / theta_bar)
    return g1, g2, theta_bar


def _factor(g, theta_bar, size, label):
    norm2 = size - theta_bar * np.sum(np.abs(g))
    if not norm2 > 0:
        raise DysonNormalizerError(
            "Dyson normalizer nonpositive for %s (%.3g); the rank-one variance "
            "model is grossly violated or the matrix is too small" % (label, norm2))
    raw = 1.0 / g - theta_bar
    positive = raw[raw > 0]
    if positive.size == 0:
        raise DysonNormalizerError("no positive Dyson factors for %s" % label)
    floor = FLOOR_EPS * np.median(positive)
    low = raw < floor
    return np.where(low, floor, raw) / np.sqrt(norm2), int(low.sum())


def dyson_factors(g1, g2, theta_bar):
    """Rank-one variance factors ``(h_hat, f_hat, floor_count)`` from resolvent diagonals.

    Entries of ``1/g - theta_bar`` below ``1e-8`` times the median positive
    entry are floored so the factors stay strictly positive; the number of
    floored entries is returned so callers can surface it.
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    h_hat, nh = _factor(g1, theta_bar, g1.size, "rows")
    f_hat, nf = _factor(g2, theta_bar, g2.size, "columns")
    if nh or nf:
        warnings.warn("floored %d row and %d column Dyson factors" % (nh, nf), RuntimeWarning,
                      stacklevel=2)
    return h_hat, f_hat, nh + nf


def stabilize(Ynorm) -> StabilizedMatrix:
    """Bi-whiten a row-normalized matrix.

    Accepts a :class:`NormalizedMatrix` or a plain array.  Wide and tall
    inputs are both supported; tall ones (``d > n``) are processed transposed
    and the factors are returned in the caller's orientation.
    """
    X = np.asarray(getattr(Ynorm, "values", Ynorm), dtype=float)
    d, n = X.shape
    transposed = d > n
    work = X.T if transposed else X
    # full spectrum needed: the resolvent sums run over every singular value
    U, theta, Vt = np.linalg.svd(work, full_matrices=False)
    g_rows, g_cols, theta_bar = resolvent_diagonals(U, theta, Vt.T)
    a, b, floored = dyson_factors(g_rows, g_cols, theta_bar)
    if transposed:
        h_hat, f_hat, g1, g2 = b, a, g_cols, g_rows
    else:
        h_hat, f_hat, g1, g2 = a, b, g_rows, g_cols
    row = n ** 0.25 * np.sqrt(h_hat)
    col = n ** 0.25 * np.sqrt(f_hat)
    Yt = X / row[:, None] / col[None, :]
    return StabilizedMatrix(Yt, h_hat, f_hat, theta_bar, g1, g2, transposed, theta, floored)
