"""K-fold cross-validation of the sparsity level ``omega``."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .amp import AmpConfig, init
from .data import as_prediction_matrix
from .exceptions import ConfigError, InputError
from .pipeline import constant_rows, fit_whitened, prepare

DEFAULT_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


@dataclass(frozen=True)
class CvConfig:
    K: int = 5
    grid: tuple = DEFAULT_GRID
    seed: int = 0
    amp: AmpConfig = field(default_factory=AmpConfig)
    center: bool = False

    def __post_init__(self):
        if self.K < 2:
            raise ConfigError("K must be >= 2")
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ConfigError("omega grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("omega grid must be strictly ascending")
        if any(not 0 < g < 1 for g in grid):
            raise ConfigError("omega grid values must lie in (0, 1)")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class CvReport:
    omega_hat: float
    grid: tuple
    losses: np.ndarray          # len(grid) x K
    fold_assignment: np.ndarray
    warnings: tuple = ()

    @property
    def total_loss(self) -> np.ndarray:
        return self.losses.sum(axis=1)

    def to_json(self) -> str:
        return json.dumps({
            "omega_hat": self.omega_hat,
            "grid": list(self.grid),
            "losses": self.losses.tolist(),
            "total_loss": self.total_loss.tolist(),
            "fold_assignment": self.fold_assignment.tolist(),
            "warnings": list(self.warnings),
        }, indent=1)

    def loss_csv(self) -> str:
        K = self.losses.shape[1]
        lines = ["omega," + ",".join("fold_%d" % k for k in range(K))]
        for om, row in zip(self.grid, self.losses):
            lines.append(",".join([repr(om)] + [repr(float(x)) for x in row]))
        return "\n".join(lines) + "\n"


def split_folds(n: int, K: int, seed=0) -> np.ndarray:
    """Random partition of ``range(n)`` into ``K`` folds whose sizes differ by at most one."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    if n < K:
        raise ConfigError("cannot split %d samples into %d folds" % (n, K))
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=int)
    assignment[perm] = np.arange(n) % K
    return assignment


def _training_fits(Y, folds, k, config: CvConfig):
    """Prepared training matrix and shared AMP start for fold ``k`` (independent of omega)."""
    train = Y.select_samples(folds != k)
    prep = prepare(train, center=config.center)
    return prep, init(prep.stabilized)


def fold_weights(Y, config: CvConfig, omega: float, k: int, folds=None) -> np.ndarray:
    """Model weights learned with fold ``k`` held out (zeros for dropped models)."""
    Y = as_prediction_matrix(Y)
    folds = split_folds(Y.shape[1], config.K, config.seed) if folds is None else folds
    prep, v0 = _training_fits(Y, folds, k, config)
    res, _, _ = fit_whitened(prep, replace(config.amp, omega=omega), v0=v0)
    u = np.zeros(Y.shape[0])
    u[prep.kept] = res.u_hat
    return u


def heldout_loss(Yk: np.ndarray, u_hat: np.ndarray, center: bool = False):
    """Reconstruction loss ``||Y_k - u v^T||_F^2`` with ``v = Y_k^T u`` and ``u`` at unit norm.

    ``Y_k`` is renormalized row-wise on the held-out columns; rows that are
    constant there are excluded.  Returns ``(loss, n_excluded)``.
    """
    const = constant_rows(Yk, center)
    X = Yk[~const]
    if center:
        X = X - X.mean(axis=1, keepdims=True)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    u = u_hat[~const]
    norm = np.linalg.norm(u)
    u = u / norm if norm > 0 else u
    v = X.T @ u
    return float(np.sum((X - np.outer(u, v)) ** 2)), int(const.sum())


def cv_omega(Y, config: CvConfig | None = None) -> CvReport:
    """Select ``omega`` from the grid by held-out rank-one reconstruction loss.

    Ties go to the smallest ``omega``.
    """
    config = config or CvConfig()
    Y = as_prediction_matrix(Y)
    n = Y.shape[1]
    folds = split_folds(n, config.K, config.seed)
    losses = np.zeros((len(config.grid), config.K))
    notes = []
    for k in range(config.K):
        prep, v0 = _training_fits(Y, folds, k, config)
        notes.extend("fold %d: %s" % (k, m) for m in prep.notes)
        Yk = Y.values[:, folds == k]
        for i, om in enumerate(config.grid):
            res, run, amp_notes = fit_whitened(prep, replace(config.amp, omega=om), v0=v0)
            u = np.zeros(Y.shape[0])
            u[prep.kept] = res.u_hat
            losses[i, k], excluded = heldout_loss(Yk, u, config.center)
            if excluded and i == 0:
                notes.append("fold %d: %d model row(s) constant on held-out samples, "
                             "excluded from the loss" % (k, excluded))
    if not np.all(np.isfinite(losses)):
        raise ArithmeticError("non-finite cross-validation loss")
    total = losses.sum(axis=1)
    best = int(np.flatnonzero(total <= total.min() + 1e-12 * abs(total.min()))[0])
    return CvReport(config.grid[best], config.grid, losses, folds, tuple(notes))
