"""Sparse rank-one recovery by approximate message passing (AMP).

Iteration, for a ``d x n`` matrix ``A``::

    w^t     = A v^t - (n/d) u^{t-1}
    u^t     = soft_threshold(w^t, tau_t)
    v^{t+1} = A^T u^t - c_t v^t

These Onsager coefficients are the exact corrections when the noise in ``A``
has variance ``1/d`` per entry.  Bi-whitened matrices carry noise of variance
``1/n``, so :func:`run_amp` feeds the recursion ``sqrt(n/d) * Ytilde`` by
default (``AmpConfig.matrix_scale="model"``).  Soft thresholding with a
quantile threshold is positively homogeneous, so the pair ``(v^{t+1}, u^t)``
is rescaled jointly to ``||v^{t+1}|| = sqrt(n)`` after every step without
changing any direction.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import AmpDivergenceError, ConfigError
from .stabilize import StabilizedMatrix
from .synthgen import keep_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmpConfig:
    omega: float = 0.3
    max_iters: int = 100
    tol: float = 1e-6
    #: "derivative": c_t = ||u^t||_0 / d;  "literal": c_t = ||w^t||_0 / d
    onsager_mode: str = "derivative"
    #: "quantile": keep the ceil(omega d) largest |w|;  "literal": zero a fraction omega
    threshold_mode: str = "quantile"
    #: "model" runs on sqrt(n/d) * Ytilde, "none" on Ytilde as given
    matrix_scale: str = "model"
    #: survivor count overriding omega in quantile mode (set when constant rows are dropped)
    keep: int | None = None

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise ConfigError("omega must lie in (0, 1)")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.onsager_mode not in ("derivative", "literal"):
            raise ConfigError("onsager_mode must be 'derivative' or 'literal'")
        if self.threshold_mode not in ("quantile", "literal"):
            raise ConfigError("threshold_mode must be 'quantile' or 'literal'")
        if self.matrix_scale not in ("model", "none"):
            raise ConfigError("matrix_scale must be 'model' or 'none'")
        if self.keep is not None and self.keep < 1:
            raise ConfigError("keep must be >= 1")


@dataclass(frozen=True)
class AmpState:
    t: int
    v_t: np.ndarray        # current right iterate (v^t; v^{t+1} after a step)
    u_t: np.ndarray        # last thresholded left iterate
    w_t: np.ndarray | None = None
    tau_t: float = 0.0
    c_t: float = 0.0
    rel_change: float = float("inf")

    @classmethod
    def initial(cls, v0) -> "AmpState":
        v0 = np.asarray(v0, dtype=float)
        return cls(0, v0, None)


@dataclass(frozen=True)
class TraceRow:
    t: int
    tau: float
    c_t: float
    nnz: int
    rel_change: float
    cos_v_truth: float | None = None
    cos_u_truth: float | None = None


@dataclass(frozen=True)
class AmpRun:
    u_L: np.ndarray
    v_L: np.ndarray
    trace: list
    converged: bool
    iterations: int
    collapsed: bool = False


@dataclass(frozen=True)
class AggregationResult:
    v_hat: np.ndarray
    u_hat: np.ndarray
    omega_used: float
    iterations_run: int
    converged: bool
    trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    model_ids: tuple = ()
    sample_ids: tuple = ()
    dropped_models: tuple = ()


def soft_threshold(w, tau: float) -> np.ndarray:
    """Entrywise ``sign(w) * max(|w| - tau, 0)``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)


def select_threshold(w, omega: float, mode: str = "quantile", keep: int | None = None) -> float:
    """Threshold for the soft-thresholding step.

    ``quantile``: the ``ceil((1 - omega) d)``-th smallest ``|w|`` (clamped so at
    least one entry can survive); entries tied with the threshold shrink to
    zero, so at most ``ceil(omega d)`` survive.  ``keep`` overrides the survivor
    count directly (``keep >= d`` gives ``tau = 0``).  ``literal``: the smallest
    ``x`` with ``mean(|w| <= x) >= omega``.
    """
    if not 0 < omega < 1:
        raise ValueError("omega must lie in (0, 1)")
    a = np.sort(np.abs(np.asarray(w, dtype=float)))
    d = a.size
    if mode == "quantile":
        if keep is not None:
            k = d - min(int(keep), d)
        else:
            k = min(math.ceil((1 - omega) * d - 1e-9), d - 1)
        return float(a[k - 1]) if k > 0 else 0.0
    if mode == "literal":
        return float(a[keep_count(omega, d) - 1])
    raise ValueError("unknown threshold mode %r" % mode)


def _sign_of(x) -> float:
    total = float(np.sum(x))
    return -1.0 if total < 0 else 1.0


def init(Ytilde) -> np.ndarray:
    """``sqrt(n)`` times the top right singular vector, signed so its left partner sums >= 0."""
    A = np.asarray(getattr(Ytilde, "values", Ytilde), dtype=float)
    n = A.shape[1]
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size > 1 and s[0] - s[1] < 1e-8 * max(s[0], 1.0):
        warnings.warn("top singular value is not simple (gap %.2e); initialization "
                      "is resolved by index" % (s[0] - s[1]), RuntimeWarning, stacklevel=2)
    return math.sqrt(n) * _sign_of(U[:, 0]) * Vt[0]


def amp_step(state: AmpState, Ytilde, config: AmpConfig, renorm: bool = False) -> AmpState:
    """One AMP iteration on the matrix exactly as given (no internal scaling).

    With ``renorm=True`` the new pair ``(v^{t+1}, u^t)`` is rescaled jointly so
    that ``||v^{t+1}|| = sqrt(n)``; ``rel_change`` is measured after rescaling.
    """
    A = np.asarray(getattr(Ytilde, "values", Ytilde), dtype=float)
    d, n = A.shape
    v = state.v_t
    w = A @ v
    if state.u_t is not None:
        w = w - (n / d) * state.u_t
    tau = select_threshold(w, config.omega, config.threshold_mode, config.keep)
    u = soft_threshold(w, tau)
    # entries tied with tau up to rounding shrink to zero like exact ties
    u[np.abs(w) - tau <= 1e-12 * np.max(np.abs(w), initial=0.0)] = 0.0
    if config.onsager_mode == "derivative":
        c = np.count_nonzero(u) / d
    else:
        c = np.count_nonzero(w) / d
    v_next = A.T @ u - c * v
    if renorm:
        norm = np.linalg.norm(v_next)
        if norm > 0 and np.isfinite(norm):
            scale = math.sqrt(n) / norm
            v_next = v_next * scale
            u = u * scale
    if not (np.all(np.isfinite(v_next)) and np.all(np.isfinite(u))):
        raise AmpDivergenceError(state.t)
    vnorm = np.linalg.norm(v)
    rel = float(np.linalg.norm(v_next - v) / vnorm) if vnorm > 0 else float("inf")
    return AmpState(state.t + 1, v_next, u, w, tau, c, rel)


def _cos(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def run_amp(Ytilde, config: AmpConfig, u_truth=None, v_truth=None, v0=None) -> AmpRun:
    """Iterate until ``max_iters`` steps or ``rel_change < tol``.

    ``u_truth``/``v_truth`` (targets in whitened coordinates) only add cosine
    columns to the trace.  ``v0`` overrides the spectral start (it must come
    from :func:`init` on the same matrix).  The returned pair obeys
    ``sum(u_L) >= 0``.
    """
    A = np.asarray(getattr(Ytilde, "values", Ytilde), dtype=float)
    d, n = A.shape
    if config.matrix_scale == "model":
        A = A * math.sqrt(n / d)
    state = AmpState.initial(init(A) if v0 is None else v0)
    trace = []
    converged = collapsed = False
    for _ in range(config.max_iters + 1):
        state = amp_step(state, A, config, renorm=True)
        nnz = int(np.count_nonzero(state.u_t))
        trace.append(TraceRow(
            state.t - 1, state.tau_t, state.c_t, nnz, state.rel_change,
            None if v_truth is None else _cos(state.v_t, v_truth),
            None if u_truth is None else _cos(state.u_t, u_truth),
        ))
        if nnz == 0:
            collapsed = True
            warnings.warn("AMP collapsed: every weight was thresholded to zero",
                          RuntimeWarning, stacklevel=2)
            break
        if state.rel_change < config.tol:
            converged = True
            break
    sign = _sign_of(state.u_t)
    return AmpRun(sign * state.u_t, sign * state.v_t, trace, converged, len(trace), collapsed)


def renormalize(u_L, v_L, stab: StabilizedMatrix, omega: float = float("nan"),
                run: AmpRun | None = None) -> AggregationResult:
    """Map whitened estimates back: ``v_hat = F v_L``, ``u_hat = H u_L``."""
    u_L = np.asarray(u_L, dtype=float)
    v_L = np.asarray(v_L, dtype=float)
    if u_L.shape != (stab.shape[0],) or v_L.shape != (stab.shape[1],):
        raise ValueError("estimate lengths do not match the stabilized matrix")
    v_hat = stab.col_scale * v_L
    u_hat = stab.row_scale * u_L
    return AggregationResult(
        v_hat, u_hat, omega,
        run.iterations if run else 0,
        run.converged if run else False,
        run.trace if run else [],
    )
