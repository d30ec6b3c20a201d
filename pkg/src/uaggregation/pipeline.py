"""End-to-end U-aggregation: normalize, bi-whiten, AMP, renormalize."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .amp import AggregationResult, AmpConfig, init, renormalize, run_amp
from .data import PredictionMatrix, as_prediction_matrix
from .exceptions import DegenerateSpectrumError, ZeroNormRowError
from .stabilize import NormalizedMatrix, StabilizedMatrix, normalize_rows, stabilize
from .synthgen import keep_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prepared:
    normalized: NormalizedMatrix
    stabilized: StabilizedMatrix
    kept: np.ndarray          # boolean mask over the input models
    notes: tuple = ()


def constant_rows(values, center: bool) -> np.ndarray:
    X = np.asarray(values, dtype=float)
    if center:
        X = X - X.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(X, axis=1)
    scale = np.abs(values).max(axis=1)
    return norms <= 1e-12 * np.maximum(scale, np.finfo(float).tiny)


def prepare(Y, center: bool = False, drop_constant: bool = True) -> Prepared:
    """Row-normalize and bi-whiten, tolerating the two degenerate inputs.

    Constant (zero-norm) model rows carry no information; with
    ``drop_constant`` they are removed and later receive weight 0.  A
    noiseless low-rank matrix has a zero median singular value, leaving
    nothing to whiten; the identity scaling is used instead.
    """
    Y = as_prediction_matrix(Y)
    notes = []
    kept = np.ones(Y.shape[0], dtype=bool)
    if drop_constant:
        const = constant_rows(Y.values, center)
        if np.any(const):
            if const.sum() > Y.shape[0] - 2:
                raise ZeroNormRowError([m for m, c in zip(Y.model_ids, const) if c])
            notes.append("dropped %d constant model(s): %s"
                         % (const.sum(), ", ".join(m for m, c in zip(Y.model_ids, const) if c)))
            kept = ~const
            Y = Y.select_models(kept)
    Ynorm = normalize_rows(Y, center=center)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            stab = stabilize(Ynorm)
        notes.extend(str(w.message) for w in caught)
    except DegenerateSpectrumError as exc:
        notes.append("%s; using identity scaling" % exc)
        stab = StabilizedMatrix.unscaled(Ynorm.values)
    return Prepared(Ynorm, stab, kept, tuple(notes))


def effective_keep(omega: float, d_total: int, d_kept: int) -> int | None:
    """Survivor count on the kept rows; ``None`` when no rows were dropped.

    Dropped constant models count against the support budget, so the same
    ``ceil(omega * d_total)`` models survive as on the full matrix (capped at the
    number kept).
    """
    if d_kept == d_total:
        return None
    return min(keep_count(omega, d_total), d_kept)


def fit_whitened(prep: Prepared, amp: AmpConfig, v0=None, u_truth=None, v_truth=None):
    """AMP + renormalization on a prepared matrix; weights are returned for kept models only."""
    d_kept = int(np.count_nonzero(prep.kept))
    fit_amp = replace(amp, keep=effective_keep(amp.omega, prep.kept.size, d_kept))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        run = run_amp(prep.stabilized, fit_amp, u_truth=u_truth, v_truth=v_truth, v0=v0)
    res = renormalize(run.u_L, run.v_L, prep.stabilized, amp.omega, run)
    return res, run, [str(w.message) for w in caught]


def u_aggregate(Y, omega: float | None = None, *, cv=None, amp: AmpConfig | None = None,
                center: bool = False, drop_constant: bool = True) -> AggregationResult:
    """Aggregate the rows of ``Y`` without labels.

    With ``omega=None`` the sparsity level is chosen by K-fold cross-validation
    (``cv`` is a :class:`~uaggregation.cv.CvConfig`; defaults apply when it is
    omitted).  Returns the consensus scores ``v_hat`` (length n) and model
    weights ``u_hat`` (length d; dropped constant models get 0).
    """
    from .cv import CvConfig, cv_omega

    Y = as_prediction_matrix(Y)
    amp = amp or AmpConfig()
    notes = []
    cv_report = None
    if omega is None:
        cv = cv or CvConfig(amp=amp, center=center)
        cv_report = cv_omega(Y, cv)
        omega = cv_report.omega_hat
        notes.extend(cv_report.warnings)
    amp = replace(amp, omega=omega)
    prep = prepare(Y, center=center, drop_constant=drop_constant)
    notes.extend(prep.notes)
    res, run, amp_notes = fit_whitened(prep, amp)
    notes.extend(amp_notes)
    u_full = np.zeros(Y.shape[0])
    u_full[prep.kept] = res.u_hat + 0.0  # no negative zeros
    dropped = tuple(m for m, k in zip(Y.model_ids, prep.kept) if not k)
    out = replace(res, u_hat=u_full, warnings=notes, model_ids=Y.model_ids,
                  sample_ids=Y.sample_ids, dropped_models=dropped)
    if cv_report is not None:
        object.__setattr__(out, "cv_report", cv_report)
    return out
