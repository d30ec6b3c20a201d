"""Evaluation metrics: correlations, cosines and per-model performance."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .data import as_prediction_matrix


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two 1-D vectors of equal length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    nx, ny = np.linalg.norm(xc), np.linalg.norm(yc)
    if nx == 0 or ny == 0:
        raise ValueError("zero variance input")
    return float(np.clip(xc @ yc / (nx * ny), -1.0, 1.0))


def cosine(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("cosine of a zero vector is undefined")
    return float(np.clip(x @ y / (nx * ny), -1.0, 1.0))


def model_performance(Y, v) -> np.ndarray:
    """Squared correlation of every model row with the truth; constant rows score 0."""
    X = as_prediction_matrix(Y).values
    v = np.asarray(v, dtype=float)
    vc = v - v.mean()
    if np.linalg.norm(vc) == 0:
        raise ValueError("zero variance truth vector")
    Xc = X - X.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(Xc, axis=1)
    const = norms == 0
    if np.any(const):
        warnings.warn("%d constant model row(s) assigned rho = 0" % const.sum(), RuntimeWarning,
                      stacklevel=2)
    r = np.where(const, 0.0, (Xc @ vc) / np.where(const, 1.0, norms) / np.linalg.norm(vc))
    return np.clip(r, -1.0, 1.0) ** 2


def weight_concordance(u_hat, rho) -> float:
    u_hat = np.asarray(u_hat, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if u_hat.shape != rho.shape:
        raise ValueError("weights and performances differ in length")
    return pearson(u_hat, rho)


@dataclass(frozen=True)
class EvalReport:
    method: str
    cor_v: float
    cos_v: float
    cos_u: float | None
    weight_concordance: float | None
    best_model_id: str
    best_model_cor: float
    rho: tuple

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def evaluate(method, v_hat, v, Y, u_hat=None, u_true=None) -> EvalReport:
    """Score one aggregate against the truth and locate the best single model."""
    Y = as_prediction_matrix(Y)
    rho = model_performance(Y, v)
    best = int(np.argmax(rho))
    cor_v = pearson(v_hat, v)
    return EvalReport(
        method,
        cor_v,
        cosine(v_hat, v),
        None if u_hat is None or u_true is None else _safe(cosine, u_hat, u_true),
        None if u_hat is None else _safe(weight_concordance, u_hat, rho),
        Y.model_ids[best],
        float(np.sqrt(rho[best])),
        tuple(float(r) for r in rho),
    )
