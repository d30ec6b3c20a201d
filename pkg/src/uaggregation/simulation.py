"""Simulation and benchmark harness comparing U-aggregation with the baselines.

Rows are plain dicts in a fixed column order so they can be written straight
to long-form CSV and re-plotted.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .amp import AmpConfig
from .baselines import hetero_pca_aggregate, pca_aggregate, simple_average
from .cv import CvConfig
from .data import as_prediction_matrix
from .metrics import evaluate, model_performance, pearson, weight_concordance
from .pipeline import constant_rows, u_aggregate
from .stabilize import normalize_rows
from .synthgen import SynthConfig, generate

METHODS = ("u_aggregation_o", "u_aggregation", "average", "pca", "hetero_pca")
SIM_COLUMNS = ("method", "d", "n", "omega", "regime", "lambda", "replicate",
               "cor_v", "weight_concordance", "omega_hat")

FIG3_D = (50, 100, 150, 200)
FIG3_OMEGA = (0.1, 0.3, 0.5, 0.7)
REGIMES = ("homoskedastic", "heteroskedastic")
FIG4_LAMBDA = (0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class Cell:
    n: int
    d: int
    omega: float
    regime: str
    lam: float | None = None


def fig3_cells(n=1000):
    return [Cell(n, d, om, reg) for reg in REGIMES for om in FIG3_OMEGA for d in FIG3_D]


def fig4_cells(n=1000, d=100, omega=0.3, lams=FIG4_LAMBDA):
    return [Cell(n, d, omega, reg, lam) for reg in REGIMES for lam in lams]


def run_methods(Y, methods=METHODS, omega=None, cv: CvConfig | None = None,
                amp: AmpConfig | None = None, center=False):
    """Fit every requested method; returns ``{method: (v_hat, u_hat or None, omega_hat)}``."""
    Y = as_prediction_matrix(Y)
    amp = amp or AmpConfig()
    out = {}
    Ynorm = None
    for m in methods:
        if m == "u_aggregation_o":
            if omega is None:
                raise ValueError("u_aggregation_o needs the true omega")
            r = u_aggregate(Y, omega, amp=amp, center=center)
            out[m] = (r.v_hat, r.u_hat, omega)
        elif m == "u_aggregation":
            r = u_aggregate(Y, None, cv=cv or CvConfig(amp=amp, center=center), amp=amp,
                            center=center)
            out[m] = (r.v_hat, r.u_hat, r.omega_used)
        else:
            if Ynorm is None:
                kept = ~constant_rows(Y.values, center)
                Ynorm = normalize_rows(Y.select_models(kept), center=center)
            fn = {"average": simple_average, "pca": pca_aggregate,
                  "hetero_pca": hetero_pca_aggregate}[m]
            b = fn(Ynorm)
            u = None
            if b.u_hat is not None:
                u = np.zeros(Y.shape[0])
                u[kept] = b.u_hat
            out[m] = (b.v_hat, u, None)
    return out


def _replicate(args):
    cell, rep, seed, methods, cv_seed = args
    cfg = SynthConfig(n=cell.n, d=cell.d, omega=cell.omega, noise_regime=cell.regime,
                      signal_norm=cell.lam, seed=seed + rep)
    Y, truth = generate(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fits = run_methods(Y, methods, omega=cell.omega, cv=CvConfig(seed=cv_seed))
        rho = model_performance(Y, truth.v)
    rows = []
    for m in methods:
        v_hat, u_hat, om_hat = fits[m]
        conc = None
        if u_hat is not None:
            try:
                conc = weight_concordance(u_hat, rho)
            except ValueError:
                conc = float("nan")
        rows.append({
            "method": m, "d": cell.d, "n": cell.n, "omega": cell.omega, "regime": cell.regime,
            # the grid value when one is set, so rows group exactly by cell
            "lambda": truth.lam if cell.lam is None else cell.lam, "replicate": rep, "cor_v": pearson(v_hat, truth.v),
            "weight_concordance": conc, "omega_hat": om_hat,
        })
    return rows


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("UAGG_WORKERS", "1")))
    except ValueError:
        return 1


def simulate(cells, replicates=1, seed=0, methods=METHODS, workers=None, cv_seed=0):
    """Run every (cell, replicate); rows come back in canonical (cell, replicate, method) order."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    jobs = [(c, r, seed, tuple(methods), cv_seed) for c in cells for r in range(replicates)]
    workers = workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_replicate, jobs))
    else:
        chunks = [_replicate(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def benchmark(Y, v_truth, omega=None, cv=None, amp=None, center=False, methods=None):
    """Evaluate every method against a known truth vector; one EvalReport per method."""
    Y = as_prediction_matrix(Y)
    if methods is None:
        methods = tuple(m for m in METHODS if omega is not None or m != "u_aggregation_o")
    fits = run_methods(Y, methods, omega=omega, cv=cv, amp=amp, center=center)
    return [evaluate(m, fits[m][0], v_truth, Y, u_hat=fits[m][1]) for m in methods], fits
