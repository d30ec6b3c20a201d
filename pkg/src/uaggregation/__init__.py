"""Unsupervised aggregation of predictions from many pre-trained models.

The pipeline row-normalizes a ``d x n`` prediction matrix, rescales rows and
columns so the noise is roughly homoskedastic, recovers a sparse rank-one
signal by approximate message passing and maps the result back to the input
scale.  The sparsity level can be chosen by K-fold cross-validation.
"""

__version__ = "0.1.0"

from .amp import AggregationResult, AmpConfig, run_amp
from .baselines import hetero_pca_aggregate, pca_aggregate, simple_average
from .cv import CvConfig, CvReport, cv_omega
from .data import PredictionMatrix, read_matrix_csv, write_matrix_csv
from .exceptions import (AmpDivergenceError, ConfigError, DegenerateSpectrumError,
                         DysonNormalizerError, InputError, UAggregationError, ZeroNormRowError)
from .metrics import EvalReport, cosine, evaluate, model_performance, pearson, weight_concordance
from .pipeline import u_aggregate
from .stabilize import normalize_rows, stabilize
from .state_evolution import SeConfig, SeTrace, se_run
from .synthgen import GroundTruth, SynthConfig, generate

__all__ = [
    "AggregationResult", "AmpConfig", "AmpDivergenceError", "ConfigError", "CvConfig",
    "CvReport", "DegenerateSpectrumError", "DysonNormalizerError", "EvalReport", "GroundTruth",
    "InputError", "PredictionMatrix", "SeConfig", "SeTrace", "SynthConfig", "UAggregationError",
    "ZeroNormRowError", "cosine", "cv_omega", "evaluate", "generate", "hetero_pca_aggregate",
    "model_performance", "normalize_rows", "pca_aggregate", "pearson", "read_matrix_csv",
    "run_amp", "se_run", "simple_average", "stabilize", "u_aggregate", "weight_concordance",
    "write_matrix_csv",
]
