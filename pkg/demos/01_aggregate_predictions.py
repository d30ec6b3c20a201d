"""
Aggregating prediction scores without labels
============================================

A handful of models score the same samples.  Only some of them carry the
signal, and each has its own noise level and scale.  U-aggregation recovers a
consensus score and a sparse set of model weights from the score matrix alone.
"""

import warnings

import numpy as np

from uaggregation import SynthConfig, generate, u_aggregate
from uaggregation.metrics import pearson

warnings.simplefilter("ignore")

# 100 models scoring 1000 samples; 30% of the models are informative and the
# noise level of every model and sample is drawn from Unif(0, 2)
Y, truth = generate(SynthConfig(n=1000, d=100, omega=0.3, seed=1))
print("score matrix:", Y.shape, "(models x samples)")

# the sparsity level omega is unknown in practice, so pick it by 5-fold CV
res = u_aggregate(Y)
print("omega chosen by CV:", res.omega_used)
print("AMP iterations:", res.iterations_run, "converged:", res.converged)

# compare with the hidden truth
print("cor(v_hat, v):         %.4f" % pearson(res.v_hat, truth.v))
print("cor(column mean, v):   %.4f" % pearson(Y.values.mean(axis=0), truth.v))

# the weights are sparse and mostly land on informative models
picked = res.u_hat > 0
print("models kept:", picked.sum(), "of which informative:", (picked & truth.support).sum())

top = np.argsort(-res.u_hat)[:5]
for i in top:
    print("  %-10s weight=%.3f informative=%s" % (res.model_ids[i], res.u_hat[i],
                                                  bool(truth.support[i])))
