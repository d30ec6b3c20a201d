"""
Bi-whitening a heteroskedastic score matrix
===========================================

Each model and each sample has its own noise level.  ``stabilize`` estimates a
row factor h and a column factor f from the singular value spectrum, so that
dividing by them makes the noise roughly homoskedastic.
"""

import warnings

import numpy as np

from uaggregation import SynthConfig, generate
from uaggregation.stabilize import normalize_rows, stabilize

warnings.simplefilter("ignore")


def aligned(a, b):
    # the factors are only identified up to scale
    return np.max(np.abs(a / a.mean() - b / b.mean()))


for d in (50, 100, 200):
    Y, truth = generate(SynthConfig(n=2000, d=d, seed=d))
    st = stabilize(normalize_rows(Y))
    h0, f0 = truth.noise_profile()
    print("d=%3d  max error h: %.3f  f: %.3f  theta_bar=%.3f" % (
        d, aligned(st.h_hat, h0), aligned(st.f_hat, f0), st.theta_bar))

# more models means better estimates of the sample factors, and vice versa

# after whitening, the noise variance of each sample column is nearly equal
Y, truth = generate(SynthConfig(n=2000, d=200, seed=4))
st = stabilize(normalize_rows(Y))
noise = ~truth.support


def spread(M):
    col = M[noise].var(axis=0)
    lo, hi = np.percentile(col, [5, 95])
    return hi / lo


print("95/5 percentile ratio of column noise variance, raw:      %.2f"
      % spread(normalize_rows(Y).values))
print("95/5 percentile ratio of column noise variance, whitened: %.2f" % spread(st.values))
