"""
Predicting AMP accuracy with state evolution
============================================

On a whitened spiked model the AMP iterates have a deterministic limit.  The
state-evolution recursion predicts the cosine between the iterates and the
truth, and a simulation at moderate size lands close to it.
"""

import numpy as np

from uaggregation.amp import AmpConfig, run_amp
from uaggregation.state_evolution import SeConfig, se_run
from uaggregation.synthgen import spiked_whitened

lam, alpha, omega = 2.0, 0.3, 0.3
tr = se_run(SeConfig(lam=lam, alpha=alpha, omega=omega))
print("predicted limits: cos_v=%.3f cos_u=%.3f (residual %.1e)" % (
    tr.cos_v_limit, tr.cos_u_limit, tr.residual))

cv, cu = [], []
for seed in range(10):
    Yt, u, v = spiked_whitened(2000, 600, lam, omega, seed=seed)
    run = run_amp(Yt, AmpConfig(omega=omega, max_iters=30), u_truth=u, v_truth=v)
    cv.append(abs(run.trace[-1].cos_v_truth))
    cu.append(abs(run.trace[-1].cos_u_truth))
print("simulated:        cos_v=%.3f cos_u=%.3f" % (np.mean(cv), np.mean(cu)))

# both limits grow with the signal strength
for lam in (1.5, 2.0, 3.0, 4.0):
    tr = se_run(SeConfig(lam=lam, alpha=alpha, omega=omega))
    print("lambda=%.1f  cos_v=%.3f  cos_u=%.3f  converged=%s" % (
        lam, tr.cos_v_limit, tr.cos_u_limit, tr.converged))
