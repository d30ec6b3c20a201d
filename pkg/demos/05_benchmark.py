"""
Comparing aggregation methods
=============================

With a known truth we can compare U-aggregation against the simple average,
PCA and HeteroPCA, and check how well each method's weights track the real
accuracy of the models.
"""

import warnings

import numpy as np

from uaggregation.simulation import Cell, simulate

warnings.simplefilter("ignore")

rows = simulate([Cell(1000, 100, 0.3, "heteroskedastic", lam) for lam in (1.0, 2.0, 4.0)],
                replicates=5, seed=0)

table = {}
for r in rows:
    table.setdefault((r["lambda"], r["method"]), []).append(r)

print("%-6s %-16s %8s %12s" % ("lambda", "method", "cor_v", "concordance"))
for (lam, method), rs in sorted(table.items()):
    conc = [r["weight_concordance"] for r in rs if r["weight_concordance"] is not None]
    print("%-6g %-16s %8.4f %12s" % (lam, method, np.mean([r["cor_v"] for r in rs]),
                                    "%.3f" % np.mean(conc) if conc else "-"))
