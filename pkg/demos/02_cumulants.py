# Means, variances and covariances of merging disk counts.
#
# Finite differences of C1..C4 in u give the expansion coefficients of every
# joint cumulant.  For orders 1 and 2 there are closed forms; both are
# compared here with the exact finite-n values.
import math

import numpy as np

from diskstat import (EnsembleParams, MergeConfig, closed_form_moments, covariance_exact,
                      cumulant_asymptotics, mean_exact, radii, variance_exact)
from diskstat.ensemble import joint_cumulant_exact

b, alpha = 1.0, 0.0
cfg = MergeConfig.bulk(0.6, [-0.2, 0.5])
cf = closed_form_moments(b, alpha, cfg)
print("covariance coefficients (n, sqrt n, 1, n^-1/2):", cf.cov[0, 1])
fd, err = cumulant_asymptotics(b, alpha, cfg, (1, 1))
print("same from derivatives of C_k:               ", fd, " +-", err.max())

for n in (100, 1000, 10000, 100000):
    p = EnsembleParams(b, alpha, n)
    r1, r2 = radii(p, cfg)
    mu, cov = cf.evaluate(n)
    print(f"n={n:6d}  mean {mean_exact(p, r1):12.5f} vs {mu[0]:12.5f}   "
          f"var {variance_exact(p, r1):9.5f} vs {cov[0, 0]:9.5f}   "
          f"cov {covariance_exact(p, r1, r2):8.5f} vs {cov[0, 1]:8.5f}")

# Third and fourth cumulants have no closed form here; the expansion still applies
p = EnsembleParams(b, alpha, 4000)
r = radii(p, cfg)
for jvec in [(3, 0), (2, 1), (2, 2)]:
    coef, _ = cumulant_asymptotics(b, alpha, cfg, jvec)
    asy = coef @ [4000, math.sqrt(4000), 1, 1 / math.sqrt(4000)]
    ex = joint_cumulant_exact(p, r, jvec)
    print(jvec, "exact", round(ex.value, 6), "expansion", round(asy, 6))
