# Monte Carlo check of the joint CLT for merging disk counts.
#
# The moduli of the points are independent, |z_j|^(2b) ~ Gamma((j+alpha)/b, rate n),
# so disk counts can be sampled exactly without building any matrix.
import numpy as np

from diskstat import (EnsembleParams, MergeConfig, clt_covariance, empirical_correlation,
                      empirical_cumulants, mean_exact, radii, sample_counts, standardize,
                      variance_exact)

n = 1000
p = EnsembleParams(1.0, 0.0, n)
cfg = MergeConfig.bulk(0.6, [-0.3, 0.4])
rad = radii(p, cfg)
batch = sample_counts(p, rad, 20000, seed=1)

for l in range(2):
    m, se = empirical_cumulants(batch, (1, 0) if l == 0 else (0, 1))
    print(f"mean N(r_{l+1}) = {m:.3f} +- {se:.3f}   exact {mean_exact(p, rad[l]):.3f}")
    v, se = empirical_cumulants(batch, (2, 0) if l == 0 else (0, 2))
    print(f"var  N(r_{l+1}) = {v:.3f} +- {se:.3f}   exact {variance_exact(p, rad[l]):.3f}")

z = standardize(batch, cfg, "bulk")
rho, se = empirical_correlation(z, 0, 1)
print("correlation of standardized counts", round(rho, 4), "+-", round(se, 4))
print("limit Sigma_12", round(clt_covariance(1.0, 0.0, cfg)[0, 1], 4))

# counts are integers, so compare quantiles rather than a histogram
from scipy.stats import norm

for q in (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99):
    print(f"q={q:4.2f}  sample {np.quantile(z[:, 0], q): .3f}  normal {norm.ppf(q): .3f}")
