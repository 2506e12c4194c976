# Exact log-MGF of disk counts vs the four-term large-n expansion.
#
# Two radii sit a distance ~ n^(-1/2) apart around r = 0.6 inside the
# droplet.  The exact value is a finite sum over j of logs of incomplete
# gamma mixtures; the expansion is C1 n + C2 sqrt(n) + C3 + C4/sqrt(n).
import numpy as np

from diskstat import EnsembleParams, MergeConfig, expansion_coeffs, log_mgf_exact, radii

b, alpha = 1.0, 0.0
cfg = MergeConfig.bulk(0.6, [-0.3, 0.4])
u = [0.2, -0.1]

c = expansion_coeffs(b, alpha, cfg, u)
print("C1..C4:", c.as_array())

# the residual should fall roughly like 1/n
ns = 2 ** np.arange(6, 15)
res = []
for n in ns:
    p = EnsembleParams(b, alpha, int(n))
    exact = log_mgf_exact(p, radii(p, cfg), u)
    res.append(exact - c.evaluate(n))
    print(f"n={n:6d}  exact={exact:16.10f}  residual={res[-1]: .3e}")

slope = np.polyfit(np.log(ns), np.log(np.abs(res)), 1)[0]
print("fitted decay exponent:", round(slope, 3))

# Dropping C4 leaves an n^(-1/2) residual instead
res3 = [log_mgf_exact(EnsembleParams(b, alpha, int(n)), radii(EnsembleParams(b, alpha, int(n)), cfg), u)
        - (c.C1 * n + c.C2 * np.sqrt(n) + c.C3) for n in ns]
print("exponent with three terms:", round(np.polyfit(np.log(ns), np.log(np.abs(res3)), 1)[0], 3))

# Same at the edge of the droplet, b = 1.5
ecfg = MergeConfig.edge([-0.5, 0.7])
ec = expansion_coeffs(1.5, 0.5, ecfg, [0.15, -0.25])
for n in (256, 4096):
    p = EnsembleParams(1.5, 0.5, n)
    print("edge", n, log_mgf_exact(p, radii(p, ecfg), [0.15, -0.25]) - ec.evaluate(n))
