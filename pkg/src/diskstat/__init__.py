"""Exact, asymptotic and Monte Carlo disk-counting statistics for the
Mittag-Leffler ensemble with radii merging in the bulk or at the edge."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalError
from .special import (GammaRegime, gamma_regime, reg_gamma_pq, reg_lower_gamma,
                      reg_upper_gamma, temme_R, temme_coeffs, temme_eta)
from .ensemble import (EnsembleParams, ExactMGF, MergeConfig, covariance_exact,
                       decoupling_residual, joint_cumulant_exact, jump_weights,
                       log_mgf_exact, mean_exact, radii, variance_exact)
from .asymptotics import (G1, G2, H1, H2, ExpansionCoeffs, QuadratureSpec,
                          asymptotic_log_mgf, bulk_coeffs, closed_form_moments,
                          clt_covariance, cumulant_asymptotics, edge_coeffs,
                          expansion_coeffs)
from .sampler import (SampleBatch, empirical_correlation, empirical_cumulants,
                      poisson_binomial_pmf, sample_counts, standardize)

__all__ = [name for name in dir() if not name.startswith("_")]
