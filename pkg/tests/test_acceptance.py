"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line; the lines
are printed together at the end of the pytest run (see conftest.py) and when
this file is executed directly."""

import math
import time

import mpmath as mp
import numpy as np
import pytest

from diskstat.asymptotics import (H1, H2, closed_form_moments, clt_covariance,
                                  cumulant_asymptotics, expansion_coeffs)
from diskstat.ensemble import (EnsembleParams, MergeConfig, covariance_exact,
                               decoupling_residual, log_mgf_exact, mean_exact, radii,
                               variance_exact)
from diskstat.sampler import (empirical_correlation, empirical_cumulants, sample_counts,
                              standardize)
from diskstat.special import reg_gamma_pq

RESULTS = {}
N_GRID = [256, 1024, 4096, 16384]


def record(k, ok, detail):
    RESULTS[k] = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}"
    assert ok, RESULTS[k]


def test_criterion_01_temme_cross_validation():
    a = np.repeat([10.0, 1e2, 1e3, 1e4], 7)
    lam = np.tile([0.5, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5], 4)
    t0 = time.perf_counter()
    p_temme, _ = reg_gamma_pq(a, a * lam, method="temme")
    p_class, _ = reg_gamma_pq(a, a * lam, method="classical")
    elapsed = time.perf_counter() - t0
    small = p_class < 1e-9
    rel = np.abs(p_temme - p_class) / np.where(small, 1.0, p_class)
    ok_rel = np.all(rel[~small] <= 1e-9)
    ok_abs = np.all(np.abs(p_temme - p_class)[small] <= 1e-12)
    record(1, ok_rel and ok_abs and elapsed < 1.0,
           f"max rel diff {rel[~small].max():.2e} (<=1e-9), runtime {elapsed:.3f}s (<1s)")


def test_criterion_02_golden_value():
    # closed-form oracle: P(j, 1) = 1 - e^-1 sum_{k<j} 1/k!, at 40 digits
    mp.mp.dps = 40
    w = mp.expm1(mp.mpf("0.1"))
    oracle = float(mp.fsum(
        mp.log1p(w * (1 - mp.exp(-1) * mp.fsum(1 / mp.factorial(k) for k in range(j))))
        for j in range(1, 5)))
    got = log_mgf_exact(EnsembleParams(1.0, 0.0, 4), [0.5], [0.1])
    printed = 0.1021841  # value quoted with the criterion; differs from its own oracle
    record(2, abs(got - oracle) <= 1e-6,
           f"ln E = {got:.10f}, closed-form oracle {oracle:.10f} (tol 1e-6); "
           f"quoted 0.1021841 is {abs(printed - oracle):.1e} from the oracle")


def _convergence(k, b, alpha, cfg, u):
    t0 = time.perf_counter()
    c = expansion_coeffs(b, alpha, cfg, u)
    res = []
    for n in N_GRID:
        p = EnsembleParams(b, alpha, n)
        res.append(log_mgf_exact(p, radii(p, cfg), u) - c.evaluate(n))
    elapsed = time.perf_counter() - t0
    res = np.array(res)
    ns = np.array(N_GRID, dtype=float)
    norm = np.abs(res) * ns / np.log(ns) ** 2
    slope = float(np.polyfit(np.log(ns), np.log(np.abs(res)), 1)[0])
    bounded = bool(np.all(np.diff(norm) <= 0))  # bounded by its first value
    ok = bounded and abs(res[-1]) < abs(res[0]) / 10 and slope <= -0.85 and elapsed < 10
    record(k, ok, f"|R| {abs(res[0]):.2e} -> {abs(res[-1]):.2e}, |R| n/(ln n)^2 "
                  f"nonincreasing {bounded} (max {norm.max():.2e}), slope {slope:.3f}, {elapsed:.1f}s")


def test_criterion_03_bulk_convergence():
    _convergence(3, 1.0, 0.0, MergeConfig.bulk(0.6, [-0.3, 0.4]), [0.2, -0.1])


def test_criterion_04_edge_convergence():
    _convergence(4, 1.5, 0.5, MergeConfig.edge([-0.5, 0.7]), [0.15, -0.25])


def test_criterion_05_bulk_mean_variance():
    n, b, al, r, s = 10**4, 1.0, 0.0, 0.6, 0.3
    p = EnsembleParams(b, al, n)
    (rad,) = radii(p, MergeConfig.bulk(r, [s]))
    mean_asy = b * r ** (2 * b) * n + math.sqrt(2) * b * r**b * s * math.sqrt(n) + (b - 1 - 2 * al) / 2
    var_asy = (b * r**b / math.sqrt(math.pi) * math.sqrt(n) + b * s / math.sqrt(2 * math.pi)
               - b * (1 + 4 * s * s) / (16 * math.sqrt(math.pi) * r**b) / math.sqrt(n))
    dm = abs(mean_exact(p, rad) - mean_asy)
    dv = abs(variance_exact(p, rad) - var_asy)
    record(5, dm <= 5e-3 and dv <= 5e-3, f"|mean diff| {dm:.2e}, |variance diff| {dv:.2e} (<=5e-3)")


def test_criterion_06_covariance():
    n = 10**4
    p = EnsembleParams(1.0, 0.0, n)
    cfg = MergeConfig.bulk(0.6, [-0.2, 0.5])
    r1, r2 = radii(p, cfg)
    coef = closed_form_moments(1.0, 0.0, cfg).cov[0, 1]
    asy = coef[1] * math.sqrt(n) + coef[2] + coef[3] / math.sqrt(n)
    d = abs(covariance_exact(p, r1, r2) - asy)
    record(6, d <= 1e-2, f"|cov diff| {d:.2e} (<=1e-2)")


def test_criterion_07_theorem_corollary_consistency():
    worst = 0.0
    for b, al, cfg in ((1.0, 0.0, MergeConfig.bulk(0.6, [-0.3, 0.4])),
                       (1.7, -0.4, MergeConfig.bulk(0.45, [-0.6, 0.25])),
                       (1.5, 0.5, MergeConfig.edge([-0.5, 0.7])),
                       (0.7, 1.3, MergeConfig.edge([-0.2, 0.9]))):
        cf = closed_form_moments(b, al, cfg)
        refs = {(1, 0): cf.mean[0], (0, 1): cf.mean[1], (2, 0): cf.cov[0, 0],
                (0, 2): cf.cov[1, 1], (1, 1): cf.cov[0, 1]}
        for jvec, ref in refs.items():
            got, _ = cumulant_asymptotics(b, al, cfg, jvec)
            for g, r in zip(got, ref):
                # exact zeros in the closed forms are compared absolutely
                err = abs(g - r) / abs(r) if r != 0 else abs(g) * 1e3
                worst = max(worst, err)
    record(7, worst <= 1e-6, f"worst relative deviation {worst:.2e} (<=1e-6), orders 1-2, bulk+edge")


def test_criterion_08_monte_carlo():
    t0 = time.perf_counter()
    n = 1000
    p = EnsembleParams(1.0, 0.0, n)
    cfg = MergeConfig.bulk(0.6, [-0.3, 0.4])
    rad = radii(p, cfg)
    batch = sample_counts(p, rad, 50000, seed=20240611)
    exact = {(1, 0): mean_exact(p, rad[0]), (0, 1): mean_exact(p, rad[1]),
             (2, 0): variance_exact(p, rad[0]), (0, 2): variance_exact(p, rad[1]),
             (1, 1): covariance_exact(p, *rad)}
    zs = {}
    for jvec, ex in exact.items():
        est, se = empirical_cumulants(batch, jvec)
        zs[jvec] = (est - ex) / se
    rho, se = empirical_correlation(standardize(batch, cfg, "bulk"), 0, 1)
    sigma = clt_covariance(1.0, 0.0, cfg)[0, 1]
    zs["corr"] = (rho - sigma) / se
    elapsed = time.perf_counter() - t0
    worst = max(abs(z) for z in zs.values())
    record(8, worst <= 4 and elapsed < 60,
           f"max |z| {worst:.2f} over mean/var/cov/corr (<=4), corr {rho:.4f} vs Sigma {sigma:.4f}, "
           f"{elapsed:.1f}s")


def test_criterion_09_decoupling():
    v = decoupling_residual(EnsembleParams(1.0, 0.0, 500), [0.4, 0.7], [0.3, -0.2])
    record(9, abs(v) < 1e-6, f"|residual| {abs(v):.2e} (<1e-6)")


def test_criterion_10_properties():
    rng = np.random.default_rng(2718)
    bad_pos = 0
    worst_refl = 0.0
    for _ in range(10**4):
        m = int(rng.integers(1, 5))
        s = np.sort(rng.uniform(-5, 5, m))
        if m > 1 and np.min(np.diff(s)) <= 0:
            continue
        u = rng.uniform(-20, 20, m)
        t = rng.uniform(-10, 10)
        h1, h2, h2m = H1(t, u, s), H2(t, u, s), H2(-t, u, s)
        bad_pos += (h1 <= 0) + (h2 <= 0)
        worst_refl = max(worst_refl, abs(h1 - math.exp(u.sum()) * h2m) / h1)
    p = EnsembleParams(1.3, 0.2, 60)
    zero_ok = log_mgf_exact(p, [0.4, 0.6, 0.8], [0.0, 0.0, 0.0]) == 0.0
    u, s = [0.3, -0.45], [-0.4, 0.6]
    wall = 0.0
    for cfg2, cfg3 in ((MergeConfig.bulk(0.5, s), MergeConfig.bulk(0.5, [-0.4, 0.1, 0.6])),
                       (MergeConfig.edge(s), MergeConfig.edge([-0.4, 0.1, 0.6]))):
        c2 = expansion_coeffs(1.2, 0.3, cfg2, u).as_array()
        c3 = expansion_coeffs(1.2, 0.3, cfg3, [0.3, 0.0, -0.45]).as_array()
        wall = max(wall, float(np.max(np.abs(c2 - c3) / np.maximum(np.abs(c2), 1e-300))))
    ps = EnsembleParams(1.0, 0.0, 500)
    a = sample_counts(ps, [0.5, 0.6], 4000, seed=77, threads=1)
    b = sample_counts(ps, [0.5, 0.6], 4000, seed=77, threads=8)
    same = a.counts.tobytes() == b.counts.tobytes()
    ok = bad_pos == 0 and worst_refl <= 1e-12 and zero_ok and wall <= 1e-10 and same
    record(10, ok, f"H positivity violations {bad_pos}, reflection {worst_refl:.1e} (<=1e-12), "
                   f"mgf(u=0)=0 {zero_ok}, wall invariance {wall:.1e}, threads 1 vs 8 identical {same}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
