import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diskstat.asymptotics import (G1, G2, H1, H2, H2_prime, QuadratureSpec, bulk_coeffs,
                                  bulk_c11, closed_form_moments, clt_covariance,
                                  cumulant_asymptotics, edge_c2, edge_coeffs, edge_d1,
                                  expansion_coeffs)
from diskstat.ensemble import (EnsembleParams, MergeConfig, covariance_exact, radii,
                               variance_exact)
from diskstat.errors import DomainError
from diskstat.special import erfc


def _offsets(m):
    return st.lists(st.floats(-4, 4), min_size=m, max_size=m, unique=True).map(sorted).filter(
        lambda s: all(b - a > 1e-3 for a, b in zip(s, s[1:])))


def _naive_h1(t, u, s):
    # direct transcription of the defining sum
    tot = 1.0
    for l in range(len(u)):
        tot += math.expm1(u[l]) / 2 * math.exp(sum(u[l + 1:])) * erfc(t - s[l])
    return tot


def _naive_h2(t, u, s):
    tot = 1.0
    for l in range(len(u)):
        tot += math.expm1(-u[l]) / 2 * math.exp(-sum(u[:l])) * erfc(t + s[l])
    return tot


def test_kernels_trivial_cases():
    s = [-0.5, 0.2]
    for t in (-3.0, 0.0, 1.7):
        assert H1(t, [0, 0], s) == 1.0
        assert H2(t, [0, 0], s) == 1.0
        assert G1(t, [0, 0], s) == 0.0
        assert G2(t, [0, 0], s) == 0.0
    u = [0.8, -1.1]
    assert H1(40.0, u, s) == pytest.approx(1.0, abs=1e-15)
    assert H2(40.0, u, s) == pytest.approx(1.0, abs=1e-15)
    assert abs(G1(30.0, u, s)) < 1e-300 and abs(G2(-30.0, u, s)) < 1e-300


def test_kernels_match_definitions():
    u = [0.4, -0.9, 1.3]
    s = [-1.0, 0.1, 0.7]
    for t in np.linspace(-4, 4, 17):
        assert H1(t, u, s) == pytest.approx(_naive_h1(t, u, s), rel=1e-14)
        assert H2(t, u, s) == pytest.approx(_naive_h2(t, u, s), rel=1e-14)


def test_g1_example():
    # H1(0) = 1.5 for u = ln 2, s = 0
    assert G1(0.0, [math.log(2)], [0.0]) == pytest.approx(0.088653840089207261764, rel=1e-14)


def test_h2_prime():
    u = [0.4, -0.9]
    s = [-0.3, 0.6]
    for t in (-1.0, 0.0, 0.8):
        h = 1e-5
        fd = (H2(t + h, u, s) - H2(t - h, u, s)) / (2 * h)
        assert H2_prime(t, u, s) == pytest.approx(fd, rel=1e-8)


@settings(max_examples=300, deadline=None)
@given(t=st.floats(-12, 12), data=st.data())
def test_positivity_and_reflection(t, data):
    m = data.draw(st.integers(1, 4))
    s = data.draw(_offsets(m))
    u = data.draw(st.lists(st.floats(-25, 25), min_size=m, max_size=m))
    h1, h2 = H1(t, u, s), H2(-t, u, s)
    assert h1 > 0 and H2(t, u, s) > 0
    assert h1 == pytest.approx(math.exp(sum(u)) * h2, rel=1e-12)
    assert math.isfinite(G1(t, u, s)) and math.isfinite(G2(t, u, s))


def test_coeffs_spot_values():
    c = bulk_coeffs(1.0, 0.0, 0.5, [0.0], [0.2])
    assert c.C1 == pytest.approx(0.05, rel=1e-15)
    assert bulk_coeffs(1.0, 0.0, 0.5, [0.0, 1.0], [0.0, 0.0]).as_array().tolist() == [0, 0, 0, 0]
    assert edge_coeffs(2.0, 0.5, [0.0], [0.0]).as_array().tolist() == [0, 0, 0, 0]
    e = edge_coeffs(1.5, 0.5, [-0.5, 0.7], [0.15, -0.25])
    assert e.C1 == pytest.approx(-0.1, rel=1e-15)
    assert all(math.isfinite(x) for x in e.as_array())
    with pytest.raises(DomainError):
        bulk_coeffs(1.0, 0.0, 1.0, [0.0], [0.1])


def test_leading_cumulant_coefficients():
    b, r = 1.3, 0.55
    v, _ = cumulant_asymptotics(b, 0.0, MergeConfig.bulk(r, [0.0]), (2,))
    assert v[0] == 0.0
    assert v[1] == pytest.approx(b * r**b / math.sqrt(math.pi), rel=1e-8)
    v, _ = cumulant_asymptotics(b, 0.0, MergeConfig.edge([0.0]), (1,))
    assert v[1] == pytest.approx(-math.sqrt(b / (2 * math.pi)), rel=1e-8)
    with pytest.raises(DomainError):
        cumulant_asymptotics(b, 0.0, MergeConfig.edge([0.0]), (5,))


def test_bulk_mean_and_variance_coefficients():
    b, al, r, s = 0.8, 0.4, 0.7, 0.35
    cfg = MergeConfig.bulk(r, [s])
    v, _ = cumulant_asymptotics(b, al, cfg, (1,))
    np.testing.assert_allclose(v[:3], [b * r ** (2 * b), math.sqrt(2) * b * r**b * s,
                                       (b - 1 - 2 * al) / 2], rtol=1e-9)
    assert abs(v[3]) < 1e-9
    v, _ = cumulant_asymptotics(b, al, cfg, (2,))
    ref = [0.0, b * r**b / math.sqrt(math.pi), b * s / math.sqrt(2 * math.pi),
           -b * (1 + 4 * s * s) / (16 * math.sqrt(math.pi) * r**b)]
    np.testing.assert_allclose(v, ref, rtol=1e-8, atol=1e-12)


def test_higher_order_cumulant_structure():
    # single radius at s = 0: odd derivatives of C2 and C4 vanish, even ones of C3 too
    cfg = MergeConfig.bulk(0.6, [0.0])
    v3, _ = cumulant_asymptotics(1.0, 0.0, cfg, (3,))
    v4, _ = cumulant_asymptotics(1.0, 0.0, cfg, (4,))
    assert abs(v3[1]) < 1e-6 and abs(v3[3]) < 1e-6
    assert abs(v4[2]) < 1e-6
    assert v3[0] == 0.0 and v4[0] == 0.0


def test_zero_fugacity_wall_invariance():
    u, s = [0.3, -0.45], [-0.4, 0.6]
    ref = bulk_coeffs(1.2, 0.3, 0.5, s, u).as_array()
    for s2, u2 in (([-0.4, 0.1, 0.6], [0.3, 0.0, -0.45]), ([-1.0, -0.4, 0.6], [0.0, 0.3, -0.45]),
                   ([-0.4, 0.6, 2.0], [0.3, -0.45, 0.0])):
        np.testing.assert_allclose(bulk_coeffs(1.2, 0.3, 0.5, s2, u2).as_array(), ref, rtol=1e-10, atol=1e-13)
    ref = edge_coeffs(1.2, 0.3, s, u).as_array()
    np.testing.assert_allclose(edge_coeffs(1.2, 0.3, [-0.4, 0.1, 0.6], [0.3, 0.0, -0.45]).as_array(),
                               ref, rtol=1e-10, atol=1e-13)


def test_quadrature_self_consistency():
    u, s = [0.5, -0.7], [-0.2, 0.9]
    for fn in (lambda q: bulk_coeffs(1.0, 0.0, 0.6, s, u, q), lambda q: edge_coeffs(1.5, 0.5, s, u, q)):
        loose = fn(QuadratureSpec(rel_tol=1e-8, abs_tol=1e-10))
        tight = fn(QuadratureSpec(rel_tol=5e-9, abs_tol=5e-11))
        # the C_k combine the integrals with O(10) weights
        bound = 20 * sum(loose.errors.values())
        assert np.max(np.abs(loose.as_array() - tight.as_array())) <= bound


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(truncation_margin=3)
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)


def test_closed_form_examples():
    cf = closed_form_moments(1.0, 0.0, MergeConfig.bulk(0.6, [0.1]))
    assert cf.mean[0, 2] == 0.0
    assert edge_d1(1.0, 0.0, 0.0) == 0.0
    ss = np.linspace(-6, 6, 121)
    c2 = np.array([edge_c2(1.7, x) for x in ss])
    assert np.all(c2 > 0)
    assert edge_c2(1.7, 8.0) < 1e-25
    # strictly decreasing; at s << 0 it sits on the plateau sqrt(b/pi) to rounding
    assert np.all(np.diff(c2[ss >= -3]) < 0)
    assert c2[0] == pytest.approx(math.sqrt(1.7 / math.pi), rel=1e-12)


def test_closed_forms_match_derivatives():
    for cfg, b, al in ((MergeConfig.bulk(0.45, [-0.6, 0.25]), 1.7, -0.4),
                       (MergeConfig.edge([-0.2, 0.9]), 0.7, 1.3)):
        cf = closed_form_moments(b, al, cfg)
        for jvec, ref in (((1, 0), cf.mean[0]), ((0, 2), cf.cov[1, 1]), ((1, 1), cf.cov[0, 1])):
            v, _ = cumulant_asymptotics(b, al, cfg, jvec)
            np.testing.assert_allclose(v, ref, rtol=1e-7, atol=1e-10)


def test_clt_covariance_structure():
    assert clt_covariance(1.0, 0.0, MergeConfig.edge([0.3])).tolist() == [[1.0]]
    far = clt_covariance(1.0, 0.0, MergeConfig.bulk(0.6, [-6.0, 6.0]))
    assert abs(far[0, 1]) < 1e-10
    c11 = bulk_c11(1.2, 0.5, 0.3, 0.3).value
    assert c11 == pytest.approx(1.2 * 0.5**1.2 / math.sqrt(math.pi), rel=1e-12)
    rng = np.random.default_rng(11)
    for _ in range(12):
        m = int(rng.integers(2, 5))
        s = np.sort(rng.uniform(-2, 2, m))
        for cfg in (MergeConfig.bulk(0.5, s), MergeConfig.edge(s)):
            sig = clt_covariance(1.4, 0.2, cfg)
            np.testing.assert_array_equal(sig, sig.T)
            np.testing.assert_array_equal(np.diag(sig), 1.0)
            assert np.min(np.linalg.eigvalsh(sig)) > -1e-12


def test_edge_sigma_matches_finite_n_correlation():
    cfg = MergeConfig.edge([-0.4, 0.5])
    sig = clt_covariance(1.0, 0.0, cfg)[0, 1]
    p = EnsembleParams(1.0, 0.0, 40000)
    r = radii(p, cfg)
    rho = covariance_exact(p, *r) / math.sqrt(variance_exact(p, r[0]) * variance_exact(p, r[1]))
    assert rho == pytest.approx(sig, abs=2e-2)


def test_expansion_evaluate_matches_exact_edge():
    cfg = MergeConfig.edge([-0.3, 0.2])
    u = [0.4, -0.3]
    c = expansion_coeffs(2.0, 0.0, cfg, u)
    from diskstat.ensemble import log_mgf_exact
    p = EnsembleParams(2.0, 0.0, 4096)
    assert abs(log_mgf_exact(p, radii(p, cfg), u) - c.evaluate(4096)) < 1e-3
