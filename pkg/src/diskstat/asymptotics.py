"""Large-n expansions of the joint disk-counting MGF with merging radii.

For radii merging at scale ``n^(-1/2)`` around a base radius ``r`` (bulk) or
the droplet edge, the log-MGF has the four-term expansion

    ln E[exp(sum_l u_l N(r_l))] = C1 n + C2 sqrt(n) + C3 + C4 / sqrt(n) + O((ln n)^2 / n)

with ``C1..C4`` given by one-dimensional integrals of the kernels
:func:`H1`, :func:`H2`, :func:`G1`, :func:`G2`.  Derivatives of ``C_k`` in
``u`` at ``u = 0`` give the expansions of all joint cumulants; the closed forms
for means, variances and covariances live in :func:`closed_form_moments`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy.special import erfc as _erfc

from ._numerics import Estimate, gauss_kronrod, mixed_derivative
from .ensemble import MergeConfig
from .errors import DomainError, NumericalError

__all__ = [
    "QuadratureSpec",
    "ExpansionCoeffs",
    "H1",
    "H2",
    "H2_prime",
    "G1",
    "G2",
    "bulk_coeffs",
    "edge_coeffs",
    "expansion_coeffs",
    "cumulant_asymptotics",
    "ClosedFormMoments",
    "closed_form_moments",
    "clt_covariance",
    "asymptotic_log_mgf",
]

SQRT2 = math.sqrt(2.0)
SQRTPI = math.sqrt(math.pi)
SQRT2PI = math.sqrt(2.0 * math.pi)
MAX_ASYMPTOTIC_ORDER = 4


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the kernel integrals.

    Integrals over half-lines are truncated at ``max|s| + truncation_margin``;
    the integrands decay like ``exp(-margin^2)`` there.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    truncation_margin: float = 10.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if not self.truncation_margin >= 4:
            raise DomainError("truncation_margin must be >= 4")


@dataclass(frozen=True)
class ExpansionCoeffs:
    """``C1..C4`` of the log-MGF expansion and per-integral error estimates."""

    C1: float
    C2: float
    C3: float
    C4: float
    regime: str
    errors: Dict[str, float] = field(default_factory=dict, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.C1, self.C2, self.C3, self.C4])

    def evaluate(self, n: float) -> float:
        """``C1 n + C2 sqrt(n) + C3 + C4/sqrt(n)``."""
        rn = math.sqrt(n)
        return self.C1 * n + self.C2 * rn + self.C3 + self.C4 / rn


def _us(u, s):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if u.shape != s.shape or u.ndim != 1:
        raise DomainError("u and s must be 1-d sequences of equal length")
    if np.any(np.diff(s) <= 0):
        raise DomainError("offsets s must be strictly increasing")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(s))):
        raise DomainError("u and s must be finite")
    return u, s


def _erfc_gap(x_hi, x_lo):
    """``erfc(x_lo) - erfc(x_hi)`` for ``x_lo <= x_hi`` without cancellation."""
    # erfc(x) = 2 - erfc(-x): subtract in whichever tail the values are small
    neg = (x_lo + x_hi) < 0
    return np.where(neg, _erfc(-x_hi) - _erfc(-x_lo), _erfc(x_lo) - _erfc(x_hi))


def _suffix_exp(u):
    """``Omega_l = exp(u_l + ... + u_m)`` for ``l = 1..m+1``."""
    return np.exp(np.concatenate([np.cumsum(u[::-1])[::-1], [0.0]]))


def _prefix_exp_neg(u):
    """``Lambda_l = exp(-(u_1 + ... + u_l))`` for ``l = 0..m``."""
    return np.exp(-np.concatenate([[0.0], np.cumsum(u)]))


def _h1(t, u, s):
    # H1 = sum_{l=1}^{m+1} Omega_l (p_l - p_{l-1}),  p_l = erfc(t - s_l)/2,
    # p_0 = 0, p_{m+1} = 1: a positive mixture, so H1 > 0 by construction.
    t = np.asarray(t, dtype=float)[..., None]
    Om = _suffix_exp(u)
    x = t - s  # decreasing in l
    lo = np.concatenate([np.full(t.shape, np.inf), x], axis=-1)
    hi = np.concatenate([x, np.full(t.shape, -np.inf)], axis=-1)
    gaps = 0.5 * _erfc_gap(lo, hi)
    return gaps @ Om


def H1(t, u, s):
    """``1 + sum_l (e^{u_l} - 1)/2 exp(u_{l+1} + ... + u_m) erfc(t - s_l)``."""
    u, s = _us(u, s)
    out = _h1(t, u, s)
    return float(out) if np.ndim(t) == 0 else out


def _h2(t, u, s):
    # H2 = sum_{l=0}^{m} Lambda_l (q_l - q_{l+1}),  q_l = erfc(t + s_l)/2,
    # q_0 = 1, q_{m+1} = 0.
    t = np.asarray(t, dtype=float)[..., None]
    Lam = _prefix_exp_neg(u)
    x = t + s  # increasing in l
    lo = np.concatenate([np.full(t.shape, -np.inf), x], axis=-1)
    hi = np.concatenate([x, np.full(t.shape, np.inf)], axis=-1)
    gaps = 0.5 * _erfc_gap(hi, lo)
    return gaps @ Lam


def H2(t, u, s):
    """``1 + sum_l (e^{-u_l} - 1)/2 exp(-(u_1 + ... + u_{l-1})) erfc(t + s_l)``."""
    u, s = _us(u, s)
    out = _h2(t, u, s)
    return float(out) if np.ndim(t) == 0 else out


def _h2_prime(t, u, s):
    t = np.asarray(t, dtype=float)[..., None]
    Lam = _prefix_exp_neg(u)
    nu = Lam[1:] - Lam[:-1]
    return (np.exp(-(t + s) ** 2) * (-1.0 / SQRTPI)) @ nu


def H2_prime(t, u, s):
    """``d/dt H2`` using ``erfc'(x) = -2/sqrt(pi) exp(-x^2)``."""
    u, s = _us(u, s)
    out = _h2_prime(t, u, s)
    return float(out) if np.ndim(t) == 0 else out


def _jumps(u):
    # (e^{u_l} - 1) exp(u_{l+1} + ... + u_m)
    Om = _suffix_exp(u)
    return Om[1:] * np.expm1(u)


def _g1(t, u, s, h1=None):
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    poly = (1.0 - 2.0 * s**2 + tt * s - 5.0 * tt**2) / 3.0
    num = (np.exp(-(tt - s) ** 2) / SQRT2PI * poly) @ _jumps(u)
    return num / (_h1(t, u, s) if h1 is None else h1)


def _g2(t, u, s, h1=None):
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    s2 = s * s
    poly = (50 * tt**5 - 70 * tt**4 * s - tt**3 * (73 - 62 * s2)
            + tt**2 * s * (33 - 50 * s2) - tt * (3 + 18 * s2 - 16 * s2**2)
            - s * (3 - 22 * s2 + 8 * s2**2))
    num = (np.exp(-(tt - s) ** 2) / (18.0 * SQRT2PI) * poly) @ _jumps(u)
    return num / (_h1(t, u, s) if h1 is None else h1)


def G1(t, u, s):
    """First correction kernel; vanishes at ``u = 0``."""
    u, s = _us(u, s)
    out = _g1(t, u, s)
    return float(out) if np.ndim(t) == 0 else out


def G2(t, u, s):
    """Second correction kernel (degree-5 polynomial times a Gaussian)."""
    u, s = _us(u, s)
    out = _g2(t, u, s)
    return float(out) if np.ndim(t) == 0 else out


def _log_h1(t, u, s):
    # direct H1 - 1 keeps relative accuracy in the tails; the mixture form is
    # only needed when H1 approaches 0
    tt = np.asarray(t, dtype=float)[..., None]
    x = (0.5 * _erfc(tt - s)) @ _jumps(u)
    low = x <= -0.5
    if np.any(low):
        x = np.where(low, _h1(t, u, s) - 1.0, x)
    return np.log1p(x)


def _log_h2(t, u, s):
    tt = np.asarray(t, dtype=float)[..., None]
    Lam = _prefix_exp_neg(u)
    x = (0.5 * _erfc(tt + s)) @ (Lam[1:] - Lam[:-1])
    low = x <= -0.5
    if np.any(low):
        x = np.where(low, _h2(t, u, s) - 1.0, x)
    return np.log1p(x)


class _Integrator:
    """Runs the named integrals of one coefficient set and keeps their errors."""

    def __init__(self, s, quad: QuadratureSpec):
        self.quad = quad
        self.T = float(np.max(np.abs(s))) + quad.truncation_margin
        self.breaks = sorted(set(np.concatenate([s, -s]).tolist()))
        self.errors: Dict[str, float] = {}

    def __call__(self, name: str, f: Callable, lo: float, hi: float) -> float:
        lo = max(lo, -self.T)
        hi = min(hi, self.T)
        est = gauss_kronrod(f, lo, hi, self.breaks + [0.0], self.quad.rel_tol,
                            self.quad.abs_tol, label=name)
        self.errors[name] = est.error
        return est.value


def bulk_coeffs(b: float, alpha: float, r: float, s, u,
                quad: QuadratureSpec = QuadratureSpec()) -> ExpansionCoeffs:
    """``C1..C4`` for radii merging around ``r`` strictly inside the droplet."""
    u, s = _us(u, s)
    if not (b > 0 and alpha > -1):
        raise DomainError("need b > 0 and alpha > -1")
    if not (0 < r < b ** (-1.0 / (2.0 * b))):
        raise DomainError("bulk base radius must satisfy 0 < r < b^(-1/(2b))")
    rb = r**b
    su = float(np.sum(u))
    integ = _Integrator(s, quad)
    if not np.any(u):
        return ExpansionCoeffs(0.0, 0.0, 0.0, 0.0, "bulk", {})

    def lsum(t):
        return _log_h1(t, u, s) + _log_h2(t, u, s)

    def ldiff(t):
        return _log_h1(t, u, s) - _log_h2(t, u, s)

    def g_comb(t):
        h1 = _h1(t, u, s)
        g1 = _g1(t, u, s, h1)
        return 4.0 * t * g1 - g1**2 / SQRT2 + _g2(t, u, s, h1)

    i_lsum = integ("int_0^inf lnH1+lnH2", lsum, 0.0, math.inf)
    i_tldiff = integ("int_0^inf t(lnH1-lnH2)", lambda t: t * ldiff(t), 0.0, math.inf)
    i_g1 = integ("int G1", lambda t: _g1(t, u, s), -math.inf, math.inf)
    i_t2lsum = integ("int_0^inf t^2(lnH1+lnH2)", lambda t: t * t * lsum(t), 0.0, math.inf)
    i_gc = integ("int 4tG1-G1^2/sqrt2+G2", g_comb, -math.inf, math.inf)

    C1 = b * r ** (2 * b) * su
    C2 = SQRT2 * b * rb * i_lsum
    C3 = -(0.5 + alpha) * su + 4.0 * b * i_tldiff + SQRT2 * b * i_g1
    C4 = 6.0 * SQRT2 * b / rb * i_t2lsum + b / rb * i_gc
    return ExpansionCoeffs(C1, C2, C3, C4, "bulk", integ.errors)


def edge_coeffs(b: float, alpha: float, s, u,
                quad: QuadratureSpec = QuadratureSpec()) -> ExpansionCoeffs:
    """``C1..C4`` for radii merging at the droplet edge ``b^(-1/(2b))``."""
    u, s = _us(u, s)
    if not (b > 0 and alpha > -1):
        raise DomainError("need b > 0 and alpha > -1")
    if not np.any(u):
        return ExpansionCoeffs(0.0, 0.0, 0.0, 0.0, "edge", {})
    integ = _Integrator(s, quad)
    sb = math.sqrt(b)

    def lh2(t):
        return _log_h2(t, u, s)

    def g_comb(t):
        h1 = _h1(t, u, s)
        g1 = _g1(t, u, s, h1)
        return 4.0 * t * g1 - g1**2 / SQRT2 + _g2(t, u, s, h1)

    i_l = integ("int_0^inf lnH2", lh2, 0.0, math.inf)
    i_tl = integ("int_0^inf t lnH2", lambda t: t * lh2(t), 0.0, math.inf)
    i_g1 = integ("int_-inf^0 G1", lambda t: _g1(t, u, s), -math.inf, 0.0)
    i_t2l = integ("int_0^inf t^2 lnH2", lambda t: t * t * lh2(t), 0.0, math.inf)
    i_gc = integ("int_-inf^0 4tG1-G1^2/sqrt2+G2", g_comb, -math.inf, 0.0)

    h2_0 = float(_h2(0.0, u, s))
    dh2_0 = float(_h2_prime(0.0, u, s))
    g1_0 = float(_g1(0.0, u, s))

    C1 = float(np.sum(u))
    C2 = math.sqrt(2.0 * b) * i_l
    C3 = (0.5 + alpha) * float(_log_h2(0.0, u, s)) - 4.0 * b * i_tl + SQRT2 * b * i_g1
    C4 = (6.0 * SQRT2 * b**1.5 * i_t2l + b**1.5 * i_gc
          - (1 + 6 * alpha + 6 * alpha**2) / (12.0 * math.sqrt(2.0 * b)) * dh2_0 / h2_0
          + (0.5 + alpha) * sb * g1_0)
    return ExpansionCoeffs(C1, C2, C3, C4, "edge", integ.errors)


def expansion_coeffs(b: float, alpha: float, cfg: MergeConfig, u,
                     quad: QuadratureSpec = QuadratureSpec()) -> ExpansionCoeffs:
    """Dispatch to :func:`bulk_coeffs` or :func:`edge_coeffs` from a config."""
    if cfg.regime == "bulk":
        return bulk_coeffs(b, alpha, cfg.r, cfg.offsets, u, quad)
    return edge_coeffs(b, alpha, cfg.offsets, u, quad)


def asymptotic_log_mgf(b: float, alpha: float, cfg: MergeConfig, u, n: float,
                       quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Four-term approximation ``C1 n + C2 sqrt(n) + C3 + C4/sqrt(n)``."""
    return expansion_coeffs(b, alpha, cfg, u, quad).evaluate(n)


# finite differences of quadrature values need tolerances well below the
# step^order amplification
_FD_QUAD = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15)


def cumulant_asymptotics(b: float, alpha: float, cfg: MergeConfig,
                         jvec: Sequence[int], quad: QuadratureSpec = _FD_QUAD
                         ) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``n, sqrt(n), 1, n^(-1/2)`` in the expansion of the joint
    cumulant ``kappa_jvec``, i.e. ``d^jvec C_k`` at ``u = 0``.

    Returns ``(values, errors)``, both of shape ``(4,)``.
    """
    jvec = tuple(int(j) for j in jvec)
    if len(jvec) != cfg.m or any(j < 0 for j in jvec):
        raise DomainError("jvec must hold one non-negative order per offset")
    order = sum(jvec)
    if order < 1:
        raise DomainError("cumulant order must be >= 1")
    if order > MAX_ASYMPTOTIC_ORDER:
        raise DomainError(f"asymptotic cumulant order {order} exceeds {MAX_ASYMPTOTIC_ORDER}")
    cache: dict = {}

    def coeffs(u):
        key = tuple(np.round(u, 15))
        if key not in cache:
            cache[key] = expansion_coeffs(b, alpha, cfg, u, quad).as_array()
        return cache[key]

    vals = np.empty(4)
    errs = np.empty(4)
    for k in range(4):
        est = mixed_derivative(lambda u: coeffs(u)[k], np.zeros(cfg.m), jvec)
        vals[k], errs[k] = est
    return vals, errs


# ---------------------------------------------------------------------------
# Closed-form cumulant coefficients


def _p_poly(t, s):
    return (-3 * s + 22 * s**3 - 8 * s**5 + t * (21 - 66 * s**2 + 16 * s**4)
            + t**2 * (57 * s - 50 * s**3) + t**3 * (-193 + 62 * s**2)
            - 70 * t**4 * s + 50 * t**5)


def _quad1(f, lo, hi, s_pts, quad, label):
    T = max(abs(x) for x in s_pts) + quad.truncation_margin
    lo, hi = max(lo, -T), min(hi, T)
    brk = sorted(set(list(s_pts) + [-x for x in s_pts] + [0.0]))
    return gauss_kronrod(f, lo, hi, brk, quad.rel_tol, quad.abs_tol, label=label)


def _e11_poly(sl, sk):
    return (51 + 55 * sl**4 + 55 * sk**4 + 96 * sl**2 + 96 * sk**2
            + 128 * sl**3 * sk + 128 * sl * sk**3 + 180 * sl * sk + 210 * sl**2 * sk**2)


def _g1_pair(t, sl, sk):
    # (2 - erfc(t - sk)) e^{-(t-sl)^2}/(2 sqrt pi) (1 - 5t^2 + t sl - 2 sl^2)/3 - (l <-> k swapped)
    a = (2 - _erfc(t - sk)) * np.exp(-(t - sl) ** 2) / (2 * SQRTPI) * (1 - 5 * t**2 + t * sl - 2 * sl**2) / 3
    c = _erfc(t - sl) * np.exp(-(t - sk) ** 2) / (2 * SQRTPI) * (1 - 5 * t**2 + t * sk - 2 * sk**2) / 3
    return a - c


def _p_pair(t, sl, sk):
    return ((2 - _erfc(t - sk)) * np.exp(-(t - sl) ** 2) * _p_poly(t, sl)
            - _erfc(t - sl) * np.exp(-(t - sk) ** 2) * _p_poly(t, sk))


def bulk_mean_coeffs(b, alpha, r, s):
    """``E N(r_l)`` coefficients of ``(n, sqrt n, 1, n^-1/2)`` in the bulk."""
    return np.array([b * r ** (2 * b), SQRT2 * b * r**b * s, (b - 1 - 2 * alpha) / 2, 0.0])


def bulk_var_coeffs(b, r, s):
    rb = r**b
    return np.array([0.0, b * rb / SQRTPI, b * s / SQRT2PI,
                     -b * (1 + 4 * s**2) / (16 * SQRTPI * rb)])


def bulk_c11(b, r, sl, sk, quad=QuadratureSpec()):
    f = lambda t: (_erfc(t - sl) * (1 - 0.5 * _erfc(t - sk))
                   + _erfc(t + sk) * (1 - 0.5 * _erfc(t + sl)))
    est = _quad1(f, 0.0, math.inf, (sl, sk), quad, "c11 bulk")
    return Estimate(b * r**b / SQRT2 * est.value, b * r**b / SQRT2 * est.error)


def bulk_d11(b, sl, sk, quad=QuadratureSpec()):
    f1 = lambda t: t * (_erfc(t - sl) * (2 - _erfc(t - sk)) - _erfc(t + sk) * (2 - _erfc(t + sl)))
    e1 = _quad1(f1, 0.0, math.inf, (sl, sk), quad, "d11 bulk (t-integral)")
    e2 = _quad1(lambda t: _g1_pair(t, sl, sk), -math.inf, math.inf, (sl, sk), quad,
                "d11 bulk (gaussian integral)")
    return Estimate(b * (e1.value + e2.value), b * (e1.error + e2.error))


def bulk_e11(b, r, sl, sk, quad=QuadratureSpec()):
    rb = r**b
    head = -b / rb * math.exp(-(sl - sk) ** 2 / 2) / (288 * SQRTPI) * _e11_poly(sl, sk)
    f1 = lambda t: t**2 * (_erfc(t - sl) * (2 - _erfc(t - sk)) + (2 - _erfc(t + sl)) * _erfc(t + sk))
    e1 = _quad1(f1, 0.0, math.inf, (sl, sk), quad, "e11 bulk (t^2-integral)")
    e2 = _quad1(lambda t: _p_pair(t, sl, sk), -math.inf, math.inf, (sl, sk), quad,
                "e11 bulk (p-integral)")
    c1 = 3 * b / (rb * SQRT2)
    c2 = b / (rb * 36 * SQRT2PI)
    return Estimate(head + c1 * e1.value + c2 * e2.value, c1 * e1.error + c2 * e2.error)


def edge_c1(b, s):
    sb = math.sqrt(b)
    return sb * s / SQRT2 * _erfc(s) - sb / SQRT2PI * math.exp(-s * s)


def edge_d1(b, alpha, s):
    return -0.5 * (0.5 + alpha - b / 2) * _erfc(s) - b * s / (3 * SQRTPI) * math.exp(-s * s)


def edge_e1(b, alpha, s):
    sb = math.sqrt(b)
    return math.exp(-s * s) / SQRT2PI * (
        (b * (2 + 4 * alpha) - 1 - 6 * alpha - 6 * alpha**2) / (12 * sb)
        + (3 * b - 2 - 4 * alpha) * s**2 / 6 * sb
        - 2 * s**4 / 9 * b**1.5)


def edge_c2(b, s):
    sb = math.sqrt(b)
    es = _erfc(s)
    return (sb / (2 * SQRTPI) * _erfc(SQRT2 * s)
            + sb * math.exp(-s * s) / SQRT2PI * (1 - es)
            + sb * s / SQRT2 * es * (0.5 * es - 1))


def edge_d2(b, alpha, s):
    es = _erfc(s)
    return (-b / (12 * math.pi) * math.exp(-2 * s * s)
            + b * s / (2 * SQRT2PI) * _erfc(SQRT2 * s)
            + b * s / (3 * SQRTPI) * math.exp(-s * s) * (1 - es)
            + (b - 1 - 2 * alpha) / 4 * es * (0.5 * es - 1))


def edge_e2(b, alpha, s):
    es = _erfc(s)
    return (math.exp(-s * s) / (12 * math.sqrt(2 * math.pi * b))
            * (1 - 2 * b + 6 * alpha - 4 * b * alpha + 6 * alpha**2
               + 2 * (2 - 3 * b + 4 * alpha) * b * s**2 + 8 * b**2 / 3 * s**4) * (1 - es)
            - b**1.5 * s / (72 * SQRT2 * math.pi) * math.exp(-2 * s * s)
            - b**1.5 * (1 + 4 * s**2) / (32 * SQRTPI) * _erfc(SQRT2 * s))


def edge_c11(b, sl, sk, quad=QuadratureSpec()):
    f = lambda t: _erfc(t + sk) * (2 - _erfc(t + sl))
    est = _quad1(f, 0.0, math.inf, (sl, sk), quad, "c11 edge")
    c = math.sqrt(b) / (2 * SQRT2)
    return Estimate(c * est.value, c * est.error)


def edge_d11(b, alpha, sl, sk, quad=QuadratureSpec()):
    head = (1 + 2 * alpha) / 8 * (2 - _erfc(sl)) * _erfc(sk)
    f1 = lambda t: t * _erfc(t + sk) * (2 - _erfc(t + sl))
    e1 = _quad1(f1, 0.0, math.inf, (sl, sk), quad, "d11 edge (t-integral)")
    e2 = _quad1(lambda t: _g1_pair(t, sl, sk), -math.inf, 0.0, (sl, sk), quad,
                "d11 edge (gaussian integral)")
    return Estimate(head - b * e1.value + b * e2.value, b * (e1.error + e2.error))


def edge_e11(b, alpha, sl, sk, quad=QuadratureSpec()):
    sb = math.sqrt(b)
    b32 = b**1.5

    def lead(x, y):
        return (math.exp(-y * y) / SQRT2PI
                * (1 + 6 * alpha + 6 * alpha**2 + 2 * b * (1 + 2 * alpha) * (2 * y * y - 1))
                / (24 * sb))

    head = (2 - _erfc(sl)) * lead(sl, sk) - _erfc(sk) * lead(sk, sl)
    head -= (b32 * math.exp(-(sl - sk) ** 2 / 2) / (288 * SQRTPI)
             * 0.5 * _erfc((sl + sk) / SQRT2) * _e11_poly(sl, sk))
    head += (b32 / (144 * SQRT2) * math.exp(-sl * sl - sk * sk) / (2 * math.pi)
             * (55 * (sl**3 + sk**3) + 73 * (sl + sk + sl**2 * sk + sl * sk**2)))
    f1 = lambda t: t**2 * (2 - _erfc(t + sl)) * _erfc(t + sk)
    e1 = _quad1(f1, 0.0, math.inf, (sl, sk), quad, "e11 edge (t^2-integral)")
    e2 = _quad1(lambda t: _p_pair(t, sl, sk), -math.inf, 0.0, (sl, sk), quad,
                "e11 edge (p-integral)")
    c1 = 3 * b32 / SQRT2
    c2 = b32 / (36 * SQRT2PI)
    return Estimate(head + c1 * e1.value + c2 * e2.value, c1 * e1.error + c2 * e2.error)


@dataclass(frozen=True)
class ClosedFormMoments:
    """Expansion coefficients of means and covariances, ordered as
    ``(n, sqrt(n), 1, n^(-1/2))``.

    ``mean[l]`` belongs to ``E N(r_l)``; ``cov[l, k]`` to ``Cov(N(r_l), N(r_k))``
    with the variance coefficients on the diagonal.
    """

    regime: str
    mean: np.ndarray
    cov: np.ndarray
    errors: np.ndarray

    def evaluate(self, n: float) -> Tuple[np.ndarray, np.ndarray]:
        """Truncated expansions of the mean vector and covariance matrix at ``n``."""
        rn = math.sqrt(n)
        powers = np.array([n, rn, 1.0, 1.0 / rn])
        return self.mean @ powers, self.cov @ powers


def closed_form_moments(b: float, alpha: float, cfg: MergeConfig,
                        quad: QuadratureSpec = QuadratureSpec()) -> ClosedFormMoments:
    """Closed-form mean, variance and covariance expansion coefficients."""
    if not (b > 0 and alpha > -1):
        raise DomainError("need b > 0 and alpha > -1")
    cfg.check(b)
    s = cfg.offsets
    m = cfg.m
    mean = np.zeros((m, 4))
    cov = np.zeros((m, m, 4))
    err = np.zeros((m, m, 4))
    for l, sl in enumerate(s):
        if cfg.regime == "bulk":
            mean[l] = bulk_mean_coeffs(b, alpha, cfg.r, sl)
            cov[l, l] = bulk_var_coeffs(b, cfg.r, sl)
        else:
            mean[l] = [1.0, edge_c1(b, sl), edge_d1(b, alpha, sl), edge_e1(b, alpha, sl)]
            cov[l, l] = [0.0, edge_c2(b, sl), edge_d2(b, alpha, sl), edge_e2(b, alpha, sl)]
    for l in range(m):
        for k in range(l + 1, m):
            sl, sk = s[l], s[k]
            if cfg.regime == "bulk":
                parts = (bulk_c11(b, cfg.r, sl, sk, quad), bulk_d11(b, sl, sk, quad),
                         bulk_e11(b, cfg.r, sl, sk, quad))
            else:
                parts = (edge_c11(b, sl, sk, quad), edge_d11(b, alpha, sl, sk, quad),
                         edge_e11(b, alpha, sl, sk, quad))
            for i, est in enumerate(parts, start=1):
                cov[l, k, i] = cov[k, l, i] = est.value
                err[l, k, i] = err[k, l, i] = est.error
    return ClosedFormMoments(cfg.regime, mean, cov, err)


def clt_covariance(b: float, alpha: float, cfg: MergeConfig,
                   quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Limiting covariance matrix of the standardized counts.

    Bulk: off-diagonal ``c11 / (b r^b / sqrt(pi))``.  Edge: ``c11 / sqrt(c2 c2)``
    with the edge ``c11``.
    """
    cfg.check(b)
    m = cfg.m
    sig = np.eye(m)
    s = cfg.offsets
    for l in range(m):
        for k in range(l + 1, m):
            if cfg.regime == "bulk":
                v = bulk_c11(b, cfg.r, s[l], s[k], quad).value / (b * cfg.r**b / SQRTPI)
            else:
                v = edge_c11(b, s[l], s[k], quad).value / math.sqrt(edge_c2(b, s[l]) * edge_c2(b, s[k]))
            sig[l, k] = sig[k, l] = v
    return sig
