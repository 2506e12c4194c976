"""Exact finite-n disk counting statistics of the Mittag-Leffler ensemble.

The points have joint density proportional to

    prod_{j<k} |z_k - z_j|^2  prod_j |z_j|^(2 alpha) exp(-n |z_j|^(2b)).

Because the weight is rotation invariant, ``V_j = |z|^(2b)`` for the j-th
radial mode is gamma distributed with shape ``a_j = (j + alpha)/b`` and rate
``n``, independently over ``j = 1..n``.  Hence ``N(r)`` is a sum of independent
Bernoulli variables with success probabilities ``P(a_j, n r^(2b))`` and the
joint moment generating function factorizes over ``j``::

    ln E[exp(sum_l u_l N(r_l))] = sum_j ln(1 + sum_l omega_l P(a_j, n r_l^(2b))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._numerics import Estimate, exact_sum, mixed_derivative
from .errors import DomainError, NumericalError
from .special import reg_gamma_pq

__all__ = [
    "EnsembleParams",
    "MergeConfig",
    "JumpWeights",
    "jump_weights",
    "radii",
    "log_mgf_exact",
    "mean_exact",
    "variance_exact",
    "covariance_exact",
    "joint_cumulant_exact",
    "decoupling_residual",
    "ExactMGF",
]

MAX_CUMULANT_ORDER = 6
# relative gap below which two radii are rejected as coincident
DEGENERATE_GAP = 1e-12


@dataclass(frozen=True)
class EnsembleParams:
    """Potential exponent ``b``, point-charge exponent ``alpha`` and size ``n``."""

    b: float
    alpha: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError(f"b must be > 0, got {self.b}")
        if not (math.isfinite(self.alpha) and self.alpha > -1):
            raise DomainError(f"alpha must be > -1, got {self.alpha}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def edge_radius(self) -> float:
        """Radius ``b^(-1/(2b))`` of the limiting droplet."""
        return self.b ** (-1.0 / (2.0 * self.b))

    def shapes(self) -> np.ndarray:
        """Gamma shapes ``a_j = (j + alpha)/b`` for ``j = 1..n``."""
        return (np.arange(1, self.n + 1, dtype=float) + self.alpha) / self.b

    def thresholds(self, rad) -> np.ndarray:
        """``z = n r^(2b)`` for each radius."""
        return self.n * np.asarray(rad, dtype=float) ** (2.0 * self.b)


@dataclass(frozen=True)
class MergeConfig:
    """Merging radii around a base radius, either in the bulk or at the edge.

    ``offsets`` must be strictly increasing.  For the bulk, ``r`` is the base
    radius and must satisfy ``0 < r < b^(-1/(2b))``; for the edge ``r`` is None.
    """

    regime: str
    offsets: tuple
    r: Optional[float] = None

    def __post_init__(self):
        offs = tuple(float(s) for s in np.atleast_1d(np.asarray(self.offsets, dtype=float)))
        object.__setattr__(self, "offsets", offs)
        if self.regime not in ("bulk", "edge"):
            raise DomainError(f"regime must be 'bulk' or 'edge', got {self.regime!r}")
        if not offs or not all(math.isfinite(s) for s in offs):
            raise DomainError("offsets must be a non-empty list of finite reals")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise DomainError("offsets must be strictly increasing")
        if self.regime == "bulk":
            if self.r is None or not (math.isfinite(self.r) and self.r > 0):
                raise DomainError("bulk regime needs a base radius r > 0")
        elif self.r is not None:
            raise DomainError("edge regime takes no base radius")

    @classmethod
    def bulk(cls, r: float, offsets: Sequence[float]) -> "MergeConfig":
        return cls("bulk", tuple(offsets), float(r))

    @classmethod
    def edge(cls, offsets: Sequence[float]) -> "MergeConfig":
        return cls("edge", tuple(offsets), None)

    @property
    def m(self) -> int:
        return len(self.offsets)

    def check(self, b: float) -> None:
        """Validate the base radius against the droplet radius for exponent ``b``."""
        if self.regime == "bulk" and not self.r < b ** (-1.0 / (2.0 * b)):
            raise DomainError(f"bulk base radius must be < b^(-1/(2b)) = {b ** (-1.0 / (2.0 * b)):.6g}")


@dataclass(frozen=True)
class JumpWeights:
    """Jump weights ``omega_1..omega_{m+1}`` and their suffix sums ``Omega``."""

    omega: np.ndarray = field(repr=True)
    Omega: np.ndarray = field(repr=True)


def _fugacities(u, m: Optional[int] = None) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1 or not np.all(np.isfinite(u)):
        raise DomainError("fugacities must be a finite 1-d sequence of reals")
    if m is not None and u.size != m:
        raise DomainError(f"expected {m} fugacities, got {u.size}")
    return u


def jump_weights(u) -> JumpWeights:
    """``omega_l = exp(u_l+...+u_m) - exp(u_{l+1}+...+u_m)``, ``omega_{m+1} = 1``.

    ``Omega_l = exp(u_l + ... + u_m)`` with ``Omega_{m+1} = 1``.
    """
    u = _fugacities(u)
    m = u.size
    Omega = np.ones(m + 1)
    omega = np.ones(m + 1)
    acc = 0.0
    for l in range(m - 1, -1, -1):
        omega[l] = Omega[l + 1] * math.expm1(u[l])
        acc += u[l]
        Omega[l] = math.exp(acc)
    return JumpWeights(omega, Omega)


def radii(params: EnsembleParams, cfg: MergeConfig) -> np.ndarray:
    """Merging radii ``r_1 < ... < r_m`` for ``params.n`` points.

    Bulk: ``r_l = r (1 + sqrt(2) s_l / (r^b sqrt(n)))^(1/(2b))``.
    Edge: ``r_l = b^(-1/(2b)) (1 + sqrt(2b) s_l / sqrt(n))^(1/(2b))``.
    """
    b, n = params.b, params.n
    cfg.check(b)
    s = np.asarray(cfg.offsets, dtype=float)
    if cfg.regime == "bulk":
        base = cfg.r
        inner = 1.0 + math.sqrt(2.0) * s / (base**b * math.sqrt(n))
    else:
        base = params.edge_radius
        inner = 1.0 + math.sqrt(2.0 * b) * s / math.sqrt(n)
    if np.any(inner <= 0):
        raise DomainError(f"n = {n} is too small for offsets {cfg.offsets}: a radius would be <= 0")
    out = base * inner ** (1.0 / (2.0 * b))
    return out


def _check_radii(rad) -> np.ndarray:
    rad = np.atleast_1d(np.asarray(rad, dtype=float))
    if rad.ndim != 1 or rad.size == 0:
        raise DomainError("radii must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(rad)) or np.any(rad <= 0):
        raise DomainError("radii must be finite and positive")
    gaps = np.diff(rad)
    if np.any(gaps <= 0):
        raise DomainError("radii must be strictly increasing")
    if np.any(gaps < DEGENERATE_GAP * rad[:-1]):
        raise DomainError("radii are numerically coincident; merge them explicitly")
    return rad


class ExactMGF:
    """Exact log-MGF for fixed ``(params, radii)`` as a function of ``u``.

    The incomplete gamma table ``P(a_j, n r_l^(2b))`` does not depend on ``u``
    and is computed once, so repeated evaluations (finite differences, grids
    of fugacities) cost one pass over ``j`` each.
    """

    def __init__(self, params: EnsembleParams, rad):
        self.params = params
        self.radii = _check_radii(rad)
        a = params.shapes()
        z = params.thresholds(self.radii)
        P, Q = reg_gamma_pq(a[None, :], z[:, None])
        self.P = np.atleast_2d(P)
        self.Q = np.atleast_2d(Q)
        m = self.radii.size
        # dP[l] = P_l - P_{l-1} with P_0 = 0, P_{m+1} = 1; the complementary form
        # is used where P > 1/2 to keep full relative accuracy.
        Pp = np.vstack([np.zeros(params.n), self.P, np.ones(params.n)])
        Qp = np.vstack([np.ones(params.n), self.Q, np.zeros(params.n)])
        direct = Pp[1:] - Pp[:-1]
        comp = Qp[:-1] - Qp[1:]
        dP = np.where(Pp[1:] <= 0.5, direct, comp)
        self.dP = np.maximum(dP, 0.0)
        self.m = m

    def terms(self, u) -> np.ndarray:
        """Per-``j`` log arguments ``ln(1 + sum_l omega_l P_l)``."""
        u = _fugacities(u, self.m)
        w = jump_weights(u)
        x = w.omega[:-1] @ self.P
        if np.all(w.omega[:-1] >= 0):
            return np.log1p(x)
        out = np.empty_like(x)
        safe = x > -0.5
        out[safe] = np.log1p(x[safe])
        if not np.all(safe):
            mix = w.Omega @ self.dP[:, ~safe]
            if np.any(mix <= 0):
                raise NumericalError("non-positive mixture in exact log-MGF")
            out[~safe] = np.log(mix)
        return out

    def __call__(self, u) -> float:
        return exact_sum(self.terms(u))


def log_mgf_exact(params: EnsembleParams, rad, u) -> float:
    """``ln E[exp(sum_l u_l N(r_l))]`` at finite ``n``, summed exactly over ``j``."""
    return ExactMGF(params, rad)(u)


def _single(params, radius):
    r = float(radius)
    if not (math.isfinite(r) and r > 0):
        raise DomainError("radius must be finite and positive")
    P, Q = reg_gamma_pq(params.shapes(), params.n * r ** (2.0 * params.b))
    return P, Q


def mean_exact(params: EnsembleParams, radius: float) -> float:
    """``E[N(r)] = sum_j P(a_j, n r^(2b))``."""
    P, _ = _single(params, radius)
    return exact_sum(P)


def variance_exact(params: EnsembleParams, radius: float) -> float:
    """``Var N(r) = sum_j P_j (1 - P_j)``."""
    P, Q = _single(params, radius)
    return exact_sum(P * Q)


def covariance_exact(params: EnsembleParams, r1: float, r2: float) -> float:
    """``Cov(N(r1), N(r2)) = sum_j P_j(r1) (1 - P_j(r2))`` for ``r1 < r2``."""
    if not r1 < r2:
        raise DomainError("covariance_exact needs r1 < r2")
    P1, _ = _single(params, r1)
    _, Q2 = _single(params, r2)
    return exact_sum(P1 * Q2)


def joint_cumulant_exact(params: EnsembleParams, rad, jvec: Sequence[int]) -> Estimate:
    """Joint cumulant ``d^jvec ln E[...]`` at ``u = 0`` by Richardson-extrapolated
    central differences of the exact log-MGF.

    Returns ``Estimate(value, error)``; orders up to 6 are supported.
    """
    jvec = tuple(int(j) for j in jvec)
    mgf = ExactMGF(params, rad)
    if len(jvec) != mgf.m or any(j < 0 for j in jvec):
        raise DomainError("jvec must hold one non-negative order per radius")
    order = sum(jvec)
    if order < 1:
        raise DomainError("cumulant order must be >= 1")
    if order > MAX_CUMULANT_ORDER:
        raise DomainError(f"cumulant order {order} exceeds {MAX_CUMULANT_ORDER}")
    return mixed_derivative(mgf, np.zeros(mgf.m), jvec)


def decoupling_residual(params: EnsembleParams, fixed_radii, u) -> float:
    """``ln E[prod_l e^{u_l N(r_l)}] - sum_l ln E[e^{u_l N(r_l)}]`` for fixed radii."""
    rad = _check_radii(fixed_radii)
    if np.any(rad >= params.edge_radius):
        raise DomainError("fixed radii must lie inside the droplet radius b^(-1/(2b))")
    u = _fugacities(u, rad.size)
    mgf = ExactMGF(params, rad)
    joint = mgf.terms(u)
    parts = []
    for l in range(rad.size):
        v = np.zeros(rad.size)
        v[l] = u[l]
        parts.append(mgf.terms(v))
    return exact_sum(np.concatenate([joint, -np.concatenate(parts)]))
