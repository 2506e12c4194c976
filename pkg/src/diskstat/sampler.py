"""Exact Monte Carlo sampling of disk counts.

The weight is rotation invariant, so the moduli of the points are independent:
``V_j = |z_j|^(2b)`` is gamma distributed with shape ``(j + alpha)/b`` and rate
``n``.  A replica draws ``V_1..V_n`` and counts how many fall below each
threshold ``r_l^(2b)``.  No angular sampling is needed for disk counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .asymptotics import edge_c1, edge_c2
from .ensemble import EnsembleParams, MergeConfig, radii as merge_radii
from .errors import DomainError

__all__ = [
    "SampleBatch",
    "sample_counts",
    "poisson_binomial_pmf",
    "empirical_cumulants",
    "empirical_correlation",
    "standardize",
    "DEFAULT_MAX_DRAWS",
    "MIN_REPLICAS",
]

# replicas * n above this is rejected unless the caller raises the cap
DEFAULT_MAX_DRAWS = 2 * 10**9
MIN_REPLICAS = 100
JACKKNIFE_BLOCKS = 200
# replicas per RNG substream; part of the reproducibility contract
_BLOCK = 256


@dataclass(frozen=True)
class SampleBatch:
    """Counts ``N(r_l)`` for each replica (rows) and radius (columns)."""

    counts: np.ndarray
    seed: int
    params: EnsembleParams
    radii: Tuple[float, ...]

    @property
    def replicas(self) -> int:
        return self.counts.shape[0]

    @property
    def m(self) -> int:
        return self.counts.shape[1]


def _block_counts(shapes, thresholds, seed, block, size):
    # one substream per fixed-size block of replicas, keyed by (seed, block);
    # blocks never depend on the worker count, so output is thread-invariant
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    # n V_j is a unit-rate gamma variable; compare it with n r^(2b)
    v = gen.standard_gamma(shapes, size=(size, shapes.size))
    return np.count_nonzero(v[:, :, None] < thresholds, axis=1)


def resolve_threads(threads: Optional[int]) -> int:
    """``threads`` if given, else ``DISKSTAT_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("DISKSTAT_THREADS")
        if env is None or env == "":
            return 1
        try:
            threads = int(env)
        except ValueError:
            raise DomainError(f"DISKSTAT_THREADS must be an integer, got {env!r}") from None
    if threads < 1:
        raise DomainError("threads must be >= 1")
    return int(threads)


def sample_counts(params: EnsembleParams, radii: Sequence[float], replicas: int,
                  seed: int, threads: Optional[int] = None,
                  max_draws: int = DEFAULT_MAX_DRAWS) -> SampleBatch:
    """Draw ``replicas`` independent realizations of ``(N(r_1), ..., N(r_m))``.

    Output is bit-identical for any ``threads``.
    """
    rad = np.atleast_1d(np.asarray(radii, dtype=float))
    if rad.ndim != 1 or rad.size == 0:
        raise DomainError("radii must be a non-empty 1-d sequence")
    if np.any(np.diff(rad) <= 0):
        raise DomainError("radii must be strictly increasing")
    if np.any(rad <= 0) or np.any(np.isnan(rad)):
        raise DomainError("radii must be positive")
    if int(replicas) != replicas or replicas < 1:
        raise DomainError("replicas must be a positive integer")
    replicas = int(replicas)
    if not (0 <= seed < 2**64):
        raise DomainError("seed must be a 64-bit unsigned integer")
    if replicas * params.n > max_draws:
        raise DomainError(f"replicas*n = {replicas * params.n} exceeds the draw budget "
                          f"{max_draws}; raise max_draws to allow it")
    nthreads = resolve_threads(threads)
    shapes = params.shapes()
    thresholds = params.thresholds(rad)
    blocks = [(k, min(_BLOCK, replicas - k * _BLOCK)) for k in range(-(-replicas // _BLOCK))]

    def job(blk):
        return _block_counts(shapes, thresholds, int(seed), *blk)

    if nthreads == 1:
        parts = [job(blk) for blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(job, blocks))
    counts = np.concatenate(parts, axis=0)
    return SampleBatch(counts, int(seed), params, tuple(float(x) for x in rad))


def poisson_binomial_pmf(probs) -> np.ndarray:
    """Law of a sum of independent Bernoulli(p_j), by direct convolution."""
    probs = np.asarray(probs, dtype=float)
    if np.any((probs < 0) | (probs > 1)):
        raise DomainError("probabilities must lie in [0, 1]")
    pmf = np.zeros(probs.size + 1)
    pmf[0] = 1.0
    for k, p in enumerate(probs, start=1):
        pmf[1:k + 1] = pmf[1:k + 1] * (1 - p) + pmf[:k] * p
        pmf[0] *= 1 - p
    return pmf


# ---------------------------------------------------------------------------
# k-statistics


def _kstat(x: np.ndarray) -> float:
    """Unbiased joint cumulant estimator of the columns of ``x`` (order 1..4)."""
    N, order = x.shape
    if order == 1:
        return float(np.mean(x[:, 0]))
    c = x - x.mean(axis=0)
    if order == 2:
        return float(np.dot(c[:, 0], c[:, 1]) / (N - 1))
    if order == 3:
        return float(np.sum(c[:, 0] * c[:, 1] * c[:, 2]) * N / ((N - 1) * (N - 2)))

    def m(*idx):
        return float(np.mean(np.prod(c[:, list(idx)], axis=1)))

    m4 = m(0, 1, 2, 3)
    pairs = m(0, 1) * m(2, 3) + m(0, 2) * m(1, 3) + m(0, 3) * m(1, 2)
    return N * N * ((N + 1) * m4 - (N - 1) * pairs) / ((N - 1) * (N - 2) * (N - 3))


def _columns(batch: SampleBatch, jvec) -> np.ndarray:
    jvec = tuple(int(j) for j in jvec)
    if len(jvec) != batch.m or any(j < 0 for j in jvec):
        raise DomainError("jvec must hold one non-negative order per radius")
    order = sum(jvec)
    if not 1 <= order <= 4:
        raise DomainError("empirical cumulants are available for orders 1..4")
    cols = [l for l, j in enumerate(jvec) for _ in range(j)]
    return batch.counts[:, cols].astype(float)


def _jackknife(stat, x: np.ndarray, blocks: int = JACKKNIFE_BLOCKS) -> Tuple[float, float]:
    N = x.shape[0]
    full = stat(x)
    g = min(blocks, N)
    edges = np.linspace(0, N, g + 1).astype(int)
    loo = np.empty(g)
    for i in range(g):
        keep = np.concatenate([x[:edges[i]], x[edges[i + 1]:]])
        loo[i] = stat(keep)
    se = math.sqrt((g - 1) / g * np.sum((loo - loo.mean()) ** 2))
    return full, se


def _check_replicas(batch):
    if batch.replicas < MIN_REPLICAS:
        raise DomainError(f"need at least {MIN_REPLICAS} replicas, got {batch.replicas}")


def empirical_cumulants(batch: SampleBatch, jvec) -> Tuple[float, float]:
    """k-statistic for the joint cumulant ``jvec`` with a grouped-jackknife stderr."""
    _check_replicas(batch)
    x = _columns(batch, jvec)
    return _jackknife(_kstat, x)


def empirical_correlation(values: np.ndarray, l: int, k: int) -> Tuple[float, float]:
    """Pearson correlation of two columns with a grouped-jackknife stderr."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < MIN_REPLICAS:
        raise DomainError(f"need at least {MIN_REPLICAS} rows")

    def corr(x):
        c = x - x.mean(axis=0)
        return float(np.dot(c[:, 0], c[:, 1]) / math.sqrt(np.dot(c[:, 0], c[:, 0]) * np.dot(c[:, 1], c[:, 1])))

    return _jackknife(corr, values[:, [l, k]])


def standardize(batch: SampleBatch, cfg: MergeConfig, mode: str,
                center: str = "asymptotic") -> np.ndarray:
    """Centered and scaled counts.

    ``mode`` must match ``cfg.regime``.  With ``center="asymptotic"`` the
    leading-order centering and scaling of the CLT are used: bulk
    ``pi^(1/4) (N - b r^(2b) n - sqrt2 b r^b s sqrt(n)) / (sqrt(b r^b) n^(1/4))``,
    edge ``(N - n - c1(s) sqrt(n)) / (sqrt(c2(s)) n^(1/4))``.
    ``center="sample"`` subtracts the column means instead.
    """
    mode = mode.lower()
    if mode not in ("bulk", "edge"):
        raise DomainError("mode must be 'bulk' or 'edge'")
    if mode != cfg.regime:
        raise DomainError(f"mode {mode!r} does not match the {cfg.regime} configuration")
    if center not in ("asymptotic", "sample"):
        raise DomainError("center must be 'asymptotic' or 'sample'")
    p = batch.params
    if cfg.m != batch.m:
        raise DomainError("configuration and batch have different numbers of radii")
    expected = merge_radii(p, cfg)
    if not np.allclose(expected, batch.radii, rtol=1e-12, atol=0):
        raise DomainError("batch radii were not generated from this configuration")
    n, b = p.n, p.b
    s = np.asarray(cfg.offsets, dtype=float)
    if mode == "bulk":
        rb = cfg.r**b
        centre = b * cfg.r ** (2 * b) * n + math.sqrt(2) * b * rb * s * math.sqrt(n)
        scale = np.full(cfg.m, math.sqrt(b * rb) * n**0.25 / math.pi**0.25)
    else:
        centre = n + np.array([edge_c1(b, x) for x in s]) * math.sqrt(n)
        scale = np.sqrt([edge_c2(b, x) for x in s]) * n**0.25
    x = batch.counts.astype(float)
    if center == "sample":
        centre = x.mean(axis=0)
    return (x - centre) / scale
