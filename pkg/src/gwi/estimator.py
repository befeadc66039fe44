"""Conditional least squares estimation of the offspring mean.

With the immigration mean mu_B known, the CLS estimator of mu_A from a
path X_0..X_n is

    mu_hat = sum_{i=1}^n X_{i-1} (X_i - mu_B) / sum_{i=1}^n X_{i-1}^2,

undefined on the (exponentially rare) event that the denominator
vanishes.  The estimation error obeys
mu_hat - mu_A = sum X_{i-1} M_i / sum X_{i-1}^2, and sqrt(a_n) times it
converges to the ratio of a dependent stable pair; the normalised
partial sums (V_n^1, V_n^2) = (a_n^-2 sum X_j^2, a_n^-3/2 sum X_j M_{j+1})
are the two coordinates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .process import (
    ModelParams,
    Trajectory,
    scaling,
    stationary_init_many,
    step_batch,
)

__all__ = [
    "ClsResult",
    "PartialSumPair",
    "cls_estimate",
    "partial_sums",
    "scaled_error",
    "replication_experiment",
    "REPLICATION_FIELDS",
]

_BLOCK = 250


@dataclass(frozen=True)
class ClsResult:
    """CLS estimate with its raw building blocks.

    ``numerator`` is sum X_{i-1}(X_i - mu_B) and ``denominator`` is
    sum X_{i-1}^2, so that for the true offspring mean
    mu_hat - mu_A = (numerator - mu_A*denominator) / denominator exactly.
    """

    mu_hat: float
    numerator: float
    denominator: float
    defined: bool


@dataclass(frozen=True)
class PartialSumPair:
    """Normalised partial sums (a_n^-2 sum X_j^2, a_n^-3/2 sum X_j M_{j+1})."""

    v1: float
    v2: float


def cls_estimate(x, mu_B: float) -> ClsResult:
    """CLS estimate of the offspring mean from path values X_0..X_n.

    Sums are accumulated exactly (math.fsum) since heavy-tailed paths
    mix terms of very different magnitude.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least two path values")
    prev, cur = x[:-1], x[1:]
    num = math.fsum(prev * (cur - mu_B))
    den = math.fsum(prev * prev)
    if den > 0:
        return ClsResult(mu_hat=num / den, numerator=num, denominator=den,
                         defined=True)
    return ClsResult(mu_hat=math.nan, numerator=num, denominator=den,
                     defined=False)


def partial_sums(traj: Trajectory, a_n: float) -> PartialSumPair:
    """Normalised sums over the shifted window j = 1..n, n = len(x) - 2.

    The trajectory must extend one step past the window so that M_{j+1}
    exists for every j; compensated (exact) summation is used throughout.
    """
    if a_n <= 0:
        raise ValueError("a_n must be positive")
    if traj.n < 2:
        raise ValueError("trajectory must hold at least two transitions")
    xj = np.asarray(traj.x[1:-1], dtype=np.float64)
    m_next = np.asarray(traj.m[1:], dtype=np.float64)
    v1 = math.fsum(xj * xj) / a_n**2
    v2 = math.fsum(xj * m_next) / a_n**1.5
    return PartialSumPair(v1=v1, v2=v2)


def scaled_error(cls: ClsResult, mu_A: float, a_n: float) -> float:
    """sqrt(a_n) * (mu_hat - mu_A); requires a defined estimate."""
    if not cls.defined:
        raise ValueError("CLS estimate is undefined (zero denominator)")
    return math.sqrt(a_n) * (cls.mu_hat - mu_A)


# ---------------------------------------------------------------------------
# replication farm

REPLICATION_FIELDS = [
    ("rep", np.int64),
    ("n", np.int64),
    ("a_n", np.float64),
    ("mu_hat", np.float64),
    ("defined", np.bool_),
    ("v1", np.float64),
    ("v2", np.float64),
    ("scaled_error", np.float64),
]


def _run_block(args):
    """Simulate one block of replications with a vectorised chain bundle.

    Each block owns an independent RNG stream keyed by
    (master seed, block index), so results do not depend on how blocks
    are distributed over workers.
    """
    (params, n, seed, block_index, width, a_n, init_tol) = args
    rng = np.random.default_rng([seed, block_index])
    x = stationary_init_many(params, init_tol, width, rng)

    mu_A, mu_B = params.mu_A, params.mu_B
    num = np.zeros(width)
    den = np.zeros(width)
    s_x2 = np.zeros(width)   # sum_{j=1..n-1} X_j^2
    s_xm = np.zeros(width)   # sum_{j=1..n-1} X_j M_{j+1}
    prev = x.astype(np.float64)
    # horizon n: estimator window i = 1..n; shifted pair window j = 1..n-1
    for i in range(1, n + 1):
        x = step_batch(params, x, rng)
        cur = x.astype(np.float64)
        num += prev * (cur - mu_B)
        den += prev * prev
        if i >= 2:
            xj = prev  # X_{i-1} with its forward residual M_i
            s_xm += xj * (cur - mu_A * xj - mu_B)
            s_x2 += xj * xj
        prev = cur

    defined = den > 0
    mu_hat = np.where(defined, num / np.where(defined, den, 1.0), np.nan)
    out = np.zeros(width, dtype=REPLICATION_FIELDS)
    out["rep"] = block_index * _BLOCK + np.arange(width)
    out["n"] = n
    out["a_n"] = a_n
    out["mu_hat"] = mu_hat
    out["defined"] = defined
    out["v1"] = s_x2 / a_n**2
    out["v2"] = s_xm / a_n**1.5
    out["scaled_error"] = np.where(defined, math.sqrt(a_n) * (mu_hat - mu_A),
                                   np.nan)
    return block_index, out


def replication_experiment(
    params: ModelParams,
    n: int,
    reps: int,
    seed: int,
    a_n_mode: str = "analytic",
    init_tol: float = 1e-6,
    workers: int = 1,
) -> np.ndarray:
    """Replicated CLS runs on stationary paths.

    Returns a structured array with one row per replication holding the
    estimate, the normalised partial sums over the shifted window, and
    the scaled error sqrt(a_n)*(mu_hat - mu_A).  Deterministic in
    (params, n, reps, seed) and invariant to ``workers``.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    info = scaling(params, n, mode=a_n_mode)
    blocks = []
    for b in range((reps + _BLOCK - 1) // _BLOCK):
        width = min(_BLOCK, reps - b * _BLOCK)
        blocks.append((params, n, seed, b, width, info.a_n, init_tol))
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, blocks))
    else:
        results = [_run_block(args) for args in blocks]
    results.sort(key=lambda t: t[0])
    return np.concatenate([r for _, r in results])
