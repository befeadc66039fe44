"""Elementary sampling blocks and distribution-level math.

Immigration counts follow a discrete Pareto law with an atom at zero:
P(B = 0) = 1 - c and P(B >= k) = c * k**(-alpha) exactly for integers
k >= 1, with tail index alpha in (1, 2) so the mean is finite but the
variance is not.  Offspring counts come from one of three parametric
families (Bernoulli, Poisson, Geometric) chosen so the total offspring
of ``parents`` individuals has a closed-form law and can be drawn in
O(1) regardless of the population size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ImmigrationLaw",
    "OffspringLaw",
    "AggregateDraw",
    "sample_immigration",
    "sample_immigration_many",
    "sample_aggregate_offspring",
    "sample_aggregate_offspring_many",
    "karamata_ratio",
    "karamata_limit",
    "pareto_tail_cdf",
    "pareto_truncated_moment",
]

# Comparison slack for the inverse-CDF boundary: accept k when
# c*k^(-alpha) >= (1-u)*(1-_BOUNDARY_RTOL), so that u values meant to hit
# the CDF jump exactly (e.g. 1-u == c in real arithmetic) are not pushed
# to the lower step by one ulp of rounding in 1-u.
_BOUNDARY_RTOL = 1e-12

_MU_B_CUTOFF = 10**6


def _mu_b(alpha: float, c: float, cutoff: int = _MU_B_CUTOFF) -> float:
    """Mean of the immigration law: c * sum_{k>=1} k^(-alpha).

    The series is summed directly to ``cutoff`` and closed with the
    Euler-Maclaurin tail  integral(x^-alpha, cutoff..inf) + cutoff^-alpha/2,
    accurate to O(cutoff^(-alpha-1)); the default cutoff puts the
    truncation error far below 1e-10.
    """
    k = np.arange(1, cutoff + 1, dtype=np.float64)
    head = float(np.sum(k ** -alpha))
    tail = cutoff ** (1.0 - alpha) / (alpha - 1.0) - 0.5 * cutoff ** -alpha
    return c * (head + tail)


@dataclass(frozen=True)
class ImmigrationLaw:
    """Discrete Pareto immigration with an atom at zero.

    P(B = 0) = 1 - c and P(B >= k) = c * k**(-alpha) for k >= 1.
    """

    alpha: float
    c: float
    mu_B: float = field(init=False)

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {self.c}")
        object.__setattr__(self, "mu_B", _mu_b(self.alpha, self.c))

    def survival(self, k):
        """P(B >= k) for integer k >= 0 (vectorised)."""
        k = np.asarray(k, dtype=np.float64)
        return np.where(k <= 0, 1.0, self.c * np.maximum(k, 1.0) ** -self.alpha)


@dataclass(frozen=True)
class OffspringLaw:
    """Offspring distribution with mean mu_A in (0, 1).

    Supported families, parametrised by the mean alone:

    - ``bernoulli``: A ~ Bernoulli(mu_A), variance mu_A(1-mu_A);
    - ``poisson``:   A ~ Poisson(mu_A), variance mu_A;
    - ``geometric``: A on {0,1,...} with success p = 1/(1+mu_A),
      variance mu_A(1+mu_A).
    """

    family: str
    mu_A: float
    sigma_A2: float = field(init=False)

    _FAMILIES = ("bernoulli", "poisson", "geometric")

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in self._FAMILIES:
            raise ValueError(f"unknown offspring family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if not 0.0 < self.mu_A < 1.0:
            raise ValueError(f"mu_A must lie in (0, 1), got {self.mu_A}")
        mu = self.mu_A
        var = {
            "bernoulli": mu * (1.0 - mu),
            "poisson": mu,
            "geometric": mu * (1.0 + mu),
        }[fam]
        object.__setattr__(self, "sigma_A2", var)


@dataclass(frozen=True)
class AggregateDraw:
    """Total offspring of ``parent_count`` individuals."""

    total_offspring: int
    parent_count: int

    def __post_init__(self):
        if self.parent_count == 0 and self.total_offspring != 0:
            raise ValueError("total_offspring must be 0 when parent_count is 0")


def sample_immigration_many(law: ImmigrationLaw, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF immigration draws from an array of uniforms.

    Returns 0 where 1-u > c, else floor((c/(1-u))**(1/alpha)) — the
    largest k >= 1 with c*k^(-alpha) >= 1-u.
    """
    u = np.asarray(u, dtype=np.float64)
    q = 1.0 - u
    out = np.zeros(u.shape, dtype=np.int64)
    hit = q <= law.c / (1.0 - _BOUNDARY_RTOL)
    if np.any(hit):
        k = np.floor((law.c / q[hit]) ** (1.0 / law.alpha)).astype(np.int64)
        k = np.maximum(k, 1)
        # one-ulp guard: step down if c*k^-alpha fell below the (slackened)
        # target, step up if the next level still clears it
        target = q[hit] * (1.0 - _BOUNDARY_RTOL)
        k = np.where(law.c * k ** -float(law.alpha) < target, k - 1, k)
        kk = (k + 1).astype(np.float64)
        k = np.where(law.c * kk ** -float(law.alpha) >= target, k + 1, k)
        out[hit] = np.maximum(k, 1)
    return out


def sample_immigration(law: ImmigrationLaw, u: float) -> int:
    """Single inverse-CDF immigration draw from one uniform variate."""
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in the open interval (0, 1)")
    return int(sample_immigration_many(law, np.array([u]))[0])


def sample_aggregate_offspring_many(
    law: OffspringLaw, parents: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Total offspring for each entry of ``parents``, in O(1) per entry.

    Uses the closed-form aggregate: Binomial(parents, mu) for Bernoulli
    offspring, Poisson(parents*mu) for Poisson, and NegativeBinomial
    (parents failures-before-success parametrisation) for Geometric.
    """
    parents = np.asarray(parents)
    out = np.zeros(parents.shape, dtype=np.int64)
    pos = parents > 0
    if not np.any(pos):
        return out
    n = parents[pos]
    mu = law.mu_A
    if law.family == "bernoulli":
        out[pos] = rng.binomial(n, mu)
    elif law.family == "poisson":
        out[pos] = rng.poisson(mu * n)
    else:  # geometric: sum of n draws is NB(n, p) with p = 1/(1+mu)
        out[pos] = rng.negative_binomial(n, 1.0 / (1.0 + mu))
    return out


def sample_aggregate_offspring(
    law: OffspringLaw, parents: int, rng: np.random.Generator
) -> AggregateDraw:
    """Draw the summed offspring of ``parents`` i.i.d. individuals."""
    if parents < 0:
        raise ValueError("parents must be nonnegative")
    total = int(sample_aggregate_offspring_many(law, np.array([parents]), rng)[0])
    return AggregateDraw(total_offspring=total, parent_count=parents)


def karamata_ratio(beta, alpha, x, tail_cdf, truncated_moment):
    """Truncated-moment tail ratio diagnostic.

    For a regularly varying law with tail index ``alpha``:

    - beta >= alpha: returns x^beta * P(X>x) / E[X^beta 1{X<=x}], which
      converges to (beta-alpha)/alpha as x grows;
    - beta < alpha: returns x^beta * P(X>x) / E[X^beta 1{X>x}], which
      converges to (alpha-beta)/alpha.

    ``tail_cdf(x)`` must return P(X>x) and ``truncated_moment(beta, x)``
    the matching truncated moment (below x in the first form, above x in
    the second).
    """
    if x <= 0:
        raise ValueError("x must be positive")
    mom = truncated_moment(beta, x)
    if mom <= 0:
        raise ValueError("truncated moment must be positive")
    return x**beta * tail_cdf(x) / mom


def karamata_limit(beta, alpha):
    """Limit value of ``karamata_ratio`` as x -> inf for either form."""
    if beta >= alpha:
        return (beta - alpha) / alpha
    return (alpha - beta) / alpha


def pareto_tail_cdf(alpha: float):
    """Survival function of the exact Pareto(alpha) law on [1, inf)."""

    def tail(x):
        return 1.0 if x <= 1.0 else x**-alpha

    return tail


def pareto_truncated_moment(alpha: float, below: bool = True):
    """Closed-form truncated moments of the exact Pareto(alpha) on [1, inf).

    below=True gives E[X^beta 1{X<=x}]; below=False gives E[X^beta 1{X>x}]
    (the latter requires beta < alpha).
    """

    def moment(beta, x):
        if below:
            if x <= 1.0:
                return 0.0
            if beta == alpha:
                return alpha * math.log(x)
            return alpha / (beta - alpha) * (x ** (beta - alpha) - 1.0)
        if beta >= alpha:
            raise ValueError("upper truncated moment diverges for beta >= alpha")
        xx = max(x, 1.0)
        return alpha / (alpha - beta) * xx ** (beta - alpha)

    return moment
