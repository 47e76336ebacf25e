"""Distribution-free confidence bounds on the resubstitution optimism.

Both bounds give a deviation term ``mu`` such that, with probability at
least ``1 - eta``, the actual error of a linear classifier trained on
``n`` samples of dimension ``d`` exceeds its resubstitution error by at
most ``mu``:

* :func:`empirical_bound` counts the labelings a ``d``-dimensional linear
  rule can realize on ``n - 1`` points (a sum of binomial coefficients)
  and applies a union bound,
* :func:`vapnik_bound` is the classical VC-dimension bound with
  ``h = d + 1`` for linear classifiers.

The binomial sum is evaluated in the log domain (log-gamma plus
log-sum-exp) so large ``n`` never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln, logsumexp


@dataclass(frozen=True)
class BoundSpec:
    """Inputs of a bound computation.

    Parameters
    ----------
    n : int
        Training-set size, at least 2.
    d : int
        Dimension of the classifier input, at least 1 and below ``n``.
    eta : float
        Confidence level parameter in (0, 1); the bound holds with
        probability at least ``1 - eta``.
    """

    n: int
    d: int
    eta: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.d >= self.n:
            raise ValueError("d must be smaller than n")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly between 0 and 1")


def log_binomial_sum(n: int, k_max: int) -> float:
    """Return ``ln(sum_{k=0}^{k_max} C(n, k))`` computed in log space.

    ``k_max`` is clipped to ``n``; ``k_max = 0`` gives ``ln 1 = 0``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    k_max = min(k_max, n)
    terms = [
        gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        for k in range(k_max + 1)
    ]
    return float(logsumexp(terms))


def empirical_bound(spec: BoundSpec) -> float:
    """Deviation bound from the number of realizable linear labelings.

    Computes ``sqrt((ln 2 + ln sum_{k=0}^{d-1} C(n-1, k) - ln eta) / (2 n))``.
    For ``d = 1`` this reduces to ``sqrt(ln(2 / eta) / (2 n))``.
    """
    log_count = log_binomial_sum(spec.n - 1, spec.d - 1)
    return math.sqrt(
        (math.log(2.0) + log_count - math.log(spec.eta)) / (2.0 * spec.n)
    )


def vapnik_bound(spec: BoundSpec) -> float:
    """Classical VC deviation bound with ``h = d + 1``.

    Computes ``sqrt((h (ln(2 n / h) + 1) - ln(eta / 4)) / n)``.
    """
    h = spec.d + 1
    return math.sqrt(
        (h * (math.log(2.0 * spec.n / h) + 1.0) - math.log(spec.eta / 4.0)) / spec.n
    )
