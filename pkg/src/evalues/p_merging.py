"""Classical p-merging functions.

Each function sorts its inputs before doing arithmetic, so the result depends
only on the multiset of p-values, bit for bit.  Closed-testing code relies on
this when it compares merged values computed from differently ordered
subsets.
"""

from __future__ import annotations

import math
from typing import Sequence

from .numerics import chi2_survival_even

__all__ = ["bonferroni", "ruger_p", "simes", "fisher", "maximum"]


def _pvector(p: Sequence[float]) -> list[float]:
    values = [float(x) for x in p]
    if not values:
        raise ValueError("need at least one p-value")
    for x in values:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"p-values must lie in [0, 1], got {x}")
    return sorted(values)


def bonferroni(p: Sequence[float]) -> float:
    """``min(1, K * min(p))``; valid under arbitrary dependence."""
    values = _pvector(p)
    return min(1.0, len(values) * values[0])


def ruger_p(k: int, p: Sequence[float]) -> float:
    """``min(1, (K / k) * p_(k))`` with ``p_(k)`` the k-th smallest p-value."""
    values = _pvector(p)
    K = len(values)
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= K:
        raise ValueError(f"k must be an integer in [1, {K}], got {k}")
    k = int(k)
    return min(1.0, K * values[k - 1] / k)


def simes(p: Sequence[float]) -> float:
    """``min_k (K / k) * p_(k)``.

    A p-merging function only for independent p-values (more generally under
    positive dependence); not valid under arbitrary dependence.
    """
    values = _pvector(p)
    K = len(values)
    return min(1.0, min(K * x / k for k, x in enumerate(values, start=1)))


def fisher(p: Sequence[float]) -> float:
    """Fisher's combination: chi-square(2K) tail probability of ``-2 sum ln p``.

    Valid for independent p-values only.  Any zero input gives 0, and a single
    p-value is returned unchanged (the chi-square(2) tail at ``-2 ln p`` is p).
    """
    values = _pvector(p)
    if values[0] == 0.0:
        return 0.0
    if len(values) == 1:
        return values[0]
    statistic = -2.0 * math.fsum(math.log(x) for x in values)
    return chi2_survival_even(2 * len(values), statistic)


def maximum(p: Sequence[float]) -> float:
    """``max(p)``; valid but inadmissible (it is beaten by any single p-value)."""
    return _pvector(p)[-1]
