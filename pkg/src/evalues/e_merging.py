"""Symmetric e-merging functions and merging functions for independent or
sequential e-values.

Every function takes a sequence of K >= 1 nonnegative e-values, where
``math.inf`` is allowed.  A merged value is ``inf`` whenever any input is
``inf``: an e-merging function defined on finite inputs stays valid when
extended by infinity off the finite orthant, and this extension dominates
every other one.

The validity class of each function is recorded in :data:`MERGE_CLASS`:

``arbitrary``
    valid for arbitrarily dependent e-variables (e-merging functions);
``sequential``
    valid when each e-variable has conditional expectation at most 1 given
    its predecessors (se-merging); independent inputs qualify;
``independent``
    valid for independent inputs only (ie-merging).
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable, Sequence

__all__ = [
    "MergeClass",
    "MERGE_CLASS",
    "arithmetic_mean",
    "convex_mixture",
    "u_statistic",
    "u_mixture",
    "product",
    "ruger_e",
    "e_simes",
    "m_family_e",
    "merge_class_of",
]


class MergeClass(str, Enum):
    ARBITRARY = "arbitrary"
    SEQUENTIAL = "sequential"
    INDEPENDENT = "independent"

    def covers(self, other: "MergeClass") -> bool:
        """True if validity in class ``self`` implies validity in ``other``."""
        order = [MergeClass.ARBITRARY, MergeClass.SEQUENTIAL, MergeClass.INDEPENDENT]
        return order.index(self) <= order.index(other)


def _evector(e: Sequence[float]) -> list[float]:
    values = [float(x) for x in e]
    if not values:
        raise ValueError("need at least one e-value")
    for x in values:
        if math.isnan(x) or x < 0:
            raise ValueError(f"e-values must be nonnegative, got {x}")
    return values


def _has_inf(values: list[float]) -> bool:
    return any(math.isinf(x) for x in values)


# Sums and products below are computed exactly on the binary fractions behind
# the floats and rounded once.  The results are then independent of input order
# and monotone in every input, so closed-testing shortcuts agree bit for bit
# with brute-force enumeration.

def _exact_sum(values: list[float]) -> tuple[int, int]:
    ratios = [x.as_integer_ratio() for x in values]
    den = max(d for _, d in ratios)
    return sum(n * (den // d) for n, d in ratios), den


def _to_float(num: int, den: int) -> float:
    try:
        return num / den
    except OverflowError:
        return math.inf


def _exact_product(values: list[float]) -> tuple[int, int]:
    num, den = 1, 1
    for x in values:
        n, d = x.as_integer_ratio()
        num *= n
        den *= d
    return num, den


def arithmetic_mean(e: Sequence[float]) -> float:
    """``(e_1 + ... + e_K) / K``, the essentially dominant symmetric e-merging function."""
    values = _evector(e)
    if _has_inf(values):
        return math.inf
    num, den = _exact_sum(values)
    return _to_float(num, den * len(values))


def convex_mixture(lam: float, e: Sequence[float]) -> float:
    """``lam + (1 - lam) * arithmetic_mean(e)``; admissible for every lam in [0, 1]."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    mean = arithmetic_mean(e)
    if math.isinf(mean):
        return math.inf
    return lam + (1.0 - lam) * mean


def _elementary_symmetric(values: list[float], n: int) -> float:
    # e_n(values) via the standard O(K n) recurrence; all terms are nonnegative
    poly = [1.0] + [0.0] * n
    for x in values:
        for j in range(n, 0, -1):
            poly[j] += x * poly[j - 1]
    return poly[n]


def u_statistic(n: int, e: Sequence[float]) -> float:
    """Average of the products over all n-element subsets of the inputs.

    ``n = 0`` gives 1, ``n = 1`` the arithmetic mean and ``n = K`` the product.
    Valid for sequential (in particular independent) e-values; for ``n >= 2``
    it is not an e-merging function under arbitrary dependence.
    """
    values = _evector(e)
    K = len(values)
    if isinstance(n, bool) or int(n) != n or not 0 <= n <= K:
        raise ValueError(f"n must be an integer in [0, {K}], got {n}")
    n = int(n)
    if n == 0:
        return 1.0
    if _has_inf(values):
        return math.inf
    if n == 1:
        return arithmetic_mean(values)
    if n == K:
        return _to_float(*_exact_product(values))
    return _elementary_symmetric(values, n) / math.comb(K, n)


def _check_simplex(weights: Sequence[float], length: int) -> list[float]:
    w = [float(x) for x in weights]
    if len(w) != length:
        raise ValueError(f"expected {length} weights, got {len(w)}")
    if any(math.isnan(x) or x < 0 for x in w):
        raise ValueError("weights must be nonnegative")
    if abs(math.fsum(w) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {math.fsum(w)}")
    return w


def u_mixture(weights: Sequence[float], e: Sequence[float]) -> float:
    """Convex combination ``sum_n weights[n] * u_statistic(n, e)``, n = 0..K."""
    values = _evector(e)
    w = _check_simplex(weights, len(values) + 1)
    if _has_inf(values):
        return math.inf
    return math.fsum(wn * u_statistic(n, values) for n, wn in enumerate(w) if wn > 0)


def product(e: Sequence[float]) -> float:
    """``e_1 * ... * e_K``: the result of betting successively on each e-value.

    Valid for sequential e-values, not for arbitrarily dependent ones.
    ``0 * inf`` resolves to ``inf``.  The result is the exact product rounded
    once, so it overflows to ``inf`` only when the true product does.
    """
    values = _evector(e)
    if _has_inf(values):
        return math.inf
    return _to_float(*_exact_product(values))


def ruger_e(k: int, e: Sequence[float]) -> float:
    """``(k / K) * e_[k]`` where ``e_[k]`` is the k-th largest input."""
    values = _evector(e)
    K = len(values)
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= K:
        raise ValueError(f"k must be an integer in [1, {K}], got {k}")
    if _has_inf(values):
        return math.inf
    kth_largest = sorted(values, reverse=True)[int(k) - 1]
    return k * kth_largest / K


def e_simes(e: Sequence[float]) -> float:
    """``max_k (k / K) * e_[k]``.

    Valid under arbitrary dependence but dominated by :func:`arithmetic_mean`,
    which should be preferred.
    """
    values = _evector(e)
    if _has_inf(values):
        return math.inf
    K = len(values)
    ordered = sorted(values, reverse=True)
    return max(k * x / K for k, x in enumerate(ordered, start=1))


def m_family_e(r: float, e: Sequence[float]) -> float:
    """Power-mean e-merging function ``min(K**(1/r - 1), 1) * M_r(e)``.

    ``M_r`` is the power mean of order r; r = 0, inf and -inf are the
    geometric mean, maximum and minimum.  For r <= 0 a zero input makes the
    power mean 0 (its limit as that input decreases to 0).
    """
    r = float(r)
    if math.isnan(r):
        raise ValueError("r must not be NaN")
    values = _evector(e)
    if _has_inf(values):
        return math.inf
    K = len(values)
    if r == math.inf:
        return max(values) / K
    if r == -math.inf:
        return min(values)
    if r <= 0 and min(values) == 0.0:
        return 0.0
    if r == 0:
        return math.exp(math.fsum(math.log(x) for x in values) / K)
    if r == 1:
        return arithmetic_mean(values)
    if r > 1:
        # K^{1/r - 1} * (sum x^r / K)^{1/r} = (sum x^r)^{1/r} / K, scaled for range
        top = max(values)
        if top == 0.0:
            return 0.0
        s = math.fsum((x / top) ** r for x in values)
        return top * s ** (1.0 / r) / K
    # scale by the entry that keeps every (x / scale)**r in [0, 1]
    scale = max(values) if r > 0 else min(values)
    if scale == 0.0:
        return 0.0
    mean_power = math.fsum((x / scale) ** r for x in values) / K
    return scale * mean_power ** (1.0 / r)


MERGE_CLASS: dict[Callable[..., float], MergeClass] = {
    arithmetic_mean: MergeClass.ARBITRARY,
    convex_mixture: MergeClass.ARBITRARY,
    ruger_e: MergeClass.ARBITRARY,
    e_simes: MergeClass.ARBITRARY,
    m_family_e: MergeClass.ARBITRARY,
    product: MergeClass.SEQUENTIAL,
    u_statistic: MergeClass.SEQUENTIAL,
    u_mixture: MergeClass.SEQUENTIAL,
}


def merge_class_of(func: Callable[..., float], *params) -> MergeClass:
    """Validity class of ``func`` with its leading parameters bound to ``params``.

    U-statistics of order 0 or 1 (and mixtures of them) are valid under
    arbitrary dependence; higher orders need sequential inputs.
    """
    if func is u_statistic and params:
        return MergeClass.ARBITRARY if params[0] <= 1 else MergeClass.SEQUENTIAL
    if func is u_mixture and params:
        if all(w == 0 for w in list(params[0])[2:]):
            return MergeClass.ARBITRARY
        return MergeClass.SEQUENTIAL
    return MERGE_CLASS[func]

