"""Adjusted e-values and p-values for testing K hypotheses at once.

All procedures here are closed-testing procedures with free combinations:
the adjusted value for hypothesis k is the worst merged value over all
subsets of hypotheses that contain k.  Ties in sorting are broken by the
original index, so the output is deterministic and permutation-equivariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .e_merging import _evector, _exact_sum, _to_float
from .numerics import chi2_survival_even
from .p_merging import _pvector

__all__ = [
    "AdjustedEValues",
    "AdjustedPValues",
    "adjust_e_average",
    "adjust_e_product",
    "holm_adjust",
    "hommel_adjust",
    "fact_generic",
    "fact_fisher",
]


@dataclass(frozen=True)
class AdjustedEValues:
    """Adjusted e-values; ``adjusted[k] <= original[k]`` for every k.

    ``ordering`` lists the original indices sorted by ascending e-value.
    """

    original: tuple[float, ...]
    adjusted: tuple[float, ...]
    ordering: tuple[int, ...]


@dataclass(frozen=True)
class AdjustedPValues:
    """Adjusted p-values; ``original[k] <= adjusted[k] <= 1`` for every k."""

    original: tuple[float, ...]
    adjusted: tuple[float, ...]
    ordering: tuple[int, ...]


def _ascending(values: Sequence[float]) -> list[int]:
    return sorted(range(len(values)), key=lambda i: (values[i], i))


def adjust_e_average(e: Sequence[float]) -> AdjustedEValues:
    """Closure of the arithmetic mean, in O(K^2) time.

    For each k, the smallest average over subsets containing k is attained by
    adding the i smallest other e-values for some i, so it suffices to scan
    the prefix sums of the sorted e-values.  Sums are kept exact, so each
    value equals :func:`~evalues.e_merging.arithmetic_mean` of the minimizing
    subset bit for bit.
    """
    values = _evector(e)
    K = len(values)
    order = _ascending(values)
    # a subset holding an infinite e-value has infinite mean, so the closure of
    # a finite entry only ever uses finite entries
    finite = [i for i in order if not math.isinf(values[i])]

    # exact prefix sums over the common denominator of all finite inputs
    den = _exact_sum([values[i] for i in finite])[1] if finite else 1
    nums = [0]
    for idx in finite:
        n, d = values[idx].as_integer_ratio()
        nums.append(nums[-1] + n * (den // d))

    adjusted = [math.inf] * K
    for k, idx in enumerate(finite, start=1):
        own = nums[k] - nums[k - 1]
        best = values[idx]
        for i in range(1, k):
            candidate = _to_float(own + nums[i], den * (i + 1))
            if candidate < best:
                best = candidate
        adjusted[idx] = best
    return AdjustedEValues(tuple(values), tuple(adjusted), tuple(order))


def adjust_e_product(e: Sequence[float], *, literal: bool = False) -> AdjustedEValues:
    """Closure of the product for e-values that are sequential in some order.

    The cheapest subset containing k multiplies ``e_k`` by every other
    e-value below 1, so ``e*_k = e_k * prod_{i != k, e_i < 1} e_i``.  This
    takes O(K) multiplications and no sorting.  Products are exact and
    rounded once, matching :func:`~evalues.e_merging.product` bit for bit.

    With ``literal=True`` the output is instead ``a * e_k`` with ``a`` the
    product of *all* e-values below 1.  That multiplies ``e_k`` into itself
    when ``e_k < 1``; it is still valid but smaller than the closure value.
    """
    values = _evector(e)
    K = len(values)
    order = _ascending(values)
    small = [i for i, x in enumerate(values) if x < 1.0]

    # exact products of the sub-1 values with one of them left out
    ratios = [values[i].as_integer_ratio() for i in small]
    m = len(small)
    prefix = [(1, 1)] * (m + 1)
    for j, (n, d) in enumerate(ratios):
        prefix[j + 1] = (prefix[j][0] * n, prefix[j][1] * d)
    suffix = [(1, 1)] * (m + 1)
    for j in range(m - 1, -1, -1):
        n, d = ratios[j]
        suffix[j] = (suffix[j + 1][0] * n, suffix[j + 1][1] * d)
    position = {i: j for j, i in enumerate(small)}

    adjusted = [0.0] * K
    for idx, x in enumerate(values):
        if math.isinf(x):
            adjusted[idx] = math.inf
            continue
        if idx in position and not literal:
            j = position[idx]
            num = prefix[j][0] * suffix[j + 1][0]
            den = prefix[j][1] * suffix[j + 1][1]
        else:
            num, den = prefix[m]
        n, d = x.as_integer_ratio()
        adjusted[idx] = _to_float(num * n, den * d)
    return AdjustedEValues(tuple(values), tuple(adjusted), tuple(order))


def holm_adjust(p: Sequence[float]) -> AdjustedPValues:
    """Holm's step-down adjusted p-values (the closure of Bonferroni)."""
    values = [float(x) for x in p]
    _pvector(values)
    K = len(values)
    order = _ascending(values)
    adjusted = [0.0] * K
    running = 0.0
    for j, idx in enumerate(order, start=1):
        running = max(running, min(1.0, (K - j + 1) * values[idx]))
        adjusted[idx] = running
    return AdjustedPValues(tuple(values), tuple(adjusted), tuple(order))


def hommel_adjust(p: Sequence[float]) -> AdjustedPValues:
    """Hommel's adjusted p-values: the closure of Simes's test.

    Follows Wright's O(K^2) scheme: for each subset size m, the worst subset
    for a hypothesis among the K - m + 1 smallest p-values consists of that
    hypothesis and the m - 1 largest p-values; for the others it is the m
    largest p-values.  Simes's method is valid for independent p-values.
    """
    values = [float(x) for x in p]
    _pvector(values)
    K = len(values)
    order = _ascending(values)
    s = [values[i] for i in order]

    # m = K: the full set
    full = min(1.0, min(K * s[j] / (j + 1) for j in range(K)))
    worst = [full] * K
    for m in range(K - 1, 1, -1):
        # Simes value of the m - 1 largest together with a smaller p-value
        top = min(m * s[K - m + j - 1] / j for j in range(2, m + 1))
        q = [0.0] * K
        for j in range(K - m + 1):
            q[j] = min(1.0, min(m * s[j], top))
        for j in range(K - m + 1, K):
            q[j] = q[K - m]
        for j in range(K):
            if q[j] > worst[j]:
                worst[j] = q[j]
    adjusted = [0.0] * K
    for j, idx in enumerate(order):
        adjusted[idx] = max(worst[j], s[j])
    return AdjustedPValues(tuple(values), tuple(adjusted), tuple(order))


def fact_generic(merge: Callable[[Sequence[float]], float],
                 p: Sequence[float]) -> AdjustedPValues:
    """Fast closed testing on top of a symmetric, increasing p-merging function.

    For each subset size, the worst subset containing hypothesis k is k
    together with the largest remaining p-values, so O(K) merged values per
    hypothesis suffice.  ``merge`` is called on lists of p-values; its errors
    propagate.
    """
    values = [float(x) for x in p]
    _pvector(values)
    K = len(values)
    order = _ascending(values)
    s = [values[i] for i in order]

    suffix_merged = [merge(s[i:]) for i in range(K)]
    adjusted = [0.0] * K
    for k in range(K):
        x = s[k]
        best = merge([x])
        for i in range(k + 1, K):
            candidate = merge([x] + s[i:])
            if candidate > best:
                best = candidate
        for i in range(k + 1):
            if suffix_merged[i] > best:
                best = suffix_merged[i]
        adjusted[order[k]] = best
    return AdjustedPValues(tuple(values), tuple(adjusted), tuple(order))


def fact_fisher(p: Sequence[float]) -> AdjustedPValues:
    """Fast closed testing on top of Fisher's method.

    Precomputes the suffix sums ``S_i = -2 sum_{j >= i} ln p_(j)`` so that each
    merged value costs one chi-square tail evaluation.  Requires p-values in
    (0, 1]; Fisher's method is valid for independent p-values.
    """
    values = [float(x) for x in p]
    _pvector(values)
    if min(values) == 0.0:
        raise ValueError("fact_fisher needs p-values in (0, 1]")
    K = len(values)
    order = _ascending(values)
    s = [values[i] for i in order]
    logs = [-2.0 * math.log(x) for x in s]

    suffix = [0.0] * (K + 1)
    for i in range(K - 1, -1, -1):
        suffix[i] = suffix[i + 1] + logs[i]
    suffix_merged = [chi2_survival_even(2 * (K - i), suffix[i]) for i in range(K - 1)] + [s[-1]]

    adjusted = [0.0] * K
    for k in range(K):
        best = s[k]  # Fisher's method on one p-value returns it unchanged
        for i in range(K - 1, k, -1):
            candidate = chi2_survival_even(2 * (K - i + 1), logs[k] + suffix[i])
            if candidate > best:
                best = candidate
        for i in range(k + 1):
            if suffix_merged[i] > best:
                best = suffix_merged[i]
        adjusted[order[k]] = best
    return AdjustedPValues(tuple(values), tuple(adjusted), tuple(order))
