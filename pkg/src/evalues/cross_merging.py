"""Merging e-values into a p-value and p-values into an e-value."""

from __future__ import annotations

import math
from typing import Sequence

from .calibration import CalibratorSpec, calibrate_power, e_to_p
from .e_merging import _check_simplex, _evector, _to_float, arithmetic_mean
from .p_merging import _pvector

__all__ = ["e_to_p_merge", "p_to_e_merge", "p_to_e_mixture", "ville_se_to_p"]


def e_to_p_merge(e: Sequence[float]) -> float:
    """``min(1, K / sum(e))``: average first, then invert.

    This dominates every symmetric e-to-p merging function.
    """
    return e_to_p(arithmetic_mean(e))


def p_to_e_merge(kappa: float, p: Sequence[float]) -> float:
    """``(kappa / K) * sum p_k**(kappa - 1)``: calibrate each p-value, then average."""
    kappa = float(kappa)
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    values = [float(x) for x in p]
    _pvector(values)
    return arithmetic_mean([calibrate_power(x, kappa) for x in values])


def p_to_e_mixture(weights: Sequence[float], calibrators: Sequence[CalibratorSpec],
                   p: Sequence[float]) -> float:
    """``sum_k weights[k] * calibrators[k](p[k])`` for simplex weights."""
    values = [float(x) for x in p]
    _pvector(values)
    if len(calibrators) != len(values):
        raise ValueError(
            f"need one calibrator per p-value ({len(values)}), got {len(calibrators)}"
        )
    for c in calibrators:
        if not isinstance(c, CalibratorSpec):
            raise TypeError(f"expected CalibratorSpec, got {type(c).__name__}")
    w = _check_simplex(weights, len(values))
    parts = []
    for wk, f, x in zip(w, calibrators, values):
        if wk == 0.0:
            continue
        v = f(x)
        if math.isinf(v):
            return math.inf
        parts.append(wk * v)
    return math.fsum(parts)


def ville_se_to_p(e: Sequence[float]) -> float:
    """``min(1, 1 / max_k e_1 ... e_k)`` for sequential e-values in the given order.

    The empty product (k = 0) counts, so the result never exceeds 1.  The
    running product is a test supermartingale, and Ville's inequality bounds
    the probability that it ever reaches ``1/eps`` by ``eps``.
    """
    values = _evector(e)
    if any(math.isinf(x) for x in values):
        return 0.0
    # exact prefix products, each rounded once as in e_merging.product
    best = 1.0
    num, den = 1, 1
    for x in values:
        n, d = x.as_integer_ratio()
        num *= n
        den *= d
        if num == 0:
            break
        best = max(best, _to_float(num, den))
    return e_to_p(best)
