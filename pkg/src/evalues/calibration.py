"""p-to-e calibrators, the e-to-p calibrator and Jeffreys's evidence scale."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

from .numerics import integrate_unit_interval, lower_incomplete_gamma

__all__ = [
    "CalibratorSpec",
    "CalibratorCheck",
    "calibrate_power",
    "vs_bound",
    "calibrate_integrated",
    "calibrate_h",
    "calibrate_f_kappa",
    "e_to_p",
    "check_calibrator",
    "jeffreys_category",
    "JEFFREYS_LABELS",
]

# Below this the formulas overflow before their mathematical singularity; treat as p = 0.
P_CLAMP = 1e-300


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value must lie in [0, 1], got {p}")
    return p


def calibrate_power(p: float, kappa: float) -> float:
    """The calibrator ``kappa * p**(kappa - 1)`` for ``kappa`` in (0, 1)."""
    kappa = float(kappa)
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    p = _check_p(p)
    if p < P_CLAMP:
        return math.inf
    return kappa * p ** (kappa - 1.0)


def vs_bound(p: float) -> float:
    """The VS bound, the maximum over kappa of ``kappa * p**(kappa - 1)``.

    This is an upper bound on what the power calibrators can achieve, not a
    calibrator: ``vs_bound(P)`` is in general not an e-variable.
    """
    p = _check_p(p)
    if p < P_CLAMP:
        return math.inf
    if p <= math.exp(-1.0):
        return -math.exp(-1.0) / (p * math.log(p))
    return 1.0


def calibrate_integrated(p: float) -> float:
    """Power calibrators averaged over kappa uniform on [0, 1].

    Equals ``(1 - p + p ln p) / (p (ln p)^2)``, which is evaluated as
    ``(e^t - 1 - t) / t^2`` with ``t = -ln p`` (a positive series near
    ``p = 1``, where the closed form cancels).  The value at ``p = 1`` is 1/2.
    """
    p = _check_p(p)
    if p < P_CLAMP:
        return math.inf
    if p == 1.0:
        return 0.5
    t = -math.log(p)
    if t < 1.0:
        # sum_{n>=0} t^n / (n+2)!
        term = 0.5
        total = term
        n = 0
        while term > total * 1e-17:
            n += 1
            term *= t / (n + 2)
            total += term
        return total
    return (math.expm1(t) - t) / (t * t)


def calibrate_h(p: float, kappa: float) -> float:
    """Calibrator that is zero above ``exp(-1 - kappa)`` and close to 1/p near 0."""
    kappa = float(kappa)
    if not kappa > 0.0 or math.isinf(kappa):
        raise ValueError(f"kappa must be positive, got {kappa}")
    p = _check_p(p)
    if p < P_CLAMP:
        return math.inf
    if p > math.exp(-1.0 - kappa):
        return 0.0
    t = -math.log(p)
    return kappa * (1.0 + kappa) ** kappa / (p * t ** (1.0 + kappa))


def calibrate_f_kappa(p: float, kappa: float) -> float:
    """Power calibrators mixed over the density ``kappa * x**(kappa - 1)``.

    ``kappa * gamma(1 + kappa, -ln p) / (p (-ln p)^(1 + kappa))`` with
    ``gamma`` the lower incomplete gamma function; ``kappa = 1`` gives
    :func:`calibrate_integrated`.  The limit at ``p = 1`` is
    ``kappa / (1 + kappa)``.
    """
    kappa = float(kappa)
    if not kappa > 0.0 or math.isinf(kappa):
        raise ValueError(f"kappa must be positive, got {kappa}")
    p = _check_p(p)
    if p < P_CLAMP:
        return math.inf
    if p == 1.0:
        return kappa / (1.0 + kappa)
    a = 1.0 + kappa
    t = -math.log(p)
    if t < a + 1.0:
        # gamma(a, t) = t^a e^{-t} S(t) and e^{-t} = p, so F = kappa * S(t)
        term = 1.0 / a
        total = term
        n = 0
        while term > total * 1e-17:
            n += 1
            term *= t / (a + n)
            total += term
        return kappa * total
    return kappa * lower_incomplete_gamma(a, t) / (p * t ** a)


def e_to_p(e: float) -> float:
    """The admissible e-to-p calibrator ``min(1, 1/e)``."""
    e = float(e)
    if math.isnan(e) or e < 0:
        raise ValueError(f"e-value must be nonnegative, got {e}")
    if math.isinf(e):
        return 0.0
    if e <= 1.0:
        return 1.0
    return 1.0 / e


@dataclass(frozen=True)
class CalibratorSpec:
    """A named calibrator.

    ``kind`` is one of ``"power"`` (kappa in (0, 1)), ``"integrated"``,
    ``"h"`` and ``"f"`` (kappa > 0).
    """

    kind: Literal["power", "integrated", "h", "f"]
    kappa: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "integrated":
            if self.kappa is not None:
                raise ValueError("the integrated calibrator takes no kappa")
            return
        if self.kind not in ("power", "h", "f"):
            raise ValueError(f"unknown calibrator kind {self.kind!r}")
        if self.kappa is None:
            raise ValueError(f"calibrator {self.kind!r} needs kappa")
        k = float(self.kappa)
        if self.kind == "power" and not 0.0 < k < 1.0:
            raise ValueError(f"power calibrator needs kappa in (0, 1), got {k}")
        if self.kind in ("h", "f") and (not k > 0.0 or math.isinf(k)):
            raise ValueError(f"calibrator {self.kind!r} needs kappa > 0, got {k}")

    def __call__(self, p: float) -> float:
        if self.kind == "power":
            return calibrate_power(p, self.kappa)
        if self.kind == "integrated":
            return calibrate_integrated(p)
        if self.kind == "h":
            return calibrate_h(p, self.kappa)
        return calibrate_f_kappa(p, self.kappa)

    def __str__(self) -> str:
        if self.kappa is None:
            return self.kind
        return f"{self.kind}({self.kappa:g})"


@dataclass(frozen=True)
class CalibratorCheck:
    valid: bool
    integral: float
    error: float

    @property
    def excess(self) -> float:
        """How far the integral exceeds 1 (zero for valid calibrators)."""
        return max(0.0, self.integral - 1.0)


def check_calibrator(f: Callable[[float], float], tol: float = 1e-9) -> CalibratorCheck:
    """Decide whether a decreasing ``f`` is a calibrator, i.e. ``int_0^1 f <= 1``.

    Quadrature failures (a non-integrable singularity at 0) propagate as
    :class:`~evalues.numerics.QuadratureError`.
    """
    integral, err = integrate_unit_interval(f, tol)
    return CalibratorCheck(valid=integral <= 1.0 + tol, integral=integral, error=err)


JEFFREYS_LABELS = (
    "supports-null",
    "bare-mention",
    "substantial",
    "strong",
    "very-strong",
    "decisive",
)
_JEFFREYS_CUTS = (1.0, math.sqrt(10.0), 10.0, 10.0 ** 1.5, 100.0)


def jeffreys_category(e: float) -> str:
    """Jeffreys's rule-of-thumb label for an e-value.

    Cut points are 1, sqrt(10), 10, 10**1.5 and 100; a value exactly at a cut
    point gets the weaker of the two neighbouring labels.
    """
    e = float(e)
    if math.isnan(e) or e < 0:
        raise ValueError(f"e-value must be nonnegative, got {e}")
    for label, cut in zip(JEFFREYS_LABELS, _JEFFREYS_CUTS):
        if e <= cut:
            return label
    return JEFFREYS_LABELS[-1]
