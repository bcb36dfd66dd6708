"""Special functions and quadrature used by the calibrators and Fisher's method.

Everything here works on plain Python floats so the results do not depend on
array-library versions.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable

__all__ = [
    "QuadratureError",
    "std_normal_cdf",
    "chi2_survival_even",
    "lower_incomplete_gamma",
    "regularized_lower_gamma",
    "integrate_unit_interval",
]

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_MAX_ITER = 100_000


class QuadratureError(ArithmeticError):
    """Raised when an integral cannot be estimated to the requested tolerance."""


def std_normal_cdf(x: float) -> float:
    """Standard Gaussian distribution function.

    Uses the complementary error function so that both tails keep full
    relative precision (``erfc`` is accurate where ``1 + erf`` cancels).
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("std_normal_cdf is undefined for NaN")
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def chi2_survival_even(dof: int, x: float) -> float:
    """Survival function of the chi-square law with an even number of degrees.

    For ``dof = 2n`` this is the Poisson sum ``exp(-x/2) * sum_{j<n} (x/2)^j / j!``.
    """
    if isinstance(dof, bool) or int(dof) != dof:
        raise ValueError(f"dof must be an integer, got {dof!r}")
    dof = int(dof)
    if dof < 2 or dof % 2:
        raise ValueError(f"dof must be even and >= 2, got {dof}")
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0

    lam = 0.5 * x
    n = dof // 2
    if n == 1:
        return math.exp(-lam)
    if lam + 1.0 < n:
        # the tail is close to 1 here; the small complement P(Poisson(lam) >= n)
        # keeps full relative accuracy and the result monotone
        return 1.0 - regularized_lower_gamma(float(n), lam)
    if lam < 700.0:
        term = math.exp(-lam)
        terms = [term]
        for j in range(1, n):
            term *= lam / j
            terms.append(term)
        total = math.fsum(terms)
    else:
        # exp(-lam) underflows; build each Poisson term in log space
        log_lam = math.log(lam)
        total = math.fsum(
            math.exp(j * log_lam - math.lgamma(j + 1.0) - lam) for j in range(n)
        )
    return min(1.0, total)


def _gamma_series(a: float, z: float) -> float:
    # sum_{n>=0} z^n / (a (a+1) ... (a+n)); gamma(a, z) = z^a e^{-z} * this
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= z / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, z={z})")


def _gamma_continued_fraction(a: float, z: float) -> float:
    # Lentz evaluation of Gamma(a, z) e^{z} z^{-a}
    b = z + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(
        f"incomplete gamma continued fraction did not converge (a={a}, z={z})"
    )


def _check_gamma_args(a: float, z: float) -> tuple[float, float]:
    a = float(a)
    z = float(z)
    if not a > 0 or math.isinf(a):
        raise ValueError(f"a must be a finite positive number, got {a}")
    if math.isnan(z) or z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    return a, z


def regularized_lower_gamma(a: float, z: float) -> float:
    """``P(a, z) = gamma(a, z) / Gamma(a)``."""
    a, z = _check_gamma_args(a, z)
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return 1.0
    log_prefactor = a * math.log(z) - z - math.lgamma(a)
    if z < a + 1.0:
        return math.exp(log_prefactor) * _gamma_series(a, z)
    return 1.0 - math.exp(log_prefactor) * _gamma_continued_fraction(a, z)


def lower_incomplete_gamma(a: float, z: float) -> float:
    """Lower incomplete gamma function ``int_0^z t^(a-1) e^(-t) dt``.

    The power series is used for ``z < a + 1`` and a continued fraction for the
    complementary function otherwise.
    """
    a, z = _check_gamma_args(a, z)
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.gamma(a)
    if z < a + 1.0:
        return math.exp(a * math.log(z) - z) * _gamma_series(a, z)
    upper = math.exp(a * math.log(z) - z) * _gamma_continued_fraction(a, z)
    return math.gamma(a) - upper


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = g(centre)
    kronrod = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        pair = g(centre - dx) + g(centre + dx)
        kronrod += _WGK[j] * pair
        if j % 2 == 1:
            gauss += _WG[j // 2] * pair
    return kronrod * half, abs((kronrod - gauss) * half)


def _adaptive(g: Callable[[float], float], a: float, b: float, tol: float,
              max_intervals: int = 20_000) -> tuple[float, float]:
    value, err = _gk15(g, a, b)
    heap = [(-err, a, b, value)]
    total_err = err
    intervals = 1
    while total_err > tol:
        if intervals >= max_intervals:
            raise QuadratureError(
                f"adaptive quadrature exhausted {max_intervals} intervals "
                f"(error estimate {total_err:.3g} > {tol:.3g})"
            )
        neg_err, lo, hi, _ = heapq.heappop(heap)
        total_err += neg_err
        mid = 0.5 * (lo + hi)
        for x0, x1 in ((lo, mid), (mid, hi)):
            v, e = _gk15(g, x0, x1)
            heapq.heappush(heap, (-e, x0, x1, v))
            total_err += e
        intervals += 1
    value = math.fsum(item[3] for item in heap)
    return value, math.fsum(-item[0] for item in heap)


# Integration runs in t = -ln p; e^{-T} stays above the calibrators' clamp at 1e-300.
_T_MAX = 680.0


def integrate_unit_interval(f: Callable[[float], float], tol: float = 1e-9,
                            ) -> tuple[float, float]:
    """Integrate a decreasing function ``f: [0, 1] -> [0, inf]`` over ``[0, 1]``.

    Returns ``(estimate, error_bound)``.

    The substitution ``p = exp(-t)`` turns the singularity at ``p = 0`` into an
    infinite range, integrated adaptively on ``[0, T]``.  The contribution of
    ``t > T`` is extrapolated from the local power-law decay of the integrand;
    when that decay is too slow for the tail to be finite, the integral is
    declared divergent.

    Raises
    ------
    QuadratureError
        If the singularity at 0 is not integrable or the requested tolerance
        cannot be reached.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def g(t: float) -> float:
        p = math.exp(-t)
        v = float(f(p))
        if math.isnan(v) or v < 0:
            raise QuadratureError(f"integrand returned {v} at p={p}")
        if math.isinf(v):
            raise QuadratureError(f"integrand is infinite at p={p} > 0")
        return v * p

    body, body_err = _adaptive(g, 0.0, _T_MAX, 0.5 * tol)

    tail, tail_err = _power_tail(g, _T_MAX)
    err = body_err + tail_err
    if err > tol:
        raise QuadratureError(
            f"could not reach tolerance {tol:.3g}: tail error {tail_err:.3g}"
        )
    return body + tail, err


def _local_exponent(g_lo: float, g_hi: float) -> float:
    # decay exponent s for g(t) ~ C t^{-s} fitted between t and 2t
    if g_hi == 0.0:
        return math.inf
    if g_lo == 0.0:
        return -math.inf
    return math.log(g_lo / g_hi) / math.log(2.0)


def _power_tail(g: Callable[[float], float], T: float) -> tuple[float, float]:
    g_quarter, g_half, g_end = g(T / 4), g(T / 2), g(T)
    if g_end == 0.0:
        return 0.0, 0.0
    s_near = _local_exponent(g_half, g_end)
    s_far = _local_exponent(g_quarter, g_half)
    if not s_near > 1.0:
        raise QuadratureError(
            f"integrand decays like p^-1 (-ln p)^-{s_near:.3g} near 0; "
            "the singularity is not integrable"
        )
    tail = g_end * T / (s_near - 1.0)
    if s_far > 1.0:
        alt = g_end * T / (s_far - 1.0)
    else:
        alt = 2.0 * tail
    return tail, abs(alt - tail) + 1e-12 * tail
