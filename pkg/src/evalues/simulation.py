"""Seeded Gaussian experiments comparing e-value and p-value methods.

Observations are N(mu, 1); the null is mu = 0 and the alternative mu = delta.

Random numbers: seed s drives numpy's PCG64 generator through
``SeedSequence(s)``.  Each 64-bit output ``r`` becomes the uniform
``((r >> 11) + 0.5) * 2**-53``, which lies strictly inside (0, 1), and the
normal draw is ``ndtri(u) + mean``.  Seed index i of a run with base b uses
seed ``b + i``, so seeds can be processed in any order or in parallel.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
from scipy import special

from .multiple_testing import (
    adjust_e_average,
    adjust_e_product,
    fact_fisher,
    holm_adjust,
    hommel_adjust,
)
from .numerics import std_normal_cdf

__all__ = [
    "COMBINING_METHODS",
    "MULTIPLE_METHODS",
    "GaussianStream",
    "gaussian_sample",
    "lr_evalue",
    "neyman_pearson_pvalue",
    "mixture_evalue",
    "universal_martingale",
    "CombiningConfig",
    "MultipleConfig",
    "SeriesResult",
    "run_combining_experiment",
    "run_multiple_experiment",
    "lower_median",
    "format_csv",
    "write_csv",
]

COMBINING_METHODS = (
    "product-lr",
    "fisher-recip",
    "fisher-vs",
    "universal",
    "average",
    "simes-recip",
    "simes-vs",
    "bonferroni-recip",
    "wrong-lr",
)

MULTIPLE_METHODS = (
    "avg-adjust",
    "product-adjust",
    "holm-recip",
    "holm-vs",
    "hommel-recip",
    "hommel-vs",
    "fact-fisher-recip",
    "fact-fisher-vs",
)

# "holm" asks for both transforms of Holm's adjusted p-values, and so on
_P_METHOD_GROUPS = {
    "holm": ("holm-recip", "holm-vs"),
    "hommel": ("hommel-recip", "hommel-vs"),
    "fact-fisher": ("fact-fisher-recip", "fact-fisher-vs"),
}

_INV_E = math.exp(-1.0)


class GaussianStream:
    """A reproducible stream of N(mean, 1) draws; see the module docstring."""

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ValueError(f"seed must be nonnegative, got {seed}")
        self.seed = seed
        self._bits = np.random.PCG64(np.random.SeedSequence(seed))

    def uniforms(self, n: int) -> np.ndarray:
        raw = self._bits.random_raw(int(n))
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53

    def normals(self, n: int, mean: float = 0.0) -> np.ndarray:
        return special.ndtri(self.uniforms(n)) + mean


def gaussian_sample(stream: GaussianStream, mean: float = 0.0) -> float:
    """One N(mean, 1) draw from ``stream``."""
    return float(stream.normals(1, mean)[0])


def lr_evalue(x: float, delta: float) -> float:
    """Likelihood ratio of N(delta, 1) to N(0, 1) at x: ``exp(x delta - delta^2 / 2)``."""
    return math.exp(x * delta - delta * delta / 2.0)


def neyman_pearson_pvalue(x: float) -> float:
    """``Phi(x)``, the p-value of the most powerful test against a negative mean."""
    return std_normal_cdf(x)


def mixture_evalue(x: float, delta: float) -> float:
    """``lr_evalue(x, delta) / 2 + 1/2``: the alternative holds with probability 1/2."""
    return 0.5 * lr_evalue(x, delta) + 0.5


def _log_universal(sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    return sums * sums / (2.0 * (counts + 1.0)) - 0.5 * np.log1p(counts)


def universal_martingale(xs: Sequence[float]) -> float:
    """The product likelihood ratio mixed over delta ~ N(0, 1).

    Equals ``(K + 1)**-0.5 * exp(S**2 / (2 (K + 1)))`` with ``S = sum(xs)``;
    evaluated in log space and ``inf`` only if the true value overflows.
    """
    values = [float(x) for x in xs]
    if any(not math.isfinite(x) for x in values):
        raise ValueError("observations must be finite")
    K = len(values)
    s = math.fsum(values)
    log_value = s * s / (2.0 * (K + 1)) - 0.5 * math.log1p(K)
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def _vs(p: np.ndarray) -> np.ndarray:
    # vs_bound, vectorized; p = 0 maps to inf
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p <= _INV_E, -_INV_E / (p * np.log(p)), 1.0)
    return np.where(p == 0.0, np.inf, out)


def _recip(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / p


def _check_methods(methods: Iterable[str], known: Sequence[str],
                   groups: Mapping[str, Sequence[str]] = {}) -> tuple[str, ...]:
    out: list[str] = []
    for m in methods:
        expanded = groups.get(m, (m,))
        for name in expanded:
            if name not in known:
                raise ValueError(f"unknown method {m!r}; choose from {', '.join(known)}")
            if name not in out:
                out.append(name)
    if not out:
        raise ValueError("need at least one method")
    return tuple(out)


@dataclass(frozen=True)
class CombiningConfig:
    """One long stream of observations, merged cumulatively.

    The first ``ceil(fraction_alternative * n_obs)`` observations come from
    the alternative, the rest from the null.  The e-value of one observation
    is ``f * lr_evalue(x, delta) + (1 - f)`` with ``f = fraction_alternative``:
    the plain likelihood ratio when every observation is from the
    alternative, and :func:`mixture_evalue` when half of them are.
    ``wrong-lr`` always uses the plain likelihood ratio.
    """

    delta: float = -0.1
    n_obs: int = 10_000
    n_seeds: int = 100
    fraction_alternative: float = 1.0
    methods: tuple[str, ...] = COMBINING_METHODS

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if int(self.n_obs) != self.n_obs or self.n_obs < 1:
            raise ValueError(f"n_obs must be a positive integer, got {self.n_obs}")
        if int(self.n_seeds) != self.n_seeds or self.n_seeds < 1:
            raise ValueError(f"n_seeds must be a positive integer, got {self.n_seeds}")
        if not 0.0 <= self.fraction_alternative <= 1.0:
            raise ValueError("fraction_alternative must lie in [0, 1]")
        object.__setattr__(self, "methods", _check_methods(self.methods, COMBINING_METHODS))

    @property
    def n_alternative(self) -> int:
        return math.ceil(self.fraction_alternative * self.n_obs)


@dataclass(frozen=True)
class MultipleConfig:
    """One observation per hypothesis; the first ``n_false`` come from the alternative.

    Base e-values are :func:`mixture_evalue` and base p-values
    :func:`neyman_pearson_pvalue`.  Methods ``holm``, ``hommel`` and
    ``fact-fisher`` expand to their ``-recip`` and ``-vs`` columns.
    """

    n_hypotheses: int = 20
    n_false: int = 10
    delta: float = -4.0
    n_seeds: int = 1000
    methods: tuple[str, ...] = ("avg-adjust", "product-adjust", "holm", "hommel", "fact-fisher")

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if int(self.n_hypotheses) != self.n_hypotheses or self.n_hypotheses < 1:
            raise ValueError("n_hypotheses must be a positive integer")
        if int(self.n_false) != self.n_false or not 0 <= self.n_false <= self.n_hypotheses:
            raise ValueError("n_false must be an integer in [0, n_hypotheses]")
        if int(self.n_seeds) != self.n_seeds or self.n_seeds < 1:
            raise ValueError("n_seeds must be a positive integer")
        object.__setattr__(self, "methods",
                           _check_methods(self.methods, MULTIPLE_METHODS, _P_METHOD_GROUPS))


@dataclass(frozen=True)
class SeriesResult:
    """Per-method medians across seeds at one index (K, or a hypothesis id)."""

    index: int
    values: Mapping[str, float] = field(default_factory=dict)


def lower_median(a: np.ndarray, axis: int = 0) -> np.ndarray:
    """Element ``(n - 1) // 2`` of the sorted values; an actual sample value."""
    a = np.sort(a, axis=axis)
    return np.take(a, (a.shape[axis] - 1) // 2, axis=axis)


def _prefix_simes(p: np.ndarray) -> np.ndarray:
    # Simes's p-value of every prefix, with the same arithmetic as p_merging.simes
    out = np.empty(len(p))
    ordered = np.empty(0)
    for K in range(1, len(p) + 1):
        x = p[K - 1]
        ordered = np.insert(ordered, np.searchsorted(ordered, x), x)
        out[K - 1] = min(1.0, float(np.min(K * ordered / np.arange(1, K + 1))))
    return out


def _combining_seed(cfg: CombiningConfig, seed: int) -> dict[str, np.ndarray]:
    n = cfg.n_obs
    means = np.zeros(n)
    means[:cfg.n_alternative] = cfg.delta
    x = GaussianStream(seed).normals(n) + means
    counts = np.arange(1, n + 1, dtype=np.float64)
    wanted = set(cfg.methods)
    out: dict[str, np.ndarray] = {}

    log_lr = x * cfg.delta - cfg.delta * cfg.delta / 2.0
    f = cfg.fraction_alternative
    if f == 1.0:
        log_e = log_lr
    else:
        log_e = np.logaddexp(np.log(f) + log_lr, np.log1p(-f)) if f > 0 else np.zeros(n)
    if "product-lr" in wanted:
        out["product-lr"] = np.cumsum(log_e)
    if "wrong-lr" in wanted:
        out["wrong-lr"] = np.cumsum(log_lr)
    if "average" in wanted:
        out["average"] = np.log(np.cumsum(np.exp(log_e)) / counts)
    if "universal" in wanted:
        out["universal"] = _log_universal(np.cumsum(x), counts)

    if wanted & {"fisher-recip", "fisher-vs"}:
        statistic = -2.0 * np.cumsum(special.log_ndtr(x))
        # chi-square tail with 2K degrees of freedom at t is Q(K, t / 2)
        fisher_p = special.gammaincc(counts, statistic / 2.0)
        out["fisher-recip"] = _recip(fisher_p)
        out["fisher-vs"] = _vs(fisher_p)
    p = special.ndtr(x)
    if wanted & {"simes-recip", "simes-vs"}:
        simes_p = _prefix_simes(p)
        out["simes-recip"] = _recip(simes_p)
        out["simes-vs"] = _vs(simes_p)
    if "bonferroni-recip" in wanted:
        out["bonferroni-recip"] = _recip(np.minimum(1.0, counts * np.minimum.accumulate(p)))
    return out


_LOG_SPACE = {"product-lr", "wrong-lr", "average", "universal"}


def _collect(per_seed: list[dict[str, np.ndarray]], methods: Sequence[str],
             n: int) -> list[SeriesResult]:
    medians = {}
    for m in methods:
        med = lower_median(np.stack([d[m] for d in per_seed]), axis=0)
        if m in _LOG_SPACE:
            with np.errstate(over="ignore"):
                med = np.exp(med)
        medians[m] = med
    return [SeriesResult(i + 1, {m: float(medians[m][i]) for m in methods}) for i in range(n)]


def run_combining_experiment(cfg: CombiningConfig, seed_base: int = 0) -> list[SeriesResult]:
    """Cumulative merged values at every K = 1..n_obs, as medians over seeds.

    Columns: ``product-lr`` and ``wrong-lr`` are running products of
    e-values, ``average`` their running mean, ``universal`` the mixture
    martingale; ``fisher-*``, ``simes-*`` and ``bonferroni-recip`` merge the
    first K p-values and report ``1/p`` (``-recip``) or the VS bound
    (``-vs``).  Products are accumulated as sums of logarithms.
    """
    per_seed = [_combining_seed(cfg, seed_base + i) for i in range(cfg.n_seeds)]
    return _collect(per_seed, cfg.methods, cfg.n_obs)


def _multiple_seed(cfg: MultipleConfig, seed: int) -> dict[str, np.ndarray]:
    K = cfg.n_hypotheses
    means = np.zeros(K)
    means[:cfg.n_false] = cfg.delta
    x = GaussianStream(seed).normals(K) + means
    e = [mixture_evalue(float(v), cfg.delta) for v in x]
    # the smallest positive double keeps Fisher's method defined if Phi(x) underflows
    p = [max(neyman_pearson_pvalue(float(v)), 5e-324) for v in x]
    wanted = set(cfg.methods)
    out: dict[str, np.ndarray] = {}
    if "avg-adjust" in wanted:
        out["avg-adjust"] = np.array(adjust_e_average(e).adjusted)
    if "product-adjust" in wanted:
        out["product-adjust"] = np.array(adjust_e_product(e).adjusted)
    for name, adjust in (("holm", holm_adjust), ("hommel", hommel_adjust),
                         ("fact-fisher", fact_fisher)):
        if wanted & {name + "-recip", name + "-vs"}:
            q = np.array(adjust(p).adjusted)
            out[name + "-recip"] = _recip(q)
            out[name + "-vs"] = _vs(q)
    return out


def run_multiple_experiment(cfg: MultipleConfig, seed_base: int = 0) -> list[SeriesResult]:
    """Adjusted e-values (or transformed adjusted p-values) per hypothesis, as medians.

    Indices are 0-based hypothesis ids; ids below ``n_false`` are false nulls.
    """
    per_seed = [_multiple_seed(cfg, seed_base + i) for i in range(cfg.n_seeds)]
    results = _collect(per_seed, cfg.methods, cfg.n_hypotheses)
    return [SeriesResult(r.index - 1, r.values) for r in results]


def format_csv(results: Sequence[SeriesResult]) -> str:
    """CSV text: header ``index,<method>...``, values to 6 significant digits."""
    buf = io.StringIO()
    _write(results, buf)
    return buf.getvalue()


def write_csv(results: Sequence[SeriesResult], path: str) -> None:
    with open(path, "w", newline="") as fh:
        _write(results, fh)


def _write(results: Sequence[SeriesResult], fh: TextIO) -> None:
    if not results:
        raise ValueError("nothing to write")
    methods = list(results[0].values)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["index", *methods])
    for r in results:
        writer.writerow([r.index, *(f"{r.values[m]:.6g}" for m in methods)])
