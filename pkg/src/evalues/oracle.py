"""Brute-force checks for merging functions and adjustment procedures.

Validity of a merging function F means ``E[F(E_1, ..., E_K)] <= 1`` for every
admissible joint law of e-variables.  The checks here evaluate that
expectation exactly on finite joint distributions, built from the extremal
constructions for each dependence class:

* arbitrary dependence: a random permutation of a fixed e-vector, switched
  off outside an event of probability ``1/a`` so that every marginal mean is
  at most 1; and comonotone laws where one uniform drives every coordinate;
* sequential e-values: trees in which each coordinate has conditional mean
  at most 1 given the earlier ones;
* independence: products of two-point marginals on ``{0, e_k}``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

from .e_merging import MergeClass

__all__ = [
    "DiscreteJointSpec",
    "ValidityReport",
    "DominationReport",
    "exact_expectation",
    "point_mass",
    "exchangeable_spec",
    "comonotone_spec",
    "independent_two_point_spec",
    "sequential_tree_spec",
    "check_e_merging_validity",
    "brute_closure_e",
    "brute_closure_p",
    "check_domination_grid",
    "MAX_BRUTE_K",
]

PROB_TOL = 1e-12
EXCESS_TOL = 1e-9
MAX_BRUTE_K = 20

Coupling = Literal["independent-product", "exchangeable-permutation", "explicit"]


@dataclass(frozen=True)
class DiscreteJointSpec:
    """A joint law of K e-variables with finite support.

    ``support[i]`` is a K-vector taken with probability ``probs[i]``.  The
    ``coupling`` tag records how the law was built; it does not change how
    expectations are computed.
    """

    support: tuple[tuple[float, ...], ...]
    probs: tuple[float, ...]
    coupling: Coupling = "explicit"

    def __post_init__(self) -> None:
        support = tuple(tuple(float(x) for x in row) for row in self.support)
        probs = tuple(float(q) for q in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if self.coupling not in ("independent-product", "exchangeable-permutation", "explicit"):
            raise ValueError(f"unknown coupling {self.coupling!r}")
        if not support:
            raise ValueError("support must not be empty")
        if len(support) != len(probs):
            raise ValueError(f"{len(support)} support points but {len(probs)} probabilities")
        K = len(support[0])
        if K == 0:
            raise ValueError("support vectors must not be empty")
        for row in support:
            if len(row) != K:
                raise ValueError("support vectors must all have the same length")
            for x in row:
                if math.isnan(x) or x < 0:
                    raise ValueError(f"e-values must be nonnegative, got {x}")
        for q in probs:
            if math.isnan(q) or q < 0:
                raise ValueError(f"probabilities must be nonnegative, got {q}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities must sum to 1, got {total!r}")
        for k, mean in enumerate(self.marginal_means()):
            if mean > 1.0 + PROB_TOL:
                raise ValueError(f"marginal {k} has mean {mean!r} > 1; not an e-variable")

    @property
    def dimension(self) -> int:
        return len(self.support[0])

    def marginal_means(self) -> list[float]:
        means = []
        for k in range(self.dimension):
            terms = [q * row[k] for row, q in zip(self.support, self.probs) if q > 0]
            means.append(math.inf if any(math.isinf(t) for t in terms) else math.fsum(terms))
        return means


def exact_expectation(F: Callable[[list[float]], float], spec: DiscreteJointSpec) -> float:
    """``sum_i probs[i] * F(support[i])``, summed without rounding drift.

    Points of probability zero are skipped, so ``F`` is never asked about
    values that cannot occur.
    """
    terms = []
    for row, q in zip(spec.support, spec.probs):
        if q == 0.0:
            continue
        value = F(list(row))
        if math.isinf(value):
            return math.inf
        terms.append(q * value)
    return math.fsum(terms)


def point_mass(e: Sequence[float]) -> DiscreteJointSpec:
    return DiscreteJointSpec((tuple(e),), (1.0,), "explicit")


def exchangeable_spec(e: Sequence[float]) -> DiscreteJointSpec:
    """Cyclic shifts of ``e``, each equally likely, on an event of probability ``1/a``.

    ``a = max(mean(e), 1)``; off the event all coordinates are 0.  Every
    marginal then has mean ``mean(e) / a <= 1``, and a symmetric F has
    expectation ``F(e) / a + (1 - 1/a) F(0, ..., 0)``.
    """
    values = [float(x) for x in e]
    K = len(values)
    if K == 0 or any(math.isinf(x) or math.isnan(x) or x < 0 for x in values):
        raise ValueError("need a nonempty vector of finite nonnegative values")
    a = max(math.fsum(values) / K, 1.0)
    on = 1.0 / a
    support = [tuple(values[(j + s) % K] for j in range(K)) for s in range(K)]
    probs = [on / K] * K
    if on < 1.0:
        support.append((0.0,) * K)
        probs.append(1.0 - math.fsum(probs))
    return DiscreteJointSpec(tuple(support), tuple(probs), "exchangeable-permutation")


def comonotone_spec(widths: Sequence[float], levels: Sequence[Sequence[float]]) -> DiscreteJointSpec:
    """Coordinates that are all decreasing functions of one uniform variable.

    ``widths`` partitions [0, 1] into cells; ``levels[k]`` gives coordinate
    k's value on each cell.  Each coordinate is rescaled to mean exactly 1
    (or left at 0), and its levels are sorted so that all coordinates are
    large on the same cells.
    """
    w = [float(x) for x in widths]
    if not w or any(x < 0 for x in w) or abs(math.fsum(w) - 1.0) > PROB_TOL:
        raise ValueError("widths must be nonnegative and sum to 1")
    columns = []
    for row in levels:
        vals = sorted((float(x) for x in row), reverse=True)
        if len(vals) != len(w) or any(math.isinf(x) or x < 0 for x in vals):
            raise ValueError("each level vector needs one finite nonnegative value per cell")
        mean = math.fsum(q * x for q, x in zip(w, vals))
        # divide and check, since rounding can leave the mean a hair above 1
        scaled = [x / mean for x in vals] if mean > 0 else vals
        while math.fsum(q * x for q, x in zip(w, scaled)) > 1.0:
            scaled = [x * (1.0 - 2.0 ** -52) for x in scaled]
        columns.append(scaled)
    support = tuple(tuple(col[j] for col in columns) for j in range(len(w)))
    return DiscreteJointSpec(support, tuple(w), "explicit")


def independent_two_point_spec(e: Sequence[float]) -> DiscreteJointSpec:
    """Independent coordinates, coordinate k equal to ``e_k`` w.p. ``1/e_k`` and 0 otherwise.

    Coordinates with ``e_k <= 1`` are constant at ``e_k``.
    """
    values = [float(x) for x in e]
    if not values or any(math.isinf(x) or math.isnan(x) or x < 0 for x in values):
        raise ValueError("need a nonempty vector of finite nonnegative values")
    options = []
    for x in values:
        if x > 1.0:
            options.append(((x, 1.0 / x), (0.0, 1.0 - 1.0 / x)))
        else:
            options.append(((x, 1.0),))
    support, probs = [], []
    for combo in itertools.product(*options):
        support.append(tuple(v for v, _ in combo))
        probs.append(math.prod(q for _, q in combo))
    return DiscreteJointSpec(tuple(support), tuple(probs), "independent-product")


def sequential_tree_spec(K: int, rng: random.Random) -> DiscreteJointSpec:
    """A random law where each coordinate has conditional mean 1 given its predecessors.

    Coordinate k is two-point on every branch of the tree, ``{0, c}`` w.p.
    ``1/c``, with ``c`` redrawn per branch, so coordinates are dependent but
    sequential in the given order.
    """
    branches = [((), 1.0)]
    for _ in range(K):
        grown = []
        for prefix, q in branches:
            c = 1.0 + rng.expovariate(0.5)
            grown.append((prefix + (c,), q / c))
            grown.append((prefix + (0.0,), q * (1.0 - 1.0 / c)))
        branches = grown
    support = tuple(b for b, _ in branches)
    probs = [q for _, q in branches]
    # absorb rounding into the largest cell so the total is 1 to within an ulp
    i = max(range(len(probs)), key=probs.__getitem__)
    probs[i] += 1.0 - math.fsum(probs)
    return DiscreteJointSpec(support, tuple(probs), "explicit")


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of :func:`check_e_merging_validity`.

    ``witness`` is the first law with ``E[F] > 1 + 1e-9`` (``None`` if none was
    found); ``worst`` is the largest expectation seen.
    """

    passed: bool
    trials: int
    worst: float
    witness: Optional[DiscreteJointSpec] = None
    witness_expectation: Optional[float] = None


def _random_evector(K: int, rng: random.Random) -> list[float]:
    out = []
    for _ in range(K):
        u = rng.random()
        if u < 0.15:
            out.append(0.0)
        elif u < 0.3:
            out.append(float(rng.randint(1, 10)))
        else:
            out.append(math.exp(rng.uniform(-3.0, 5.0)))
    return out


def _fixed_specs(K: int, merge_class: MergeClass) -> list[DiscreteJointSpec]:
    specs = [point_mass([1.0] * K), point_mass([0.0] * K)]
    if merge_class is MergeClass.ARBITRARY:
        # every coordinate equal to c on one event of probability 1/c
        for c in (2.0, 10.0):
            specs.append(comonotone_spec([1.0 / c, 1.0 - 1.0 / c], [[c, 0.0]] * K))
        # mass K/j spread over j of the K coordinates
        for j in range(1, K + 1):
            specs.append(exchangeable_spec([K / j] * j + [0.0] * (K - j)))
    else:
        specs.append(independent_two_point_spec([2.0] * K))
    return specs


def _random_spec(K: int, merge_class: MergeClass, trial: int,
                 rng: random.Random) -> DiscreteJointSpec:
    if merge_class is MergeClass.ARBITRARY:
        if trial % 2 == 0:
            return exchangeable_spec(_random_evector(K, rng))
        cells = rng.randint(2, 4)
        cuts = sorted(rng.random() for _ in range(cells - 1))
        widths = [b - a for a, b in zip([0.0] + cuts, cuts + [1.0])]
        widths[-1] = 1.0 - math.fsum(widths[:-1])
        levels = [_random_evector(cells, rng) for _ in range(K)]
        return comonotone_spec(widths, levels)
    if merge_class is MergeClass.SEQUENTIAL and trial % 2 == 1:
        return sequential_tree_spec(K, rng)
    return independent_two_point_spec([1.0 + rng.expovariate(0.3) for _ in range(K)])


def check_e_merging_validity(F: Callable[[list[float]], float],
                             merge_class: MergeClass | str,
                             trials: int = 10_000,
                             seed: int = 0,
                             dims: Sequence[int] = (1, 2, 3, 4)) -> ValidityReport:
    """Search for a law under which ``E[F] > 1``.

    Laws are drawn from the constructions for ``merge_class`` (see the
    module docstring), after a few fixed adversarial ones.  ``dims`` lists
    the input lengths F accepts; each trial picks one at random.  A passing
    report is evidence, not proof; a failing one carries an exact witness.
    """
    merge_class = MergeClass(merge_class)
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    dims = [int(K) for K in dims]
    if not dims or min(dims) < 1:
        raise ValueError("dims must list positive input lengths")
    rng = random.Random(seed)

    def laws():
        for K in dims:
            yield from _fixed_specs(K, merge_class)
        for t in range(trials):
            yield _random_spec(rng.choice(dims), merge_class, t, rng)

    worst = -math.inf
    count = 0
    for spec in laws():
        count += 1
        value = exact_expectation(F, spec)
        worst = max(worst, value)
        if value > 1.0 + EXCESS_TOL:
            return ValidityReport(False, count, worst, spec, value)
    return ValidityReport(True, count, worst)


def _subsets(K: int):
    for mask in range(1, 1 << K):
        yield [i for i in range(K) if mask >> i & 1]


def _check_brute_size(K: int) -> None:
    if K == 0:
        raise ValueError("need at least one value")
    if K > MAX_BRUTE_K:
        raise ValueError(f"brute-force closure is limited to K <= {MAX_BRUTE_K}, got {K}")


def brute_closure_e(merge: Callable[[list[float]], float],
                    e: Sequence[float]) -> tuple[float, ...]:
    """For each k, the minimum of ``merge`` over all subsets containing k."""
    values = [float(x) for x in e]
    K = len(values)
    _check_brute_size(K)
    best = [math.inf] * K
    seen = [False] * K
    for subset in _subsets(K):
        v = merge([values[i] for i in subset])
        for i in subset:
            if not seen[i] or v < best[i]:
                best[i] = v
                seen[i] = True
    return tuple(best)


def brute_closure_p(merge: Callable[[list[float]], float],
                    p: Sequence[float]) -> tuple[float, ...]:
    """For each k, the maximum of ``merge`` over all subsets containing k."""
    values = [float(x) for x in p]
    K = len(values)
    _check_brute_size(K)
    best = [-math.inf] * K
    for subset in _subsets(K):
        v = merge([values[i] for i in subset])
        for i in subset:
            if v > best[i]:
                best[i] = v
    return tuple(best)


@dataclass(frozen=True)
class DominationReport:
    """``dominated`` is True when ``F <= G + slack`` held at every grid point."""

    dominated: bool
    points: int
    counterexample: Optional[tuple[float, ...]] = None
    gap: float = 0.0


def check_domination_grid(F: Callable[[list[float]], float],
                          G: Callable[[list[float]], float],
                          K: int,
                          grid: Sequence[float],
                          slack: float = 0.0,
                          symmetric: bool = False) -> DominationReport:
    """Compare ``F(x) <= G(x) + slack`` at every x in ``grid**K``.

    With ``symmetric=True`` only sorted points are visited, which is enough
    when both functions are symmetric.  Returns the first counterexample and
    its gap ``F(x) - G(x)``.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    points = sorted(set(float(x) for x in grid))
    if not points:
        raise ValueError("grid must not be empty")
    walk = (itertools.combinations_with_replacement(points, K) if symmetric
            else itertools.product(points, repeat=K))
    count = 0
    for x in walk:
        count += 1
        f, g = F(list(x)), G(list(x))
        if f > g + slack:
            return DominationReport(False, count, tuple(x), f - g)
    return DominationReport(True, count)
