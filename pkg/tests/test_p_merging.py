import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from evalues.p_merging import bonferroni, fisher, maximum, ruger_p, simes

# chi-square(4) tail at -2 ln 0.0025, from mpmath: 0.0025 * (1 - ln 0.0025)
FISHER_TWO_005 = 0.01747866136776995497

pvectors = st.lists(st.floats(0, 1), min_size=1, max_size=10)


def test_bonferroni_examples():
    assert bonferroni([0.01, 0.04, 0.1]) == pytest.approx(0.03, rel=1e-15)
    assert bonferroni([0.5, 0.6]) == 1.0
    assert bonferroni([1.0, 1.0, 1.0]) == 1.0


def test_ruger_examples():
    p = [0.3, 0.02, 0.5]
    assert ruger_p(1, p) == bonferroni(p)
    assert ruger_p(3, p) == maximum(p)
    assert ruger_p(2, [0.02, 0.3]) == 0.3
    with pytest.raises(ValueError):
        ruger_p(0, p)
    with pytest.raises(ValueError):
        ruger_p(4, p)


def test_simes_examples():
    assert simes([0.01, 0.04, 0.1]) == pytest.approx(0.03, rel=1e-15)
    assert simes([0.2, 0.2, 0.2]) == pytest.approx(0.2, rel=1e-15)
    assert simes([0.04, 0.05]) == 0.05


def test_fisher_examples():
    assert fisher([0.05, 0.05]) == pytest.approx(FISHER_TWO_005, rel=1e-13)
    assert fisher([1.0, 1.0]) == 1.0
    assert fisher([0.37]) == 0.37
    assert fisher([0.0, 0.5]) == 0.0


@given(st.lists(st.floats(1e-12, 1), min_size=1, max_size=30))
def test_fisher_against_scipy(p):
    _, expected = stats.combine_pvalues(p, method="fisher")
    assert fisher(p) == pytest.approx(expected, rel=1e-9, abs=1e-300)


def test_maximum_examples():
    assert maximum([0.2, 0.7]) == 0.7
    assert maximum([0.3]) == 0.3
    assert maximum([0.0, 1.0]) == 1.0


@pytest.mark.parametrize("f", [bonferroni, simes, fisher, maximum])
def test_rejects_bad_input(f):
    with pytest.raises(ValueError):
        f([])
    with pytest.raises(ValueError):
        f([0.5, 1.5])
    with pytest.raises(ValueError):
        f([math.nan])


@given(pvectors)
def test_simes_is_min_over_ruger(p):
    assert all(simes(p) <= ruger_p(k, p) for k in range(1, len(p) + 1))


@pytest.mark.parametrize("f", [bonferroni, simes, fisher, maximum])
@given(p=pvectors, rnd=st.randoms())
def test_bitwise_symmetric(f, p, rnd):
    q = p[:]
    rnd.shuffle(q)
    assert f(q) == f(p)


@pytest.mark.parametrize("f", [simes, fisher])
def test_monte_carlo_validity_under_independence(f):
    n, K = 10**6, 5
    u = 1.0 - np.random.default_rng(11).random((n, K))
    merged = np.array([f(row) for row in u.tolist()])
    for eps in (0.01, 0.05, 0.1):
        se = math.sqrt(eps * (1 - eps) / n)
        assert np.mean(merged <= eps) <= eps + 3 * se


def _disjoint_events_law(K, eps, levels):
    """p_k = levels[k] on its own event of probability levels[k]; 1 elsewhere.

    The events are disjoint, which is the extreme case for Bonferroni.
    """
    support, probs = [], []
    for k in range(K):
        row = [1.0] * K
        row[k] = levels[k]
        support.append(row)
        probs.append(levels[k])
    support.append([1.0] * K)
    probs.append(1.0 - sum(probs))
    return support, probs


@given(st.integers(1, 6), st.floats(1e-4, 0.9), st.data())
def test_bonferroni_exact_validity_on_disjoint_events(K, eps, data):
    # each p_k is a valid p-variable: P(p_k <= x) = levels[k] <= x for x >= levels[k]
    levels = [data.draw(st.floats(1e-6, eps / K)) for _ in range(K)]
    support, probs = _disjoint_events_law(K, eps, levels)
    for t in sorted(set(levels)) + [eps]:
        mass = math.fsum(q for row, q in zip(support, probs) if bonferroni(row) <= t)
        assert mass <= t * (1 + 1e-12)


def test_bonferroni_tight_on_disjoint_events():
    K, eps = 4, 0.2
    support, probs = _disjoint_events_law(K, eps, [eps / K] * K)
    mass = math.fsum(q for row, q in zip(support, probs) if bonferroni(row) <= eps)
    assert mass == pytest.approx(eps, rel=1e-12)
    # Simes has no such guarantee: it rejects more often on a dependent law
    support = [[0.1, 0.1], [1.0, 1.0]]
    probs = [0.1, 0.9]
    mass_simes = math.fsum(q for row, q in zip(support, probs) if simes(row) <= 0.1)
    assert mass_simes == pytest.approx(0.1)
