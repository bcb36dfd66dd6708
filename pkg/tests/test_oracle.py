import math
import random
from functools import partial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from evalues.e_merging import (
    MergeClass,
    arithmetic_mean,
    convex_mixture,
    e_simes,
    product,
    ruger_e,
    u_statistic,
)
from evalues.oracle import (
    DiscreteJointSpec,
    brute_closure_e,
    brute_closure_p,
    check_domination_grid,
    check_e_merging_validity,
    comonotone_spec,
    exact_expectation,
    exchangeable_spec,
    independent_two_point_spec,
    point_mass,
    sequential_tree_spec,
)
from evalues.p_merging import bonferroni, simes

GRID = [0.5 * i for i in range(21)]


class TestDiscreteJointSpec:
    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            DiscreteJointSpec(((1.0,), (0.0,)), (0.5, 0.4))
        with pytest.raises(ValueError):
            DiscreteJointSpec(((1.0,),), (-1.0,))
        with pytest.raises(ValueError):
            DiscreteJointSpec(((1.0,),), (0.5, 0.5))

    def test_rejects_non_e_variables(self):
        with pytest.raises(ValueError):
            DiscreteJointSpec(((3.0, 1.0), (0.0, 1.0)), (0.5, 0.5))
        with pytest.raises(ValueError):
            point_mass([1.0, math.inf])

    def test_rejects_ragged_support(self):
        with pytest.raises(ValueError):
            DiscreteJointSpec(((1.0, 1.0), (1.0,)), (0.5, 0.5))

    def test_rejects_unknown_coupling(self):
        with pytest.raises(ValueError):
            DiscreteJointSpec(((1.0,),), (1.0,), "copula")


class TestExactExpectation:
    def test_examples(self):
        assert exact_expectation(arithmetic_mean, point_mass([1.0, 1.0, 1.0])) == 1.0
        assert exact_expectation(product, independent_two_point_spec([2.0, 5.0])) == pytest.approx(1.0, rel=1e-15)
        spec = exchangeable_spec([8.0, 2.0])
        assert spec.probs == pytest.approx((0.1, 0.1, 0.8))
        assert exact_expectation(e_simes, spec) == pytest.approx(0.8, rel=1e-15)

    @given(st.lists(st.floats(0, 5), min_size=2, max_size=2), st.floats(0, 1), st.floats(0, 1))
    def test_linear_in_probs(self, e, w, t):
        a = independent_two_point_spec([1.0 + e[0], 1.0 + e[1]])
        b = exchangeable_spec(e)
        support = a.support + b.support
        mix = DiscreteJointSpec(support, tuple(t * q for q in a.probs) + tuple((1 - t) * q for q in b.probs))
        expected = t * exact_expectation(product, a) + (1 - t) * exact_expectation(product, b)
        assert exact_expectation(product, mix) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_reordering_invariant(self):
        spec = independent_two_point_spec([3.0, 1.5, 4.0])
        rev = DiscreteJointSpec(spec.support[::-1], spec.probs[::-1])
        assert exact_expectation(product, rev) == exact_expectation(product, spec)

    def test_skips_null_points(self):
        spec = DiscreteJointSpec(((1.0,), (math.inf,)), (1.0, 0.0))
        assert exact_expectation(arithmetic_mean, spec) == 1.0


class TestConstructions:
    @given(st.lists(st.floats(0, 100), min_size=1, max_size=5))
    def test_exchangeable_marginals(self, e):
        spec = exchangeable_spec(e)
        assert all(m <= 1 + 1e-12 for m in spec.marginal_means())

    def test_comonotone_marginals_have_mean_one(self):
        spec = comonotone_spec([0.2, 0.3, 0.5], [[5, 1, 0], [1, 2, 3]])
        assert spec.marginal_means() == pytest.approx([1.0, 1.0])
        # both coordinates are largest on the first cell
        assert spec.support[0] == max(spec.support)

    def test_sequential_tree(self):
        spec = sequential_tree_spec(3, random.Random(1))
        assert len(spec.support) == 8
        assert exact_expectation(product, spec) == pytest.approx(1.0, rel=1e-12)


class TestValidity:
    def test_mean_passes(self):
        report = check_e_merging_validity(arithmetic_mean, MergeClass.ARBITRARY, 10_000, seed=0)
        assert report.passed and report.witness is None
        assert report.worst <= 1 + 1e-9

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_mean_passes_every_seed(self, seed):
        assert check_e_merging_validity(arithmetic_mean, "arbitrary", 500, seed).passed

    def test_product_fails_under_dependence(self):
        report = check_e_merging_validity(product, MergeClass.ARBITRARY, 10_000, seed=0, dims=(2, 3))
        assert not report.passed
        assert report.witness_expectation > 1 + 1e-9
        assert exact_expectation(product, report.witness) == report.witness_expectation

    def test_product_passes_under_independence(self):
        for cls in (MergeClass.INDEPENDENT, MergeClass.SEQUENTIAL):
            assert check_e_merging_validity(product, cls, 2000, seed=5).passed

    def test_scaled_mean_fails(self):
        report = check_e_merging_validity(lambda e: 1.01 * arithmetic_mean(e), "arbitrary", 10_000, 0)
        assert not report.passed
        assert report.witness_expectation == pytest.approx(1.01)

    @pytest.mark.parametrize("seed", [0, 7, 99])
    def test_doubled_mean_fails_every_seed(self, seed):
        # no fixed laws: only randomly drawn ones
        report = check_e_merging_validity(lambda e: 2 * arithmetic_mean(e), "arbitrary", 100, seed)
        assert not report.passed

    def test_u_statistic_of_order_two_fails_under_dependence(self):
        f = partial(u_statistic, 2)
        assert not check_e_merging_validity(f, "arbitrary", 1000, 0, dims=(2, 3)).passed
        assert check_e_merging_validity(f, "independent", 1000, 0, dims=(2, 3)).passed

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            check_e_merging_validity(arithmetic_mean, "arbitrary", 0)
        with pytest.raises(ValueError):
            check_e_merging_validity(arithmetic_mean, "pairwise", 10)
        with pytest.raises(ValueError):
            check_e_merging_validity(arithmetic_mean, "arbitrary", 10, dims=(0,))


class TestBruteClosure:
    def test_examples(self):
        assert brute_closure_e(arithmetic_mean, [8, 1, 0.2]) == pytest.approx((46 / 15, 0.6, 0.2))
        assert brute_closure_e(product, [4, 0.5]) == (2.0, 0.5)
        assert brute_closure_e(product, [3.0]) == (3.0,)
        assert brute_closure_p(simes, [0.01, 0.04]) == (0.02, 0.04)
        assert brute_closure_p(bonferroni, [0.5, 0.5]) == (1.0, 1.0)
        assert brute_closure_p(simes, [0.3]) == (0.3,)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            brute_closure_e(arithmetic_mean, [1.0] * 21)
        with pytest.raises(ValueError):
            brute_closure_p(simes, [])


class TestDomination:
    def test_ruger_below_mean(self):
        for k in (1, 2, 3):
            report = check_domination_grid(partial(ruger_e, k), arithmetic_mean, 3, GRID)
            assert report.dominated and report.points == 21 ** 3

    def test_mixtures_are_not_comparable(self):
        half = partial(convex_mixture, 0.5)
        report = check_domination_grid(arithmetic_mean, half, 2, GRID)
        assert not report.dominated and report.gap > 0
        assert arithmetic_mean(list(report.counterexample)) > half(list(report.counterexample))
        assert not check_domination_grid(half, arithmetic_mean, 2, GRID).dominated

    def test_self_domination(self):
        assert check_domination_grid(e_simes, e_simes, 2, GRID).dominated

    def test_symmetric_walk_is_smaller(self):
        report = check_domination_grid(e_simes, arithmetic_mean, 4, GRID, symmetric=True)
        assert report.dominated and report.points == math.comb(21 + 3, 4)
