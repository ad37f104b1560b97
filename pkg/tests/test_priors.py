import pytest
from hypothesis import given, settings, strategies as st

from medsel import Model, enumerate_models
from medsel.errors import DomainError
from medsel.priors import (
    Bernoulli,
    BetaBinomial,
    Dilution,
    UniformOverModels,
    UniformOverSizes,
    collective_odds_approx,
    collective_prior_mass,
    collective_prior_odds,
    dilution_theta2,
    model_prior_mass,
)

ALL_PRIORS = [
    UniformOverModels(),
    UniformOverSizes(),
    Bernoulli(0.3),
    BetaBinomial(1.0, 1.0),
    BetaBinomial(1.0, 2.5),
    Dilution(theta1=0.6, k=2),
]


class TestModelPriorMass:
    def test_uniform_models(self):
        assert model_prior_mass(UniformOverModels(), Model(5, 4), 4) == 1 / 16

    def test_uniform_sizes(self):
        # q=3, |gamma|=1: (1/4)/C(3,1)
        assert model_prior_mass(UniformOverSizes(), Model(1, 3), 3) == pytest.approx(1 / 12)

    def test_beta_binomial_11_equals_uniform_sizes(self):
        for m in enumerate_models(3):
            assert model_prior_mass(BetaBinomial(1, 1), m, 3) == pytest.approx(
                model_prior_mass(UniformOverSizes(), m, 3), abs=1e-14
            )

    @pytest.mark.parametrize("prior", ALL_PRIORS, ids=lambda p: type(p).__name__)
    @pytest.mark.parametrize("q", [2, 5, 10])
    def test_masses_sum_to_one(self, prior, q):
        if isinstance(prior, Dilution) and prior.k > q:
            pytest.skip("duplicate block larger than q")
        total = sum(model_prior_mass(prior, m, q) for m in enumerate_models(q))
        assert total == pytest.approx(1.0, abs=1e-12)

    @given(theta=st.floats(0.01, 0.99), q=st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_bernoulli_masses_sum_to_one(self, theta, q):
        total = sum(model_prior_mass(Bernoulli(theta), m, q) for m in enumerate_models(q))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_invalid_hyperparameters(self):
        with pytest.raises(DomainError):
            Bernoulli(1.0)
        with pytest.raises(DomainError):
            BetaBinomial(0.0, 1.0)
        with pytest.raises(DomainError):
            Dilution(theta1=0.5, k=0)


def brute_force_collective(prior, gamma1, k, include_x):
    """Oracle: sum model_prior_mass over the collective's members directly."""
    p = gamma1.q
    q = p + k
    total = 0.0
    for m in enumerate_models(q):
        g1, g2 = m.split(p)
        if g1 != gamma1:
            continue
        if include_x and g2.size >= 1:
            total += model_prior_mass(prior, m, q)
        if not include_x and g2.size == 0:
            total += model_prior_mass(prior, m, q)
    return total


class TestCollectiveMass:
    def test_separable_half_example(self):
        gamma1 = Model.from_bits([1, 0])
        assert collective_prior_mass(Bernoulli(0.5), gamma1, 3, True) == pytest.approx(
            0.25 * 0.875
        )
        assert collective_prior_mass(Bernoulli(0.5), gamma1, 3, False) == pytest.approx(
            0.25 * 0.125
        )

    def test_uniform_sizes_p1_k2(self):
        # sum over sizes j=1,2 of [1/4] C(2,j)/C(3,j) = 1/6 + 1/12
        val = collective_prior_mass(UniformOverSizes(), Model(0, 1), 2, True)
        assert val == pytest.approx(0.25, abs=1e-15)
        assert val == pytest.approx(
            brute_force_collective(UniformOverSizes(), Model(0, 1), 2, True)
        )

    @pytest.mark.parametrize(
        "prior",
        [UniformOverSizes(), Bernoulli(0.37), BetaBinomial(1.5, 2.0), Dilution(0.5, 3)],
        ids=lambda p: type(p).__name__,
    )
    @pytest.mark.parametrize("p,k", [(1, 3), (4, 3), (2, 1), (6, 3), (9, 3)])
    def test_matches_brute_force(self, prior, p, k):
        if isinstance(prior, Dilution) and prior.k != k:
            pytest.skip("dilution prior pinned to its own k")
        for mask in {0, (1 << p) - 1, 1 % (1 << p)}:
            gamma1 = Model(mask, p)
            for include in (True, False):
                assert collective_prior_mass(prior, gamma1, k, include) == pytest.approx(
                    brute_force_collective(prior, gamma1, k, include), abs=1e-13
                )

    def test_k_zero_rejected(self):
        with pytest.raises(DomainError):
            collective_prior_mass(Bernoulli(0.5), Model(0, 2), 0, True)


class TestCollectiveOdds:
    def test_separable_half_k3(self):
        assert collective_prior_odds(Bernoulli(0.5), 0, 2, 3) == pytest.approx(7.0)

    def test_beta_binomial_single_factor(self):
        # p=2, |gamma1|=0, k=1: (1 + 1/3) - 1
        assert collective_prior_odds(BetaBinomial(1, 1), 0, 2, 1) == pytest.approx(1 / 3)

    def test_beta_binomial_large_p(self):
        got = collective_prior_odds(BetaBinomial(1, 1), 2, 100, 5)
        assert got == pytest.approx(0.15763576357635745, rel=1e-12)
        # independent oracle: ratio of the two closed-form masses
        gamma1 = Model(0b11, 100)
        num = collective_prior_mass(BetaBinomial(1, 1), gamma1, 5, True)
        den = collective_prior_mass(BetaBinomial(1, 1), gamma1, 5, False)
        assert got == pytest.approx(num / den, rel=1e-9)

    def test_beta_binomial_huge_p_no_overflow(self):
        val = collective_prior_odds(BetaBinomial(1, 1), 3, 2000, 4)
        assert 0 < val < 0.02

    @given(theta=st.floats(0.05, 0.95), k=st.integers(1, 12))
    @settings(max_examples=60, deadline=None)
    def test_separable_odds_increase_in_k(self, theta, k):
        prior = Bernoulli(theta)
        odds_k = collective_prior_odds(prior, 0, 3, k)
        odds_k1 = collective_prior_odds(prior, 0, 3, k + 1)
        assert odds_k1 > odds_k
        assert (odds_k > 1.0) == ((1 - theta) ** k < 0.5)

    def test_separable_odds_unbounded(self):
        assert collective_prior_odds(Bernoulli(0.5), 0, 2, 40) > 1e11

    @pytest.mark.parametrize("theta", [0.3, 0.5, 0.7])
    def test_beta_binomial_smaller_than_separable(self, theta):
        # holds whenever |gamma1| < (p+b) theta - a (1-theta)
        a = b = 1.0
        for p in (5, 20):
            for k in (1, 3, 6):
                for s in range(p):
                    if s < (p + b) * theta - a * (1 - theta):
                        assert collective_prior_odds(
                            BetaBinomial(a, b), s, p, k
                        ) < collective_prior_odds(Bernoulli(theta), s, p, k)


class TestOddsApprox:
    def test_first_order_value(self):
        approx = collective_odds_approx(2, 1, 1, 100, 5, order="first")
        assert approx.value == pytest.approx(1.05**3)
        assert approx.value == pytest.approx(1.157625)

    def test_c_vanishes_for_unit_hyperparameters_i2(self):
        # C = (i^2 - i - 2)/2 = 0 at i=2, so both orders coincide
        first = collective_odds_approx(2, 1, 1, 50, 5, order="first")
        second = collective_odds_approx(2, 1, 1, 50, 5, order="second")
        assert first.value == pytest.approx(second.value, rel=1e-15)

    def test_empty_product(self):
        approx = collective_odds_approx(2, 1, 1, 100, 0, order="second")
        assert approx.exact == 1.0
        assert approx.value == pytest.approx(1.0)

    @pytest.mark.parametrize("i,a,b", [(1, 2, 3), (0, 1, 2), (3, 1, 2), (2, 1, 1)])
    def test_relative_error_shrinks_second_order(self, i, a, b):
        # doubling p cuts the odds-relative residual by roughly 4
        for p in (50, 100):
            e1 = collective_odds_approx(i, a, b, p, 5, order="second").relative_error
            e2 = collective_odds_approx(i, a, b, 2 * p, 5, order="second").relative_error
            assert 3.0 <= e1 / e2 <= 5.0

    def test_second_order_beats_first_order(self):
        i, a, b = 1, 2, 3
        first = collective_odds_approx(i, a, b, 100, 5, order="first")
        second = collective_odds_approx(i, a, b, 100, 5, order="second")
        assert second.error < first.error


class TestDilution:
    def test_theta2_examples(self):
        assert dilution_theta2(0.75, 2) == pytest.approx(0.5)
        assert dilution_theta2(0.3, 1) == pytest.approx(0.3)
        assert dilution_theta2(0.5, 3) == pytest.approx(0.2062994740159002, rel=1e-12)

    def test_collective_mass_identity(self):
        # with theta2 diluted, the collective carries theta1^{|g1|+1}(1-theta1)^{p-|g1|}
        theta1, k, p = 0.5, 3, 3
        prior = Dilution(theta1=theta1, k=k)
        gamma1 = Model(0b1, p)
        got = collective_prior_mass(prior, gamma1, k, True)
        assert got == pytest.approx(theta1**2 * (1 - theta1) ** 2, abs=1e-15)
        assert got == pytest.approx(
            brute_force_collective(prior, gamma1, k, True), abs=1e-15
        )

    @given(theta1=st.floats(0.05, 0.95), k=st.integers(1, 10))
    @settings(max_examples=50, deadline=None)
    def test_block_mass_equals_single_covariate(self, theta1, k):
        # probability that at least one copy enters equals theta1
        theta2 = dilution_theta2(theta1, k)
        assert 1 - (1 - theta2) ** k == pytest.approx(theta1, abs=1e-12)
