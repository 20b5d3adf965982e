import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from steinbeta import beta_stein as bs
from steinbeta import oracle_exact as oe
from steinbeta import polya
from steinbeta.errors import DomainError
from steinbeta.testfns import make_test_function

URN_GRID = tuple(itertools.product((1, 2, 3), repeat=3))
small = st.integers(1, 6)
urns = st.builds(polya.UrnConfig, small, small, small, st.integers(1, 40))


class TestUrnConfig:
    def test_derived(self):
        u = polya.UrnConfig(2, 3, 4, 5)
        assert u.a == Fraction(1, 2) and u.b == Fraction(3, 4)
        assert u.with_n(9).n == 9

    @pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, 1, 1, 0), (1.5, 1, 1, 1), (True, 1, 1, 1)])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            polya.UrnConfig(*bad)


class TestPmf:
    def test_examples(self):
        assert polya.pmf(polya.UrnConfig(1, 1, 1, 4)).probs == [Fraction(1, 5)] * 5
        assert polya.pmf(polya.UrnConfig(2, 1, 1, 1)).probs == [Fraction(1, 3), Fraction(2, 3)]

    @settings(max_examples=60, deadline=None)
    @given(urns)
    def test_normalized_and_positive(self, u):
        law = polya.pmf(u)
        assert sum(law.probs) == 1
        assert all(pk > 0 for pk in law.probs)

    @pytest.mark.parametrize("r,w,c", URN_GRID)
    def test_generalized_binomial_up_to_64(self, r, w, c):
        for n in (1, 7, 33, 64):
            u = polya.UrnConfig(r, w, c, n)
            assert polya.pmf(u, check_generalized=False).probs == polya.generalized_binomial_pmf(u)

    def test_against_scipy_betabinom(self):
        u = polya.UrnConfig(2, 3, 2, 30)
        ref = stats.betabinom.pmf(np.arange(31), 30, 1.0, 1.5)
        assert polya.pmf(u).as_float() == pytest.approx(ref, rel=1e-12)

    def test_log_probs(self):
        law = polya.pmf(polya.UrnConfig(3, 2, 1, 50))
        for k in range(51):
            assert law.log_probs[k] == pytest.approx(math.log(law.prob(k)), abs=1e-12)
        assert polya.log_pmf_lgamma(polya.UrnConfig(3, 2, 1, 50)) == pytest.approx(law.log_probs, abs=1e-10)

    def test_underflow_flag(self):
        law = polya.pmf(polya.UrnConfig(1, 1, 1, 4))
        assert not law.underflow
        # P(S_n = n) = b! n! / (n + b)!, about exp(-887) for b = 300, n = 2000.
        big = polya.pmf(polya.UrnConfig(1, 300, 1, 2000), check_generalized=False)
        assert big.underflow and sum(big.numerators) == big.denominator
        assert big.log_probs[-1] < -700 and "PolyaPmf" in repr(big)

    def test_expect_poly(self):
        law = polya.pmf(polya.UrnConfig(2, 3, 1, 7))
        direct = sum(pk * (1 + 2 * Fraction(k, 7) - Fraction(k, 7) ** 2) for k, pk in enumerate(law.probs))
        assert law.expect_poly((1, 2, -1)) == direct


class TestMixture:
    def test_examples(self):
        assert polya.mixture_check(polya.UrnConfig(1, 1, 1, 5)) <= 1e-9
        assert polya.mixture_check(polya.UrnConfig(2, 3, 1, 10)) <= 1e-8

    def test_single_draw_is_mean(self):
        u = polya.UrnConfig(3, 1, 2, 1)
        assert polya.pmf(u).prob(1) == u.a / (u.a + u.b)
        assert polya.mixture_check(u) <= 1e-10

    def test_guard(self):
        with pytest.raises(DomainError):
            polya.mixture_check(polya.UrnConfig(1, 1, 1, 201))


class TestGibbs:
    def test_pair_differs_by_one_step(self, rng):
        u = polya.UrnConfig(2, 3, 2, 7)
        for _ in range(200):
            v, v2 = polya.gibbs_pair_sample(u, rng)
            assert abs(v2 - v) in (0, Fraction(1, 7))

    def test_reproducible(self):
        u = polya.UrnConfig(1, 2, 1, 9)
        a = [polya.gibbs_pair_sample(u, np.random.default_rng(5)) for _ in range(3)]
        b = [polya.gibbs_pair_sample(u, np.random.default_rng(5)) for _ in range(3)]
        assert a == b

    def test_mean_within_three_sigma(self, rng):
        u = polya.UrnConfig(2, 3, 1, 12)
        s, s2 = polya.gibbs_pair_batch(u, rng, 100_000)
        law = polya.pmf(u)
        mean = float(u.a / (u.a + u.b))
        var = float(sum(pk * (Fraction(k, 12) - u.a / (u.a + u.b)) ** 2 for k, pk in enumerate(law.probs)))
        se = math.sqrt(var / s.size)
        assert abs(np.mean(s) / 12 - mean) <= 3 * se
        assert abs(np.mean(s2) / 12 - mean) <= 3 * se

    def test_batch_joint_law(self, rng):
        # Empirical joint law of (S_n, S_n') against the exact oracle.
        u = polya.UrnConfig(1, 1, 1, 3)
        joint = oe.oracle_pair_joint(oe.enumerate_urn(u))
        s, s2 = polya.gibbs_pair_batch(u, rng, 200_000)
        for (k, j), pr in joint.items():
            freq = np.mean((s == k) & (s2 == j))
            assert abs(freq - float(pr)) <= 4 * math.sqrt(float(pr) * (1 - float(pr)) / s.size)


class TestPairMoments:
    def test_examples(self):
        tab = polya.pair_moments(polya.UrnConfig(1, 1, 1, 10))
        assert tab.lam == Fraction(1, 110)
        assert tab.m1[5] == 0

    def test_against_oracle_n4(self):
        u = polya.UrnConfig(1, 1, 1, 4)
        om = oe.oracle_pair_moments(oe.enumerate_urn(u))
        tab = polya.pair_moments(u)
        assert (om.m1, om.m2, om.pneq) == (tab.m1, tab.m2, tab.pneq)

    @settings(max_examples=40, deadline=None)
    @given(urns)
    def test_regression_aggregate_zero(self, u):
        law = polya.pmf(u)
        tab = polya.pair_moments(u)
        assert sum(pk * m for pk, m in zip(law.probs, tab.m1)) == 0
        assert all(m2 >= m1 * m1 for m1, m2 in zip(tab.m1, tab.m2))


class TestDiscrepancies:
    @pytest.mark.parametrize("n", [1, 2, 10, 37])
    def test_eta_equal_shapes(self, n):
        assert polya.eta_discrepancy_exact(polya.UrnConfig(2, 2, 2, n)) == Fraction(1, 2 * n)

    def test_eta_example(self):
        assert polya.eta_discrepancy_exact(polya.UrnConfig(1, 1, 1, 10)) == Fraction(1, 20)

    @settings(max_examples=20, deadline=None)
    @given(urns)
    def test_eta_bound(self, u):
        assert polya.eta_discrepancy_exact(u) <= (abs(u.a - u.b) + u.a) / (2 * u.n)

    def test_third_example(self):
        u = polya.UrnConfig(1, 1, 1, 1)
        assert polya.third_abs_exact(u) == Fraction(1, 2)
        assert polya.third_term_exact(u) == Fraction(1, 6)

    @settings(max_examples=20, deadline=None)
    @given(urns)
    def test_third_bound(self, u):
        t = polya.third_term_exact(u)
        assert 0 <= t <= Fraction(1, 6 * u.n) + (u.a + u.b - 1) / (6 * u.n ** 2)

    @pytest.mark.parametrize("r,w,c", [(1, 1, 1), (2, 3, 2), (3, 1, 2)])
    def test_third_against_oracle(self, r, w, c):
        for n in range(1, 7):
            u = polya.UrnConfig(r, w, c, n)
            e = oe.enumerate_urn(u)
            direct = sum(prob * (rho if seq[-1] == 0 else 1 - rho) for seq, prob, rho in e.entries)
            assert polya.third_abs_exact(u) == direct / n ** 3

    def test_plugin_stats(self):
        u = polya.UrnConfig(1, 1, 1, 10)
        s = polya.plugin_stats(u)
        assert s.lam == pytest.approx(1 / 110) and s.remainder_abs == 0.0
        w = polya.plugin_stats(u, worst_case=True)
        assert w.third_abs == pytest.approx(1e-3) and w.eta_discrepancy >= s.eta_discrepancy


@pytest.fixture(scope="module")
def consts():
    return bs.constants_01(bs.Beta01(1.0, 1.0))


class TestRate:
    def test_identity_h_has_zero_error(self, consts):
        rows, _ = polya.rate_table(polya.UrnConfig(2, 3, 1, 1), [1, 5, 40], make_test_function("x"),
                                   consts.C1, consts.C2)
        assert all(r.exact_error_rational == 0 for r in rows)

    def test_x2_uniform(self, consts):
        rows, slope = polya.rate_table(polya.UrnConfig(1, 1, 1, 10), [10, 20, 40, 80],
                                       make_test_function("x2"), consts.C1, consts.C2)
        assert rows[0].exact_error_rational == Fraction(1, 60)
        assert all(r.exact_error_rational == Fraction(1, 6 * r.n) for r in rows)
        assert all(r.bound >= r.exact_error for r in rows)
        assert slope == pytest.approx(-1.0, abs=1e-12)

    def test_nonpolynomial_h(self, consts):
        tf = make_test_function("sin3x", (0, 1))
        c12 = bs.constants_01(bs.Beta01(1.0, 2.0))
        rows, slope = polya.rate_table(polya.UrnConfig(1, 2, 1, 8), [8, 16, 32, 64, 128], tf,
                                       c12.C1, c12.C2)
        assert all(0 <= r.exact_error <= r.bound for r in rows)
        assert -1.2 <= slope <= -0.8

    def test_needs_norms(self, consts):
        tf = make_test_function("indicator(0.5)")
        with pytest.raises(DomainError):
            polya.rate_table(polya.UrnConfig(1, 1, 1, 4), [4], tf, consts.C1, consts.C2)

    def test_fit_slope(self):
        ns = np.array([10, 20, 40, 80])
        assert polya.fit_slope(ns, 3.0 / ns ** 2) == pytest.approx(-2.0)
        assert math.isnan(polya.fit_slope([1, 2], [0.0, 0.0]))


class TestDistances:
    def test_single_draw(self):
        d = polya.distance_diagnostics(polya.UrnConfig(1, 1, 1, 1))
        assert d["kolmogorov"] == pytest.approx(0.5, abs=1e-14)
        assert d["wasserstein"] == pytest.approx(0.25, abs=1e-14)

    @pytest.mark.parametrize("r,w,c", [(1, 1, 1), (2, 3, 1), (3, 2, 1)])
    def test_decay(self, r, w, c):
        d4 = polya.distance_diagnostics(polya.UrnConfig(r, w, c, 4))
        d64 = polya.distance_diagnostics(polya.UrnConfig(r, w, c, 64))
        for key in ("kolmogorov", "wasserstein"):
            assert 0 <= d64[key] < d4[key] / 4

    def test_decay_with_edge_atom(self):
        # b = 1/2: the atom at V = 1 has mass of order n^(-1/2), so decay is slower.
        d = [polya.distance_diagnostics(polya.UrnConfig(3, 1, 2, n))["kolmogorov"] for n in (4, 16, 64)]
        assert d[0] > d[1] > d[2] > 0
        assert d[2] < d[0] / 3

    def test_wasserstein_against_scipy(self):
        u = polya.UrnConfig(2, 3, 1, 12)
        law = polya.pmf(u).as_float()
        # Fine sample of the Beta law via its quantile grid.
        qs = (np.arange(200_000) + 0.5) / 200_000
        sample = stats.beta.ppf(qs, 2, 3)
        ref = stats.wasserstein_distance(np.arange(13) / 12, sample, u_weights=law)
        assert polya.distance_diagnostics(u)["wasserstein"] == pytest.approx(ref, abs=1e-5)
