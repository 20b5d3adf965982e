import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from steinbeta.errors import DomainError
from steinbeta.specfun import (BetaAB, beta_cdf, beta_cdf_pair, beta_fn, beta_pdf, beta_quantile,
                               beta_sf, log_beta, log_gamma)

SHAPES = (0.3, 0.5, 1.0, 2.0, 5.0)
shape = st.floats(0.2, 30.0)


class TestLogGamma:
    def test_examples(self):
        assert log_gamma(1.0) == 0.0 or abs(log_gamma(1.0)) < 1e-15
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
        assert log_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-3, 1e3))
    def test_against_mpmath(self, x):
        ref = float(mpmath.loggamma(mpmath.mpf(x)))
        assert abs(log_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)
        with pytest.raises(DomainError):
            log_gamma(-1.5)


class TestBetaFunction:
    def test_examples(self):
        assert beta_fn((1, 1)) == pytest.approx(1.0, rel=1e-14)
        assert beta_fn((2, 3)) == pytest.approx(1.0 / 12.0, rel=1e-14)
        assert beta_fn((0.5, 0.5)) == pytest.approx(math.pi, rel=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(shape, shape)
    def test_against_scipy(self, a, b):
        assert log_beta((a, b)) == pytest.approx(special.betaln(a, b), rel=1e-12, abs=1e-13)

    def test_invalid_shape(self):
        with pytest.raises(DomainError):
            BetaAB(0.0, 1.0)


class TestBetaCdf:
    def test_examples(self):
        assert beta_cdf((1, 1), 0.3) == pytest.approx(0.3, abs=1e-15)
        assert beta_cdf((2, 2), 0.5) == pytest.approx(0.5, abs=1e-15)
        assert beta_cdf((0.5, 0.5), 0.5) == pytest.approx(0.5, abs=1e-14)
        assert beta_cdf((2, 3), 0.0) == 0.0 and beta_cdf((2, 3), 1.0) == 1.0

    @pytest.mark.parametrize("a", SHAPES)
    @pytest.mark.parametrize("b", SHAPES)
    def test_against_scipy(self, a, b):
        xs = np.linspace(0.001, 0.999, 41)
        ours = beta_cdf((a, b), xs)
        assert np.max(np.abs(ours - special.betainc(a, b, xs))) <= 1e-13
        sf = np.array([beta_sf((a, b), x) for x in xs])
        assert np.max(np.abs(sf - special.betaincc(a, b, xs))) <= 1e-13

    def test_pair_tail_accuracy(self):
        # The complement keeps relative accuracy deep in the upper tail.
        v, c = beta_cdf_pair((2.0, 30.0), 0.9)
        assert c == pytest.approx(special.betaincc(2.0, 30.0, 0.9), rel=1e-10)
        assert v == 1.0 or v == pytest.approx(1.0, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(shape, shape, st.floats(0.0, 1.0))
    def test_reflection(self, a, b, x):
        assert beta_cdf((a, b), x) + beta_cdf((b, a), 1.0 - x) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(0.5, 2.0), (2.0, 3.0), (5.0, 0.3), (1.0, 1.0)])
    def test_derivative_is_density(self, a, b):
        h = 1e-6
        for x in np.linspace(0.1, 0.9, 9):
            fd = (beta_cdf((a, b), x + h) - beta_cdf((a, b), x - h)) / (2 * h)
            assert fd == pytest.approx(beta_pdf((a, b), x), rel=1e-4)

    def test_pdf_against_scipy(self):
        xs = np.linspace(0.01, 0.99, 25)
        assert beta_pdf((2.5, 0.7), xs) == pytest.approx(stats.beta.pdf(xs, 2.5, 0.7), rel=1e-12)
        assert beta_pdf((2.0, 2.0), 1.5) == 0.0


class TestBetaQuantile:
    def test_examples(self):
        assert beta_quantile((1, 1), 0.5) == pytest.approx(0.5, abs=1e-14)
        assert beta_quantile((2, 2), 0.5) == pytest.approx(0.5, abs=1e-14)
        assert beta_quantile((2, 3), 0.5) == pytest.approx(0.38573, abs=1e-5)
        assert beta_quantile((2, 3), 0.5) == pytest.approx(stats.beta.ppf(0.5, 2, 3), abs=1e-12)

    @pytest.mark.parametrize("a", SHAPES)
    @pytest.mark.parametrize("b", SHAPES)
    def test_round_trip_grid(self, a, b):
        for q in np.arange(1, 100) / 100:
            assert abs(beta_cdf((a, b), beta_quantile((a, b), q)) - q) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(shape, shape, st.floats(1e-6, 1 - 1e-6))
    def test_round_trip_property(self, a, b, q):
        assert abs(beta_cdf((a, b), beta_quantile((a, b), q)) - q) <= 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            beta_quantile((2, 2), 1.0)
