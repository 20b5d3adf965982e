import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from steinbeta.errors import DomainError, NoBracket, NonConvergence
from steinbeta.numerics import (DEFAULT_QUAD, QuadSpec, SupSearchSpec, find_root, integrate,
                                integrate_many, maximize_1d)
from steinbeta.specfun import BetaAB, beta_cdf, beta_pdf

coeffs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=7)


class TestIntegrate:
    def test_examples(self):
        assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0,
                         DEFAULT_QUAD.with_flags(True, False)) == pytest.approx(2.0, abs=1e-9)
        assert integrate(lambda x: np.ones_like(x), 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("k", range(9))
    def test_monomials(self, k):
        assert abs(integrate(lambda x: x ** k, 0.0, 1.0) - 1.0 / (k + 1)) <= DEFAULT_QUAD.abs_tol

    @settings(max_examples=60, deadline=None)
    @given(coeffs, st.floats(0.05, 0.95))
    def test_additive(self, cs, frac):
        f = lambda x: np.polyval(cs, x)
        lo, hi = -1.0, 2.0
        mid = lo + frac * (hi - lo)
        whole = integrate(f, lo, hi)
        parts = integrate(f, lo, mid) + integrate(f, mid, hi)
        assert abs(whole - parts) <= 3 * DEFAULT_QUAD.abs_tol

    @pytest.mark.parametrize("a,b", [(0.3, 2.0), (0.5, 0.5), (2.0, 0.7)])
    def test_singular_beta_density_against_scipy(self, a, b):
        f = lambda x: x ** (a - 1) * (1 - x) ** (b - 1)
        # Exponents below -1/2 leave a weak singularity after substitution; allow deeper bisection.
        spec = QuadSpec(1e-10, 1e-10, 60, a < 1, b < 1)
        ref = math.gamma(a) * math.gamma(b) / math.gamma(a + b)
        assert integrate(f, 0.0, 1.0, spec) == pytest.approx(ref, rel=1e-9)

    def test_oscillatory_against_scipy(self):
        f = lambda x: np.sin(20 * x) * np.exp(-x)
        ref, _ = sp_integrate.quad(f, 0.0, 3.0, epsabs=1e-13, limit=200)
        assert integrate(f, 0.0, 3.0) == pytest.approx(ref, abs=1e-10)

    def test_reversed_and_infinite_rejected(self):
        with pytest.raises(DomainError):
            integrate(lambda x: x, 1.0, 0.0)
        with pytest.raises(DomainError):
            integrate(lambda x: x, 0.0, math.inf)

    def test_nonconvergence_is_reported(self):
        spec = QuadSpec(1e-10, 1e-10, 40, True, False)
        with pytest.raises(NonConvergence):
            integrate(lambda x: x ** -0.95, 0.0, 1.0, spec)

    def test_scalar_only_integrand(self):
        assert integrate(lambda x: math.exp(x), 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-10)

    def test_integrate_many_cumulative(self):
        knots = np.linspace(0.0, 1.0, 11)
        pieces = integrate_many(lambda x: 3 * x * x, knots)
        assert np.cumsum(pieces)[-1] == pytest.approx(1.0, abs=1e-10)
        assert np.cumsum(pieces) == pytest.approx(knots[1:] ** 3, abs=1e-10)

    def test_bad_spec(self):
        with pytest.raises(DomainError):
            QuadSpec(abs_tol=0.0)
        with pytest.raises(DomainError):
            QuadSpec(max_depth=0)


class TestFindRoot:
    def test_examples(self):
        assert find_root(lambda x: x - 0.5, 0.0, 1.0, 1e-12) == pytest.approx(0.5, abs=1e-12)
        assert find_root(lambda x: 1 - 2 * x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)
        med = find_root(lambda x: beta_cdf(BetaAB(2, 2), x) - 0.5, 0.0, 1.0)
        assert med == pytest.approx(0.5, abs=1e-12)

    def test_no_bracket(self):
        with pytest.raises(NoBracket):
            find_root(lambda x: x * x + 1, -1.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-3, 3), st.floats(0.1, 4))
    def test_bracket_halves(self, root, width):
        hist = []
        find_root(lambda x: x - root, root - width, root + 0.7 * width, 1e-10, history=hist)
        widths = [hi - lo for lo, hi in hist]
        prev = 1.7 * width
        for w in widths:
            # Allow the rounding of a midpoint in float arithmetic.
            assert w <= prev / 2 + 4 * np.finfo(float).eps * (abs(root) + width)
            prev = w


class TestMaximize:
    def test_examples(self):
        x, y = maximize_1d(lambda x: -(x - 0.3) ** 2, 0.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-7) and y == pytest.approx(0.0, abs=1e-12)
        x, y = maximize_1d(lambda x: x * (1 - x), 0.0, 1.0)
        assert x == pytest.approx(0.5, abs=1e-7) and y == pytest.approx(0.25, abs=1e-14)

    def test_edge_limits_substitute(self):
        # Undefined at the ends; the limit values stand in.
        f = lambda x: np.where(np.abs(x) < 1, 0.1 * x, np.nan)
        x, y = maximize_1d(f, -1.0, 1.0, lo_limit=-0.1, hi_limit=0.2)
        assert (x, y) == (1.0, 0.2)

    def test_tie_smallest_argmax(self):
        x, y = maximize_1d(lambda x: np.ones_like(x), 0.0, 1.0)
        assert x == 0.0 and y == 1.0

    def test_not_below_grid(self):
        f = lambda x: np.sin(7 * x) * np.exp(-x)
        spec = SupSearchSpec(64, 30)
        _, y = maximize_1d(f, 0.0, 3.0, spec)
        assert y >= np.max(f(np.linspace(0.0, 3.0, 64)))

    @pytest.mark.parametrize("seed", range(5))
    def test_monotone_refinement(self, seed):
        rng = np.random.default_rng(seed)
        a, w = rng.uniform(-1, 1, 4), rng.uniform(1, 15, 4)
        f = lambda x: sum(ai * np.sin(wi * x) for ai, wi in zip(a, w))
        # Nested grids (each contains the previous) with increasing refinement.
        prev = -math.inf
        for k, rounds in ((16, 5), (31, 10), (61, 20), (121, 40), (241, 60)):
            _, y = maximize_1d(f, 0.0, 3.0, SupSearchSpec(k, rounds))
            assert y >= prev - 1e-15
            prev = y

    def test_errors(self):
        with pytest.raises(DomainError):
            maximize_1d(lambda x: x, 1.0, 0.0)
        with pytest.raises(DomainError):
            maximize_1d(lambda x: np.full_like(x, np.nan), 0.0, 1.0)
        with pytest.raises(DomainError):
            SupSearchSpec(coarse_points=4)
