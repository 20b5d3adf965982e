"""Acceptance gate: one test per criterion, each at its stated tolerance."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import AB_GRID, SMOOTH_G, SYM_GRID, sym_target, target01
from steinbeta import beta_stein as bs
from steinbeta import oracle_exact as oe
from steinbeta import polya
from steinbeta import stein_core as sc
from steinbeta.cli import _tilted_law
from steinbeta.numerics import SupSearchSpec
from steinbeta.specfun import BetaAB, beta_pdf
from steinbeta.testfns import make_test_function

LIP_FNS = ("x", "x2", "sin3x")


def _closed_m1(a, b, n, k):
    return (a + b) / (n * (a + b + n - 1)) * (a / (a + b) - Fraction(k, n))


def _closed_m2(a, b, n, k):
    V = Fraction(k, n)
    return ((2 * n + b - a) * V - 2 * n * V * V + a) / (n * n * (a + b + n - 1))


class TestCriterion1ExactPolyaIdentities:
    def test_oracle_equals_closed_forms(self):
        t0 = time.perf_counter()
        for r, w, c in itertools.product((1, 2, 3), repeat=3):
            for n in range(1, 9):
                u = polya.UrnConfig(r, w, c, n)
                e = oe.enumerate_urn(u)
                assert oe.oracle_pmf(e) == polya.pmf(u).probs
                om = oe.oracle_pair_moments(e)
                tab = polya.pair_moments(u)
                for k in range(n + 1):
                    assert om.m1[k] == _closed_m1(u.a, u.b, n, k) == tab.m1[k]
                    assert om.m2[k] == _closed_m2(u.a, u.b, n, k) == tab.m2[k]
        assert time.perf_counter() - t0 < 30.0


class TestCriterion2MixtureIdentity:
    def test_mixture_deviation(self):
        t0 = time.perf_counter()
        for (r, w, c), n in itertools.product(((1, 1, 1), (2, 3, 1), (3, 1, 2)), (5, 10, 50)):
            assert polya.mixture_check(polya.UrnConfig(r, w, c, n)) <= 1e-8
        assert time.perf_counter() - t0 < 60.0


class TestCriterion3RateReproduction:
    def test_rate_table_uniform_x2(self):
        t0 = time.perf_counter()
        consts = bs.constants_01(bs.Beta01(1.0, 1.0))
        ns = [2 ** j for j in range(4, 13)]
        tf = make_test_function("x2", (0.0, 1.0))
        rows, slope = polya.rate_table(polya.UrnConfig(1, 1, 1, 16), ns, tf, consts.C1, consts.C2)
        assert [r.n for r in rows] == ns
        for r in rows:
            oracle = 1.0 / (6 * r.n)
            assert abs(r.exact_error - oracle) <= 1e-12 * oracle
            assert r.bound >= r.exact_error
        assert -1.02 <= slope <= -0.98
        assert time.perf_counter() - t0 < 300.0


class TestCriterion4EtaIdentity:
    def test_eta_identity_on_grid(self):
        t0 = time.perf_counter()
        xs = np.linspace(-1.0, 1.0, 1026)[1:-1]
        for al, be in SYM_GRID:
            p, spec, prof = sym_target(al, be)
            I = prof.I_many(xs)
            lhs = (1.0 - xs * xs) * bs.sym_density(p, xs)
            assert np.max(np.abs(lhs - I)) <= 1e-8 * np.max(I), (al, be)
        assert time.perf_counter() - t0 < 60.0


class TestCriterion5Characterization:
    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_residuals_sym(self, al, be):
        _, spec, prof = sym_target(al, be)
        for name, g, dg in SMOOTH_G:
            assert sc.stein_residual(spec, g, dg, prof) <= 1e-8, name
        tilt = _tilted_law(spec, 0.1)
        assert max(sc.stein_residual(spec, g, dg, prof, law=tilt) for _, g, dg in SMOOTH_G) >= 1e-3

    @pytest.mark.parametrize("a,b", AB_GRID)
    def test_residuals_01(self, a, b):
        _, spec, prof = target01(a, b)
        for name, g, dg in SMOOTH_G:
            assert sc.stein_residual(spec, g, dg, prof) <= 1e-8, name
        tilt = _tilted_law(spec, 0.1)
        assert max(sc.stein_residual(spec, g, dg, prof, law=tilt) for _, g, dg in SMOOTH_G) >= 1e-3


class TestCriterion6SolutionNormBounds:
    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_sym_lipschitz_bound(self, al, be):
        p, spec, prof = sym_target(al, be)
        xs = np.linspace(-1.0, 1.0, 257)
        for name in LIP_FNS:
            tf = make_test_function(name, (-1.0, 1.0))
            sup = np.max(np.abs(sc.solve_stein_many(spec, prof, tf, xs)))
            assert sup <= tf.norm_d1 / (al + be + 2.0) + 1e-8, name

    @pytest.mark.parametrize("a,b", AB_GRID)
    def test_01_lipschitz_bound(self, a, b):
        _, spec, prof = target01(a, b)
        xs = np.linspace(0.0, 1.0, 257)
        for name in LIP_FNS:
            tf = make_test_function(name, (0.0, 1.0))
            sup = np.max(np.abs(sc.solve_stein_many(spec, prof, tf, xs)))
            assert sup <= 2.0 * tf.norm_d1 / (a + b) + 1e-8, name


class TestCriterion7KolmogorovSolutions:
    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_sym(self, al, be):
        _, spec, prof = sym_target(al, be)
        xs = np.linspace(-1.0, 1.0, 2049)
        for z in (-0.5, 0.0, 0.5):
            sup = max(sc.solve_kolmogorov(spec, prof, z, x) for x in xs)
            assert abs(sup - prof.F(z) * prof.sf(z) / prof.I(z)) <= 1e-6

    @pytest.mark.parametrize("a,b", AB_GRID)
    def test_01(self, a, b):
        _, spec, prof = target01(a, b)
        xs = np.linspace(0.0, 1.0, 2049)
        for z in (0.25, 0.5, 0.75):
            sup = max(sc.solve_kolmogorov(spec, prof, z, x) for x in xs)
            assert abs(sup - prof.F(z) * prof.sf(z) / prof.I(z)) <= 1e-6


class TestCriterion8ConstantCertification:
    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_edge_limits(self, al, be):
        p = bs.BetaSym(al, be)
        s = bs.S_interior(p, np.array([-1.0 + 1e-5, 1.0 - 1e-5]))
        c = al + be + 2.0
        assert abs(s[0] - c / (2 * be + 4)) <= 1e-2
        assert abs(s[1] - c / (2 * al + 4)) <= 1e-2

    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_k1_refinement_stable(self, al, be):
        p = bs.BetaSym(al, be)
        k10 = bs.estimate_K1(p, SupSearchSpec(coarse_points=2 ** 10)).K1
        k14 = bs.estimate_K1(p, SupSearchSpec(coarse_points=2 ** 14)).K1
        assert abs(k10 - k14) <= 1e-3 * abs(k14)

    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_second_derivative_probes(self, al, be):
        p, spec, prof = sym_target(al, be)
        K2 = bs.estimate_K2(p)
        step = 1e-3
        for name in ("x2", "sin3x"):
            tf = make_test_function(name, (-1.0, 1.0))
            for x in np.linspace(-0.9, 0.9, 8):
                g = [sc.solve_stein(spec, prof, tf, x + j * step) for j in (-1, 0, 1)]
                d2 = (g[0] - 2 * g[1] + g[2]) / step ** 2
                assert abs(d2) <= K2 * (tf.norm_d1 + tf.norm_d2) + 1e-6, (name, x)


class TestCriterion9GradientChecks:
    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_fd_derivative_sym(self, al, be):
        _, spec, prof = sym_target(al, be)
        tf = make_test_function("sin3x", (-2.0, 2.0))
        step = 1e-5
        for x in np.linspace(-0.9, 0.9, 16):
            fd = (sc.solve_stein(spec, prof, tf, x + step)
                  - sc.solve_stein(spec, prof, tf, x - step)) / (2 * step)
            d = sc.solution_derivative(spec, prof, tf, x)
            assert abs(fd - d) <= 1e-4 * abs(d), x

    @pytest.mark.parametrize("a,b", AB_GRID)
    def test_fd_derivative_01(self, a, b):
        _, spec, prof = target01(a, b)
        tf = make_test_function("sin3x", (-1.0, 2.0))
        step = 1e-6
        for x in np.linspace(0.05, 0.95, 16):
            fd = (sc.solve_stein(spec, prof, tf, x + step)
                  - sc.solve_stein(spec, prof, tf, x - step)) / (2 * step)
            d = sc.solution_derivative(spec, prof, tf, x)
            assert abs(fd - d) <= 1e-4 * abs(d), x

    @pytest.mark.parametrize("al,be", SYM_GRID)
    def test_tilde_density(self, al, be):
        _, spec, prof = sym_target(al, be)
        xs = np.linspace(-0.95, 0.95, 9)
        tilde = sc.tilde_density_normalized(spec, prof, xs)
        # The [-1, 1] law (al+1, be+1) is Beta(be+2, al+2) pushed forward by y = 2x - 1.
        ref = 0.5 * beta_pdf(BetaAB(be + 2.0, al + 2.0), 0.5 * (1.0 + xs))
        assert np.max(np.abs(tilde - ref)) <= 1e-6
