import numpy as np
import pytest

from steinbeta.errors import DomainError
from steinbeta.testfns import make_test_function


def grid_sup(f, lo, hi):
    return float(np.max(np.abs(f(np.linspace(lo, hi, 200_001)))))


class TestRegistry:
    @pytest.mark.parametrize("name", ["x", "x2", "sin3x", "sinkx(7)", "sinkx(0.5)"])
    @pytest.mark.parametrize("dom", [(0.0, 1.0), (-1.0, 1.0), (-2.0, 2.0)])
    def test_norms_match_grid(self, name, dom):
        tf = make_test_function(name, dom)
        assert tf.kind == "c2"
        assert tf.norm_inf == pytest.approx(grid_sup(tf.h, *dom), rel=1e-6)
        assert tf.norm_d1 == pytest.approx(grid_sup(tf.dh, *dom), rel=1e-6)
        assert tf.norm_d2 == pytest.approx(grid_sup(tf.d2h, *dom), rel=1e-6, abs=1e-12)

    def test_indicator(self):
        tf = make_test_function("indicator(0.25)")
        assert tf.kind == "indicator" and tf.z == 0.25 and tf.breaks == (0.25,)
        assert list(tf(np.array([0.2, 0.25, 0.3]))) == [1.0, 1.0, 0.0]

    def test_saw(self):
        tf = make_test_function("lipschitz-saw", (-1.0, 1.0))
        xs = np.linspace(-1, 1, 100_001)
        assert tf.norm_inf == pytest.approx(grid_sup(tf.h, -1, 1))
        slopes = np.abs(np.diff(tf(xs)) / np.diff(xs))
        assert np.max(slopes) <= tf.norm_d1 + 1e-9
        assert tf.breaks == (-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75)

    def test_keys_differ_by_domain(self):
        assert make_test_function("x", (0, 1)).key != make_test_function("x", (-1, 1)).key

    @pytest.mark.parametrize("name", ["exp", "sinkx(-1)", "indicator()"])
    def test_unknown(self, name):
        with pytest.raises(DomainError):
            make_test_function(name)

    def test_bad_domain(self):
        with pytest.raises(DomainError):
            make_test_function("x", (1.0, 0.0))
