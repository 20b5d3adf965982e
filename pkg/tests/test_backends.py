"""The compiled and pure-Python kernels must agree."""

import numpy as np
import pytest

from steinbeta import _backend, _kernels_py

kernels_c = pytest.importorskip("steinbeta._kernels")


class TestBackendSelection:
    def test_backend_name(self):
        assert _backend.BACKEND in ("cython", "python")

    def test_pure_flag(self):
        import subprocess
        import sys
        out = subprocess.run([sys.executable, "-c", "import steinbeta; print(steinbeta.BACKEND)"],
                             env={"STEINBETA_PURE": "1", "PATH": ""}, capture_output=True, text=True)
        assert out.stdout.strip() == "python"


class TestKernelAgreement:
    def test_lgamma(self):
        for x in np.concatenate([np.linspace(0.01, 3.0, 300), np.linspace(3.0, 500.0, 300)]):
            assert kernels_c.lgamma(x) == pytest.approx(_kernels_py.lgamma(x), rel=1e-15, abs=1e-15)

    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (2.0, 3.0), (0.3, 7.0), (40.0, 2.5)])
    def test_betainc(self, a, b):
        xs = np.linspace(0.0, 1.0, 201)
        assert np.allclose(kernels_c.betainc_array(a, b, xs), _kernels_py.betainc_array(a, b, xs),
                           rtol=1e-14, atol=1e-15)
        for x in xs[1:-1:10]:
            assert kernels_c.betainc_pair(a, b, x) == pytest.approx(
                _kernels_py.betainc_pair(a, b, x), rel=1e-14, abs=1e-15)

    @pytest.mark.parametrize("al,be", [(-0.5, -0.5), (0.0, 0.0), (2.5, -0.5), (1.0, 2.5)])
    def test_sym_s_interior(self, al, be):
        xs = np.linspace(-0.9999, 0.9999, 501)
        assert np.allclose(kernels_c.sym_s_interior(al, be, xs),
                           _kernels_py.sym_s_interior(al, be, xs), rtol=1e-13, atol=0)
