# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same algorithms and signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, fabs, NAN

cnp.import_array()

__all__ = ["lgamma", "lbeta", "betainc_pair", "betainc_array", "sym_s_interior"]

cdef double _LANCZOS_G = 7.0
cdef double[9] _LANCZOS = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]
cdef double _EULER = 0.57721566490153286061
cdef double _HALF_LOG_2PI = 0.91893853320467274178
cdef double _FPMIN = 1e-300
cdef double _EPS = 1e-16
cdef int _MAXIT = 300
cdef int _NSERIES = 46
cdef double[46] _SERIES2


cdef double _zeta_minus_one(double k):
    cdef double n0 = 40.0
    cdef double s = 0.0
    cdef int n
    for n in range(2, 40):
        s += (<double>n) ** (-k)
    s += n0 ** (1.0 - k) / (k - 1.0) + 0.5 * n0 ** (-k)
    s += k * n0 ** (-k - 1.0) / 12.0
    s -= k * (k + 1.0) * (k + 2.0) * n0 ** (-k - 3.0) / 720.0
    s += k * (k + 1.0) * (k + 2.0) * (k + 3.0) * (k + 4.0) * n0 ** (-k - 5.0) / 30240.0
    return s


cdef void _init_series():
    cdef int k
    cdef double sign
    for k in range(2, 48):
        sign = 1.0 if k % 2 == 0 else -1.0
        _SERIES2[k - 2] = sign * _zeta_minus_one(<double>k) / k


_init_series()


cdef inline double _lgamma_near2(double z) nogil:
    cdef double acc = 0.0
    cdef int i
    for i in range(_NSERIES - 1, -1, -1):
        acc = acc * z + _SERIES2[i]
    return z * ((1.0 - _EULER) + acc * z)


cdef inline double _lgamma_lanczos(double x) nogil:
    cdef double xm = x - 1.0
    cdef double s = _LANCZOS[0]
    cdef int i
    for i in range(1, 9):
        s += _LANCZOS[i] / (xm + i)
    cdef double t = xm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (xm + 0.5) * log(t) - t + log(s)


cdef double c_lgamma(double x) nogil:
    cdef double shift = 0.0
    cdef double z
    if not x > 0.0:
        return NAN
    if x == 1.0 or x == 2.0:
        return 0.0
    while x < 0.5:
        shift -= log(x)
        x += 1.0
    if x < 1.5:
        z = x - 1.0
        return _lgamma_near2(z) - log1p(z) + shift
    if x <= 2.5:
        return _lgamma_near2(x - 2.0) + shift
    return _lgamma_lanczos(x) + shift


cdef inline double c_lbeta(double a, double b) nogil:
    return c_lgamma(a) + c_lgamma(b) - c_lgamma(a + b)


cdef double _betacf(double a, double b, double x) nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, m2, dl
    cdef int m
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        dl = d * c
        h *= dl
        if fabs(dl - 1.0) < _EPS:
            return h
    return NAN


cdef void c_betainc_pair(double a, double b, double x, double* val, double* comp) nogil:
    cdef double log_front, cf
    if x <= 0.0:
        val[0] = 0.0
        comp[0] = 1.0
        return
    if x >= 1.0:
        val[0] = 1.0
        comp[0] = 0.0
        return
    log_front = a * log(x) + b * log1p(-x) - c_lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        cf = _betacf(a, b, x)
        val[0] = exp(log_front) * cf / a
        comp[0] = 1.0 - val[0]
    else:
        cf = _betacf(b, a, 1.0 - x)
        comp[0] = exp(log_front) * cf / b
        val[0] = 1.0 - comp[0]


def lgamma(double x):
    """ln Gamma(x) for x > 0; NaN otherwise."""
    return c_lgamma(x)


def lbeta(double a, double b):
    return c_lbeta(a, b)


def betainc_pair(double a, double b, double x):
    """Return (I_x(a, b), 1 - I_x(a, b)); NaN on continued-fraction failure."""
    cdef double v, c
    if x != x:
        return NAN, NAN
    c_betainc_pair(a, b, x, &v, &c)
    return v, c


def betainc_array(double a, double b, xs):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(xs, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double v, c
    cdef Py_ssize_t i
    for i in range(n):
        c_betainc_pair(a, b, flat[i], &v, &c)
        out[i] = v
    return out.reshape(np.shape(xs))


cdef double _sym_s_one(double alpha, double beta, double x, double lb) nogil:
    cdef double big_a = beta + 1.0
    cdef double big_b = alpha + 1.0
    cdef double u = 0.5 * (1.0 + x)
    cdef double v = 0.5 * (1.0 - x)
    cdef double i_ab, i_a1b, j_ba, j_b1a, dummy, tot, left, right, log_den
    if u <= 0.0 or v <= 0.0:
        return NAN
    c_betainc_pair(big_a, big_b, u, &i_ab, &dummy)
    c_betainc_pair(big_a + 1.0, big_b, u, &i_a1b, &dummy)
    c_betainc_pair(big_b, big_a, v, &j_ba, &dummy)
    c_betainc_pair(big_b + 1.0, big_a, v, &j_b1a, &dummy)
    tot = big_a + big_b
    left = 2.0 * (u * i_ab - (big_a / tot) * i_a1b)
    right = 2.0 * (v * j_ba - (big_b / tot) * j_b1a)
    log_den = log(8.0) + (big_a + 1.0) * log(u) + (big_b + 1.0) * log(v) - lb
    return tot * tot * left * right * exp(-log_den)


def sym_s_interior(double alpha, double beta, xs):
    """Interior profile S = c^2 A B / (eta^2 p) of the symmetric-interval Beta law."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(xs, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double lb = c_lbeta(beta + 1.0, alpha + 1.0)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _sym_s_one(alpha, beta, flat[i], lb)
    return out.reshape(np.shape(xs))
