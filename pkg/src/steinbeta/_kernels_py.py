"""Pure-Python reference implementation of the hot scalar kernels.

The compiled module ``_kernels`` exposes the same functions with the same
algorithms; this file is the fallback when it is not built.
"""

import math

import numpy as np

__all__ = ["lgamma", "lbeta", "betainc_pair", "betainc_array", "sym_s_interior"]

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_EULER = 0.57721566490153286061
_HALF_LOG_2PI = 0.91893853320467274178


def _zeta_minus_one(k):
    # Euler-Maclaurin tail after summing n = 2..39 explicitly.
    n0 = 40.0
    s = 0.0
    for n in range(2, 40):
        s += n ** (-k)
    s += n0 ** (1.0 - k) / (k - 1.0) + 0.5 * n0 ** (-k)
    s += k * n0 ** (-k - 1.0) / 12.0
    s -= k * (k + 1.0) * (k + 2.0) * n0 ** (-k - 3.0) / 720.0
    s += k * (k + 1.0) * (k + 2.0) * (k + 3.0) * (k + 4.0) * n0 ** (-k - 5.0) / 30240.0
    return s


# Taylor coefficients of lgamma(2 + z) = (1 - euler) z + sum_k (-1)^k (zeta(k) - 1) z^k / k.
_SERIES2 = tuple(((-1.0) ** k) * _zeta_minus_one(float(k)) / k for k in range(2, 48))


def _lgamma_near2(z):
    acc = 0.0
    for c in reversed(_SERIES2):
        acc = acc * z + c
    return z * ((1.0 - _EULER) + acc * z)


def _lgamma_lanczos(x):
    xm = x - 1.0
    s = _LANCZOS[0]
    for i in range(1, 9):
        s += _LANCZOS[i] / (xm + i)
    t = xm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (xm + 0.5) * math.log(t) - t + math.log(s)


def lgamma(x):
    """ln Gamma(x) for x > 0; NaN otherwise."""
    x = float(x)
    if not x > 0.0 or x != x:
        return float("nan")
    if x == 1.0 or x == 2.0:
        return 0.0
    shift = 0.0
    while x < 0.5:
        shift -= math.log(x)
        x += 1.0
    if x < 1.5:
        # lgamma(x) = lgamma(2 + z) - log1p(z) with z = x - 1 exact.
        z = x - 1.0
        return _lgamma_near2(z) - math.log1p(z) + shift
    if x <= 2.5:
        return _lgamma_near2(x - 2.0) + shift
    return _lgamma_lanczos(x) + shift


def lbeta(a, b):
    return lgamma(a) + lgamma(b) - lgamma(a + b)


_FPMIN = 1e-300
_EPS = 1e-16
_MAXIT = 300


def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        dl = d * c
        h *= dl
        if abs(dl - 1.0) < _EPS:
            return h
    return float("nan")


def betainc_pair(a, b, x):
    """Return (I_x(a, b), 1 - I_x(a, b)); each side computed without cancellation.

    NaN is returned for both when the continued fraction fails to converge.
    """
    a = float(a)
    b = float(b)
    x = float(x)
    if x <= 0.0:
        return 0.0, 1.0
    if x >= 1.0:
        return 1.0, 0.0
    log_front = a * math.log(x) + b * math.log1p(-x) - lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        cf = _betacf(a, b, x)
        val = math.exp(log_front) * cf / a
        return val, 1.0 - val
    cf = _betacf(b, a, 1.0 - x)
    comp = math.exp(log_front) * cf / b
    return 1.0 - comp, comp


def betainc_array(a, b, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape)
    flat = out.reshape(-1)
    for i, x in enumerate(xs.reshape(-1)):
        flat[i] = betainc_pair(a, b, x)[0]
    return out


def _sym_s_one(alpha, beta, x, lb):
    big_a = beta + 1.0
    big_b = alpha + 1.0
    u = 0.5 * (1.0 + x)
    v = 0.5 * (1.0 - x)
    if u <= 0.0 or v <= 0.0:
        return float("nan")
    i_ab, _ = betainc_pair(big_a, big_b, u)
    i_a1b, _ = betainc_pair(big_a + 1.0, big_b, u)
    j_ba, _ = betainc_pair(big_b, big_a, v)
    j_b1a, _ = betainc_pair(big_b + 1.0, big_a, v)
    tot = big_a + big_b
    left = 2.0 * (u * i_ab - (big_a / tot) * i_a1b)
    right = 2.0 * (v * j_ba - (big_b / tot) * j_b1a)
    # eta^2 p = 8 u^(A+1) v^(B+1) / B(A, B)
    log_den = math.log(8.0) + (big_a + 1.0) * math.log(u) + (big_b + 1.0) * math.log(v) - lb
    return tot * tot * left * right * math.exp(-log_den)


def sym_s_interior(alpha, beta, xs):
    """Interior profile S = c^2 A B / (eta^2 p) of the symmetric-interval Beta law.

    Here A = int_{-1}^x F, B = int_x^1 (1 - F) and c = alpha + beta + 2.
    Evaluated through regularized incomplete beta functions.
    """
    alpha = float(alpha)
    beta = float(beta)
    lb = lbeta(beta + 1.0, alpha + 1.0)
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape)
    flat = out.reshape(-1)
    for i, x in enumerate(xs.reshape(-1)):
        flat[i] = _sym_s_one(alpha, beta, float(x), lb)
    return out
