"""Exact Polya urn computations and the O(1/n) Beta approximation rate.

An urn starts with r red and w white balls; each draw is returned together
with c balls of the same colour.  S_n counts red draws in n steps and
V = S_n / n.  With a = r/c and b = w/c, V converges to the Beta(a, b) law.

All distribution-level quantities are exact: probabilities are kept as
integer numerators over a common integer denominator and combined with
:class:`fractions.Fraction`.  Floats appear only at the reporting boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ExactIdentityError
from .numerics import QuadSpec, integrate
from .specfun import BetaAB, beta_cdf, beta_cdf_pair, beta_quantile, log_beta, log_gamma
from .stein_core import PluginStats, TestFunction

__all__ = [
    "UrnConfig",
    "PolyaPmf",
    "PairMomentTable",
    "RateRow",
    "pmf",
    "log_pmf_lgamma",
    "generalized_binomial_pmf",
    "mixture_check",
    "gibbs_pair_sample",
    "gibbs_pair_batch",
    "pair_moments",
    "eta_discrepancy_exact",
    "third_abs_exact",
    "third_term_exact",
    "plugin_stats",
    "rate_bound",
    "rate_table",
    "fit_slope",
    "distance_diagnostics",
]

_UNDERFLOW_LOG = -700.0


@dataclass(frozen=True)
class UrnConfig:
    """Urn integers (r, w, c) and number of draws n."""

    r: int
    w: int
    c: int
    n: int

    def __post_init__(self):
        for name in ("r", "w", "c", "n"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and not isinstance(v, bool)) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")

    @property
    def a(self) -> Fraction:
        return Fraction(self.r, self.c)

    @property
    def b(self) -> Fraction:
        return Fraction(self.w, self.c)

    def with_n(self, n: int) -> "UrnConfig":
        return UrnConfig(self.r, self.w, self.c, int(n))


def _rising(start: int, step: int, count: int) -> List[int]:
    """Prefix products prod_{i<k} (start + step i) for k = 0..count."""
    out = [1] * (count + 1)
    acc = 1
    for k in range(count):
        acc *= start + step * k
        out[k + 1] = acc
    return out


@dataclass(frozen=True)
class PolyaPmf:
    """Exact pmf of S_n: probs[k] = numerators[k] / denominator."""

    n: int
    # Big integers are kept out of the repr; they can exceed str() digit limits.
    numerators: Tuple[int, ...] = field(repr=False)
    denominator: int = field(repr=False)
    log_probs: Tuple[float, ...] = field(repr=False)
    underflow: bool = False

    @property
    def probs(self) -> List[Fraction]:
        return [Fraction(m, self.denominator) for m in self.numerators]

    def prob(self, k: int) -> Fraction:
        return Fraction(self.numerators[k], self.denominator)

    def as_float(self) -> np.ndarray:
        return np.exp(np.array(self.log_probs))

    def expect_poly(self, coeffs: Sequence) -> Fraction:
        """Exact E[P(S_n / n)] for a polynomial with rational coefficients."""
        n = self.n
        deg = len(coeffs) - 1
        num = 0
        for k, m in enumerate(self.numerators):
            # sum_j c_j k^j n^(deg - j), kept over the common factor n^deg
            val = Fraction(0)
            for j, cj in enumerate(coeffs):
                val += Fraction(cj) * k ** j * n ** (deg - j)
            num += m * val
        return Fraction(num) / (self.denominator * n ** deg)

    def cdf_float(self) -> np.ndarray:
        acc = 0
        out = np.empty(self.n + 1)
        for k, m in enumerate(self.numerators):
            acc += m
            out[k] = float(Fraction(acc, self.denominator))
        return out


def _binom_neg(x: Fraction, k: int) -> Fraction:
    """Generalized binomial coefficient binom(-x, k)."""
    out = Fraction(1)
    for i in range(k):
        out *= (-x - i) / (i + 1)
    return out


def generalized_binomial_pmf(u: UrnConfig) -> List[Fraction]:
    """binom(-a, k) binom(-b, n-k) / binom(-a-b, n), k = 0..n."""
    a, b, n = u.a, u.b, u.n
    den = _binom_neg(a + b, n)
    return [_binom_neg(a, k) * _binom_neg(b, n - k) / den for k in range(n + 1)]


def pmf(u: UrnConfig, check_generalized: Optional[bool] = None) -> PolyaPmf:
    """Exact law of S_n from the product formula.

    P(S_n = k) = C(n,k) prod_{i<k}(r+ci) prod_{j<n-k}(w+cj) / prod_{l<n}(r+w+cl).
    For n <= 64 the generalized-binomial form is also evaluated and must agree exactly.
    """
    r, w, c, n = u.r, u.w, u.c, u.n
    red = _rising(r, c, n)
    white = _rising(w, c, n)
    denom = _rising(r + w, c, n)[n]
    nums = []
    binom = 1
    for k in range(n + 1):
        nums.append(binom * red[k] * white[n - k])
        binom = binom * (n - k) // (k + 1)
    if sum(nums) != denom:
        raise ExactIdentityError("pmf numerators do not sum to the denominator")
    if check_generalized is None:
        check_generalized = n <= 64
    if check_generalized:
        alt = generalized_binomial_pmf(u)
        for k in range(n + 1):
            if Fraction(nums[k], denom) != alt[k]:
                raise ExactIdentityError(f"product and generalized-binomial pmf differ at k={k}")
    log_den = math.log(denom)
    logs = tuple(math.log(m) - log_den for m in nums)
    underflow = any(v < _UNDERFLOW_LOG for v in logs)
    return PolyaPmf(n, tuple(nums), denom, logs, underflow)


def log_pmf_lgamma(u: UrnConfig) -> np.ndarray:
    """Floating-point log pmf from log-gamma; a cross-check of the exact path."""
    a, b, n = float(u.a), float(u.b), u.n
    k = np.arange(n + 1)
    lg = np.vectorize(log_gamma)
    return (lg(n + 1.0) - lg(k + 1.0) - lg(n - k + 1.0)
            + lg(k + a) - log_gamma(a) + lg(n - k + b) - log_gamma(b)
            - log_gamma(n + a + b) + log_gamma(a + b))


def mixture_check(u: UrnConfig, tol: Optional[float] = None) -> float:
    """max_k |P(S_n = k) - int_0^1 b(k; n, t) dBeta(a, b)(t)| by quadrature."""
    n = u.n
    if n > 200:
        raise DomainError("mixture_check is limited to n <= 200")
    a, b = float(u.a), float(u.b)
    lb = log_beta(BetaAB(a, b))
    exact = pmf(u)
    spec = QuadSpec(1e-13, 1e-11, 60, singular_lo=a < 1, singular_hi=b < 1)
    worst = 0.0
    for k in range(n + 1):
        lc = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) - lb

        def f(t, k=k, lc=lc):
            return np.exp(lc + (k + a - 1.0) * np.log(t) + (n - k + b - 1.0) * np.log1p(-t))

        val = integrate(f, 0.0, 1.0, spec)
        worst = max(worst, abs(float(exact.prob(k)) - val))
    if tol is not None and worst > tol:
        raise ExactIdentityError(f"mixture deviation {worst:.3e} exceeds {tol:.3e}")
    return worst


# ---------------------------------------------------------------------------
# Exchangeable pair
# ---------------------------------------------------------------------------

def gibbs_pair_sample(u: UrnConfig, rng: np.random.Generator) -> Tuple[Fraction, Fraction]:
    """One draw of (V, V') where X_n is resampled given X_1..X_{n-1}."""
    r, w, c, n = u.r, u.w, u.c, u.n
    red, total = r, r + w
    s = 0
    x_last = 0
    for j in range(n):
        x = 1 if rng.random() * total < red else 0
        if j < n - 1:
            s += x
        else:
            x_last = x
        red += c * x
        total += c
    p_red = Fraction(r + c * s, r + w + c * (n - 1))
    x_new = 1 if rng.random() < float(p_red) else 0
    return Fraction(s + x_last, n), Fraction(s + x_new, n)


def gibbs_pair_batch(u: UrnConfig, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized sampler returning integer arrays (S_n, S_n') of length ``size``."""
    r, w, c, n = u.r, u.w, u.c, u.n
    s = np.zeros(size, dtype=np.int64)
    for j in range(n - 1):
        p = (r + c * s) / (r + w + c * j)
        s += rng.random(size) < p
    p_last = (r + c * s) / (r + w + c * (n - 1))
    x = (rng.random(size) < p_last).astype(np.int64)
    x_new = (rng.random(size) < p_last).astype(np.int64)
    return s + x, s + x_new


@dataclass(frozen=True)
class PairMomentTable:
    """Exact conditional moments of V' - V given S_n = k."""

    n: int
    lam: Fraction
    m1: Tuple[Fraction, ...]
    m2: Tuple[Fraction, ...]
    pneq: Tuple[Fraction, ...]


def _lam(u: UrnConfig) -> Fraction:
    return 1 / (u.n * (u.a + u.b + u.n - 1))


def pair_moments(u: UrnConfig) -> PairMomentTable:
    """Closed-form conditional moments, checked exactly against first principles.

    m1[k] = lam (a - (a+b) k/n) and
    m2[k] = ((2n+b-a) V - 2n V^2 + a) / (n^2 (a+b+n-1)) with V = k/n.
    Independently, X_n = 1 with probability k/n given S_n = k, and the
    resampled coordinate is red with probability (a + s)/(a+b+n-1) given
    S_{n-1} = s.
    """
    a, b, n = u.a, u.b, u.n
    lam = _lam(u)
    den = a + b + n - 1
    m1, m2, pneq = [], [], []
    for k in range(n + 1):
        V = Fraction(k, n)
        c1 = lam * (a - (a + b) * V)
        c2 = ((2 * n + b - a) * V - 2 * n * V * V + a) / (n * n * den)
        w1 = Fraction(k, n)  # P(X_n = 1 | S_n = k)
        p_prev = (a + k - 1) / den  # red probability when X_n = 1 was removed
        p_same = (a + k) / den  # red probability when X_n = 0 was removed
        ex_new = w1 * p_prev + (1 - w1) * p_same
        f1 = (ex_new - w1) / n
        neq = w1 * (1 - p_prev) + (1 - w1) * p_same
        f2 = neq / (n * n)
        if c1 != f1:
            raise ExactIdentityError(f"regression closed form fails at k={k}")
        if c2 != f2:
            raise ExactIdentityError(f"second-moment closed form fails at k={k}")
        m1.append(c1)
        m2.append(c2)
        pneq.append(neq)
    return PairMomentTable(n, lam, tuple(m1), tuple(m2), tuple(pneq))


def eta_discrepancy_exact(u: UrnConfig, law: Optional[PolyaPmf] = None,
                          table: Optional[PairMomentTable] = None) -> Fraction:
    """E|eta(V) - E[(V'-V)^2 | V] / (2 lam)| with eta(v) = v(1 - v), exactly.

    The summand equals |(a-b)V/(2n) - a/(2n)| and the total is at most (|a-b|+a)/(2n).
    """
    law = law or pmf(u)
    table = table or pair_moments(u)
    a, b, n = u.a, u.b, u.n
    total = Fraction(0)
    for k in range(n + 1):
        V = Fraction(k, n)
        d = V * (1 - V) - table.m2[k] / (2 * table.lam)
        if d != ((a - b) * V - a) / (2 * n):
            raise ExactIdentityError(f"eta discrepancy closed form fails at k={k}")
        total += law.numerators[k] * abs(d)
    total /= law.denominator
    if total > (abs(a - b) + a) / (2 * n):
        raise ExactIdentityError("eta discrepancy exceeds its bound")
    return total


def third_abs_exact(u: UrnConfig) -> Fraction:
    """E|V' - V|^3 = n^-3 sum_s P(S_{n-1} = s) 2 p_s (1 - p_s), p_s = (r + cs)/(r + w + c(n-1))."""
    n = u.n
    tot = u.r + u.w + u.c * (n - 1)
    if n == 1:
        prev_nums, prev_den = (1,), 1
    else:
        prev = pmf(u.with_n(n - 1), check_generalized=False)
        prev_nums, prev_den = prev.numerators, prev.denominator
    acc = 0
    for s, m in enumerate(prev_nums):
        red = u.r + u.c * s
        acc += m * 2 * red * (tot - red)
    return Fraction(acc, prev_den * tot * tot * n ** 3)


def third_term_exact(u: UrnConfig) -> Fraction:
    """(1 / (6 lam)) E|V' - V|^3, asserted to be at most 1/(6n) + (a+b-1)/(6n^2)."""
    n = u.n
    val = third_abs_exact(u) / (6 * _lam(u))
    bound = Fraction(1, 6 * n) + (u.a + u.b - 1) / (6 * n * n)
    if val > bound:
        raise ExactIdentityError("third-moment term exceeds its bound")
    return val


def plugin_stats(u: UrnConfig, worst_case: bool = False) -> PluginStats:
    """Plug-in inputs for the urn pair; the regression has no remainder.

    With ``worst_case`` the moment terms are replaced by the bounds
    (|a-b|+a)/(2n) and 1/n^3 used in the closed-form rate.
    """
    n = u.n
    lam = _lam(u)
    if worst_case:
        eta_d = (abs(u.a - u.b) + u.a) / (2 * n)
        third = Fraction(1, n ** 3)
    else:
        eta_d = eta_discrepancy_exact(u)
        third = third_abs_exact(u)
    return PluginStats(lam=float(lam), eta_discrepancy=float(eta_d), third_abs=float(third),
                       remainder_abs=0.0)


def rate_bound(a: float, b: float, n: int, C1: float, C2: float, d1: float, d2: float) -> float:
    """(C1 ||h'|| (|a-b|+a)/2 + C2 (||h'|| + ||h''||)(1/6 + (a+b-1)/(6n))) / n."""
    return (C1 * d1 * (abs(a - b) + a) / 2.0
            + C2 * (d1 + d2) * (1.0 / 6.0 + (a + b - 1.0) / (6.0 * n))) / n


@dataclass(frozen=True)
class RateRow:
    n: int
    exact_error: float
    bound: float
    lam: float
    eta_discrepancy: float
    third_term: float
    slope_running: float
    exact_error_rational: Optional[Fraction] = None


def _beta_poly_moment(coeffs: Sequence, a: Fraction, b: Fraction) -> Fraction:
    """Exact E[P(X)] for X ~ Beta(a, b) with rational a, b."""
    total = Fraction(0)
    mom = Fraction(1)
    for j, cj in enumerate(coeffs):
        if j > 0:
            mom *= (a + j - 1) / (a + b + j - 1)
        total += Fraction(cj) * mom
    return total


def _beta_mean_quad(tf: TestFunction, a: float, b: float) -> float:
    lb = log_beta(BetaAB(a, b))
    f = lambda t: tf(t) * np.exp((a - 1.0) * np.log(t) + (b - 1.0) * np.log1p(-t) - lb)
    spec = QuadSpec(1e-14, 1e-13, 60, singular_lo=a < 1, singular_hi=b < 1)
    pts = [0.0] + sorted(x for x in tf.breaks if 0 < x < 1) + [1.0]
    return sum(integrate(f, u, v, spec.with_flags(spec.singular_lo and u == 0.0,
                                                  spec.singular_hi and v == 1.0))
               for u, v in zip(pts[:-1], pts[1:]))


def fit_slope(ns: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of log(err) against log(n) over positive errors."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = errs > 0
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(np.polyfit(np.log(ns[keep]), np.log(errs[keep]), 1)[0])


def rate_table(base: UrnConfig, ns: Sequence[int], tf: TestFunction, C1: float, C2: float
               ) -> Tuple[List[RateRow], float]:
    """Exact errors |E h(V) - Beta(a, b)(h)| and the closed-form O(1/n) bound per n.

    Polynomial h (``tf.poly``) is handled in exact rational arithmetic on both
    sides; other h use quadrature for the Beta mean.  Returns the rows and the
    fitted log-log slope.
    """
    if tf.norm_d1 is None or tf.norm_d2 is None:
        raise DomainError("rate_table needs ||h'|| and ||h''||")
    a, b = base.a, base.b
    target_exact = _beta_poly_moment(tf.poly, a, b) if tf.poly is not None else None
    target_float = None if tf.poly is not None else _beta_mean_quad(tf, float(a), float(b))
    rows: List[RateRow] = []
    prev = None
    for n in sorted(int(v) for v in ns):
        u = base.with_n(n)
        law = pmf(u)
        if target_exact is not None:
            err_q = abs(law.expect_poly(tf.poly) - target_exact)
            err = float(err_q)
        else:
            err_q = None
            vals = tf(np.arange(n + 1) / n)
            err = abs(float(np.dot(law.as_float(), vals)) - target_float)
        lam = _lam(u)
        eta_d = eta_discrepancy_exact(u, law)
        third = third_term_exact(u)
        bnd = rate_bound(float(a), float(b), n, C1, C2, float(tf.norm_d1), float(tf.norm_d2))
        if prev is not None and prev[1] > 0 and err > 0:
            running = math.log(err / prev[1]) / math.log(n / prev[0])
        else:
            running = float("nan")
        rows.append(RateRow(n, err, bnd, float(lam), float(eta_d), float(third), running, err_q))
        prev = (n, err)
    slope = fit_slope([r.n for r in rows], [r.exact_error for r in rows])
    return rows, slope


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def _int_cdf(ab: BetaAB, t: float) -> float:
    """int_0^t I_s(a, b) ds = t I_t(a, b) - a/(a+b) I_t(a+1, b)."""
    if t <= 0.0:
        return 0.0
    t = min(t, 1.0)
    return t * beta_cdf(ab, t) - ab.a / (ab.a + ab.b) * beta_cdf(BetaAB(ab.a + 1.0, ab.b), t)


def distance_diagnostics(u: UrnConfig) -> dict:
    """Kolmogorov and Wasserstein-1 distances between V and Beta(a, b).

    The Kolmogorov sup includes left limits of the step CDF at each atom.
    The Wasserstein integral is exact per step, splitting at the crossing
    point of the step level with the Beta CDF.
    """
    n = u.n
    ab = BetaAB(float(u.a), float(u.b))
    Fn = pmf(u).cdf_float()
    kol = 0.0
    for k in range(n + 1):
        t = k / n
        F = beta_cdf(ab, t)
        left = Fn[k - 1] if k > 0 else 0.0
        kol = max(kol, abs(Fn[k] - F), abs(left - F))
    wass = 0.0
    for k in range(n):
        lo, hi = k / n, (k + 1) / n
        level = Fn[k]
        Flo, Fhi = beta_cdf(ab, lo), beta_cdf(ab, hi)
        J = lambda t: _int_cdf(ab, t)
        if level <= Flo:
            wass += (J(hi) - J(lo)) - level * (hi - lo)
        elif level >= Fhi:
            wass += level * (hi - lo) - (J(hi) - J(lo))
        else:
            ts = min(max(beta_quantile(ab, level), lo), hi)
            wass += level * (ts - lo) - (J(ts) - J(lo))
            wass += (J(hi) - J(ts)) - level * (hi - ts)
    return {"kolmogorov": float(kol), "wasserstein": float(wass)}
