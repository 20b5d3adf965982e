"""Beta targets on [-1, 1] and [0, 1] and numerically estimated Stein constants.

On [-1, 1] the law with parameters (alpha, beta) has density
``C (1 - x)**alpha (1 + x)**beta``, coefficient ``gamma = -(alpha+beta+2) x + beta - alpha``
and ``eta = 1 - x**2``.  On [0, 1] the law (a, b) has ``gamma = a - (a+b) x`` and
``eta = x (1 - x)``; it is the image of the [-1, 1] law (b - 1, a - 1) under
``y -> (1 + y) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ._backend import kernels
from .errors import DomainError
from .numerics import DEFAULT_QUAD, QuadSpec, SupSearchSpec, integrate, maximize_1d
from .specfun import BetaAB, beta_cdf_pair, beta_quantile, log_beta
from .stein_core import OutsideSpec, TargetSpec, TestFunction

__all__ = [
    "BetaSym",
    "Beta01",
    "K1Estimate",
    "SteinConstants",
    "sym_density",
    "make_target_sym",
    "make_target_01",
    "to_sym",
    "to_01",
    "pull_back_test_function",
    "sup_bound_bounded",
    "sup_bound_bounded_01",
    "S_interior",
    "S_left",
    "S_right",
    "estimate_K1",
    "estimate_K2",
    "stein_constants",
    "constants_01",
    "direct_C1_interior",
    "derivative_endpoint_limits",
]


@dataclass(frozen=True)
class BetaSym:
    """Beta law on [-1, 1] with exponents alpha, beta > -1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(f"need alpha, beta > -1, got ({self.alpha!r}, {self.beta!r})")

    @property
    def c(self) -> float:
        return self.alpha + self.beta + 2.0

    @property
    def mean(self) -> float:
        return (self.beta - self.alpha) / self.c

    @property
    def log_norm(self) -> float:
        """log C(alpha, beta)."""
        return -(self.c - 1.0) * math.log(2.0) - log_beta(BetaAB(self.beta + 1.0, self.alpha + 1.0))


@dataclass(frozen=True)
class Beta01:
    """Beta law on [0, 1] with shapes a, b > 0."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"need a, b > 0, got ({self.a!r}, {self.b!r})")


def to_sym(p: Beta01) -> BetaSym:
    return BetaSym(p.b - 1.0, p.a - 1.0)


def to_01(p: BetaSym) -> Beta01:
    return Beta01(p.beta + 1.0, p.alpha + 1.0)


def sym_density(p: BetaSym, x):
    """C (1-x)^alpha (1+x)^beta on (-1, 1), zero elsewhere. Accepts arrays."""
    x = np.asarray(x, dtype=float)
    inside = (x > -1.0) & (x < 1.0)
    xi = np.where(inside, x, 0.0)
    val = np.exp(p.log_norm + p.alpha * np.log1p(-xi) + p.beta * np.log1p(xi))
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def make_target_sym(p: BetaSym, quad: QuadSpec = DEFAULT_QUAD) -> TargetSpec:
    al, be = float(p.alpha), float(p.beta)
    c = al + be + 2.0
    ab = BetaAB(be + 1.0, al + 1.0)

    def gamma(x):
        return -c * np.asarray(x, dtype=float) + (be - al)

    def psi(x):
        x = np.asarray(x, dtype=float)
        return (be - al - (al + be) * x) / (1.0 - x * x)

    def F_l(x):
        x = np.asarray(x, dtype=float)
        return (al + 1.0) * np.log(1.0 - x) + (be + 1.0) * np.log(-1.0 - x)

    def F_r(x):
        x = np.asarray(x, dtype=float)
        return (al + 1.0) * np.log(x - 1.0) + (be + 1.0) * np.log(1.0 + x)

    def q_l(x):
        x = np.asarray(x, dtype=float)
        return -np.exp(al * np.log(1.0 - x) + be * np.log(-1.0 - x))

    def q_r(x):
        x = np.asarray(x, dtype=float)
        return -np.exp(al * np.log(x - 1.0) + be * np.log(1.0 + x))

    def eta_out(x):
        x = np.asarray(x, dtype=float)
        return 1.0 - x * x

    outside = OutsideSpec(F_l=F_l, F_r=F_r, q_l=q_l, q_r=q_r, eta_out=eta_out)
    return TargetSpec(
        a=-1.0, b=1.0,
        p=lambda x: sym_density(p, x),
        gamma=gamma, psi=psi, mean=p.mean, outside=outside,
        quad=quad.with_flags(be < 0, al < 0),
        cdf=lambda x: beta_cdf_pair(ab, 0.5 * (1.0 + x))[0],
        sf=lambda x: beta_cdf_pair(ab, 0.5 * (1.0 + x))[1],
        name=f"BetaSym({al:g},{be:g})",
    )


def make_target_01(p: Beta01, quad: QuadSpec = DEFAULT_QUAD) -> TargetSpec:
    a, b = float(p.a), float(p.b)
    ab = BetaAB(a, b)
    lb = log_beta(ab)

    def dens(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        xi = np.where(inside, x, 0.5)
        out = np.where(inside, np.exp((a - 1.0) * np.log(xi) + (b - 1.0) * np.log1p(-xi) - lb), 0.0)
        return float(out) if out.ndim == 0 else out

    def gamma(x):
        return a - (a + b) * np.asarray(x, dtype=float)

    def psi(x):
        x = np.asarray(x, dtype=float)
        return (a - 1.0) / x - (b - 1.0) / (1.0 - x)

    def F_l(x):
        x = np.asarray(x, dtype=float)
        return a * np.log(-x) + b * np.log(1.0 - x)

    def F_r(x):
        x = np.asarray(x, dtype=float)
        return a * np.log(x) + b * np.log(x - 1.0)

    def q_l(x):
        x = np.asarray(x, dtype=float)
        return -np.exp((a - 1.0) * np.log(-x) + (b - 1.0) * np.log(1.0 - x))

    def q_r(x):
        x = np.asarray(x, dtype=float)
        return -np.exp((a - 1.0) * np.log(x) + (b - 1.0) * np.log(x - 1.0))

    def eta_out(x):
        x = np.asarray(x, dtype=float)
        return x * (1.0 - x)

    outside = OutsideSpec(F_l=F_l, F_r=F_r, q_l=q_l, q_r=q_r, eta_out=eta_out)
    return TargetSpec(
        a=0.0, b=1.0, p=dens, gamma=gamma, psi=psi, mean=a / (a + b), outside=outside,
        quad=quad.with_flags(a < 1, b < 1),
        cdf=lambda x: beta_cdf_pair(ab, x)[0],
        sf=lambda x: beta_cdf_pair(ab, x)[1],
        name=f"Beta01({a:g},{b:g})",
    )


def pull_back_test_function(tf: TestFunction) -> TestFunction:
    """h1(y) = h((1 + y) / 2) on [-1, 1], so that f_h(x) = 2 g_{h1}(2x - 1)."""
    h = tf.h
    dh = tf.dh
    d2h = tf.d2h
    return TestFunction(
        h=lambda y: h(0.5 * (1.0 + np.asarray(y, dtype=float))),
        kind=tf.kind,
        norm_inf=tf.norm_inf,
        norm_d1=None if tf.norm_d1 is None else 0.5 * tf.norm_d1,
        norm_d2=None if tf.norm_d2 is None else 0.25 * tf.norm_d2,
        z=None if tf.z is None else 2.0 * tf.z - 1.0,
        dh=None if dh is None else (lambda y: 0.5 * dh(0.5 * (1.0 + np.asarray(y, dtype=float)))),
        d2h=None if d2h is None else (lambda y: 0.25 * d2h(0.5 * (1.0 + np.asarray(y, dtype=float)))),
        key=None if tf.key is None else f"{tf.key}@sym",
        breaks=tuple(2.0 * t - 1.0 for t in tf.breaks),
        norm_centered=tf.norm_centered,
    )


def sup_bound_bounded(p: BetaSym, centered_norm: float) -> float:
    """||h - mu(h)|| max(1/(2(1-m^2)p(m)), 1/(2beta+2), 1/(2alpha+2)), m the median."""
    m = 2.0 * beta_quantile(BetaAB(p.beta + 1.0, p.alpha + 1.0), 0.5) - 1.0
    pm = sym_density(p, m)
    return centered_norm * max(1.0 / (2.0 * (1.0 - m * m) * pm),
                               1.0 / (2.0 * p.beta + 2.0), 1.0 / (2.0 * p.alpha + 2.0))


def sup_bound_bounded_01(p: Beta01, centered_norm: float) -> float:
    """||h - mu(h)|| max(1/(2m(1-m)q(m)), 1/a, 1/b) for the [0, 1] law."""
    ab = BetaAB(p.a, p.b)
    m = beta_quantile(ab, 0.5)
    qm = math.exp((p.a - 1.0) * math.log(m) + (p.b - 1.0) * math.log1p(-m) - log_beta(ab))
    return centered_norm * max(1.0 / (2.0 * m * (1.0 - m) * qm), 1.0 / p.a, 1.0 / p.b)


# ---------------------------------------------------------------------------
# Derivative factor profiles
# ---------------------------------------------------------------------------

def S_interior(p: BetaSym, xs):
    """S = H G / (I eta) on (-1, 1), via incomplete beta functions."""
    return kernels.sym_s_interior(float(p.alpha), float(p.beta), np.asarray(xs, dtype=float))


def _abs_q_left(p: BetaSym):
    al, be = float(p.alpha), float(p.beta)
    return lambda s: np.exp(al * np.log(1.0 - s) + be * np.log(-1.0 - s))


def _abs_q_right(p: BetaSym):
    al, be = float(p.alpha), float(p.beta)
    return lambda s: np.exp(al * np.log(s - 1.0) + be * np.log(1.0 + s))


_S_OUT_QUAD = QuadSpec(1e-13, 1e-11, 60)


def S_left(p: BetaSym, x: float) -> float:
    """S_l(x) = gamma(x) int_x^{-1} (s - x)|q_l(s)| ds / (eta(x)^2 |q_l(x)|) for x < -1."""
    x = float(x)
    if not x < -1.0:
        raise DomainError("S_left needs x < -1")
    q = _abs_q_left(p)
    num = integrate(lambda s: (s - x) * q(s), x, -1.0,
                    _S_OUT_QUAD.with_flags(False, p.beta < 0), rel_to_l1=True)
    gx = -p.c * x + p.beta - p.alpha
    e = 1.0 - x * x
    return gx * num / (e * e * float(q(np.array([x]))[0]))


def S_right(p: BetaSym, x: float) -> float:
    """S_r(x) = |gamma(x)| int_1^x (x - t)|q_r(t)| dt / (eta(x)^2 |q_r(x)|) for x > 1."""
    x = float(x)
    if not x > 1.0:
        raise DomainError("S_right needs x > 1")
    q = _abs_q_right(p)
    num = integrate(lambda t: (x - t) * q(t), 1.0, x,
                    _S_OUT_QUAD.with_flags(p.alpha < 0, False), rel_to_l1=True)
    gx = -p.c * x + p.beta - p.alpha
    e = 1.0 - x * x
    return -gx * num / (e * e * float(q(np.array([x]))[0]))


@dataclass(frozen=True)
class K1Estimate:
    K1: float
    sup_S: float
    argmax_S: float
    sup_Sl: float
    argmax_Sl: float
    sup_Sr: float
    argmax_Sr: float
    boundary_limits: Dict[str, float]
    grid_meta: SupSearchSpec


def boundary_limits(p: BetaSym) -> Dict[str, float]:
    c = p.c
    return {
        "S_at_minus1": c / (2.0 * p.beta + 4.0),
        "S_at_plus1": c / (2.0 * p.alpha + 4.0),
        "Sl_at_minus1": 1.0 / (2.0 * p.beta + 4.0),
        "Sr_at_plus1": 1.0 / (2.0 * p.alpha + 4.0),
        "Sl_at_minus_inf": 0.0,
        "Sr_at_plus_inf": 0.0,
    }


def estimate_K1(p: BetaSym, spec: SupSearchSpec = SupSearchSpec()) -> K1Estimate:
    """K1 = max((2/c) sup S, 2 sup S_l, 2 sup S_r) over the three regions.

    Outside the support the search covers the windows (-2, -1) and (1, 2);
    the far-field limits are zero.  Within ``edge_margin`` of +-1 the
    analytic limits replace evaluation.
    """
    lim = boundary_limits(p)
    xs, sS = maximize_1d(lambda t: S_interior(p, t), -1.0, 1.0, spec,
                         lo_limit=lim["S_at_minus1"], hi_limit=lim["S_at_plus1"])
    out_spec = SupSearchSpec(max(16, spec.coarse_points // 8), spec.refine_rounds, spec.edge_margin)
    xl, sl = maximize_1d(lambda t: S_left(p, t), -2.0, -1.0, out_spec, hi_limit=lim["Sl_at_minus1"])
    xr, sr = maximize_1d(lambda t: S_right(p, t), 1.0, 2.0, out_spec, lo_limit=lim["Sr_at_plus1"])
    sl = max(sl, lim["Sl_at_minus_inf"])
    sr = max(sr, lim["Sr_at_plus_inf"])
    K1 = max(2.0 / p.c * sS, 2.0 * sl, 2.0 * sr)
    return K1Estimate(K1, sS, xs, sl, xl, sr, xr, lim, spec)


def estimate_K2(p: BetaSym, spec: SupSearchSpec = SupSearchSpec(),
                k1: Optional[K1Estimate] = None) -> float:
    """K2 = K1(alpha+1, beta+1) max(1, (alpha+beta+2) K1(alpha, beta))."""
    if k1 is None:
        k1 = estimate_K1(p, spec)
    k1_up = estimate_K1(BetaSym(p.alpha + 1.0, p.beta + 1.0), spec)
    return k1_up.K1 * max(1.0, p.c * k1.K1)


@dataclass(frozen=True)
class SteinConstants:
    """Constants for the [-1, 1] law (K1, K2) and its [0, 1] image (C1, C2).

    ``lip_official`` is the sup-norm coefficient 2/(a+b) for Lipschitz h on
    [0, 1]; ``lip_sharp`` = 1/(a+b) is the value the chain rule gives.
    """

    K1: float
    K2: float
    C1: float
    C2: float
    argmax_S: float
    boundary_limits: Dict[str, float]
    grid_meta: SupSearchSpec
    lip_official: float
    lip_sharp: float
    parts: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.K1, self.K2, self.C1, self.C2):
            if not v > 0:
                raise DomainError("Stein constants must be positive")


def stein_constants(p: BetaSym, spec: SupSearchSpec = SupSearchSpec()) -> SteinConstants:
    k1 = estimate_K1(p, spec)
    K2 = estimate_K2(p, spec, k1)
    ab = p.c  # a + b of the [0, 1] image
    parts = {"sup_S": k1.sup_S, "sup_Sl": k1.sup_Sl, "sup_Sr": k1.sup_Sr,
             "argmax_Sl": k1.argmax_Sl, "argmax_Sr": k1.argmax_Sr}
    return SteinConstants(K1=k1.K1, K2=K2, C1=2.0 * k1.K1, C2=4.0 * K2, argmax_S=k1.argmax_S,
                          boundary_limits=k1.boundary_limits, grid_meta=spec,
                          lip_official=2.0 / ab, lip_sharp=1.0 / ab, parts=parts)


def constants_01(p: Beta01, spec: SupSearchSpec = SupSearchSpec()) -> SteinConstants:
    """C1 = 2 K1(b-1, a-1), C2 = 4 K2(b-1, a-1) by the chain rule f_h(x) = 2 g(2x - 1)."""
    return stein_constants(to_sym(p), spec)


def direct_C1_interior(p: Beta01, n_grid: int = 257) -> Tuple[float, float]:
    """Diagnostic: sup of the derivative factor computed directly on (0, 1).

    Returns (direct, transferred) where transferred = 2 (2/c) sup S of the
    [-1, 1] law; the two agree when the transfer is consistent.
    """
    from .stein_core import bound_pointwise_lipschitz, build_profile

    spec01 = make_target_01(p)
    prof = build_profile(spec01, validate=False)
    xs = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    direct = max(bound_pointwise_lipschitz(spec01, prof, x)[1] for x in xs)
    ps = to_sym(p)
    transferred = 2.0 * (2.0 / ps.c) * float(np.max(S_interior(ps, 2.0 * xs - 1.0)))
    return direct, transferred


def derivative_endpoint_limits(p: BetaSym, z: float) -> Tuple[float, float]:
    """Signed limits of g_z'(x) as x -> -1 and x -> +1.

    At -1: (1-F(z)) c / ((2beta+4)(2beta+2)); at +1: -F(z) c / ((2alpha+4)(2alpha+2)).
    """
    z = float(z)
    if not -1.0 < z < 1.0:
        raise DomainError("z must lie in (-1, 1)")
    Fz, Sz = beta_cdf_pair(BetaAB(p.beta + 1.0, p.alpha + 1.0), 0.5 * (1.0 + z))
    c = p.c
    left = Sz * c / ((2.0 * p.beta + 4.0) * (2.0 * p.beta + 2.0))
    right = -Fz * c / ((2.0 * p.alpha + 4.0) * (2.0 * p.alpha + 2.0))
    return left, right
