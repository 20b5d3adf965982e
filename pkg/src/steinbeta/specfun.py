"""Log-gamma, Beta function, regularized incomplete beta and Beta quantiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError
from .numerics import QuadSpec, find_root, integrate

__all__ = [
    "BetaAB",
    "log_gamma",
    "log_beta",
    "beta_fn",
    "beta_pdf",
    "beta_cdf",
    "beta_sf",
    "beta_cdf_pair",
    "beta_quantile",
]


@dataclass(frozen=True)
class BetaAB:
    """Shape pair (a, b) of a Beta law on [0, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta shapes must be positive, got ({self.a!r}, {self.b!r})")


def _ab(p) -> BetaAB:
    return p if isinstance(p, BetaAB) else BetaAB(*p)


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    return kernels.lgamma(x)


def log_beta(p) -> float:
    p = _ab(p)
    return kernels.lbeta(float(p.a), float(p.b))


def beta_fn(p) -> float:
    """B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    return math.exp(log_beta(p))


def beta_pdf(p, x):
    """Density x^(a-1) (1-x)^(b-1) / B(a, b); zero outside (0, 1). Accepts arrays."""
    p = _ab(p)
    x = np.asarray(x, dtype=float)
    lb = log_beta(p)
    inside = (x > 0) & (x < 1)
    xi = np.where(inside, x, 0.5)
    val = np.exp((p.a - 1.0) * np.log(xi) + (p.b - 1.0) * np.log1p(-xi) - lb)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _quad_fallback(p: BetaAB, x: float):
    # Integrate the density from the nearer endpoint.
    spec = QuadSpec(1e-14, 1e-12, 60, singular_lo=p.a < 1, singular_hi=p.b < 1)
    f = lambda t: beta_pdf(p, t)
    if x <= 0.5:
        v = integrate(f, 0.0, x, spec.with_flags(p.a < 1, False))
        return v, 1.0 - v
    c = integrate(f, x, 1.0, spec.with_flags(False, p.b < 1))
    return 1.0 - c, c


def beta_cdf_pair(p, x: float):
    """(I_x(a, b), 1 - I_x(a, b)) with each side free of cancellation."""
    p = _ab(p)
    x = float(x)
    if x <= 0.0:
        return 0.0, 1.0
    if x >= 1.0:
        return 1.0, 0.0
    v, c = kernels.betainc_pair(float(p.a), float(p.b), x)
    if not (math.isfinite(v) and math.isfinite(c)):
        v, c = _quad_fallback(p, x)
    return min(max(v, 0.0), 1.0), min(max(c, 0.0), 1.0)


def beta_cdf(p, x):
    """Regularized incomplete beta I_x(a, b), clamped to 0/1 outside [0, 1]."""
    p = _ab(p)
    if np.ndim(x) == 0:
        return beta_cdf_pair(p, x)[0]
    xs = np.asarray(x, dtype=float)
    out = np.asarray(kernels.betainc_array(float(p.a), float(p.b), np.clip(xs, 0.0, 1.0)))
    bad = ~np.isfinite(out)
    if bad.any():
        for idx in zip(*np.nonzero(bad)):
            out[idx] = beta_cdf_pair(p, xs[idx])[0]
    return np.clip(out, 0.0, 1.0)


def beta_sf(p, x: float) -> float:
    """Survival function 1 - I_x(a, b)."""
    return beta_cdf_pair(p, x)[1]


def beta_quantile(p, q: float) -> float:
    """Inverse of :func:`beta_cdf` by bisection on [0, 1]."""
    p = _ab(p)
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {q!r}")
    if q <= 0.5:
        g = lambda x: beta_cdf_pair(p, x)[0] - q
    else:
        g = lambda x: (1.0 - q) - beta_cdf_pair(p, x)[1]
    return find_root(g, 0.0, 1.0, tol=0.0)
