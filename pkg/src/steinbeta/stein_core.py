"""Distribution-agnostic Stein machinery for densities on an interval.

A target is a density ``p`` on (a, b) with a strictly decreasing coefficient
``gamma`` that integrates to zero against ``p``.  From it we build
``I(x) = int_a^x gamma p`` and ``eta = I / p``, the Stein equation

    eta(x) g'(x) + gamma(x) g(x) = h(x) - mu(h),

its solutions inside and outside the support, and the associated bounds.

Numerical conventions
---------------------
* ``I`` is accumulated from the left up to the zero ``x0`` of ``gamma`` and
  from the right beyond it, so it never suffers cancellation near ``b``.
* Solutions use the left integral for ``x <= x0`` and the right one after.
* Within ``delta_edge = 1e-4 (b - a)`` of an endpoint the solution is blended
  linearly towards its endpoint limit ``(h(a) - mu(h)) / gamma(a)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, InvalidTarget, MissingNorm
from .numerics import DEFAULT_QUAD, QuadSpec, find_root, integrate, integrate_many

__all__ = [
    "OutsideSpec",
    "TargetSpec",
    "TestFunction",
    "Profile",
    "PluginStats",
    "validate_target",
    "check_outside",
    "build_profile",
    "eta",
    "check_eta_ode",
    "solve_stein",
    "solve_stein_many",
    "solve_kolmogorov",
    "kolmogorov_derivative",
    "solution_derivative",
    "bound_sup_bounded",
    "lipschitz_HG",
    "bound_pointwise_lipschitz",
    "density_from_eta_gamma",
    "tilde_density",
    "tilde_density_normalized",
    "stein_residual",
    "particular_solution",
    "plugin_bound",
]

Evaluator = Callable[[np.ndarray], np.ndarray]

EDGE_FRACTION = 1e-4
OUTSIDE_WINDOW = 1.0


def _vec(f: Callable) -> Evaluator:
    """Evaluate ``f`` on arrays, looping if it only accepts scalars."""

    def ev(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
            if y.ndim == 0:
                return np.full(x.shape, float(y))
        except Exception:
            pass
        return np.vectorize(lambda t: float(f(float(t))), otypes=[float])(x)

    return ev


def _scalar(f: Callable, x: float) -> float:
    return float(np.asarray(_vec(f)(np.array([float(x)])))[0])


@dataclass(frozen=True)
class OutsideSpec:
    """Extensions of the Stein data to the left and right of the support.

    ``F_l``, ``F_r`` are primitives of ``gamma / eta_out``; ``q_l = exp(F_l) / eta_out``
    and likewise ``q_r``.  Since ``eta_out < 0`` these are negative.
    """

    F_l: Callable
    F_r: Callable
    q_l: Callable
    q_r: Callable
    eta_out: Callable
    window: float = OUTSIDE_WINDOW


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """One Stein problem: density ``p`` on (a, b) and coefficient ``gamma``.

    ``window`` gives finite integration limits when a or b is infinite.
    ``cdf``/``sf`` are optional closed forms of F and 1 - F.
    """

    a: float
    b: float
    p: Callable
    gamma: Callable
    psi: Optional[Callable] = None
    mean: Optional[float] = None
    outside: Optional[OutsideSpec] = None
    quad: QuadSpec = DEFAULT_QUAD
    cdf: Optional[Callable] = None
    sf: Optional[Callable] = None
    window: Optional[Tuple[float, float]] = None
    name: str = ""
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not float(self.a) < float(self.b):
            raise InvalidTarget("support needs a < b")
        lo, hi = self.lo, self.hi
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidTarget("infinite support needs a finite integration window")
        pv = _vec(self.p)
        computed = integrate(lambda x: x * pv(x), lo, hi, self.quad)
        if self.mean is None:
            object.__setattr__(self, "mean", computed)
        elif abs(float(self.mean) - computed) > 1e-8:
            raise InvalidTarget(f"supplied mean {self.mean!r} differs from quadrature {computed!r}")

    @property
    def lo(self) -> float:
        return float(self.window[0]) if self.window is not None else float(self.a)

    @property
    def hi(self) -> float:
        return float(self.window[1]) if self.window is not None else float(self.b)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def delta_edge(self) -> float:
        return EDGE_FRACTION * self.width

    def pv(self, x):
        return _vec(self.p)(x)

    def gv(self, x):
        return _vec(self.gamma)(x)

    def quad_between(self, lo: float, hi: float) -> QuadSpec:
        """Quadrature spec for a subinterval, keeping singular flags only at the true ends."""
        return self.quad.with_flags(self.quad.singular_lo and lo <= self.lo,
                                    self.quad.singular_hi and hi >= self.hi)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A test function ``h`` with its smoothness class and sup norms.

    ``kind`` is one of "bounded", "lipschitz", "c2", "indicator".  Norms are
    sup norms of h, h' and h'' over the domain of interest.  ``breaks`` lists
    points where h is discontinuous.  ``poly`` optionally holds exact
    polynomial coefficients (constant term first) for rational moment sums.
    """

    h: Callable
    kind: str
    norm_inf: Optional[float] = None
    norm_d1: Optional[float] = None
    norm_d2: Optional[float] = None
    z: Optional[float] = None
    dh: Optional[Callable] = None
    d2h: Optional[Callable] = None
    key: Optional[str] = None
    breaks: Tuple[float, ...] = ()
    norm_centered: Optional[float] = None
    poly: Optional[Tuple] = None

    __test__ = False  # keep pytest from collecting this class

    _REQUIRED = {
        "bounded": ("norm_inf",),
        "lipschitz": ("norm_d1",),
        "c2": ("norm_d1", "norm_d2"),
        "indicator": ("z",),
    }

    def __post_init__(self):
        if self.kind not in self._REQUIRED:
            raise DomainError(f"unknown test-function class {self.kind!r}")
        for name in self._REQUIRED[self.kind]:
            v = getattr(self, name)
            if v is None:
                raise MissingNorm(f"{self.kind} test function needs {name}")
        for name in ("norm_inf", "norm_d1", "norm_d2", "norm_centered"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise DomainError(f"{name} must be nonnegative")
        if self.kind == "indicator" and not self.breaks:
            object.__setattr__(self, "breaks", (float(self.z),))

    @property
    def token(self):
        return self.key if self.key is not None else id(self)

    def __call__(self, x):
        return _vec(self.h)(x)


@dataclass(frozen=True)
class PluginStats:
    """Moment inputs of the exchangeable-pair plug-in bound."""

    lam: float
    eta_discrepancy: float
    third_abs: float
    remainder_abs: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        for v in (self.eta_discrepancy, self.third_abs, self.remainder_abs):
            if not v >= 0:
                raise DomainError("plug-in statistics must be nonnegative")


# ---------------------------------------------------------------------------
# Target validation
# ---------------------------------------------------------------------------

def _interior_grid(lo: float, hi: float, n: int) -> np.ndarray:
    # Chebyshev-type clustering towards both ends.
    t = (np.arange(n) + 0.5) / n
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * t))


def validate_target(spec: TargetSpec, n_grid: int = 512) -> Dict[str, float]:
    """Check the standing conditions on (p, gamma); raise InvalidTarget on failure."""
    tol = 10 * spec.quad.abs_tol
    lo, hi = spec.lo, spec.hi
    mass = integrate(spec.pv, lo, hi, spec.quad)
    if abs(mass - 1.0) > max(tol, 10 * spec.quad.rel_tol):
        raise InvalidTarget(f"density integrates to {mass!r}")
    grid = _interior_grid(lo, hi, n_grid)
    pv = spec.pv(grid)
    if not np.all(pv > 0):
        raise InvalidTarget("density not positive on the interior grid")
    gv = spec.gv(grid)
    if not np.all(np.diff(gv) < 0):
        raise InvalidTarget("gamma is not strictly decreasing on the grid")
    gp = integrate(lambda x: spec.gv(x) * spec.pv(x), lo, hi, spec.quad, rel_to_l1=True)
    scale = integrate(lambda x: np.abs(spec.gv(x)) * spec.pv(x), lo, hi, spec.quad)
    if abs(gp) > max(tol, 10 * spec.quad.rel_tol * scale):
        raise InvalidTarget(f"gamma does not integrate to zero against p: {gp!r}")
    changes = int(np.count_nonzero(np.diff(np.sign(gv)) != 0))
    if changes != 1:
        raise InvalidTarget(f"gamma changes sign {changes} times on the grid")
    return {"mass": mass, "gamma_mean": gp, "sign_changes": float(changes)}


def check_outside(spec: TargetSpec, probes_left: Sequence[float],
                  probes_right: Sequence[float], fd_step: float = 1e-6) -> Dict[str, float]:
    """Residuals of the outside-support conditions at probe points.

    Returns max |F' - gamma/eta_out| (finite differences), max relative
    |q eta_out - exp(F)| and the largest value of eta_out (must be < 0).
    """
    out = spec.outside
    if out is None:
        raise DomainError("target has no outside-support data")
    d_res = 0.0
    q_res = 0.0
    eta_max = -math.inf
    for (F, q, xs) in ((out.F_l, out.q_l, probes_left), (out.F_r, out.q_r, probes_right)):
        for x in xs:
            x = float(x)
            fp = (_scalar(F, x + fd_step) - _scalar(F, x - fd_step)) / (2 * fd_step)
            e = _scalar(out.eta_out, x)
            d_res = max(d_res, abs(fp - _scalar(spec.gamma, x) / e))
            ex = math.exp(_scalar(F, x))
            q_res = max(q_res, abs(_scalar(q, x) * e - ex) / ex)
            eta_max = max(eta_max, e)
    return {"dF": d_res, "q_eta": q_res, "eta_out_max": eta_max}


# ---------------------------------------------------------------------------
# Profile
# ---------------------------------------------------------------------------

class Profile:
    """Grid tabulation of F, 1 - F and I for one target, plus evaluators.

    Immutable after construction except for the lock-protected mu(h) cache.
    """

    def __init__(self, spec: TargetSpec, grid: np.ndarray, F_vals: np.ndarray,
                 SF_vals: np.ndarray, I_vals: np.ndarray, x0: float):
        self.spec = spec
        self.grid = grid
        self.F_vals = F_vals
        self.SF_vals = SF_vals
        self.I_vals = I_vals
        self.x0 = x0
        self._split = int(np.searchsorted(grid, x0, side="right"))  # grid[:split] <= x0
        self._mu: Dict = {}
        self._lock = threading.Lock()
        self.median = self._median()

    # -- distribution function -------------------------------------------
    def F(self, x: float) -> float:
        spec = self.spec
        x = float(x)
        if x <= spec.lo:
            return 0.0
        if x >= spec.hi:
            return 1.0
        if spec.cdf is not None:
            return float(spec.cdf(x))
        j = int(np.searchsorted(self.grid, x, side="right")) - 1
        if j < 0:
            return integrate(spec.pv, spec.lo, x, spec.quad_between(spec.lo, x), rel_to_l1=True)
        g = float(self.grid[j])
        if x == g:
            return float(self.F_vals[j])
        return float(self.F_vals[j]) + integrate(spec.pv, g, x, spec.quad_between(g, x))

    def sf(self, x: float) -> float:
        spec = self.spec
        x = float(x)
        if x <= spec.lo:
            return 1.0
        if x >= spec.hi:
            return 0.0
        if spec.sf is not None:
            return float(spec.sf(x))
        if spec.cdf is not None:
            return 1.0 - float(spec.cdf(x))
        j = int(np.searchsorted(self.grid, x, side="left"))
        if j >= self.grid.size:
            return integrate(spec.pv, x, spec.hi, spec.quad_between(x, spec.hi), rel_to_l1=True)
        g = float(self.grid[j])
        if x == g:
            return float(self.SF_vals[j])
        return float(self.SF_vals[j]) + integrate(spec.pv, x, g, spec.quad_between(x, g))

    def _median(self) -> float:
        def excess(x):
            Fx = self.F(x)
            return Fx - 0.5 if Fx <= 0.5 else 0.5 - self.sf(x)

        return find_root(excess, self.spec.lo, self.spec.hi, tol=1e-14)

    # -- I and eta --------------------------------------------------------
    def I(self, x: float) -> float:
        spec = self.spec
        x = float(x)
        if x <= spec.lo or x >= spec.hi:
            return 0.0
        gp = lambda t: spec.gv(t) * spec.pv(t)
        if x <= self.x0:
            j = int(np.searchsorted(self.grid[:self._split], x, side="right")) - 1
            if j < 0:
                return integrate(gp, spec.lo, x, spec.quad_between(spec.lo, x), rel_to_l1=True)
            g = float(self.grid[j])
            if x == g:
                return float(self.I_vals[j])
            return float(self.I_vals[j]) + integrate(gp, g, x, spec.quad_between(g, x))
        right = self.grid[self._split:]
        j = int(np.searchsorted(right, x, side="left"))
        ngp = lambda t: -gp(t)
        if j >= right.size:
            return integrate(ngp, x, spec.hi, spec.quad_between(x, spec.hi), rel_to_l1=True)
        g = float(right[j])
        if x == g:
            return float(self.I_vals[self._split + j])
        return float(self.I_vals[self._split + j]) + integrate(ngp, x, g, spec.quad_between(x, g))

    def I_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.array([self.I(x) for x in xs.reshape(-1)]).reshape(xs.shape)

    def eta(self, x: float) -> float:
        """I(x)/p(x) on the support; 0 at finite ends; eta_out outside."""
        spec = self.spec
        x = float(x)
        if spec.lo < x < spec.hi:
            return self.I(x) / _scalar(spec.p, x)
        if x == spec.lo or x == spec.hi:
            return 0.0
        if spec.outside is None:
            raise DomainError("eta outside the support needs outside-support data")
        return _scalar(spec.outside.eta_out, x)

    def eta_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return self.I_many(xs) / self.spec.pv(xs)

    # -- mu(h) ---------------------------------------------------------------
    def mu(self, tf: TestFunction) -> float:
        tok = tf.token
        with self._lock:
            if tok in self._mu:
                return self._mu[tok]
        spec = self.spec
        val = _integrate_split(lambda x: tf(x) * spec.pv(x), spec.lo, spec.hi, tf.breaks, spec)
        with self._lock:
            self._mu.setdefault(tok, val)
            return self._mu[tok]


def _integrate_split(f, lo, hi, breaks, spec: TargetSpec, rel_to_l1=True) -> float:
    """Integral of f over (lo, hi) split at interior break points."""
    pts = [lo] + sorted(float(b) for b in breaks if lo < b < hi) + [hi]
    total = 0.0
    for u, v in zip(pts[:-1], pts[1:]):
        if v > u:
            total += integrate(f, u, v, spec.quad_between(u, v), rel_to_l1=rel_to_l1)
    return total


def build_profile(spec: TargetSpec, grid_size: int = 256, validate: bool = True) -> Profile:
    """Tabulate F, 1 - F and I on an interior grid that contains x0."""
    if validate:
        validate_target(spec)
    lo, hi = spec.lo, spec.hi
    x0 = find_root(lambda x: _scalar(spec.gamma, x), lo, hi, tol=1e-15)
    grid = np.unique(np.concatenate([_interior_grid(lo, hi, int(grid_size)), [x0]]))
    grid = grid[(grid > lo) & (grid < hi)]
    pv = spec.pv
    gp = lambda t: spec.gv(t) * pv(t)
    knots = np.concatenate([[lo], grid, [hi]])
    pieces_p = integrate_many(pv, knots, spec.quad)
    F_vals = np.cumsum(pieces_p)[:-1]
    SF_vals = np.cumsum(pieces_p[::-1])[::-1][1:]
    split = int(np.searchsorted(grid, x0, side="right"))
    left_knots = np.concatenate([[lo], grid[:split]])
    I_left = np.cumsum(integrate_many(gp, left_knots, spec.quad.with_flags(spec.quad.singular_lo, False)))
    right_knots = np.concatenate([grid[split:], [hi]])
    I_right = np.cumsum(integrate_many(lambda t: -gp(t), right_knots,
                                       spec.quad.with_flags(False, spec.quad.singular_hi))[::-1])[::-1]
    I_vals = np.concatenate([I_left, I_right])
    prof = Profile(spec, grid, F_vals, SF_vals, I_vals, x0)
    if validate:
        if not np.all(I_vals > 0):
            raise InvalidTarget("I is not positive on the interior grid")
        if not (np.all(np.diff(I_vals[:split]) > 0) and np.all(np.diff(I_vals[split - 1:]) < 0)):
            raise InvalidTarget("I is not unimodal with peak at x0")
    return prof


def eta(spec: TargetSpec, profile: Profile, x: float) -> float:
    return profile.eta(x)


def check_eta_ode(spec: TargetSpec, profile: Profile, probes: Sequence[float]) -> float:
    """Max |eta'(x) - (gamma(x) - psi(x) eta(x))| with central differences for eta'."""
    if spec.psi is None:
        raise DomainError("check_eta_ode needs psi")
    worst = 0.0
    for x in probes:
        x = float(x)
        dist = min(x - spec.lo, spec.hi - x)
        if dist < 1e-3 * spec.width:
            raise DomainError("probe too close to an endpoint")
        h = min(1e-4 * spec.width, 0.25 * dist)
        d = (profile.eta(x + h) - profile.eta(x - h)) / (2 * h)
        rhs = _scalar(spec.gamma, x) - _scalar(spec.psi, x) * profile.eta(x)
        worst = max(worst, abs(d - rhs))
    return worst


# ---------------------------------------------------------------------------
# Stein solutions
# ---------------------------------------------------------------------------

def _edge_limit(spec: TargetSpec, profile: Profile, tf: TestFunction, at_lo: bool) -> float:
    x = spec.lo if at_lo else spec.hi
    return (float(tf(np.array([x]))[0]) - profile.mu(tf)) / _scalar(spec.gamma, x)


def _interior_raw(spec: TargetSpec, profile: Profile, tf: TestFunction, x: float) -> float:
    mu = profile.mu(tf)
    f = lambda t: (tf(t) - mu) * spec.pv(t)
    if x <= profile.x0:
        num = _integrate_split(f, spec.lo, x, tf.breaks, spec)
    else:
        num = -_integrate_split(f, x, spec.hi, tf.breaks, spec)
    return num / profile.I(x)


def _outside_raw(spec: TargetSpec, profile: Profile, tf: TestFunction, x: float) -> float:
    out = spec.outside
    mu = profile.mu(tf)
    if x < spec.lo:
        q = _vec(out.q_l)
        val = -_integrate_split(lambda t: (tf(t) - mu) * q(t), x, spec.lo, tf.breaks,
                                _OutsideQuad(spec, left=True))
        return math.exp(-_scalar(out.F_l, x)) * val
    q = _vec(out.q_r)
    val = _integrate_split(lambda t: (tf(t) - mu) * q(t), spec.hi, x, tf.breaks,
                           _OutsideQuad(spec, left=False))
    return math.exp(-_scalar(out.F_r, x)) * val


class _OutsideQuad:
    """Adapter giving outside integrals the endpoint flags of the adjacent support end."""

    def __init__(self, spec: TargetSpec, left: bool):
        self.spec = spec
        self.left = left
        self.lo = spec.lo
        self.hi = spec.hi

    def quad_between(self, lo, hi):
        q = self.spec.quad
        if self.left:
            return q.with_flags(False, q.singular_lo and hi >= self.spec.lo)
        return q.with_flags(q.singular_hi and lo <= self.spec.hi, False)


def _check_outside_window(spec: TargetSpec, x: float):
    if spec.outside is None:
        raise DomainError("solution outside the support needs outside-support data")
    w = spec.outside.window
    if x < spec.lo - w or x > spec.hi + w:
        raise DomainError(f"x = {x!r} lies beyond the outside evaluation window")


def solve_stein(spec: TargetSpec, profile: Profile, tf: TestFunction, x: float) -> float:
    """Value of the bounded Stein solution g_h at x."""
    x = float(x)
    lo, hi, d = spec.lo, spec.hi, spec.delta_edge
    if x == lo:
        return _edge_limit(spec, profile, tf, True)
    if x == hi:
        return _edge_limit(spec, profile, tf, False)
    if lo < x < hi:
        if x - lo < d:
            lim = _edge_limit(spec, profile, tf, True)
            return lim + (x - lo) / d * (_interior_raw(spec, profile, tf, lo + d) - lim)
        if hi - x < d:
            lim = _edge_limit(spec, profile, tf, False)
            return lim + (hi - x) / d * (_interior_raw(spec, profile, tf, hi - d) - lim)
        return _interior_raw(spec, profile, tf, x)
    _check_outside_window(spec, x)
    if x < lo and lo - x < d:
        lim = _edge_limit(spec, profile, tf, True)
        return lim + (lo - x) / d * (_outside_raw(spec, profile, tf, lo - d) - lim)
    if x > hi and x - hi < d:
        lim = _edge_limit(spec, profile, tf, False)
        return lim + (x - hi) / d * (_outside_raw(spec, profile, tf, hi + d) - lim)
    return _outside_raw(spec, profile, tf, x)


def solve_stein_many(spec: TargetSpec, profile: Profile, tf: TestFunction, xs) -> np.ndarray:
    """Vectorized :func:`solve_stein` on the support; integrals accumulate along sorted xs."""
    xs = np.asarray(xs, dtype=float)
    flat = xs.reshape(-1)
    out = np.empty(flat.size)
    lo, hi, d = spec.lo, spec.hi, spec.delta_edge
    mid = (flat > lo + d) & (flat < hi - d)
    idx = np.nonzero(mid)[0]
    if idx.size:
        mu = profile.mu(tf)
        f = lambda t: (tf(t) - mu) * spec.pv(t)
        pts = flat[idx]
        order = np.argsort(pts, kind="stable")
        sp = pts[order]
        vals = np.empty(sp.size)
        left = sp <= profile.x0
        nl = int(np.count_nonzero(left))
        if nl:
            knots = np.concatenate([[lo], sp[:nl]])
            cum = np.cumsum([_integrate_split(f, u, v, tf.breaks, spec) if v > u else 0.0
                             for u, v in zip(knots[:-1], knots[1:])])
            vals[:nl] = cum
        if nl < sp.size:
            knots = np.concatenate([sp[nl:], [hi]])
            pieces = [_integrate_split(f, u, v, tf.breaks, spec) if v > u else 0.0
                      for u, v in zip(knots[:-1], knots[1:])]
            vals[nl:] = -np.cumsum(pieces[::-1])[::-1]
        vals = vals / profile.I_many(sp)
        res = np.empty(sp.size)
        res[order] = vals
        out[idx] = res
    for i in np.nonzero(~mid)[0]:
        out[i] = solve_stein(spec, profile, tf, float(flat[i]))
    return out.reshape(xs.shape)


def solution_derivative(spec: TargetSpec, profile: Profile, tf: TestFunction, x: float) -> float:
    """g_h'(x) from the Stein equation: (h~(x) - gamma(x) g_h(x)) / eta(x)."""
    x = float(x)
    d = spec.delta_edge
    if abs(x - spec.lo) < d or abs(x - spec.hi) < d:
        raise DomainError("solution_derivative is ill-conditioned within delta_edge of an endpoint")
    g = solve_stein(spec, profile, tf, x)
    ht = float(tf(np.array([x]))[0]) - profile.mu(tf)
    return (ht - _scalar(spec.gamma, x) * g) / profile.eta(x)


def solve_kolmogorov(spec: TargetSpec, profile: Profile, z: float, x: float) -> float:
    """Closed-form solution g_z for h = 1_{(-inf, z]}."""
    z = float(z)
    x = float(x)
    lo, hi = spec.lo, spec.hi
    if not lo < z < hi:
        raise DomainError("z must lie strictly inside the support")
    Fz = profile.F(z)
    Sz = profile.sf(z)
    if x == lo:
        return Sz / _scalar(spec.gamma, lo)
    if x == hi:
        return -Fz / _scalar(spec.gamma, hi)
    if lo < x <= z:
        Ix = profile.I(x)
        Fx = profile.F(x)
        if Ix <= 0.0 or Fx <= 0.0:
            return Sz / _scalar(spec.gamma, lo)
        return Fx * Sz / Ix
    if z < x < hi:
        Ix = profile.I(x)
        Sx = profile.sf(x)
        if Ix <= 0.0 or Sx <= 0.0:
            return -Fz / _scalar(spec.gamma, hi)
        return Fz * Sx / Ix
    _check_outside_window(spec, x)
    out = spec.outside
    if x < lo:
        Q = integrate(_vec(out.q_l), x, lo, _OutsideQuad(spec, True).quad_between(x, lo))
        # Q_l(x) = int_a^x q_l = -int_x^a q_l
        return Sz * (-Q) * math.exp(-_scalar(out.F_l, x))
    Q = integrate(_vec(out.q_r), hi, x, _OutsideQuad(spec, False).quad_between(hi, x))
    return -Fz * Q * math.exp(-_scalar(out.F_r, x))


def lipschitz_HG(spec: TargetSpec, profile: Profile, x: float) -> Tuple[float, float, float, float]:
    """(H, G, A, B) at an interior x, each by quadrature of a nonnegative integrand.

    H = int_a^x (gamma(t) - gamma(x)) p(t) dt,  G = int_x^b (gamma(x) - gamma(t)) p(t) dt,
    A = int_a^x F = int_a^x (x - s) p(s) ds,    B = int_x^b (1 - F) = int_x^b (s - x) p(s) ds.
    """
    x = float(x)
    lo, hi = spec.lo, spec.hi
    if not lo < x < hi:
        raise DomainError("x must be interior")
    gx = _scalar(spec.gamma, x)
    pv, gv = spec.pv, spec.gv
    ql = spec.quad_between(lo, x)
    qr = spec.quad_between(x, hi)
    H = integrate(lambda t: (gv(t) - gx) * pv(t), lo, x, ql, rel_to_l1=True)
    G = integrate(lambda t: (gx - gv(t)) * pv(t), x, hi, qr, rel_to_l1=True)
    A = integrate(lambda t: (x - t) * pv(t), lo, x, ql, rel_to_l1=True)
    B = integrate(lambda t: (t - x) * pv(t), x, hi, qr, rel_to_l1=True)
    return H, G, A, B


def kolmogorov_derivative(spec: TargetSpec, profile: Profile, z: float, x: float) -> float:
    """g_z'(x) on the support: (1-F(z)) p H / I^2 left of z, -F(z) p G / I^2 right of z."""
    x = float(x)
    H, G, _, _ = lipschitz_HG(spec, profile, x)
    Ix = profile.I(x)
    px = _scalar(spec.p, x)
    if x <= z:
        return profile.sf(z) * px * H / (Ix * Ix)
    return -profile.F(z) * px * G / (Ix * Ix)


def bound_sup_bounded(spec: TargetSpec, profile: Profile, tf: TestFunction,
                      centered_norm: Optional[float] = None) -> float:
    """Sup-norm bound on g_h for bounded h.

    ``centered_norm`` is ||h - mu(h)||; it defaults to ``tf.norm_centered`` and
    otherwise to the safe value 2 ||h||.
    """
    if centered_norm is None:
        centered_norm = tf.norm_centered
    if centered_norm is None:
        if tf.norm_inf is None:
            raise MissingNorm("bounded test function needs norm_inf")
        centered_norm = 2.0 * tf.norm_inf
    coeff = 1.0 / (2.0 * profile.I(profile.median))
    if spec.outside is not None:
        coeff = max(coeff, 1.0 / _scalar(spec.gamma, spec.lo), -1.0 / _scalar(spec.gamma, spec.hi))
    return centered_norm * coeff


def bound_pointwise_lipschitz(spec: TargetSpec, profile: Profile, x: float) -> Tuple[float, float]:
    """Pointwise factors (S, S') with |g_h(x)| <= ||h'|| S and |g_h'(x)| <= ||h'|| S'.

    S = ((1 - F) A + F B) / I, the cancellation-free form of (F E[Z] - int_a^x y p) / I.
    S' = (A G + B H) / (p eta^2).
    """
    H, G, A, B = lipschitz_HG(spec, profile, x)
    Fx = profile.F(x)
    Sx = profile.sf(x)
    Ix = profile.I(x)
    px = _scalar(spec.p, x)
    S = (Sx * A + Fx * B) / Ix
    eta_x = Ix / px
    Sp = (A * G + B * H) / (px * eta_x * eta_x)
    return S, Sp


# ---------------------------------------------------------------------------
# Density reconstruction
# ---------------------------------------------------------------------------

def _log_tilde_many(spec: TargetSpec, profile: Profile, xs) -> np.ndarray:
    """int_{x0}^x gamma/eta for each x, accumulated along sorted points."""
    xs = np.asarray(xs, dtype=float)
    flat = xs.reshape(-1)
    order = np.argsort(flat, kind="stable")
    sp = flat[order]
    x0 = profile.x0
    ratio = lambda t: spec.gv(t) / profile.eta_many(t)
    q = spec.quad.with_flags(False, False)
    vals = np.empty(sp.size)
    nl = int(np.count_nonzero(sp < x0))
    if nl:
        knots = np.concatenate([sp[:nl], [x0]])
        pieces = [integrate(ratio, u, v, q) if v > u else 0.0 for u, v in zip(knots[:-1], knots[1:])]
        vals[:nl] = -np.cumsum(pieces[::-1])[::-1]
    if nl < sp.size:
        knots = np.concatenate([[x0], sp[nl:]])
        pieces = [integrate(ratio, u, v, q) if v > u else 0.0 for u, v in zip(knots[:-1], knots[1:])]
        vals[nl:] = np.cumsum(pieces)
    res = np.empty(sp.size)
    res[order] = vals
    return res.reshape(xs.shape)


def density_from_eta_gamma(spec: TargetSpec, profile: Profile, x: float) -> float:
    """Reconstruct p(x) = I(x0)/eta(x) * exp(int_{x0}^x gamma/eta)."""
    x = float(x)
    if not spec.lo + spec.delta_edge <= x <= spec.hi - spec.delta_edge:
        raise DomainError("x too close to an endpoint")
    L = float(_log_tilde_many(spec, profile, np.array([x]))[0])
    return profile.I(profile.x0) / profile.eta(x) * math.exp(L)


def tilde_density(spec: TargetSpec, profile: Profile, x):
    """Unnormalized exp(int_{x0}^x gamma/eta); accepts scalars or arrays."""
    if np.ndim(x) == 0:
        return math.exp(float(_log_tilde_many(spec, profile, np.array([float(x)]))[0]))
    return np.exp(_log_tilde_many(spec, profile, x))


def tilde_density_normalized(spec: TargetSpec, profile: Profile, xs) -> np.ndarray:
    """tilde_density divided by its own integral over the support."""
    f = lambda t: np.exp(_log_tilde_many(spec, profile, t))
    # The tilde density vanishes at finite ends; substitution handles derivative blow-up.
    q = QuadSpec(1e-10, 1e-9, spec.quad.max_depth, spec.quad.singular_lo, spec.quad.singular_hi)
    Z = integrate(f, spec.lo, spec.hi, q)
    return np.asarray(tilde_density(spec, profile, np.asarray(xs, dtype=float))) / Z


# ---------------------------------------------------------------------------
# Characterization residual, particular solutions, plug-in bound
# ---------------------------------------------------------------------------

def stein_residual(spec: TargetSpec, g: Callable, g_deriv: Callable,
                   profile: Optional[Profile] = None, law: Optional[Callable] = None) -> float:
    """|E[eta(Z) g'(Z) + gamma(Z) g(Z)]| with Z drawn from ``law`` (default: p)."""
    if profile is None:
        profile = spec._cache.get("profile")
        if profile is None:
            profile = build_profile(spec)
            spec._cache["profile"] = profile
    gv, dv = _vec(g), _vec(g_deriv)
    if law is None:
        f = lambda t: profile.I_many(t) * dv(t) + spec.gv(t) * gv(t) * spec.pv(t)
    else:
        lv = _vec(law)
        f = lambda t: (profile.eta_many(t) * dv(t) + spec.gv(t) * gv(t)) * lv(t)
    return abs(integrate(f, spec.lo, spec.hi, spec.quad, rel_to_l1=True))


def particular_solution(spec: TargetSpec, profile: Profile, u: Callable, x: float,
                        side: str = "left") -> float:
    """Solution of eta g' + gamma g = u built from the left or right end.

    For mean-zero u both sides agree and stay bounded; otherwise the left
    form blows up at b and the right form at a.
    """
    x = float(x)
    uv = _vec(u)
    f = lambda t: uv(t) * spec.pv(t)
    if side == "left":
        num = integrate(f, spec.lo, x, spec.quad_between(spec.lo, x), rel_to_l1=True)
    elif side == "right":
        num = -integrate(f, x, spec.hi, spec.quad_between(x, spec.hi), rel_to_l1=True)
    else:
        raise DomainError("side must be 'left' or 'right'")
    return num / profile.I(x)


def plugin_bound(stats: PluginStats, c1: float, c2: float, c0_coeff: float,
                 tf: TestFunction) -> float:
    """c1 ||h'|| E|eta - (1/2lam)E[(W'-W)^2|W]| + c2 (||h'|| + ||h''||) E|W'-W|^3 / (6 lam)
    + c0 ||h'|| E|R| / lam."""
    if tf.norm_d1 is None or tf.norm_d2 is None:
        raise MissingNorm("plug-in bound needs both ||h'|| and ||h''||")
    d1, d2 = float(tf.norm_d1), float(tf.norm_d2)
    return (c1 * d1 * stats.eta_discrepancy
            + c2 * (d1 + d2) * stats.third_abs / (6.0 * stats.lam)
            + c0_coeff * d1 * stats.remainder_abs / stats.lam)
