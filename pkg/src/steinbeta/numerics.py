"""Deterministic 1-D quadrature, bisection root finding and supremum search.

The quadrature is a globally adaptive Gauss-Kronrod (10/21 point) scheme.
Panels touching an endpoint flagged as singular are integrated after the
substitution ``x = lo + t**2`` (or ``x = hi - t**2``), which turns an
``(x - lo)**lam`` singularity into ``t**(2*lam + 1)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DomainError, NoBracket, NonConvergence

__all__ = [
    "QuadSpec",
    "SupSearchSpec",
    "DEFAULT_QUAD",
    "integrate",
    "integrate_many",
    "find_root",
    "maximize_1d",
]

# Kronrod 21-point nodes (non-negative half) and weights, with the embedded
# 10-point Gauss weights at the odd Kronrod positions.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600885160584,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # ascending, 21 nodes
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(21)
# Gauss nodes sit at Kronrod indices 1, 3, 5, 7, 9 of the half rule.
for _j, _w in zip((1, 3, 5, 7, 9), _WG):
    _WG_FULL[_j] = _w
    _WG_FULL[20 - _j] = _w


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and endpoint flags for :func:`integrate`."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 40
    singular_lo: bool = False
    singular_hi: bool = False

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if int(self.max_depth) < 1:
            raise DomainError("max_depth must be at least 1")

    def with_flags(self, singular_lo: bool, singular_hi: bool) -> "QuadSpec":
        return QuadSpec(self.abs_tol, self.rel_tol, self.max_depth,
                        bool(singular_lo), bool(singular_hi))

    def tightened(self, factor: float) -> "QuadSpec":
        return QuadSpec(self.abs_tol * factor, self.rel_tol * factor, self.max_depth,
                        self.singular_lo, self.singular_hi)


DEFAULT_QUAD = QuadSpec()


@dataclass(frozen=True)
class SupSearchSpec:
    """Grid size, refinement depth and edge exclusion for :func:`maximize_1d`."""

    coarse_points: int = 1024
    refine_rounds: int = 60
    edge_margin: float = 1e-4

    def __post_init__(self):
        if int(self.coarse_points) < 16:
            raise DomainError("coarse_points must be at least 16")
        if int(self.refine_rounds) < 1:
            raise DomainError("refine_rounds must be at least 1")
        if not self.edge_margin > 0:
            raise DomainError("edge_margin must be positive")


def _as_vector_eval(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` so that it maps a node array to a value array.

    Vectorized evaluators are used directly; scalar ones are looped.
    """
    state = {"vectorized": None}

    def ev(x: np.ndarray) -> np.ndarray:
        if state["vectorized"] is None:
            try:
                y = np.asarray(f(x), dtype=float)
                ok = y.shape == x.shape
            except Exception:
                ok = False
            state["vectorized"] = ok
            if ok:
                return y
        if state["vectorized"]:
            return np.asarray(f(x), dtype=float)
        return np.fromiter((f(float(t)) for t in x), dtype=float, count=x.size)

    return ev


def _panel(ev, lo: float, hi: float, mode: int, base: float):
    """Apply the 21-point rule on [lo, hi] in the (possibly substituted) variable.

    mode 0: plain; mode 1: x = base + t**2; mode 2: x = base - t**2.
    Returns (kronrod, |kronrod - gauss|, integral of |f|).
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid + half * _NODES
    if mode == 0:
        vals = ev(t)
    elif mode == 1:
        vals = ev(base + t * t) * (2.0 * t)
    else:
        vals = ev(base - t * t) * (2.0 * t)
    if not np.all(np.isfinite(vals)):
        raise NonConvergence(f"integrand not finite on panel [{lo!r}, {hi!r}]")
    k = half * float(np.dot(_WK, vals))
    g = half * float(np.dot(_WG_FULL, vals))
    l1 = abs(half) * float(np.dot(_WK, np.abs(vals)))
    return k, abs(k - g), l1


def _initial_pieces(lo: float, hi: float, spec: QuadSpec):
    """Split [lo, hi] into pieces in substitution coordinates."""
    pieces = []
    if spec.singular_lo and spec.singular_hi:
        mid = 0.5 * (lo + hi)
        pieces.append((0.0, math.sqrt(mid - lo), 1, lo))
        pieces.append((0.0, math.sqrt(hi - mid), 2, hi))
    elif spec.singular_lo:
        pieces.append((0.0, math.sqrt(hi - lo), 1, lo))
    elif spec.singular_hi:
        pieces.append((0.0, math.sqrt(hi - lo), 2, hi))
    else:
        pieces.append((lo, hi, 0, 0.0))
    return pieces


def integrate(f: Callable, lo: float, hi: float, spec: QuadSpec = DEFAULT_QUAD,
              rel_to_l1: bool = False, max_panels: int = 20000) -> float:
    """Integrate ``f`` over the finite interval (lo, hi).

    The error target is ``max(abs_tol, rel_tol * |result|)``.  With
    ``rel_to_l1`` the relative part is taken against the integral of ``|f|``
    instead, which keeps ratios of small integrals accurate near endpoints.
    """
    return _integrate(_as_vector_eval(f), float(lo), float(hi), spec, rel_to_l1, max_panels)


def _integrate(ev, lo, hi, spec, rel_to_l1, max_panels):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integration endpoints must be finite")
    if not lo < hi:
        raise DomainError(f"integrate needs lo < hi, got ({lo!r}, {hi!r})")
    heap: List[Tuple[float, int, float, float, int, float, float, float, int]] = []
    total = 0.0
    total_err = 0.0
    total_l1 = 0.0
    counter = 0
    for (u, v, mode, base) in _initial_pieces(lo, hi, spec):
        k, e, l1 = _panel(ev, u, v, mode, base)
        total += k
        total_err += e
        total_l1 += l1
        heapq.heappush(heap, (-e, counter, u, v, mode, base, k, l1, 0))
        counter += 1
    n_panels = len(heap)
    while True:
        scale = total_l1 if rel_to_l1 else abs(total)
        target = max(spec.abs_tol, spec.rel_tol * scale)
        if total_err <= target:
            return total
        neg_e, _, u, v, mode, base, k, l1, depth = heapq.heappop(heap)
        e = -neg_e
        if depth >= spec.max_depth or n_panels >= max_panels:
            raise NonConvergence(
                f"quadrature did not converge on ({lo!r}, {hi!r}): "
                f"error estimate {total_err:.3e} > target {target:.3e}")
        w = 0.5 * (u + v)
        k1, e1, l11 = _panel(ev, u, w, mode, base)
        k2, e2, l12 = _panel(ev, w, v, mode, base)
        total += k1 + k2 - k
        total_err += e1 + e2 - e
        total_l1 += l11 + l12 - l1
        heapq.heappush(heap, (-e1, counter, u, w, mode, base, k1, l11, depth + 1))
        heapq.heappush(heap, (-e2, counter + 1, w, v, mode, base, k2, l12, depth + 1))
        counter += 2
        n_panels += 1


def integrate_many(f: Callable, knots, spec: QuadSpec = DEFAULT_QUAD,
                   rel_to_l1: bool = False) -> np.ndarray:
    """Integrals of ``f`` over consecutive intervals of the sorted ``knots``.

    The singular flags of ``spec`` apply only to the first and last interval.
    """
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or knots.size < 2:
        raise DomainError("need at least two knots")
    ev = _as_vector_eval(f)
    out = np.empty(knots.size - 1)
    last = knots.size - 2
    for i in range(knots.size - 1):
        s = spec.with_flags(spec.singular_lo and i == 0, spec.singular_hi and i == last)
        out[i] = _integrate(ev, float(knots[i]), float(knots[i + 1]), s, rel_to_l1, 20000)
    return out


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
              history: Optional[list] = None, max_iter: int = 400) -> float:
    """Bisection root of ``f`` on [lo, hi].

    Requires ``f(lo) * f(hi) <= 0``.  If ``history`` is a list, the bracket
    after every step is appended to it.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo <= hi:
        raise DomainError("find_root needs lo <= hi")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoBracket(f"no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            lo = hi = mid
            if history is not None:
                history.append((lo, hi))
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if history is not None:
            history.append((lo, hi))
    return 0.5 * (lo + hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(f: Callable, lo: float, hi: float, spec: SupSearchSpec = SupSearchSpec(),
                lo_limit: Optional[float] = None, hi_limit: Optional[float] = None
                ) -> Tuple[float, float]:
    """Grid scan plus golden-section refinement of ``max f`` on [lo, hi].

    If ``lo_limit`` (``hi_limit``) is given, ``f`` is not evaluated within
    ``edge_margin`` of that endpoint; the supplied limit value stands in for
    the excluded strip and is reported with the endpoint as argmax.
    Ties resolve to the smallest argmax.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise DomainError("maximize_1d needs lo < hi")
    m = float(spec.edge_margin)
    glo = lo + m if lo_limit is not None else lo
    ghi = hi - m if hi_limit is not None else hi
    if not glo < ghi:
        raise DomainError("edge margin leaves an empty search interval")
    ev = _as_vector_eval(f)
    xs = np.linspace(glo, ghi, int(spec.coarse_points))
    ys = ev(xs)
    if not np.all(np.isfinite(ys)):
        bad = xs[~np.isfinite(ys)][0]
        raise DomainError(f"objective not finite at x = {bad!r}")
    i = int(np.argmax(ys))  # first occurrence, so the smallest argmax wins
    best_x, best_y = float(xs[i]), float(ys[i])
    # Golden-section search over the two cells adjacent to the best node.
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, xs.size - 1)])
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = float(ev(np.array([c]))[0])
    fd = float(ev(np.array([d]))[0])
    for _ in range(int(spec.refine_rounds)):
        for (x, y) in ((c, fc), (d, fd)):
            if np.isfinite(y) and (y > best_y or (y == best_y and x < best_x)):
                best_x, best_y = x, y
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = float(ev(np.array([c]))[0])
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = float(ev(np.array([d]))[0])
    for (x, y) in ((c, fc), (d, fd)):
        if np.isfinite(y) and (y > best_y or (y == best_y and x < best_x)):
            best_x, best_y = x, y
    if lo_limit is not None and (lo_limit > best_y or (lo_limit == best_y and lo <= best_x)):
        best_x, best_y = lo, float(lo_limit)
    if hi_limit is not None and hi_limit > best_y:
        best_x, best_y = hi, float(hi_limit)
    return best_x, best_y
