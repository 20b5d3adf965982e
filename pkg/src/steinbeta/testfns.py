"""Named test functions with sup norms computed for a given interval."""

from __future__ import annotations

import math
import re
from typing import Tuple

import numpy as np

from .errors import DomainError
from .stein_core import TestFunction

__all__ = ["make_test_function", "REGISTRY_NAMES"]

REGISTRY_NAMES = ("x", "x2", "sinkx(k)", "indicator(z)", "lipschitz-saw")

_SAW_HALF = 0.25


def _sup_abs_cos(k: float, lo: float, hi: float) -> float:
    # |cos(kx)| peaks at x = m pi / k.
    m = math.ceil(k * lo / math.pi)
    if m * math.pi / k <= hi:
        return 1.0
    return max(abs(math.cos(k * lo)), abs(math.cos(k * hi)))


def _sup_abs_sin(k: float, lo: float, hi: float) -> float:
    # |sin(kx)| peaks at x = (m + 1/2) pi / k.
    m = math.ceil(k * lo / math.pi - 0.5)
    if (m + 0.5) * math.pi / k <= hi:
        return 1.0
    return max(abs(math.sin(k * lo)), abs(math.sin(k * hi)))


def _saw(x):
    x = np.asarray(x, dtype=float)
    period = 2.0 * _SAW_HALF
    return np.abs(np.mod(x, period) - _SAW_HALF)


def make_test_function(name: str, domain: Tuple[float, float] = (0.0, 1.0)) -> TestFunction:
    """Build a registry test function with norms taken over ``domain``.

    Names: ``x``, ``x2``, ``sinkx(k)`` (also ``sin3x`` style), ``indicator(z)``,
    ``lipschitz-saw``.
    """
    lo, hi = (float(domain[0]), float(domain[1]))
    if not lo < hi:
        raise DomainError("domain needs lo < hi")
    big = max(abs(lo), abs(hi))
    key = f"{name}@[{lo!r},{hi!r}]"
    name = name.strip()
    if name == "x":
        return TestFunction(h=lambda x: np.asarray(x, dtype=float), kind="c2",
                            norm_inf=big, norm_d1=1.0, norm_d2=0.0,
                            dh=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                            d2h=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                            key=key, poly=(0, 1))
    if name == "x2":
        return TestFunction(h=lambda x: np.asarray(x, dtype=float) ** 2, kind="c2",
                            norm_inf=big * big, norm_d1=2.0 * big, norm_d2=2.0,
                            dh=lambda x: 2.0 * np.asarray(x, dtype=float),
                            d2h=lambda x: np.full(np.shape(x), 2.0),
                            key=key, poly=(0, 0, 1))
    m = re.fullmatch(r"sinkx\(\s*([-+0-9.eE]+)\s*\)|sin([0-9.]+)x", name)
    if m:
        k = float(m.group(1) or m.group(2))
        if k <= 0:
            raise DomainError("sinkx needs k > 0")
        return TestFunction(h=lambda x: np.sin(k * np.asarray(x, dtype=float)), kind="c2",
                            norm_inf=_sup_abs_sin(k, lo, hi),
                            norm_d1=k * _sup_abs_cos(k, lo, hi),
                            norm_d2=k * k * _sup_abs_sin(k, lo, hi),
                            dh=lambda x: k * np.cos(k * np.asarray(x, dtype=float)),
                            d2h=lambda x: -k * k * np.sin(k * np.asarray(x, dtype=float)),
                            key=key)
    m = re.fullmatch(r"indicator\(\s*([-+0-9.eE]+)\s*\)", name)
    if m:
        z = float(m.group(1))
        return TestFunction(h=lambda x: (np.asarray(x, dtype=float) <= z).astype(float),
                            kind="indicator", norm_inf=1.0, z=z, key=key, breaks=(z,))
    if name == "lipschitz-saw":
        # Kinks are split points so quadrature panels stay smooth.
        kinks = tuple(j * _SAW_HALF for j in range(math.floor(lo / _SAW_HALF),
                                                   math.ceil(hi / _SAW_HALF) + 1)
                      if lo < j * _SAW_HALF < hi)
        return TestFunction(h=_saw, kind="lipschitz", norm_inf=_SAW_HALF, norm_d1=1.0,
                            dh=lambda x: np.where(np.mod(np.asarray(x, dtype=float), 2 * _SAW_HALF)
                                                  >= _SAW_HALF, 1.0, -1.0),
                            key=key, breaks=kinks)
    raise DomainError(f"unknown test function {name!r}; known: {', '.join(REGISTRY_NAMES)}")
