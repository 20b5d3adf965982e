import itertools

import numpy as np
import pytest

from steinbeta import beta_stein as bs
from steinbeta import stein_core as sc

SYM_VALUES = (-0.5, 0.0, 1.0, 2.5)
AB_VALUES = (0.5, 1.0, 2.0, 3.5)
SYM_GRID = tuple(itertools.product(SYM_VALUES, SYM_VALUES))
AB_GRID = tuple(itertools.product(AB_VALUES, AB_VALUES))

_TARGETS = {}


def sym_target(alpha, beta):
    """Cached (law, spec, profile) for the [-1, 1] law."""
    key = ("sym", alpha, beta)
    if key not in _TARGETS:
        p = bs.BetaSym(alpha, beta)
        spec = bs.make_target_sym(p)
        _TARGETS[key] = (p, spec, sc.build_profile(spec))
    return _TARGETS[key]


def target01(a, b):
    """Cached (law, spec, profile) for the [0, 1] law."""
    key = ("01", a, b)
    if key not in _TARGETS:
        p = bs.Beta01(a, b)
        spec = bs.make_target_01(p)
        _TARGETS[key] = (p, spec, sc.build_profile(spec))
    return _TARGETS[key]


SMOOTH_G = (
    ("one", lambda x: np.ones_like(x), lambda x: np.zeros_like(x)),
    ("x", lambda x: x, lambda x: np.ones_like(x)),
    ("x2", lambda x: x * x, lambda x: 2 * x),
    ("x3", lambda x: x ** 3, lambda x: 3 * x * x),
    ("sin", np.sin, np.cos),
    ("cos2x", lambda x: np.cos(2 * x), lambda x: -2 * np.sin(2 * x)),
)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
