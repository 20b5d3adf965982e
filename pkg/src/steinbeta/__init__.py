"""Stein's method of exchangeable pairs for Beta targets and the Polya urn."""

from ._backend import BACKEND
from .beta_stein import Beta01, BetaSym, constants_01, stein_constants
from .errors import (DomainError, ExactIdentityError, InvalidTarget, MissingNorm, NoBracket,
                     NonConvergence, SizeLimit, SteinError)
from .polya import UrnConfig, pair_moments, pmf, rate_table
from .stein_core import TargetSpec, TestFunction, build_profile, solve_stein
from .testfns import make_test_function

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Beta01",
    "BetaSym",
    "DomainError",
    "ExactIdentityError",
    "InvalidTarget",
    "MissingNorm",
    "NoBracket",
    "NonConvergence",
    "SizeLimit",
    "SteinError",
    "TargetSpec",
    "TestFunction",
    "UrnConfig",
    "build_profile",
    "constants_01",
    "make_test_function",
    "pair_moments",
    "pmf",
    "rate_table",
    "solve_stein",
    "stein_constants",
    "__version__",
]
