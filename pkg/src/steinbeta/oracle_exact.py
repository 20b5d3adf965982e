"""Brute-force exact oracle for the Polya urn.

Every outcome sequence is built by composing single urn steps, so the
probabilities do not depend on the closed-form pmf being certified.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .errors import SizeLimit
from .polya import PairMomentTable, UrnConfig

__all__ = ["Enumeration", "enumerate_urn", "oracle_pmf", "oracle_pair_moments",
           "oracle_pair_joint", "MAX_N"]

MAX_N = 20


@dataclass(frozen=True)
class Enumeration:
    """All 2^n draw sequences with exact probability and resample red probability."""

    config: UrnConfig
    entries: Tuple[Tuple[Tuple[int, ...], Fraction, Fraction], ...]

    @property
    def n(self) -> int:
        return self.config.n


def enumerate_urn(u: UrnConfig) -> Enumeration:
    """Depth-first enumeration of draw sequences by stepwise urn composition."""
    if u.n > MAX_N:
        raise SizeLimit(f"enumeration is capped at n = {MAX_N}, got {u.n}")
    r, w, c, n = u.r, u.w, u.c, u.n
    out: List[Tuple[Tuple[int, ...], Fraction, Fraction]] = []
    stack = [((), Fraction(1), r, w)]
    while stack:
        seq, prob, red, white = stack.pop()
        if len(seq) == n:
            red_before_last = red - c * seq[-1]
            white_before_last = white - c * (1 - seq[-1])
            rho = Fraction(red_before_last, red_before_last + white_before_last)
            out.append((seq, prob, rho))
            continue
        tot = red + white
        stack.append((seq + (0,), prob * Fraction(white, tot), red, white + c))
        stack.append((seq + (1,), prob * Fraction(red, tot), red + c, white))
    out.sort(key=lambda e: e[0])
    return Enumeration(u, tuple(out))


# Alias matching the operation name; ``enumerate_urn`` avoids shadowing the builtin.
enumerate = enumerate_urn


def oracle_pmf(e: Enumeration) -> List[Fraction]:
    probs = [Fraction(0)] * (e.n + 1)
    for seq, prob, _ in e.entries:
        probs[sum(seq)] += prob
    return probs


def oracle_pair_moments(e: Enumeration) -> PairMomentTable:
    """Aggregate E[V'-V | S_n=k], E[(V'-V)^2 | S_n=k] and P(X_n' != X_n | S_n=k)."""
    n = e.n
    mass = [Fraction(0)] * (n + 1)
    s1 = [Fraction(0)] * (n + 1)
    s2 = [Fraction(0)] * (n + 1)
    sneq = [Fraction(0)] * (n + 1)
    for seq, prob, rho in e.entries:
        k = sum(seq)
        last = seq[-1]
        mass[k] += prob
        for x_new, q in ((1, rho), (0, 1 - rho)):
            d = Fraction(x_new - last, n)
            s1[k] += prob * q * d
            s2[k] += prob * q * d * d
            if x_new != last:
                sneq[k] += prob * q
    u = e.config
    lam = 1 / (n * (u.a + u.b + n - 1))
    m1 = tuple(s1[k] / mass[k] for k in range(n + 1))
    m2 = tuple(s2[k] / mass[k] for k in range(n + 1))
    pneq = tuple(sneq[k] / mass[k] for k in range(n + 1))
    return PairMomentTable(n, lam, m1, m2, pneq)


def oracle_pair_joint(e: Enumeration) -> Dict[Tuple[int, int], Fraction]:
    """Joint law of (S_n, S_n') over all sequences and resample branches."""
    joint: Dict[Tuple[int, int], Fraction] = defaultdict(Fraction)
    for seq, prob, rho in e.entries:
        k = sum(seq)
        base = k - seq[-1]
        joint[(k, base + 1)] += prob * rho
        joint[(k, base)] += prob * (1 - rho)
    return dict(joint)
