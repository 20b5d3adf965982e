"""Command-line experiment runner.

Usage::

    python -m steinbeta COMMAND key=value ...

Commands: stein-check, beta-constants, solve, polya-pmf, polya-verify,
polya-rate, distances.  Common keys: format=csv|json, out=PATH, seed=INT.
Exit codes: 0 success, 1 failed verification or numeric failure, 2 usage error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import beta_stein as bs
from . import oracle_exact as oe
from . import polya
from . import stein_core as sc
from .errors import SteinError
from .numerics import SupSearchSpec
from .testfns import make_test_function

__all__ = ["RunConfig", "UsageError", "parse_args", "run", "main"]

COMMANDS = ("stein-check", "beta-constants", "solve", "polya-pmf", "polya-verify",
            "polya-rate", "distances")

KNOWN_KEYS = {"alpha", "beta", "a", "b", "r", "w", "c", "n", "nmin", "nmax", "test-fn",
              "grid", "seed", "out", "format", "z"}

REQUIRED = {
    "stein-check": (),
    "beta-constants": (),
    "solve": ("test-fn",),
    "polya-pmf": ("r", "w", "c", "n"),
    "polya-verify": ("r", "w", "c", "n"),
    "polya-rate": ("r", "w", "c", "nmin", "nmax", "test-fn"),
    "distances": ("r", "w", "c"),
}

SYNOPSIS = """usage: steinbeta COMMAND key=value ...
  stein-check    alpha= beta= | a= b=                 standing conditions and Stein residuals
  beta-constants alpha= beta= | a= b= [grid=]         K1, K2, C1, C2 with boundary diagnostics
  solve          alpha= beta= | a= b= test-fn= [grid=] table of x, g_h(x), g_h'(x)
  polya-pmf      r= w= c= n=                          exact pmf of S_n
  polya-verify   r= w= c= n=                          exact oracle equality suite
  polya-rate     r= w= c= nmin= nmax= test-fn= [grid=] exact error vs the O(1/n) bound
  distances      r= w= c= n= | nmin= nmax=            Kolmogorov and Wasserstein distances
common keys: format=csv|json out=PATH seed=INT (default 42)
test functions: x, x2, sinkx(k), indicator(z), lipschitz-saw
"""


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: Dict[str, str] = field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.params.get(key, default)

    def num(self, key: str, default=None) -> float:
        v = self.params.get(key)
        if v is None:
            if default is None:
                raise UsageError(f"missing key {key}")
            return default
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"{key} must be a number, got {v!r}")

    def integer(self, key: str, default=None) -> int:
        v = self.params.get(key)
        if v is None:
            if default is None:
                raise UsageError(f"missing key {key}")
            return default
        try:
            return int(v)
        except ValueError:
            raise UsageError(f"{key} must be an integer, got {v!r}")

    @property
    def fmt(self) -> str:
        return self.params.get("format", "csv")

    @property
    def seed(self) -> int:
        return self.integer("seed", 42)


def parse_args(argv: Sequence[str]) -> RunConfig:
    if not argv:
        raise UsageError("missing command")
    cmd = argv[0]
    if cmd not in COMMANDS:
        raise UsageError(f"unknown command {cmd!r}")
    params: Dict[str, str] = {}
    for tok in argv[1:]:
        if "=" not in tok:
            raise UsageError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        if k not in KNOWN_KEYS:
            raise UsageError(f"unknown key {k!r}")
        params[k] = v
    params.setdefault("seed", "42")
    params.setdefault("format", "csv")
    if params["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    for k in REQUIRED[cmd]:
        if k not in params:
            raise UsageError(f"{cmd} needs key {k}")
    if cmd in ("stein-check", "beta-constants", "solve"):
        has_sym = "alpha" in params and "beta" in params
        has_01 = "a" in params and "b" in params
        if has_sym == has_01:
            raise UsageError(f"{cmd} needs exactly one of alpha=,beta= or a=,b=")
    if cmd == "distances" and "n" not in params and not ("nmin" in params and "nmax" in params):
        raise UsageError("distances needs n= or nmin= and nmax=")
    return RunConfig(cmd, params)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return str(v)


def _json_value(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else _fmt_value(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return _fmt_value(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def render(columns: Sequence[str], rows: List[Dict], meta: Dict, fmt: str) -> str:
    if fmt == "json":
        obj = {"meta": _json_value(meta),
               "rows": [{c: _json_value(r[c]) for c in columns} for r in rows]}
        return json.dumps(obj, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_fmt_value(r[c]) for c in columns])
    return buf.getvalue()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("STEIN_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence):
    """Map preserving input order, on at most STEIN_THREADS workers."""
    k = _workers()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _target(cfg: RunConfig):
    if "alpha" in cfg.params:
        p = bs.BetaSym(cfg.num("alpha"), cfg.num("beta"))
        return p, bs.make_target_sym(p), (-1.0, 1.0)
    p01 = bs.Beta01(cfg.num("a"), cfg.num("b"))
    return p01, bs.make_target_01(p01), (0.0, 1.0)


def _sym_of(p):
    return p if isinstance(p, bs.BetaSym) else bs.to_sym(p)


def _smooth_library():
    return [
        ("one", lambda x: np.ones_like(x), lambda x: np.zeros_like(x)),
        ("x", lambda x: x, lambda x: np.ones_like(x)),
        ("x2", lambda x: x * x, lambda x: 2 * x),
        ("x3", lambda x: x ** 3, lambda x: 3 * x * x),
        ("sin", np.sin, np.cos),
        ("cos2x", lambda x: np.cos(2 * x), lambda x: -2 * np.sin(2 * x)),
    ]


def cmd_stein_check(cfg: RunConfig):
    p, spec, (lo, hi) = _target(cfg)
    rows = []

    def add(check, value, threshold, ok):
        rows.append({"check": check, "value": float(value), "threshold": float(threshold),
                     "pass": bool(ok)})

    v = sc.validate_target(spec)
    add("density_mass", abs(v["mass"] - 1.0), 1e-9, abs(v["mass"] - 1.0) <= 1e-9)
    add("gamma_mean_zero", abs(v["gamma_mean"]), 1e-9, abs(v["gamma_mean"]) <= 1e-9)
    add("gamma_sign_changes", v["sign_changes"], 1, v["sign_changes"] == 1)
    prof = sc.build_profile(spec)
    xs = np.linspace(lo, hi, 1026)[1:-1]
    Ivals = prof.I_many(xs)
    dev = float(np.max(np.abs(prof.spec.pv(xs) * _eta_closed(p, xs) - Ivals)) / np.max(Ivals))
    add("eta_identity_rel", dev, 1e-8, dev <= 1e-8)
    worst = 0.0
    for name, g, dg in _smooth_library():
        r = sc.stein_residual(spec, g, dg, prof)
        worst = max(worst, r)
        add(f"residual_{name}", r, 1e-8, r <= 1e-8)
    tilt = _tilted_law(spec)
    tw = max(sc.stein_residual(spec, g, dg, prof, law=tilt) for _, g, dg in _smooth_library()[1:])
    add("tilt_detection", tw, 1e-3, tw >= 1e-3)
    w = spec.outside.window
    chk = sc.check_outside(spec, np.linspace(lo - w, lo - 0.05, 5), np.linspace(hi + 0.05, hi + w, 5))
    add("outside_dF", chk["dF"], 1e-5, chk["dF"] <= 1e-5)
    add("outside_q_eta", chk["q_eta"], 1e-8, chk["q_eta"] <= 1e-8)
    add("outside_eta_negative", chk["eta_out_max"], 0.0, chk["eta_out_max"] < 0)
    meta = {"command": "stein-check", "target": spec.name}
    return ["check", "value", "threshold", "pass"], rows, meta, all(r["pass"] for r in rows)


def _eta_closed(p, xs):
    if isinstance(p, bs.BetaSym):
        return 1.0 - xs * xs
    return xs * (1.0 - xs)


def _tilted_law(spec: sc.TargetSpec, eps: float = 0.1):
    """Density proportional to p(x)(1 + eps t(x)) with t mapping the support to [-1, 1]."""
    lo, hi = spec.lo, spec.hi
    t = lambda x: (2.0 * np.asarray(x, dtype=float) - lo - hi) / (hi - lo)
    from .numerics import integrate
    Z = integrate(lambda x: spec.pv(x) * (1.0 + eps * t(x)), lo, hi, spec.quad)
    return lambda x: spec.pv(x) * (1.0 + eps * t(x)) / Z


def _sup_spec(cfg: RunConfig) -> SupSearchSpec:
    return SupSearchSpec(coarse_points=cfg.integer("grid", 1024))


def cmd_beta_constants(cfg: RunConfig):
    p, spec, _ = _target(cfg)
    ps = _sym_of(p)
    consts = bs.stein_constants(ps, _sup_spec(cfg))
    s_lo = float(bs.S_interior(ps, np.array([-1.0 + 1e-5]))[0])
    s_hi = float(bs.S_interior(ps, np.array([1.0 - 1e-5]))[0])
    lim = consts.boundary_limits
    rows = [
        {"name": "K1", "value": consts.K1},
        {"name": "K2", "value": consts.K2},
        {"name": "C1", "value": consts.C1},
        {"name": "C2", "value": consts.C2},
        {"name": "argmax_S", "value": consts.argmax_S},
        {"name": "sup_S", "value": consts.parts["sup_S"]},
        {"name": "sup_Sl", "value": consts.parts["sup_Sl"]},
        {"name": "sup_Sr", "value": consts.parts["sup_Sr"]},
        {"name": "S_limit_minus1", "value": lim["S_at_minus1"]},
        {"name": "S_limit_plus1", "value": lim["S_at_plus1"]},
        {"name": "S_numeric_minus1", "value": s_lo},
        {"name": "S_numeric_plus1", "value": s_hi},
        {"name": "Sl_limit_minus1", "value": lim["Sl_at_minus1"]},
        {"name": "Sr_limit_plus1", "value": lim["Sr_at_plus1"]},
        {"name": "lip_official", "value": consts.lip_official},
        {"name": "lip_sharp", "value": consts.lip_sharp},
    ]
    ok = abs(s_lo - lim["S_at_minus1"]) <= 1e-2 and abs(s_hi - lim["S_at_plus1"]) <= 1e-2
    meta = {"command": "beta-constants", "alpha": ps.alpha, "beta": ps.beta,
            "a": ps.beta + 1.0, "b": ps.alpha + 1.0, "grid": consts.grid_meta.coarse_points}
    return ["name", "value"], rows, meta, ok


def cmd_solve(cfg: RunConfig):
    p, spec, (lo, hi) = _target(cfg)
    tf = make_test_function(cfg.get("test-fn"), (lo - 1.0, hi + 1.0))
    prof = sc.build_profile(spec)
    n = cfg.integer("grid", 65)
    if n < 2:
        raise UsageError("grid must be at least 2")
    xs = np.linspace(lo, hi, n)
    rows = []
    for x in xs:
        g = sc.solve_stein(spec, prof, tf, float(x))
        try:
            d = sc.solution_derivative(spec, prof, tf, float(x))
        except SteinError:
            d = float("nan")
        rows.append({"x": float(x), "g": g, "g_prime": d})
    meta = {"command": "solve", "target": spec.name, "test_fn": cfg.get("test-fn"),
            "mu_h": prof.mu(tf)}
    return ["x", "g", "g_prime"], rows, meta, True


def _urn(cfg: RunConfig, n_key="n") -> polya.UrnConfig:
    return polya.UrnConfig(cfg.integer("r"), cfg.integer("w"), cfg.integer("c"), cfg.integer(n_key))


def cmd_polya_pmf(cfg: RunConfig):
    u = _urn(cfg)
    law = polya.pmf(u)
    rows = [{"k": k, "prob": law.prob(k), "prob_float": float(law.prob(k)),
             "log_prob": law.log_probs[k]} for k in range(u.n + 1)]
    meta = {"command": "polya-pmf", "r": u.r, "w": u.w, "c": u.c, "n": u.n,
            "a": u.a, "b": u.b, "underflow": law.underflow}
    return ["k", "prob", "prob_float", "log_prob"], rows, meta, True


def verify_suite(u: polya.UrnConfig, seed: int = 42) -> List[Dict]:
    """Exact oracle checks for one configuration; returns (check, pass) rows."""
    rows = []

    def add(name, ok, detail=""):
        rows.append({"check": name, "pass": bool(ok), "detail": detail})

    law = polya.pmf(u)
    add("pmf_sums_to_one", sum(law.probs) == 1)
    e = oe.enumerate_urn(u)
    add("oracle_pmf_equal", oe.oracle_pmf(e) == law.probs)
    tab = polya.pair_moments(u)
    om = oe.oracle_pair_moments(e)
    add("regression_m1_equal", om.m1 == tab.m1)
    add("second_moment_m2_equal", om.m2 == tab.m2)
    add("pneq_equal", om.pneq == tab.pneq)
    add("regression_aggregate_zero", sum(pk * m for pk, m in zip(law.probs, tab.m1)) == 0)
    joint = oe.oracle_pair_joint(e)
    add("pair_symmetry", all(joint.get((j, k), 0) == v for (k, j), v in joint.items()))
    by_sum: Dict[int, set] = {}
    for seq, prob, _ in e.entries:
        by_sum.setdefault(sum(seq), set()).add(prob)
    add("exchangeability", all(len(s) == 1 for s in by_sum.values()))
    seq_ok = True
    for seq, prob, _ in e.entries:
        k = sum(seq)
        closed = Fraction(math.prod(u.r + u.c * i for i in range(k))
                          * math.prod(u.w + u.c * j for j in range(u.n - k)),
                          math.prod(u.r + u.w + u.c * l for l in range(u.n)))
        seq_ok &= closed == prob
    add("sequence_product_formula", seq_ok)
    ed = polya.eta_discrepancy_exact(u, law, tab)
    add("eta_discrepancy_bound", ed <= (abs(u.a - u.b) + u.a) / (2 * u.n), _fmt_value(ed))
    tt = polya.third_term_exact(u)
    add("third_term_bound", tt <= Fraction(1, 6 * u.n) + (u.a + u.b - 1) / (6 * u.n * u.n),
        _fmt_value(tt))
    rng = np.random.default_rng(seed)
    s, s2 = polya.gibbs_pair_batch(u, rng, 20000)
    mean = float(u.a / (u.a + u.b))
    var = float(sum(pk * (Fraction(k, u.n) - u.a / (u.a + u.b)) ** 2 for k, pk in enumerate(law.probs)))
    se = math.sqrt(var / s.size) if var > 0 else 0.0
    dev = abs(float(np.mean(s2)) / u.n - mean)
    add("gibbs_marginal_mean", dev <= 5 * se + 1e-12, "%.3g sigma" % (dev / se if se else 0.0))
    return rows


def cmd_polya_verify(cfg: RunConfig):
    u = _urn(cfg)
    rows = verify_suite(u, cfg.seed)
    npass = sum(r["pass"] for r in rows)
    meta = {"command": "polya-verify", "r": u.r, "w": u.w, "c": u.c, "n": u.n,
            "passed": npass, "failed": len(rows) - npass}
    return ["check", "pass", "detail"], rows, meta, npass == len(rows)


def _sweep(nmin: int, nmax: int) -> List[int]:
    if nmin < 1 or nmax < nmin:
        raise UsageError("need 1 <= nmin <= nmax")
    ns = []
    n = nmin
    while n <= nmax:
        ns.append(n)
        n *= 2
    if ns[-1] != nmax:
        ns.append(nmax)
    return ns


def cmd_polya_rate(cfg: RunConfig):
    base = _urn(cfg, "nmin")
    ns = _sweep(cfg.integer("nmin"), cfg.integer("nmax"))
    tf = make_test_function(cfg.get("test-fn"), (0.0, 1.0))
    if tf.kind != "c2":
        raise UsageError("polya-rate needs a C2 test function (x, x2, sinkx(k))")
    consts = bs.constants_01(bs.Beta01(float(base.a), float(base.b)), _sup_spec(cfg))
    rows, slope = polya.rate_table(base, ns, tf, consts.C1, consts.C2)
    cols = ["n", "exact_error", "bound", "lambda", "eta_discrepancy", "third_term",
            "slope_running", "slope"]
    out = [{"n": r.n, "exact_error": r.exact_error, "bound": r.bound, "lambda": r.lam,
            "eta_discrepancy": r.eta_discrepancy, "third_term": r.third_term,
            "slope_running": r.slope_running, "slope": slope} for r in rows]
    ok = all(r.bound >= r.exact_error for r in rows)
    meta = {"command": "polya-rate", "r": base.r, "w": base.w, "c": base.c,
            "a": base.a, "b": base.b, "test_fn": cfg.get("test-fn"),
            "C1": consts.C1, "C2": consts.C2, "slope": slope, "bound_dominates": ok}
    return cols, out, meta, ok


def cmd_distances(cfg: RunConfig):
    if "n" in cfg.params:
        ns = [cfg.integer("n")]
    else:
        ns = _sweep(cfg.integer("nmin"), cfg.integer("nmax"))
    r, w, c = cfg.integer("r"), cfg.integer("w"), cfg.integer("c")
    res = _pmap(lambda n: polya.distance_diagnostics(polya.UrnConfig(r, w, c, n)), ns)
    rows = [{"n": n, "kolmogorov": d["kolmogorov"], "wasserstein": d["wasserstein"]}
            for n, d in zip(ns, res)]
    meta = {"command": "distances", "r": r, "w": w, "c": c}
    return ["n", "kolmogorov", "wasserstein"], rows, meta, True


HANDLERS = {
    "stein-check": cmd_stein_check,
    "beta-constants": cmd_beta_constants,
    "solve": cmd_solve,
    "polya-pmf": cmd_polya_pmf,
    "polya-verify": cmd_polya_verify,
    "polya-rate": cmd_polya_rate,
    "distances": cmd_distances,
}


def run(config: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cols, rows, meta, ok = HANDLERS[config.command](config)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n{SYNOPSIS}")
        return 2
    except (SteinError, ArithmeticError, ValueError) as exc:
        stderr.write(f"error: {config.command} failed for "
                     f"{' '.join(f'{k}={v}' for k, v in sorted(config.params.items()))}: {exc}\n")
        return 1
    text = render(cols, rows, meta, config.fmt)
    out = config.get("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if ok else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in ("-h", "--help", "help"):
        sys.stdout.write(SYNOPSIS)
        return 0
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n{SYNOPSIS}")
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
