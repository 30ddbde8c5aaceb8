"""Quadrature oracles for three calculus inequalities used by the bilinear estimates.

    (i)   int dx / (<x-q>^{2 beta} <x-r>^{2 gamma})   <~ <q-r>^{-2 min(beta, gamma)}
    (ii)  int dx / (<x-q>^{2 beta} <x-r>^{2(1-gamma)}) <~ <q-r>^{-2(1-gamma)}
    (iii) int dx / <p x^2 + q x + r>^alpha             <~ 1/|p|

Each integral is split at its breakpoints and integrated adaptively on
``[-X, X]``; the two tails are integrated on infinite intervals and an
analytic bound on their size is reported alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ParameterError
from .fitting import loglog_slope
from .norms import bracket


@dataclass(frozen=True)
class OracleResult:
    which: str
    params: dict
    lhs: float
    rhs: float
    tail_bound: float

    @property
    def constant(self) -> float:
        return self.lhs / self.rhs


def _validate(which, alpha, beta, gamma, p):
    if which in ("i", "ii"):
        if not (0.5 < beta <= 1 and 0.5 < gamma <= 1):
            raise ParameterError(f"need 1/2 < beta, gamma <= 1, got beta={beta}, gamma={gamma}")
    elif which == "iii":
        if not alpha > 0.5:
            raise ParameterError(f"need alpha > 1/2, got {alpha}")
        if p == 0:
            raise ParameterError("need p != 0")
    else:
        raise ParameterError(f"unknown inequality {which!r}; expected i, ii or iii")


def _integrate(fn, points, X, width=1.0):
    # geometric refinement around each breakpoint keeps slowly decaying peaks resolved
    refined = set(points)
    for c in points:
        for k in range(-4, int(math.ceil(math.log10(2 * X / width))) + 1):
            refined.update((c - width * 10.0 ** k, c + width * 10.0 ** k))
    pts = sorted({-X, X, *[x for x in refined if -X < x < X]})
    body = sum(quad(fn, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)[0] for a, b in zip(pts[:-1], pts[1:]))
    tails = (quad(fn, X, np.inf, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
             + quad(fn, -np.inf, -X, limit=400, epsabs=1e-14, epsrel=1e-12)[0])
    return body + tails


def calculus_oracle(which: str, params: dict) -> OracleResult:
    """Evaluate one inequality at ``params`` (keys ``alpha, beta, gamma, p, q, r``)."""
    alpha = params.get("alpha", 1.0)
    beta = params.get("beta", 1.0)
    gamma = params.get("gamma", 1.0)
    p = params.get("p", 1.0)
    q = params.get("q", 0.0)
    r = params.get("r", 0.0)
    _validate(which, alpha, beta, gamma, p)
    if which in ("i", "ii"):
        e2 = 2 * gamma if which == "i" else 2 * (1 - gamma)
        decay = 2 * beta + e2

        def fn(x):
            return bracket(x - q) ** (-2 * beta) * bracket(x - r) ** (-e2)

        X = 2 * max(abs(q), abs(r)) + 10.0
        # for |x| > X: <x-q>, <x-r> >= |x|/2
        tail = 2 * 2 ** decay * X ** (1 - decay) / (decay - 1)
        lhs = _integrate(fn, [q, r, 0.5 * (q + r)], X)
        rhs = bracket(q - r) ** (-2 * min(beta, gamma)) if which == "i" else bracket(q - r) ** (-e2)
    else:
        def fn(x):
            return bracket(p * x * x + q * x + r) ** (-alpha)

        pts = [-q / (2 * p)]
        disc = q * q - 4 * p * r
        if disc >= 0:
            root = math.sqrt(disc)
            pts += [(-q - root) / (2 * p), (-q + root) / (2 * p)]
        # for |x| > X: |p x^2 + q x + r| >= |p| x^2 / 2
        X = 2 * (abs(q) / abs(p) + math.sqrt(abs(r) / abs(p))) + 10 / math.sqrt(abs(p))
        tail = 2 * (abs(p) / 2) ** (-alpha) * X ** (1 - 2 * alpha) / (2 * alpha - 1)
        # peak width near a simple root ~ 1/|2 p x0 + q|, at most 1/sqrt|p|
        lhs = _integrate(fn, pts, X, width=min(1 / math.sqrt(abs(p)), 1 / max(math.sqrt(abs(disc)), 1e-300)))
        rhs = 1 / abs(p)
    return OracleResult(which, {"alpha": alpha, "beta": beta, "gamma": gamma, "p": p, "q": q, "r": r},
                        float(lhs), float(rhs), float(tail))


@dataclass(frozen=True)
class SweepResult:
    which: str
    variable: str
    values: tuple
    constants: tuple
    trend_slope: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.trend_slope <= self.tolerance

    def verdict_line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return (f"inequality ({self.which}) over {self.variable}: trend {self.trend_slope:.3f} "
                f"expected <= {self.tolerance:.2f}, max constant {max(self.constants):.4g}: {word}")


def sweep_separation(which: str, separations=(10, 100, 1000, 10000), tolerance: float = 0.1,
                     **fixed) -> SweepResult:
    """Constants of (i) or (ii) as ``|q - r|`` grows; trend fitted against ``<q - r>``."""
    vals, consts = [], []
    for d in separations:
        res = calculus_oracle(which, {**fixed, "q": 0.0, "r": float(d)})
        vals.append(float(bracket(d)))
        consts.append(res.constant)
    return SweepResult(which, "<q-r>", tuple(vals), tuple(consts), loglog_slope(vals, consts), tolerance)


def sweep_p(p_values=(1e-3, 1e-2, 1e-1, 1.0), q: float = 1.0, r: float = -3.0, alpha: float = 1.0,
            tolerance: float = 0.1) -> SweepResult:
    """Constants of (iii) as ``|p| -> 0``; trend fitted against ``1/|p|``."""
    vals, consts = [], []
    for p in p_values:
        res = calculus_oracle("iii", {"alpha": alpha, "p": p, "q": q, "r": r})
        vals.append(1 / abs(p))
        consts.append(res.constant)
    return SweepResult("iii", "1/|p|", tuple(vals), tuple(consts), loglog_slope(vals, consts), tolerance)


def sweep_quadratic_shift(q_values=(1, 10, 100, 1000), p: float = 1.0, alpha: float = 1.0,
                          tolerance: float = 0.1) -> SweepResult:
    """Constants of (iii) for ``r = -q^2`` (two far-apart real roots) as ``q`` grows."""
    vals, consts = [], []
    for q in q_values:
        res = calculus_oracle("iii", {"alpha": alpha, "p": p, "q": float(q), "r": -float(q) ** 2})
        vals.append(float(q))
        consts.append(res.constant)
    return SweepResult("iii", "q (r = -q^2)", tuple(vals), tuple(consts), loglog_slope(vals, consts), tolerance)
