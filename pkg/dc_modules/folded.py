"""
Folded concave penalties theta(t) = f(|t|).

theta is dc on the real line exactly when f'(0;+) is finite. For
f'(0;+) <= 0 theta is concave; otherwise theta = max(f1, f2) with the two
concave branches

    f1 = f on [0, inf), the tangent half-line on [t-, 0], f(-t) left of t-
    f2 = f(-t) on (-inf, 0], the mirrored half-line on [0, t+], f right of t+

and theta = (-min(f1, f2)) - (-(f1 + f2)).
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import sympy
from scipy.optimize import bisect

from dc_modules.dc_config import (
    CONVEXITY_TOL,
    DEFAULT_FOLD_RADIUS,
    INFINITY_THRESHOLD,
    ROOT_TOL,
)
from dc_modules.convex_core import Domain, MaxOf, NegConcaveUnivariate, Sum, constant
from dc_modules.dc_core import DcFunction
from dc_modules.errors import ArgumentError, InputFormatError, NotDcError

DIVIDED_DIFFERENCE_STEPS = 40
RICHARDSON_STEP = 20
BISECTION_TOL = 1e-10
CURVE_POINTS = 21
CONCAVITY_SAMPLES = 400


# ============================================================================
# CATALOG
# ============================================================================

def _scad(a: float = 3.7, lam: float = 1.0):
    if a <= 2.0 or lam <= 0.0:
        raise ArgumentError("scad needs a > 2 and lambda > 0")

    def f(u):
        u = np.asarray(u, dtype=float)
        mid = (2.0 * a * lam * u - u * u - lam * lam) / (2.0 * (a - 1.0))
        return np.where(u <= lam, lam * u, np.where(u <= a * lam, mid, lam * lam * (a + 1.0) / 2.0))
    return f, lam


def _mcp(a: float = 3.0, lam: float = 1.0):
    if a <= 0.0 or lam <= 0.0:
        raise ArgumentError("mcp needs a > 0 and lambda > 0")

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= a * lam, lam * u - u * u / (2.0 * a), a * lam * lam / 2.0)
    return f, lam


def _capped_l1(a: float = 1.0, lam: float = 1.0):
    if a <= 0.0 or lam <= 0.0:
        raise ArgumentError("capped_l1 needs a > 0 and lambda > 0")
    return (lambda u: lam * np.minimum(np.asarray(u, dtype=float), a)), lam


def _logpen(gamma: float = 1.0):
    if gamma <= 0.0:
        raise ArgumentError("logpen needs gamma > 0")
    return (lambda u: np.log1p(np.asarray(u, dtype=float) / gamma)), 1.0 / gamma


def _sqrt1p():
    return (lambda u: np.sqrt(np.asarray(u, dtype=float) + 1.0)), 0.5


def _fig1a():
    return (lambda u: -np.asarray(u, dtype=float) ** 2 - 1.0), 0.0


def _fig1b1():
    return (lambda u: -2.0 * (np.asarray(u, dtype=float) - 1.0) ** 2 + 3.0), 4.0


def _sqrtabs():
    return (lambda u: np.sqrt(np.asarray(u, dtype=float))), math.inf


# id -> (factory, parameter names accepted in "id:k=v,...")
CATALOG: Dict[str, Tuple[Callable, Tuple[str, ...]]] = {
    "scad": (_scad, ("a", "lambda")),
    "mcp": (_mcp, ("a", "lambda")),
    "capped_l1": (_capped_l1, ("a", "lambda")),
    "logpen": (_logpen, ("gamma",)),
    "sqrt1p": (_sqrt1p, ()),
    "fig1a": (_fig1a, ()),
    "fig1b1": (_fig1b1, ()),
    "fig1b2": (_sqrt1p, ()),
    "sqrtabs": (_sqrtabs, ()),
}


@dataclass
class FoldedSpec:
    """Univariate concave f on [0, inf) with its working interval [-T, T]."""

    f: Callable[[np.ndarray], np.ndarray]
    label: str
    derivative: Optional[float] = None          # analytic f'(0;+) when known
    radius: float = DEFAULT_FOLD_RADIUS
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ArgumentError("working interval radius must be positive")

    def theta(self, t):
        return np.asarray(self.f(np.abs(np.asarray(t, dtype=float))), dtype=float)

    def to_dict(self):
        return {"penalty": self.label, "params": dict(self.params), "radius": self.radius}


def _expression_penalty(text: str, radius: float) -> FoldedSpec:
    u = sympy.Symbol("u", nonnegative=True)
    try:
        expr = sympy.sympify(text, locals={"u": u})
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise InputFormatError(f"cannot parse penalty expression {text!r}: {e}")
    if not isinstance(expr, sympy.Expr):
        raise InputFormatError(f"penalty expression {text!r} is not a formula in u")
    if expr.free_symbols - {u}:
        raise InputFormatError(f"penalty expression may only use 'u', got {sorted(map(str, expr.free_symbols))}")
    f = sympy.lambdify(u, expr, "numpy")
    derivative = None
    try:
        limit = sympy.limit(sympy.diff(expr, u), u, 0, "+")
        if limit == sympy.oo:
            derivative = math.inf
        elif limit.is_real and limit.is_finite:
            derivative = float(limit)
    except (NotImplementedError, ValueError, TypeError):
        derivative = None

    def vectorized(x):
        return np.broadcast_to(np.asarray(f(np.asarray(x, dtype=float)), dtype=float), np.shape(x)).copy()

    return FoldedSpec(vectorized, f"expr:{text}", derivative, radius)


def parse_penalty(text: str, radius: float = DEFAULT_FOLD_RADIUS) -> FoldedSpec:
    """
    Penalty from a catalog id ("scad:a=3.7,lambda=1", "sqrt1p", ...) or a
    sympy expression in u, with or without the "expr:" prefix ("log(1+u)").
    """
    text = text.strip()
    if text.startswith("expr:"):
        spec = _expression_penalty(text[len("expr:"):], radius)
        check_concavity(spec)
        return spec
    name, _, rest = text.partition(":")
    if name not in CATALOG:
        try:
            spec = _expression_penalty(text, radius)
        except InputFormatError as e:
            raise InputFormatError(f"unknown penalty {name!r}; known: {sorted(CATALOG)} or a formula in u ({e})")
        check_concavity(spec)
        return spec
    factory, allowed = CATALOG[name]
    params: Dict[str, float] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in allowed:
            raise InputFormatError(f"penalty {name!r} accepts {list(allowed)}, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise InputFormatError(f"penalty parameter {item!r} is not a number")
    kwargs = {("lam" if k == "lambda" else k): v for k, v in params.items()}
    f, derivative = factory(**kwargs)
    spec = FoldedSpec(f, name, derivative, radius, params)
    check_concavity(spec)
    return spec


def check_concavity(spec: FoldedSpec, samples: int = CONCAVITY_SAMPLES) -> None:
    """Midpoint concavity of f on [0, T] and continuity at 0 (sampled)."""
    rng = np.random.default_rng(0)
    X = spec.radius * rng.random(samples)
    Y = spec.radius * rng.random(samples)
    fx, fy, fm = spec.f(X), spec.f(Y), spec.f(0.5 * (X + Y))
    scale = 1.0 + np.abs(np.stack([fx, fy, fm])).max(axis=0)
    gap = (0.5 * (fx + fy) - fm) / scale
    if gap.max() > CONVEXITY_TOL:
        k = int(np.argmax(gap))
        raise ArgumentError(f"{spec.label} is not concave on [0, {spec.radius}] near u={X[k]:.4g}, {Y[k]:.4g}")
    f0 = float(spec.f(np.array([0.0]))[0])
    near = float(spec.f(np.array([2.0 ** -40]))[0])
    if not np.isfinite(f0) or abs(near - f0) > 1e-3 * (1.0 + abs(f0)):
        raise ArgumentError(f"{spec.label} is not continuous at 0")


# ============================================================================
# DECOMPOSITION
# ============================================================================

def right_derivative_at_zero(spec: FoldedSpec) -> float:
    """f'(0;+): the analytic value when known, else divided differences at 2^-k."""
    if spec.derivative is not None:
        return float(spec.derivative)
    f0 = float(spec.f(np.array([0.0]))[0])
    taus = 2.0 ** -np.arange(1, DIVIDED_DIFFERENCE_STEPS + 1, dtype=float)
    quotients = (np.asarray(spec.f(taus), dtype=float) - f0) / taus
    # concavity makes the quotients nondecreasing as tau shrinks
    if quotients[-1] > INFINITY_THRESHOLD and quotients[-1] > quotients[-2]:
        return math.inf
    k = RICHARDSON_STEP
    return float(2.0 * quotients[k] - quotients[k - 1])


def _tangent_root(gap: Callable[[float], float], radius: float) -> float:
    """
    Right-most s in [-radius, 0) with gap(s) = 0, where gap is concave, zero at
    0 and positive just left of it; -inf when gap stays positive on [-radius, 0).
    """
    hi, lo = None, -1.0
    while gap(lo) > 0.0:
        if lo <= -radius:
            return -math.inf
        hi, lo = lo, max(2.0 * lo, -radius)
    if hi is None:
        hi = -0.5
        while gap(hi) <= 0.0:
            lo, hi = hi, 0.5 * hi
            if hi > -ROOT_TOL:
                return lo
    if gap(lo) == 0.0:
        return lo
    return float(bisect(gap, lo, hi, xtol=BISECTION_TOL))


def tangent_crossings(spec: FoldedSpec, slope: Optional[float] = None) -> Tuple[float, float]:
    """(t-, t+): where the half-lines f(0) +- f'(0;+) t meet theta again inside [-T, T]."""
    d = right_derivative_at_zero(spec) if slope is None else slope
    f0 = float(spec.f(np.array([0.0]))[0])

    def gap(s):
        return float(spec.f(np.array([-s]))[0]) - f0 - d * s

    t_minus = _tangent_root(gap, spec.radius)
    return t_minus, -t_minus


def concave_branches(spec: FoldedSpec):
    """The concave functions f1, f2 with theta = max(f1, f2), plus (t-, t+)."""
    d = right_derivative_at_zero(spec)
    f0 = float(spec.f(np.array([0.0]))[0])
    t_minus, t_plus = tangent_crossings(spec, d)

    def f1(t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0.0, spec.f(np.maximum(t, 0.0)), f0 + d * t)
        if np.isfinite(t_minus):
            out = np.where(t < t_minus, spec.f(np.maximum(-t, 0.0)), out)
        return out

    def f2(t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= 0.0, spec.f(np.maximum(-t, 0.0)), f0 - d * t)
        if np.isfinite(t_plus):
            out = np.where(t > t_plus, spec.f(np.maximum(t, 0.0)), out)
        return out

    return f1, f2, t_minus, t_plus


def decompose(spec: FoldedSpec) -> DcFunction:
    """
    theta = g - h on [-T, T] with convex g, h.

    Raises:
        NotDcError: f'(0;+) is infinite
    """
    d = right_derivative_at_zero(spec)
    if not np.isfinite(d):
        raise NotDcError(f"{spec.label}: f'(0;+) is infinite, so f(|t|) is not dc")
    domain = Domain.box([-spec.radius], [spec.radius])
    if d <= 0.0:
        neg_theta = NegConcaveUnivariate(spec.theta, label=f"{spec.label}(|t|)")
        return DcFunction(constant(1), neg_theta, domain,
                          meta={"case": "concave", "derivative": d, "t_minus": None, "t_plus": None})
    f1, f2, t_minus, t_plus = concave_branches(spec)
    neg1 = NegConcaveUnivariate(f1, label="f1")
    neg2 = NegConcaveUnivariate(f2, label="f2")
    meta = {
        "case": "tangent_split",
        "derivative": d,
        "t_minus": float(t_minus) if np.isfinite(t_minus) else "-inf",
        "t_plus": float(t_plus) if np.isfinite(t_plus) else "inf",
    }
    return DcFunction(MaxOf([neg1, neg2]), Sum([neg1, neg2]), domain, meta=meta)


def sampled_curve(spec: FoldedSpec, dc: DcFunction, points: int = CURVE_POINTS) -> Dict[str, list]:
    """(t, theta, g, h) on an even grid of [-T, T]."""
    t = np.linspace(-spec.radius, spec.radius, points)
    X = t[:, None]
    return {
        "t": t.tolist(),
        "theta": spec.theta(t).tolist(),
        "g": dc.g.eval_batch(X).tolist(),
        "h": dc.h.eval_batch(X).tolist(),
    }
