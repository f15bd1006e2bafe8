"""
The dc-function algebra.

A DcFunction is a pair (g, h) of ConvexExpr trees on a shared Domain with
value g - h. Every combinator below returns a new DcFunction whose
components are again ConvexExpr trees, so results can be combined further.
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dc_modules.dc_config import SHIFT_MARGIN, LOG_FLOOR, CERTIFY_RADIUS, CERTIFY_POINTS
from dc_modules.convex_core import (
    Affine,
    ConvexExpr,
    DcNormEnvelope,
    Domain,
    IncreasingConvexComposite,
    MaxOf,
    NegLogEnvelope,
    NonnegScale,
    SquareOfNonneg,
    Sum,
    constant,
    evaluate,
    expr_from_dict,
    infimum_estimate,
)
from dc_modules.errors import (
    ArgumentError,
    CertificationError,
    DomainError,
    InputFormatError,
    UnboundedDomainError,
)


class DcFunction:
    """f = g - h on a convex domain."""

    def __init__(self, g: ConvexExpr, h: ConvexExpr, domain: Domain, meta: Optional[Dict] = None):
        if g.dim != domain.dim or h.dim != domain.dim:
            raise DomainError(f"components of dimension {g.dim}/{h.dim} on a {domain.dim}-dimensional domain")
        self.g = g
        self.h = h
        self.domain = domain
        self.meta = dict(meta or {})

    @property
    def dim(self) -> int:
        return self.domain.dim

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        return self.g.eval_batch(X) - self.h.eval_batch(X)

    def value(self, x):
        """f(x) for one point or a batch; points must lie in the domain."""
        return evaluate(self.g, x, self.domain) - evaluate(self.h, x)

    def __call__(self, x):
        return self.value(x)

    def components(self, x) -> Tuple:
        return evaluate(self.g, x, self.domain), evaluate(self.h, x)

    def to_dict(self) -> Dict:
        return {"g": self.g.to_dict(), "h": self.h.to_dict(), "domain": self.domain.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict) -> "DcFunction":
        try:
            domain = Domain.from_dict(data["domain"])
            return cls(expr_from_dict(data["g"], domain), expr_from_dict(data["h"], domain), domain)
        except KeyError as e:
            raise InputFormatError(f"dc function needs 'g', 'h' and 'domain': missing {e}")

    def __repr__(self):
        return f"DcFunction(g={self.g!r}, h={self.h!r}, domain={self.domain!r})"


def zero_function(domain: Domain) -> DcFunction:
    return DcFunction(constant(domain.dim), constant(domain.dim), domain)


def constant_function(domain: Domain, value: float) -> DcFunction:
    if value >= 0:
        return DcFunction(constant(domain.dim, value), constant(domain.dim), domain)
    return DcFunction(constant(domain.dim), constant(domain.dim, -value), domain)


def convex_function(expr: ConvexExpr, domain: Domain) -> DcFunction:
    return DcFunction(expr, constant(domain.dim), domain)


def concave_function(neg_expr: ConvexExpr, domain: Domain) -> DcFunction:
    """-neg_expr as a dc function."""
    return DcFunction(constant(domain.dim), neg_expr, domain)


# ============================================================================
# LINEAR COMBINATIONS
# ============================================================================

def _scaled(c: float, expr: ConvexExpr) -> ConvexExpr:
    return expr if c == 1.0 else NonnegScale(c, expr)


def _sum(parts: List[ConvexExpr], dim: int) -> ConvexExpr:
    if not parts:
        return constant(dim)
    if len(parts) == 1:
        return parts[0]
    return Sum(parts)


def _shared_domain(fs: Sequence[DcFunction]) -> Domain:
    if not fs:
        raise ArgumentError("need at least one dc function")
    domain = fs[0].domain
    for f in fs[1:]:
        if f.domain != domain:
            raise DomainError("dc functions live on different domains")
    return domain


def combine_linear(terms: Sequence[Tuple[float, DcFunction]]) -> DcFunction:
    """
    sum_k coef_k f_k. A negative coefficient swaps the roles of g and h.

    Args:
        terms: list of (coef, DcFunction) on one domain
    """
    domain = _shared_domain([f for _, f in terms])
    g_parts, h_parts = [], []
    for coef, f in terms:
        coef = float(coef)
        if coef > 0:
            g_parts.append(_scaled(coef, f.g))
            h_parts.append(_scaled(coef, f.h))
        elif coef < 0:
            g_parts.append(_scaled(-coef, f.h))
            h_parts.append(_scaled(-coef, f.g))
    return DcFunction(_sum(g_parts, domain.dim), _sum(h_parts, domain.dim), domain)


# ============================================================================
# SQUARE AND PRODUCT
# ============================================================================

def lower_bound_or_estimate(expr: ConvexExpr, domain: Domain) -> float:
    """Certified bound when the tree knows one, infimum_estimate otherwise."""
    lb = expr.lower_bound(domain)
    if lb is not None:
        return lb
    if not domain.is_bounded():
        raise UnboundedDomainError("nonnegativity shift needs a bounded domain")
    return infimum_estimate(expr, domain)


def square(f: DcFunction) -> DcFunction:
    """
    f^2 = 2(g~^2 + h~^2) - (g~ + h~)^2 with g~ = g + c, h~ = h + c >= 0.
    """
    dim = f.dim
    lb_g = lower_bound_or_estimate(f.g, f.domain)
    lb_h = lower_bound_or_estimate(f.h, f.domain)
    c = max(0.0, -lb_g, -lb_h) + SHIFT_MARGIN
    g_shift = Sum([f.g, constant(dim, c)])
    h_shift = Sum([f.h, constant(dim, c)])
    g_new = NonnegScale(2.0, Sum([
        SquareOfNonneg(g_shift, lb_g + c),
        SquareOfNonneg(h_shift, lb_h + c),
    ]))
    h_new = SquareOfNonneg(Sum([g_shift, h_shift]), lb_g + lb_h + 2.0 * c)
    return DcFunction(g_new, h_new, f.domain, meta={"shift": c})


def product(f1: DcFunction, f2: DcFunction) -> DcFunction:
    """f1 f2 = 1/2[(f1 + f2)^2 - f1^2 - f2^2]."""
    _shared_domain([f1, f2])
    both = combine_linear([(1.0, f1), (1.0, f2)])
    return combine_linear([(0.5, square(both)), (-0.5, square(f1)), (-0.5, square(f2))])


# ============================================================================
# NORM AND EXTREMA
# ============================================================================

def norm2(fs: Sequence[DcFunction]) -> DcFunction:
    """||(f_1, ..., f_K)||_2 with minuend ||F|| + sum(g_i + h_i)."""
    if not fs:
        raise ArgumentError("norm2 needs at least one component")
    domain = _shared_domain(fs)
    g_new = DcNormEnvelope([(f.g, f.h) for f in fs])
    h_new = _sum([Sum([f.g, f.h]) for f in fs], domain.dim)
    return DcFunction(g_new, h_new, domain)


def pointwise_extremum(mode: str, fs: Sequence[DcFunction]) -> DcFunction:
    """
    max_i (g_i - h_i) = max_i (g_i + sum_{j != i} h_j) - sum_j h_j;
    min goes through max of the negations.
    """
    if mode not in ("min", "max"):
        raise ArgumentError(f"mode must be 'min' or 'max', got {mode!r}")
    if not fs:
        raise ArgumentError("pointwise_extremum needs a nonempty list")
    domain = _shared_domain(fs)
    if len(fs) == 1:
        return fs[0]
    if mode == "max":
        plus = [f.g for f in fs]
        minus = [f.h for f in fs]
    else:
        plus = [f.h for f in fs]
        minus = [f.g for f in fs]
    branches = [
        _sum([plus[i]] + [minus[j] for j in range(len(fs)) if j != i], domain.dim)
        for i in range(len(fs))
    ]
    big = MaxOf(branches)
    total = _sum(list(minus), domain.dim)
    if mode == "max":
        return DcFunction(big, total, domain)
    return DcFunction(total, big, domain)


def pos_part_abs(mode: str, f: DcFunction) -> DcFunction:
    """[f]_+ (mode 'pos') or |f| (mode 'abs')."""
    if mode == "pos":
        return pointwise_extremum("max", [f, zero_function(f.domain)])
    if mode == "abs":
        return pointwise_extremum("max", [f, combine_linear([(-1.0, f)])])
    raise ArgumentError(f"mode must be 'pos' or 'abs', got {mode!r}")


# ============================================================================
# COMPOSITIONS
# ============================================================================

class MonotoneConvex:
    """Univariate convex nondecreasing function, vectorized."""

    def __init__(self, name: str, fn: Callable[[np.ndarray], np.ndarray]):
        self.name = name
        self.fn = fn

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def __repr__(self):
        return f"MonotoneConvex({self.name})"


MONOTONE_CONVEX_CATALOG = {
    "linear": MonotoneConvex("linear", lambda t: t + 0.0),
    "pos": MonotoneConvex("pos", lambda t: np.maximum(t, 0.0)),
    "sq_pos": MonotoneConvex("sq_pos", lambda t: np.maximum(t, 0.0) ** 2),
    "exp": MonotoneConvex("exp", np.exp),            # Poisson cumulant
    "softplus": MonotoneConvex("softplus", lambda t: np.logaddexp(0.0, t)),  # Bernoulli cumulant
}


def resolve_monotone_convex(b: Union[str, MonotoneConvex, Callable]) -> MonotoneConvex:
    if isinstance(b, MonotoneConvex):
        return b
    if isinstance(b, str):
        if b not in MONOTONE_CONVEX_CATALOG:
            raise ArgumentError(f"unknown monotone convex function {b!r}; "
                                f"choose from {sorted(MONOTONE_CONVEX_CATALOG)}")
        return MONOTONE_CONVEX_CATALOG[b]
    if callable(b):
        return MonotoneConvex(getattr(b, "__name__", "custom"), b)
    raise ArgumentError(f"cannot interpret {b!r} as a univariate function")


def certify_monotone_convex(b: MonotoneConvex) -> None:
    """Sampled monotonicity and midpoint convexity on [-R, R]."""
    t = np.linspace(-CERTIFY_RADIUS, CERTIFY_RADIUS, CERTIFY_POINTS)
    v = b(t)
    if v.shape != t.shape or not np.all(np.isfinite(v)):
        raise CertificationError(f"{b.name} is not finite on the certification grid")
    scale = 1e-9 * (1.0 + np.abs(v))
    if np.any(np.diff(v) < -scale[1:]):
        k = int(np.argmin(np.diff(v)))
        raise CertificationError(f"{b.name} decreases near t={t[k]:.4g}")
    second = v[:-2] + v[2:] - 2.0 * v[1:-1]
    if np.any(second < -scale[1:-1]):
        k = int(np.argmin(second)) + 1
        raise CertificationError(f"{b.name} fails midpoint convexity near t={t[k]:.4g}")


def compose_incr_convex(b, p: ConvexExpr, pieces: Sequence[Tuple], domain: Domain) -> DcFunction:
    """
    b(m(x)) for m = p - max_i (a^i . x + alpha_i), written as
    min_i b(p(x) - a^i . x - alpha_i): a minimum of convex functions.
    """
    b = resolve_monotone_convex(b)
    certify_monotone_convex(b)
    if not pieces:
        raise ArgumentError("compose_incr_convex needs at least one affine piece")
    branches = []
    for a, alpha in pieces:
        a = np.asarray(a, dtype=float).reshape(-1)
        inner = Sum([p, Affine(-a, -float(alpha))])
        branches.append(convex_function(IncreasingConvexComposite(b, inner), domain))
    out = pointwise_extremum("min", branches)
    out.meta["b"] = b.name
    return out


def compose_neg_log(f: DcFunction) -> DcFunction:
    """
    -log f with M = 1 / inf f: minuend -log f + M g, subtrahend M g.
    """
    inf = infimum_estimate(f, f.domain)
    if inf < LOG_FLOOR:
        raise DomainError(f"log argument has estimated infimum {inf:.3e} < {LOG_FLOOR}")
    M = 1.0 / inf
    return DcFunction(NegLogEnvelope(f.g, f.h, M), NonnegScale(M, f.g), f.domain, meta={"M": M})


def exp_family_nll(b, observations: Sequence[Tuple], domain: Domain) -> DcFunction:
    """
    Negative log-likelihood of a one-parameter exponential family with
    canonical parameter m_s(x) = p_s(x) - max_i (a^i_s . x + alpha_{s,i}):

        (1/N) sum_s [ b(m_s(x)) - y_s m_s(x) ]

    Args:
        b: cumulant function (catalog name or MonotoneConvex)
        observations: list of (y_s, p_s, pieces_s)
    """
    if not observations:
        raise ArgumentError("exp_family_nll needs at least one observation")
    weight = 1.0 / len(observations)
    terms = []
    for y, p, pieces in observations:
        affines = [Affine(np.asarray(a, dtype=float), float(alpha)) for a, alpha in pieces]
        m = DcFunction(p, MaxOf(affines), domain)
        terms.append((weight, compose_incr_convex(b, p, pieces, domain)))
        terms.append((-weight * float(y), m))
    return combine_linear(terms)
