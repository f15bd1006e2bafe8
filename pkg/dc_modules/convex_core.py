"""
Convex expression trees.

Each node kind is convex by its construction rule, so any tree assembled
from them is convex on its domain. Nodes evaluate in batch: eval_batch takes
an (N, n) array of points and returns N values.

Node kinds:
  - Affine, Sum, NonnegScale, MaxOf, QuadForm (PSD), SquareOfNonneg, Norm2Affine
  - CvarEnvelope / NegOceEnvelope (breakpoint scans over one auxiliary variable)
  - DcNormEnvelope, IncreasingConvexComposite, NegLogEnvelope (dc_core composites)
  - AffinePrecompose, PolyhedralDistance, NegConcaveUnivariate
"""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from dc_modules.dc_config import (
    EPS_PSD,
    EPS_EVAL,
    DEFAULT_SAMPLE_RADIUS,
    GRID_MIN_POINTS,
    GRID_MIN_PER_AXIS,
    GRID_MAX_POINTS,
    DOMAIN_TOL,
    SENTINEL_OFFSET,
    SCAN_TOL,
    PROB_SUM_TOL,
    DEFAULT_SEED,
    MAX_VERTEX_DIM,
    MAX_VERTEX_ROWS,
)
from dc_modules.errors import (
    ArgumentError,
    CertificationError,
    DcForgeError,
    DomainError,
    EmptyPolyhedron,
    InputFormatError,
    UnboundedAuxiliary,
    UnboundedDomainError,
)
from dc_modules.polyhedral import (
    Polyhedron,
    bounding_box,
    distance_batch,
    enumerate_vertices,
    lp_solve,
)


# ============================================================================
# DOMAINS
# ============================================================================

class Domain:
    """Convex domain: a box (bounds may be infinite) or a polyhedron."""

    def __init__(self, kind: str, dim: int, lower=None, upper=None,
                 polyhedron: Optional[Polyhedron] = None):
        if kind not in ("box", "polyhedron"):
            raise ArgumentError(f"unknown domain kind {kind!r}")
        if dim < 1:
            raise ArgumentError("domain dimension must be positive")
        self.kind = kind
        self.dim = int(dim)
        self.polyhedron = polyhedron
        if kind == "box":
            lower = np.array(lower, dtype=float).reshape(-1)
            upper = np.array(upper, dtype=float).reshape(-1)
            if lower.shape != (dim,) or upper.shape != (dim,):
                raise ArgumentError(f"box bounds must have {dim} entries")
            if np.any(lower > upper):
                raise ArgumentError("box needs lower <= upper componentwise")
            self.lower, self.upper = lower, upper
        else:
            if polyhedron is None or polyhedron.dim != dim:
                raise ArgumentError("polyhedron domain needs a polyhedron of matching dimension")
            self.lower, self.upper = None, None
        self._bounds = None

    @classmethod
    def box(cls, lower, upper) -> "Domain":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        return cls("box", lower.shape[0], lower=lower, upper=upper)

    @classmethod
    def from_polyhedron(cls, polyhedron: Polyhedron) -> "Domain":
        return cls("polyhedron", polyhedron.dim, polyhedron=polyhedron)

    @classmethod
    def from_dict(cls, data: Dict) -> "Domain":
        kind = data.get("kind")
        try:
            if kind == "box":
                return cls.box(_parse_bounds(data["lower"]), _parse_bounds(data["upper"]))
            if kind == "polyhedron":
                return cls.from_polyhedron(Polyhedron.from_dict(data))
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"malformed domain: {e}")
        raise InputFormatError(f"domain kind must be 'box' or 'polyhedron', got {kind!r}")

    def to_dict(self) -> Dict:
        if self.kind == "box":
            return {"kind": "box", "lower": _dump_bounds(self.lower), "upper": _dump_bounds(self.upper)}
        data = {"kind": "polyhedron"}
        data.update(self.polyhedron.to_dict())
        return data

    def __eq__(self, other):
        if not isinstance(other, Domain) or other.kind != self.kind or other.dim != self.dim:
            return False
        if self.kind == "box":
            return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)
        p, q = self.polyhedron, other.polyhedron
        return (p is q) or (
            np.array_equal(p.A, q.A) and np.array_equal(p.b, q.b) and p.eq_rows == q.eq_rows
        )

    def __hash__(self):
        return hash((self.kind, self.dim))

    def __repr__(self):
        if self.kind == "box":
            return f"Domain(box, lower={self.lower.tolist()}, upper={self.upper.tolist()})"
        return f"Domain({self.polyhedron!r})"

    # ------------------------------------------------------------------
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinate bounds; entries may be infinite."""
        if self.kind == "box":
            return self.lower, self.upper
        if self._bounds is None:
            self._bounds = bounding_box(self.polyhedron)
        return self._bounds

    def is_bounded(self) -> bool:
        lo, hi = self.bounds()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def contains(self, points, tol: float = DOMAIN_TOL):
        X = np.asarray(points, dtype=float)
        if self.kind == "polyhedron":
            return self.polyhedron.contains(X, tol)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        slack = tol * (1.0 + np.abs(np.where(np.isfinite(self.lower), self.lower, 0.0)))
        ok = np.all(X >= self.lower - slack, axis=1)
        slack = tol * (1.0 + np.abs(np.where(np.isfinite(self.upper), self.upper, 0.0)))
        ok &= np.all(X <= self.upper + slack, axis=1)
        return bool(ok[0]) if single else ok

    def sampling_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """Bounds with infinite sides clipped to DEFAULT_SAMPLE_RADIUS."""
        lo, hi = self.bounds()
        lo = np.where(np.isfinite(lo), lo, -DEFAULT_SAMPLE_RADIUS)
        hi = np.where(np.isfinite(hi), hi, DEFAULT_SAMPLE_RADIUS)
        return lo, np.maximum(hi, lo)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n random points of the domain (unbounded sides clipped)."""
        lo, hi = self.sampling_box()
        if self.kind == "box":
            return lo + (hi - lo) * rng.random((n, self.dim))
        kept: List[np.ndarray] = []
        count = 0
        for _ in range(200):
            X = lo + (hi - lo) * rng.random((max(4 * n, 64), self.dim))
            X = X[self.polyhedron.contains(X)]
            if X.shape[0]:
                kept.append(X)
                count += X.shape[0]
            if count >= n:
                return np.vstack(kept)[:n]
        return self._sample_hull(rng, n)

    def _sample_hull(self, rng: np.random.Generator, n: int) -> np.ndarray:
        clipped = self.polyhedron.intersect(Polyhedron.from_box(*self.sampling_box()))
        verts = enumerate_vertices(clipped).points
        if verts.shape[0] == 0:
            raise EmptyPolyhedron("cannot sample an empty domain")
        weights = rng.dirichlet(np.ones(verts.shape[0]), size=n)
        return weights @ verts

    def grid(self, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Dense evaluation grid for infimum_estimate (bounded domains only)."""
        lo, hi = self.bounds()
        flat = hi - lo <= 0.0
        free = int(np.sum(~flat))
        per_axis = max(GRID_MIN_PER_AXIS, math.ceil(GRID_MIN_POINTS ** (1.0 / max(free, 1))))
        if per_axis % 2 == 0:
            per_axis += 1
        if free == 0 or per_axis ** free <= GRID_MAX_POINTS:
            axes = [np.array([lo[i]]) if flat[i] else np.linspace(lo[i], hi[i], per_axis)
                    for i in range(self.dim)]
            X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        else:
            rng = rng if rng is not None else np.random.default_rng(DEFAULT_SEED)
            X = lo + (hi - lo) * rng.random((GRID_MAX_POINTS, self.dim))
            X = np.vstack([X, 0.5 * (lo + hi)])
        if self.kind == "box":
            return X
        X = X[self.polyhedron.contains(X)]
        extra = []
        if self.dim <= MAX_VERTEX_DIM and self.polyhedron.n_rows <= MAX_VERTEX_ROWS:
            extra.append(enumerate_vertices(self.polyhedron).points)
        seed_point = lp_solve(np.zeros(self.dim), self.polyhedron).point
        if seed_point is not None:
            extra.append(seed_point[None, :])
        return np.vstack([X] + extra)


def _parse_bounds(values) -> np.ndarray:
    # infinite bounds are written as the strings "inf" / "-inf"
    return np.array([float(v) for v in values])


def _dump_bounds(values: np.ndarray) -> list:
    return [("inf" if v > 0 else "-inf") if not np.isfinite(v) else float(v) for v in values]


# ============================================================================
# EXPRESSION NODES
# ============================================================================

class ConvexExpr:
    """Base node. Subclasses implement eval_batch."""

    kind = "expr"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def lower_bound(self, domain: Optional[Domain]) -> Optional[float]:
        """Certified lower bound on the domain, or None when not cheaply known."""
        return None

    def to_dict(self) -> Dict:
        raise ArgumentError(f"{self.kind} nodes are not part of the file grammar")

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


def _check_dims(children: Sequence[ConvexExpr]) -> int:
    if not children:
        raise ArgumentError("node needs at least one child")
    dims = {c.dim for c in children}
    if len(dims) != 1:
        raise ArgumentError(f"children have mismatched dimensions {sorted(dims)}")
    return dims.pop()


class Affine(ConvexExpr):
    kind = "affine"

    def __init__(self, a, c: float = 0.0):
        a = np.array(a, dtype=float).reshape(-1)
        super().__init__(a.shape[0])
        self.a = a
        self.c = float(c)

    def eval_batch(self, X):
        return X @ self.a + self.c

    def lower_bound(self, domain):
        if not np.any(self.a):
            return self.c
        if domain is None:
            return None
        if domain.kind == "box":
            lo, hi = domain.lower, domain.upper
            pos, neg = self.a > 0, self.a < 0
            if np.any(~np.isfinite(lo[pos])) or np.any(~np.isfinite(hi[neg])):
                return None
            return self.c + float(self.a[pos] @ lo[pos] + self.a[neg] @ hi[neg])
        res = lp_solve(self.a, domain.polyhedron, "min")
        return self.c + res.value if res.optimal else None

    def to_dict(self):
        return {"kind": "affine", "a": self.a.tolist(), "c": self.c}


def constant(dim: int, value: float = 0.0) -> Affine:
    return Affine(np.zeros(dim), value)


class Sum(ConvexExpr):
    kind = "sum"

    def __init__(self, children: Sequence[ConvexExpr]):
        super().__init__(_check_dims(children))
        self.children = tuple(children)

    def eval_batch(self, X):
        total = self.children[0].eval_batch(X)
        for child in self.children[1:]:
            total = total + child.eval_batch(X)
        return total

    def lower_bound(self, domain):
        total = 0.0
        for child in self.children:
            lb = child.lower_bound(domain)
            if lb is None:
                return None
            total += lb
        return total

    def to_dict(self):
        return {"kind": "sum", "children": [c.to_dict() for c in self.children]}


class NonnegScale(ConvexExpr):
    kind = "scale"

    def __init__(self, c: float, child: ConvexExpr):
        if not c >= 0.0:
            raise ArgumentError(f"NonnegScale needs c >= 0, got {c}")
        super().__init__(child.dim)
        self.c = float(c)
        self.child = child

    def eval_batch(self, X):
        return self.c * self.child.eval_batch(X)

    def lower_bound(self, domain):
        if self.c == 0.0:
            return 0.0
        lb = self.child.lower_bound(domain)
        return None if lb is None else self.c * lb

    def to_dict(self):
        return {"kind": "scale", "c": self.c, "child": self.child.to_dict()}


class MaxOf(ConvexExpr):
    kind = "max"

    def __init__(self, children: Sequence[ConvexExpr]):
        super().__init__(_check_dims(children))
        self.children = tuple(children)

    def eval_batch(self, X):
        return np.max(np.stack([c.eval_batch(X) for c in self.children]), axis=0)

    def lower_bound(self, domain):
        known = [lb for lb in (c.lower_bound(domain) for c in self.children) if lb is not None]
        return max(known) if known else None

    def to_dict(self):
        return {"kind": "max", "children": [c.to_dict() for c in self.children]}


class QuadForm(ConvexExpr):
    """1/2 x^T A x + a^T x + c with A positive semidefinite."""

    kind = "quad"

    def __init__(self, A, a=None, c: float = 0.0):
        A = np.atleast_2d(np.array(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ArgumentError(f"QuadForm matrix must be square, got {A.shape}")
        scale = 1.0 + np.abs(A).max()
        if np.abs(A - A.T).max() > 1e-12 * scale:
            raise ArgumentError("QuadForm matrix must be symmetric")
        A = 0.5 * (A + A.T)
        smallest = float(np.linalg.eigvalsh(A)[0]) if A.size else 0.0
        if smallest < -EPS_PSD:
            raise CertificationError(f"QuadForm matrix not PSD (smallest eigenvalue {smallest:.3e})")
        super().__init__(A.shape[0])
        self.A = A
        self.a = np.zeros(A.shape[0]) if a is None else np.array(a, dtype=float).reshape(-1)
        self.c = float(c)
        if self.a.shape[0] != self.dim:
            raise ArgumentError("QuadForm linear term has the wrong length")

    def eval_batch(self, X):
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.a + self.c

    def lower_bound(self, domain):
        if not np.any(self.A):
            return Affine(self.a, self.c).lower_bound(domain)
        return None

    def to_dict(self):
        return {"kind": "quad", "A": self.A.tolist(), "a": self.a.tolist(), "c": self.c}


class SquareOfNonneg(ConvexExpr):
    """child(x)^2 where child is convex and certified nonnegative on the domain."""

    kind = "square_nonneg"

    def __init__(self, child: ConvexExpr, certified_lower_bound: float = 0.0):
        if certified_lower_bound < -EPS_EVAL:
            raise CertificationError(
                f"SquareOfNonneg child has lower bound {certified_lower_bound:.3e} < 0"
            )
        super().__init__(child.dim)
        self.child = child
        self.certified_lower_bound = float(certified_lower_bound)

    def eval_batch(self, X):
        v = self.child.eval_batch(X)
        return v * v

    def lower_bound(self, domain):
        return max(self.certified_lower_bound, 0.0) ** 2

    def to_dict(self):
        return {"kind": "square_nonneg", "child": self.child.to_dict()}


class Norm2Affine(ConvexExpr):
    """||M x + d||_2"""

    kind = "norm2"

    def __init__(self, M, d=None):
        M = np.atleast_2d(np.array(M, dtype=float))
        super().__init__(M.shape[1])
        self.M = M
        self.d = np.zeros(M.shape[0]) if d is None else np.array(d, dtype=float).reshape(-1)
        if self.d.shape[0] != M.shape[0]:
            raise ArgumentError("Norm2Affine offset has the wrong length")

    def eval_batch(self, X):
        return np.linalg.norm(X @ self.M.T + self.d, axis=1)

    def lower_bound(self, domain):
        return 0.0

    def to_dict(self):
        return {"kind": "norm2", "M": self.M.tolist(), "d": self.d.tolist()}


def _check_scenarios(probs, p_exprs, q_exprs) -> Tuple[np.ndarray, int]:
    probs = np.array(probs, dtype=float).reshape(-1)
    if probs.shape[0] == 0 or len(p_exprs) != probs.shape[0] or len(q_exprs) != probs.shape[0]:
        raise ArgumentError("need one (pExpr, qExpr) pair per probability")
    if np.any(probs <= 0.0) or abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise ArgumentError("scenario probabilities must be positive and sum to 1")
    return probs, _check_dims(list(p_exprs) + list(q_exprs))


class CvarEnvelope(ConvexExpr):
    """min_t  t + 1/(1-alpha) * sum_s p_s max(P_s(x) - t, Q_s(x))"""

    kind = "cvar_envelope"

    def __init__(self, alpha: float, probs, p_exprs, q_exprs):
        if not 0.0 < alpha < 1.0:
            raise ArgumentError(f"alpha must lie in (0, 1), got {alpha}")
        probs, dim = _check_scenarios(probs, p_exprs, q_exprs)
        super().__init__(dim)
        self.alpha = float(alpha)
        self.probs = probs
        self.p_exprs = tuple(p_exprs)
        self.q_exprs = tuple(q_exprs)

    def _objective(self, t, P, Q):
        scale = 1.0 / (1.0 - self.alpha)
        return t + scale * (np.maximum(P - t[:, None], Q) @ self.probs)

    def eval_batch(self, X):
        P = np.column_stack([e.eval_batch(X) for e in self.p_exprs])
        Q = np.column_stack([e.eval_batch(X) for e in self.q_exprs])
        T = P - Q
        values = np.column_stack([self._objective(T[:, k], P, Q) for k in range(T.shape[1])])
        best = values[np.arange(values.shape[0]), np.argmin(values, axis=1)]
        _check_sentinels(best, [
            self._objective(T.min(axis=1) - SENTINEL_OFFSET, P, Q),
            self._objective(T.max(axis=1) + SENTINEL_OFFSET, P, Q),
        ], "CVaR")
        return best

    def argmin_t(self, x) -> float:
        """First minimizing breakpoint t at a single point."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        P = np.column_stack([e.eval_batch(X) for e in self.p_exprs])
        Q = np.column_stack([e.eval_batch(X) for e in self.q_exprs])
        T = (P - Q)[0]
        vals = [self._objective(np.array([t]), P, Q)[0] for t in T]
        return float(T[int(np.argmin(vals))])


class NegOceEnvelope(ConvexExpr):
    """
    min_eta  sum_s p_s max_i {(A - a_i) P_s + a_i (Q_s + eta) - alpha_i} - eta,
    A = sum_i a_i: the negated concave term of the OCE decomposition.
    """

    kind = "neg_oce_envelope"

    def __init__(self, slopes, intercepts, probs, p_exprs, q_exprs):
        slopes = np.array(slopes, dtype=float).reshape(-1)
        intercepts = np.array(intercepts, dtype=float).reshape(-1)
        if slopes.shape != intercepts.shape or slopes.shape[0] == 0:
            raise ArgumentError("utility needs matching nonempty slope and intercept lists")
        probs, dim = _check_scenarios(probs, p_exprs, q_exprs)
        super().__init__(dim)
        self.slopes = slopes
        self.intercepts = intercepts
        self.probs = probs
        self.p_exprs = tuple(p_exprs)
        self.q_exprs = tuple(q_exprs)
        pairs = [(i, j) for i in range(len(slopes)) for j in range(i + 1, len(slopes))
                 if slopes[i] != slopes[j]]
        self._offsets = np.array(
            [(intercepts[i] - intercepts[j]) / (slopes[i] - slopes[j]) for i, j in pairs]
        )

    def _objective(self, eta, P, Q):
        total = self.slopes.sum()
        inner = ((total - self.slopes)[None, None, :] * P[:, :, None]
                 + self.slopes[None, None, :] * (Q[:, :, None] + eta[:, None, None])
                 - self.intercepts[None, None, :])
        return inner.max(axis=2) @ self.probs - eta

    def eval_batch(self, X):
        P = np.column_stack([e.eval_batch(X) for e in self.p_exprs])
        Q = np.column_stack([e.eval_batch(X) for e in self.q_exprs])
        N = X.shape[0]
        if self._offsets.size:
            B = ((P - Q)[:, :, None] + self._offsets[None, None, :]).reshape(N, -1)
        else:
            B = np.zeros((N, 1))
        values = np.column_stack([self._objective(B[:, k], P, Q) for k in range(B.shape[1])])
        best = values[np.arange(N), np.argmin(values, axis=1)]
        _check_sentinels(best, [
            self._objective(B.min(axis=1) - SENTINEL_OFFSET, P, Q),
            self._objective(B.max(axis=1) + SENTINEL_OFFSET, P, Q),
        ], "OCE")
        return best


def _check_sentinels(best: np.ndarray, sentinels: List[np.ndarray], label: str) -> None:
    for s in sentinels:
        if np.any(s < best - SCAN_TOL * (1.0 + np.abs(best))):
            raise UnboundedAuxiliary(f"{label} auxiliary objective decreases past the last breakpoint")


class DcNormEnvelope(ConvexExpr):
    """||(g_i - h_i)_i||_2 + sum_i (g_i + h_i); convex when every g_i, h_i is."""

    kind = "dc_norm_envelope"

    def __init__(self, components: Sequence[Tuple[ConvexExpr, ConvexExpr]]):
        if not components:
            raise ArgumentError("norm envelope needs at least one component")
        super().__init__(_check_dims([e for pair in components for e in pair]))
        self.components = tuple(components)

    def eval_batch(self, X):
        G = np.column_stack([g.eval_batch(X) for g, _ in self.components])
        H = np.column_stack([h.eval_batch(X) for _, h in self.components])
        return np.linalg.norm(G - H, axis=1) + (G + H).sum(axis=1)


class IncreasingConvexComposite(ConvexExpr):
    """b(inner(x)) with b univariate convex nondecreasing and inner convex."""

    kind = "incr_convex_composite"

    def __init__(self, b: Callable[[np.ndarray], np.ndarray], inner: ConvexExpr):
        super().__init__(inner.dim)
        self.b = b
        self.inner = inner

    def eval_batch(self, X):
        return np.asarray(self.b(self.inner.eval_batch(X)), dtype=float)

    def lower_bound(self, domain):
        lb = self.inner.lower_bound(domain)
        return None if lb is None else float(self.b(np.array([lb]))[0])


class NegLogEnvelope(ConvexExpr):
    """-log(g(x) - h(x)) + M g(x); convex once M >= 1 / inf (g - h)."""

    kind = "neg_log_envelope"

    def __init__(self, g: ConvexExpr, h: ConvexExpr, M: float):
        super().__init__(_check_dims([g, h]))
        self.g, self.h, self.M = g, h, float(M)

    def eval_batch(self, X):
        G = self.g.eval_batch(X)
        v = G - self.h.eval_batch(X)
        if np.any(v <= 0.0):
            raise DomainError("log argument is not positive at an evaluation point")
        return -np.log(v) + self.M * G


class AffinePrecompose(ConvexExpr):
    """child(W x + w0)"""

    kind = "affine_precompose"

    def __init__(self, child: ConvexExpr, W, w0=None):
        W = np.atleast_2d(np.array(W, dtype=float))
        if W.shape[0] != child.dim:
            raise ArgumentError(f"map has {W.shape[0]} outputs, child expects {child.dim}")
        super().__init__(W.shape[1])
        self.child = child
        self.W = W
        self.w0 = np.zeros(W.shape[0]) if w0 is None else np.array(w0, dtype=float).reshape(-1)

    def eval_batch(self, X):
        return self.child.eval_batch(X @ self.W.T + self.w0)

    def lower_bound(self, domain):
        return self.child.lower_bound(None)


class PolyhedralDistance(ConvexExpr):
    """dist(x; P) through Euclidean projection."""

    kind = "polyhedral_distance"

    def __init__(self, polyhedron: Polyhedron):
        super().__init__(polyhedron.dim)
        self.polyhedron = polyhedron

    def eval_batch(self, X):
        return distance_batch(X, self.polyhedron)

    def lower_bound(self, domain):
        return 0.0


class NegConcaveUnivariate(ConvexExpr):
    """-f(x[coord]) for a univariate concave f (certified by the caller)."""

    kind = "neg_concave_univariate"

    def __init__(self, f: Callable[[np.ndarray], np.ndarray], label: str = "f", dim: int = 1, coord: int = 0):
        super().__init__(dim)
        self.f = f
        self.label = label
        self.coord = int(coord)

    def eval_batch(self, X):
        return -np.asarray(self.f(X[:, self.coord]), dtype=float)


# ============================================================================
# OPERATIONS
# ============================================================================

def evaluate(expr, x, domain: Optional[Domain] = None):
    """
    Value of expr at one point (float) or at the rows of a batch (array).

    Raises:
        DomainError: a point lies outside the given domain
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    if X.ndim == 1 and expr.dim == 1 and X.shape[0] != 1:
        X, single = X[:, None], False
    X = np.atleast_2d(X.reshape(1, -1) if single else X)
    if X.shape[1] != expr.dim:
        raise DomainError(f"point has dimension {X.shape[1]}, expression expects {expr.dim}")
    if domain is not None and not np.all(domain.contains(X)):
        raise DomainError("point outside domain")
    values = expr.eval_batch(X)
    return float(values[0]) if single else values


def infimum_estimate(expr, domain: Domain, seed: int = DEFAULT_SEED) -> float:
    """
    Non-certified estimate of inf expr over a bounded domain: the best point of
    a dense grid, then local descent from it.

    Args:
        expr: anything with eval_batch (ConvexExpr or DcFunction)
        domain: bounded box or polyhedron

    Returns:
        float: estimated infimum
    """
    if not domain.is_bounded():
        raise UnboundedDomainError("infimum_estimate needs a bounded domain")
    rng = np.random.default_rng(seed)
    X = domain.grid(rng)
    values = expr.eval_batch(X)
    k = int(np.argmin(values))
    best = float(values[k])
    x0 = X[k]

    def objective(y):
        return float(expr.eval_batch(y[None, :])[0])

    try:
        if domain.kind == "box":
            res = minimize(
                objective, x0, method="Powell",
                bounds=list(zip(domain.lower, domain.upper)),
                options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 4000},
            )
        else:
            P = domain.polyhedron
            cons = [{"type": "ineq", "fun": lambda y: P.b - P.A @ y}]
            res = minimize(objective, x0, method="SLSQP", constraints=cons,
                           options={"ftol": 1e-14, "maxiter": 200})
        if domain.contains(res.x) and np.isfinite(res.fun):
            best = min(best, float(res.fun))
    except (DcForgeError, ValueError, FloatingPointError):
        pass
    return best


# ============================================================================
# FILE GRAMMAR
# ============================================================================

def expr_from_dict(data: Dict, domain: Optional[Domain] = None) -> ConvexExpr:
    """
    Build a ConvexExpr from its JSON form. square_nonneg children are
    certified against the domain when one is given.
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise InputFormatError(f"expression must be an object with a 'kind': {data!r}")
    kind = data["kind"]
    try:
        if kind == "affine":
            return Affine(data["a"], data.get("c", 0.0))
        if kind == "sum":
            return Sum([expr_from_dict(c, domain) for c in data["children"]])
        if kind == "max":
            return MaxOf([expr_from_dict(c, domain) for c in data["children"]])
        if kind == "scale":
            return NonnegScale(float(data["c"]), expr_from_dict(data["child"], domain))
        if kind == "quad":
            return QuadForm(data["A"], data.get("a"), data.get("c", 0.0))
        if kind == "norm2":
            return Norm2Affine(data["M"], data.get("d"))
        if kind == "square_nonneg":
            child = expr_from_dict(data["child"], domain)
            return SquareOfNonneg(child, certified_nonneg_bound(child, domain))
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"malformed {kind!r} expression: {e}")
    except ArgumentError as e:
        raise InputFormatError(str(e))
    raise InputFormatError(f"unknown expression kind {kind!r}")


def expr_to_dict(expr: ConvexExpr) -> Dict:
    return expr.to_dict()


def certified_nonneg_bound(child: ConvexExpr, domain: Optional[Domain]) -> float:
    """Lower bound used to certify a SquareOfNonneg child."""
    lb = child.lower_bound(domain)
    if lb is None and domain is not None and domain.is_bounded():
        lb = infimum_estimate(child, domain)
    if lb is None:
        raise CertificationError("cannot certify nonnegativity of a square_nonneg child")
    return lb
