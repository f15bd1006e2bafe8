"""
Small-scale polyhedral computations.

A Polyhedron is {x : Ax <= b} with an optional set of rows that hold with
equality. Everything here is exact enumeration at desk scale:

  - enumerate_vertices: all basic feasible solutions
  - enumerate_extreme_rays: generators of a homogeneous cone
  - lp_solve: HiGHS through scipy, with duals and a duality-gap check
  - project / project_batch: Euclidean projection by active-set enumeration
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from dc_modules.dc_config import (
    VERTEX_TOL,
    DEDUP_TOL,
    MAX_VERTEX_DIM,
    MAX_VERTEX_ROWS,
    MAX_RAY_DIM,
    DUALITY_TOL,
)
from dc_modules.errors import ArgumentError, EmptyPolyhedron, InputFormatError, ScaleError

# Rays live in (v, multiplier) space for the QP domain test, hence the wider cap.
MAX_RAY_ROWS = 32

STATUS_OPTIMAL = "optimal"
STATUS_UNBOUNDED = "unbounded"
STATUS_INFEASIBLE = "infeasible"
STATUS_FAILED = "failed"


class Polyhedron:
    """{x : A x <= b}; rows listed in eq_rows hold with equality."""

    def __init__(self, A, b, eq_rows: Sequence[int] = (), dim: Optional[int] = None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float).reshape(-1)
        if A.size == 0:
            if dim is None:
                dim = A.shape[1] if A.ndim == 2 else None
            if not dim:
                raise ArgumentError("empty constraint matrix needs an explicit dimension")
            A = np.zeros((0, dim))
        if A.ndim != 2:
            raise ArgumentError(f"constraint matrix must be 2-D, got shape {A.shape}")
        if A.shape[0] != b.shape[0]:
            raise ArgumentError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if dim is not None and A.shape[1] != dim:
            raise ArgumentError(f"A has {A.shape[1]} columns, expected {dim}")
        eq = tuple(sorted(set(int(i) for i in eq_rows)))
        if eq and (eq[0] < 0 or eq[-1] >= A.shape[0]):
            raise ArgumentError(f"eq_rows {eq} out of range for {A.shape[0]} rows")
        self.A = A
        self.b = b
        self.eq_rows = eq
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self._active_sets = None

    # ------------------------------------------------------------------
    @classmethod
    def from_geq(cls, D, b, eq_rows: Sequence[int] = ()):
        """{z : D z >= b}."""
        D = np.atleast_2d(np.asarray(D, dtype=float))
        return cls(-D, -np.asarray(b, dtype=float).reshape(-1), eq_rows, dim=D.shape[1])

    @classmethod
    def from_box(cls, lower, upper):
        """Box with finite bounds only; infinite sides produce no row."""
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        n = lower.shape[0]
        rows, rhs = [], []
        for i in range(n):
            if np.isfinite(upper[i]):
                e = np.zeros(n)
                e[i] = 1.0
                rows.append(e)
                rhs.append(upper[i])
            if np.isfinite(lower[i]):
                e = np.zeros(n)
                e[i] = -1.0
                rows.append(e)
                rhs.append(-lower[i])
        if not rows:
            return cls(np.zeros((0, n)), np.zeros(0), dim=n)
        return cls(np.array(rows), np.array(rhs), dim=n)

    @classmethod
    def from_dict(cls, data: Dict) -> "Polyhedron":
        try:
            A = np.asarray(data["A"], dtype=float)
            b = np.asarray(data["b"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"polyhedron needs numeric 'A' and 'b': {e}")
        dim = data.get("dim")
        if A.size == 0 and dim is None:
            raise InputFormatError("polyhedron with no rows needs 'dim'")
        return cls(A, b, data.get("eq_rows", []), dim=dim)

    def to_dict(self) -> Dict:
        return {
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "eq_rows": list(self.eq_rows),
            "dim": self.dim,
        }

    # ------------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def ineq_rows(self) -> Tuple[int, ...]:
        eq = set(self.eq_rows)
        return tuple(i for i in range(self.n_rows) if i not in eq)

    def is_homogeneous(self) -> bool:
        return bool(np.all(self.b == 0.0))

    def contains(self, points, tol: float = VERTEX_TOL) -> np.ndarray:
        """Membership for one point (returns bool) or a batch (returns bool array)."""
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if self.n_rows == 0:
            inside = np.ones(X.shape[0], dtype=bool)
        else:
            slack = X @ self.A.T - self.b
            scale = 1.0 + np.abs(self.b)
            ok = slack <= tol * scale
            if self.eq_rows:
                eq = list(self.eq_rows)
                ok[:, eq] = np.abs(slack[:, eq]) <= tol * scale[eq]
            inside = ok.all(axis=1)
        return bool(inside[0]) if single else inside

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.dim != self.dim:
            raise ArgumentError(f"cannot intersect dimensions {self.dim} and {other.dim}")
        shift = self.n_rows
        eq = list(self.eq_rows) + [shift + i for i in other.eq_rows]
        return Polyhedron(
            np.vstack([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            eq,
            dim=self.dim,
        )

    def __repr__(self):
        return f"Polyhedron(dim={self.dim}, rows={self.n_rows}, eq_rows={list(self.eq_rows)})"


@dataclass
class VertexList:
    points: np.ndarray
    status: str = "ok"          # ok | empty | no_vertices

    def __len__(self):
        return self.points.shape[0]


@dataclass
class RayList:
    directions: np.ndarray
    lineality_dim: int = 0

    def __len__(self):
        return self.directions.shape[0]


@dataclass
class LpResult:
    status: str
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    duality_gap: Optional[float] = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


# ============================================================================
# LINEAR PROGRAMMING
# ============================================================================

def lp_solve(c, polyhedron: Polyhedron, sense: str = "min") -> LpResult:
    """
    Solve min (or max) c^T x over the polyhedron with HiGHS.

    The returned dual y belongs to the min-form problem (objective sign*c):
    y >= 0 on inequality rows, free on equality rows, A^T y + sign*c = 0.

    The enumeration caps (MAX_VERTEX_DIM, MAX_VERTEX_ROWS) do not apply here.
    Problems HiGHS cannot finish come back with status "failed".

    Returns:
        LpResult with status optimal | unbounded | infeasible | failed
    """
    if sense not in ("min", "max"):
        raise ArgumentError(f"sense must be 'min' or 'max', got {sense!r}")
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape[0] != polyhedron.dim:
        raise ArgumentError(f"objective has {c.shape[0]} entries, polyhedron dim {polyhedron.dim}")
    sign = 1.0 if sense == "min" else -1.0
    res = _highs(sign * c, polyhedron)

    if res.status == 4:
        # HiGHS sometimes reports "infeasible or unbounded" as a numerical status
        feas = _highs(np.zeros_like(c), polyhedron)
        status = STATUS_INFEASIBLE if feas.status == 2 else STATUS_UNBOUNDED
        return LpResult(status=status, message=res.message)
    if res.status == 2:
        return LpResult(status=STATUS_INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpResult(status=STATUS_UNBOUNDED, message=res.message)
    if res.status != 0:
        return LpResult(status=STATUS_FAILED, message=res.message)

    x = np.asarray(res.x, dtype=float)
    dual = np.zeros(polyhedron.n_rows)
    ineq = list(polyhedron.ineq_rows)
    eq = list(polyhedron.eq_rows)
    if ineq:
        dual[ineq] = -np.asarray(res.ineqlin.marginals, dtype=float)
    if eq:
        dual[eq] = -np.asarray(res.eqlin.marginals, dtype=float)
    primal_min = float(sign * c @ x)
    dual_min = float(-polyhedron.b @ dual) if polyhedron.n_rows else 0.0
    gap = abs(primal_min - dual_min)
    if gap > DUALITY_TOL * (1.0 + abs(primal_min)):
        print(f"[WARNING] LP duality gap {gap:.3e} above tolerance")
    return LpResult(
        status=STATUS_OPTIMAL,
        value=float(c @ x),
        point=x,
        dual=dual,
        duality_gap=gap,
        message=res.message,
    )


def _highs(c: np.ndarray, polyhedron: Polyhedron):
    ineq = list(polyhedron.ineq_rows)
    eq = list(polyhedron.eq_rows)
    kwargs = {}
    if ineq:
        kwargs["A_ub"] = polyhedron.A[ineq]
        kwargs["b_ub"] = polyhedron.b[ineq]
    if eq:
        kwargs["A_eq"] = polyhedron.A[eq]
        kwargs["b_eq"] = polyhedron.b[eq]
    return linprog(
        c,
        bounds=[(None, None)] * polyhedron.dim,
        method="highs",
        **kwargs,
    )


def is_empty(polyhedron: Polyhedron) -> bool:
    """Phase-1 emptiness test."""
    if polyhedron.n_rows == 0:
        return False
    return lp_solve(np.zeros(polyhedron.dim), polyhedron).status == STATUS_INFEASIBLE


def bounding_box(polyhedron: Polyhedron) -> Tuple[np.ndarray, np.ndarray]:
    """Coordinate-wise bounds (entries may be infinite)."""
    n = polyhedron.dim
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        lo = lp_solve(e, polyhedron, "min")
        if lo.status == STATUS_INFEASIBLE:
            raise EmptyPolyhedron("cannot bound an empty polyhedron")
        if lo.optimal:
            lower[i] = lo.value
        hi = lp_solve(e, polyhedron, "max")
        if hi.optimal:
            upper[i] = hi.value
    return lower, upper


def chebyshev_radius(polyhedron: Polyhedron, cap: float = 1.0) -> float:
    """Radius of the largest inscribed ball (capped); 0 for empty or flat sets."""
    if polyhedron.eq_rows:
        return 0.0
    if polyhedron.n_rows == 0:
        return cap
    norms = np.linalg.norm(polyhedron.A, axis=1)
    A = np.hstack([polyhedron.A, norms[:, None]])
    cap_row = np.zeros((1, polyhedron.dim + 1))
    cap_row[0, -1] = 1.0
    aug = Polyhedron(np.vstack([A, cap_row]), np.concatenate([polyhedron.b, [cap]]))
    e = np.zeros(polyhedron.dim + 1)
    e[-1] = 1.0
    res = lp_solve(e, aug, "max")
    if not res.optimal:
        return 0.0
    return max(0.0, float(res.value))


# ============================================================================
# VERTICES AND RAYS
# ============================================================================

def _canonical_sort(points: List[np.ndarray], n: int) -> np.ndarray:
    if not points:
        return np.zeros((0, n))
    P = np.array(points) + 0.0
    keys = np.round(P, 9)
    order = np.lexsort(keys.T[::-1])
    return P[order]


def _dedupe(points: List[np.ndarray], tol: float = DEDUP_TOL) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) >= tol for q in kept):
            kept.append(p)
    return kept


def _rank(M: np.ndarray) -> int:
    if M.shape[0] == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > VERTEX_TOL * max(1.0, sv[0])))


def enumerate_vertices(polyhedron: Polyhedron) -> VertexList:
    """
    All basic feasible solutions: n linearly independent active rows,
    equality rows always among them.

    Returns:
        VertexList, status 'empty' for an infeasible system and
        'no_vertices' when the polyhedron contains a line
    """
    n, k = polyhedron.dim, polyhedron.n_rows
    if n > MAX_VERTEX_DIM or k > MAX_VERTEX_ROWS:
        raise ScaleError(f"vertex enumeration capped at n<={MAX_VERTEX_DIM}, k<={MAX_VERTEX_ROWS}; got n={n}, k={k}")

    A, b = polyhedron.A, polyhedron.b
    eq = list(polyhedron.eq_rows)
    ineq = list(polyhedron.ineq_rows)
    r_eq = _rank(A[eq]) if eq else 0
    need = n - r_eq

    found: List[np.ndarray] = []
    if need >= 0 and need <= len(ineq):
        for combo in combinations(ineq, need):
            rows = eq + list(combo)
            M = A[rows]
            if _rank(M) < n:
                continue
            x = np.linalg.lstsq(M, b[rows], rcond=None)[0]
            if not np.allclose(M @ x, b[rows], atol=VERTEX_TOL * (1.0 + np.abs(b[rows]).max())):
                continue
            if polyhedron.contains(x):
                found.append(x)

    points = _canonical_sort(_dedupe(found), n)
    if points.shape[0]:
        return VertexList(points, "ok")
    status = "empty" if is_empty(polyhedron) else "no_vertices"
    return VertexList(points, status)


def enumerate_extreme_rays(cone: Polyhedron) -> RayList:
    """
    Generators of {v : A v <= 0, rows in eq_rows with equality}.

    Lineality directions are returned in both signs; the pointed part
    contributes its extreme rays. Directions are scaled to unit max-norm.
    """
    if not cone.is_homogeneous():
        raise ArgumentError("extreme rays need a homogeneous system (b = 0)")
    n, k = cone.dim, cone.n_rows
    if n > MAX_RAY_DIM or k > MAX_RAY_ROWS:
        raise ScaleError(f"ray enumeration capped at n<={MAX_RAY_DIM}, k<={MAX_RAY_ROWS}; got n={n}, k={k}")

    A = cone.A
    E = A[list(cone.eq_rows)] if cone.eq_rows else np.zeros((0, n))
    R = A[list(cone.ineq_rows)] if cone.ineq_rows else np.zeros((0, n))

    found: List[np.ndarray] = []
    L = null_space(A, rcond=VERTEX_TOL) if k else np.eye(n)
    lineality_dim = L.shape[1]
    if lineality_dim:
        for col in L.T:
            found.append(_unit_max(col))
            found.append(_unit_max(-col))
        E = np.vstack([E, L.T])

    need = n - 1 - _rank(E)
    if 0 <= need <= R.shape[0]:
        for combo in combinations(range(R.shape[0]), need):
            M = np.vstack([E, R[list(combo)]])
            N = np.eye(n) if M.shape[0] == 0 else null_space(M, rcond=VERTEX_TOL)
            if N.shape[1] != 1:
                continue
            d = N[:, 0]
            for cand in (d, -d):
                if R.shape[0] and np.any(R @ cand > VERTEX_TOL):
                    continue
                if E.shape[0] and np.any(np.abs(E @ cand) > VERTEX_TOL):
                    continue
                found.append(_unit_max(cand))

    return RayList(_canonical_sort(_dedupe(found), n), lineality_dim)


def _unit_max(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    m = np.abs(v).max()
    out = v / m
    out[np.abs(out) < 1e-15] = 0.0
    return out + 0.0


# ============================================================================
# PROJECTION
# ============================================================================

def _active_set_table(polyhedron: Polyhedron):
    """Nonsingular active sets (eq rows always in), ordered by size then index."""
    if polyhedron._active_sets is not None:
        return polyhedron._active_sets
    A, b = polyhedron.A, polyhedron.b
    eq = list(polyhedron.eq_rows)
    ineq = list(polyhedron.ineq_rows)
    table = []
    max_size = min(polyhedron.dim, polyhedron.n_rows) - len(eq)
    for size in range(0, max(max_size, 0) + 1):
        for combo in combinations(ineq, size):
            rows = eq + list(combo)
            if not rows:
                table.append((rows, None, None, None))
                continue
            AW = A[rows]
            G = AW @ AW.T
            if _rank(AW) < len(rows):
                continue
            table.append((rows, AW, b[rows], np.linalg.inv(G)))
    polyhedron._active_sets = table
    return table


def project_batch(points, polyhedron: Polyhedron) -> np.ndarray:
    """
    Euclidean projection of every row of `points` onto the polyhedron.

    Each active set W gives the candidate y = x - A_W^T lam with
    (A_W A_W^T) lam = A_W x - b_W; the first candidate with lam >= 0 on
    inequality rows and y feasible is the unique projection.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.full_like(X, np.nan)
    todo = np.ones(X.shape[0], dtype=bool)
    n_eq = len(polyhedron.eq_rows)

    for rows, AW, bW, Ginv in _active_set_table(polyhedron):
        if not todo.any():
            break
        idx = np.flatnonzero(todo)
        Xi = X[idx]
        if AW is None:
            Y = Xi
            ok = np.ones(len(idx), dtype=bool)
        else:
            lam = (Xi @ AW.T - bW) @ Ginv.T
            Y = Xi - lam @ AW
            scale = 1.0 + np.abs(lam).max(axis=1)
            ok = np.all(lam[:, n_eq:] >= -1e-10 * scale[:, None], axis=1)
        ok &= polyhedron.contains(Y)
        out[idx[ok]] = Y[ok]
        todo[idx[ok]] = False

    if todo.any():
        if is_empty(polyhedron):
            raise EmptyPolyhedron("cannot project onto an empty polyhedron")
        for i in np.flatnonzero(todo):
            out[i] = _project_fallback(X[i], polyhedron)
    return out


def project(x, polyhedron: Polyhedron) -> np.ndarray:
    """Nearest point of the polyhedron to x."""
    return project_batch(np.asarray(x, dtype=float)[None, :], polyhedron)[0]


def distance_batch(points, polyhedron: Polyhedron) -> np.ndarray:
    X = np.atleast_2d(np.asarray(points, dtype=float))
    return np.linalg.norm(X - project_batch(X, polyhedron), axis=1)


def _project_fallback(x: np.ndarray, polyhedron: Polyhedron) -> np.ndarray:
    cons = []
    ineq = list(polyhedron.ineq_rows)
    eq = list(polyhedron.eq_rows)
    if ineq:
        A_i, b_i = polyhedron.A[ineq], polyhedron.b[ineq]
        cons.append({"type": "ineq", "fun": lambda y: b_i - A_i @ y, "jac": lambda y: -A_i})
    if eq:
        A_e, b_e = polyhedron.A[eq], polyhedron.b[eq]
        cons.append({"type": "eq", "fun": lambda y: A_e @ y - b_e, "jac": lambda y: A_e})
    start = lp_solve(np.zeros(polyhedron.dim), polyhedron).point
    res = minimize(
        lambda y: 0.5 * np.sum((y - x) ** 2),
        start,
        jac=lambda y: y - x,
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    return np.asarray(res.x, dtype=float)
