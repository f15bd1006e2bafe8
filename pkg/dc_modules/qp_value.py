"""
Value function of a parametric quadratic program.

For fixed (Q, D) the program is

    qp_opt(q, b) = min_z  q'z + 1/2 z'Qz   subject to  Dz >= b

with Q copositive on the recession cone D_inf = {v : Dv >= 0}. Everything
here is done by enumerating the active index sets I of the KKT system

    q + Qz - D_I' eta_I = 0,  D_I z = b_I,  eta_I >= 0,  D_J z >= b_J.

Parameters w = (q, b) live in R^(m+k).
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dc_modules.dc_config import (
    DEFAULT_SEED,
    EPS_PSD,
    SYMMETRY_TOL,
    MAX_QP_ROWS,
    MAX_QP_DIM,
    KKT_TOL,
    DOM_TOL,
    COPOSITIVE_SAMPLES,
    UNBOUNDED_THRESHOLD,
    FACE_CONSTANCY_POINTS,
    FACE_TOL,
    SELECTION_TOL,
    SELECTION_SAMPLES,
    COVERAGE_SAMPLES,
    VERTEX_TOL,
)
from dc_modules.convex_core import AffinePrecompose, ConvexExpr, Domain, QuadForm
from dc_modules.dc_core import DcFunction
from dc_modules.errors import (
    ArgumentError,
    FailedCopositivity,
    InputFormatError,
    NotInDomain,
    NotPositiveDefinite,
    PieceNotQuadratic,
    RegionNotInDomain,
    ScaleError,
)
from dc_modules.piecewise_dc import PiecewiseLc1, QuadraticPiece, build_min_representation
from dc_modules.polyhedral import (
    Polyhedron,
    RayList,
    chebyshev_radius,
    enumerate_extreme_rays,
    is_empty,
    lp_solve,
)

DOM_SAMPLES = 50
RADIUS_TOL = 1e-9


# ============================================================================
# COPOSITIVITY
# ============================================================================

@dataclass
class CopositivityVerdict:
    status: str                         # ray_pass | sampled_pass | fail
    witness: Optional[np.ndarray] = None
    n_rays: int = 0

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self):
        return {
            "status": self.status,
            "witness": None if self.witness is None else self.witness.tolist(),
            "rays": self.n_rays,
        }


def _recession_cone(D: np.ndarray) -> Polyhedron:
    return Polyhedron(-D, np.zeros(D.shape[0]), dim=D.shape[1])


def check_copositive(Q, D, seed: int = DEFAULT_SEED, samples: int = COPOSITIVE_SAMPLES,
                     rays: Optional[RayList] = None) -> CopositivityVerdict:
    """
    v'Qv >= 0 on D_inf: exact on the extreme rays, then sampled on random
    nonnegative combinations. A failure carries a witness v with v'Qv < 0;
    a sampled pass is heuristic.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if Q.shape[0] > MAX_QP_DIM:
        raise ScaleError(f"copositivity check capped at m <= {MAX_QP_DIM}, got {Q.shape[0]}")
    if rays is None:
        rays = enumerate_extreme_rays(_recession_cone(D))
    R = rays.directions
    if R.shape[0] == 0:
        return CopositivityVerdict("ray_pass", None, 0)
    G = R @ Q @ R.T
    diag = np.diag(G)
    if np.any(diag < -EPS_PSD):
        k = int(np.argmin(diag))
        return CopositivityVerdict("fail", R[k].copy(), R.shape[0])
    if np.all(G >= -EPS_PSD) or np.linalg.eigvalsh(0.5 * (Q + Q.T))[0] >= -EPS_PSD:
        return CopositivityVerdict("ray_pass", None, R.shape[0])
    rng = np.random.default_rng(seed)
    V = rng.exponential(size=(samples, R.shape[0])) @ R
    norms = np.sum(V * V, axis=1)
    keep = norms > 0.0
    V, norms = V[keep], norms[keep]
    vals = np.einsum("ij,jk,ik->i", V, Q, V) / norms
    if vals.size and vals.min() < -EPS_PSD:
        k = int(np.argmin(vals))
        return CopositivityVerdict("fail", V[k] / np.abs(V[k]).max(), R.shape[0])
    print(f"[WARNING] Copositivity passed on {samples} samples only (heuristic)")
    return CopositivityVerdict("sampled_pass", None, R.shape[0])


# ============================================================================
# INSTANCE
# ============================================================================

@dataclass
class DomGenerator:
    subset: Tuple[int, ...]
    v: np.ndarray
    xi: np.ndarray


class QpInstance:
    """Fixed (Q, D) with its recession rays and copositivity verdict."""

    def __init__(self, Q, D, seed: int = DEFAULT_SEED):
        Q = np.atleast_2d(np.array(Q, dtype=float))
        D = np.array(D, dtype=float)
        if D.ndim == 1:
            D = D.reshape(-1, Q.shape[0]) if D.size else np.zeros((0, Q.shape[0]))
        if Q.shape[0] != Q.shape[1]:
            raise ArgumentError(f"Q must be square, got {Q.shape}")
        if D.shape[1] != Q.shape[0]:
            raise ArgumentError(f"D has {D.shape[1]} columns, Q is {Q.shape[0]}x{Q.shape[0]}")
        if np.abs(Q - Q.T).max() > SYMMETRY_TOL * (1.0 + np.abs(Q).max()):
            raise ArgumentError("Q must be symmetric")
        if Q.shape[0] > MAX_QP_DIM or D.shape[0] > MAX_QP_ROWS:
            raise ScaleError(f"QP capped at m <= {MAX_QP_DIM}, k <= {MAX_QP_ROWS}; got m={Q.shape[0]}, k={D.shape[0]}")
        self.Q = 0.5 * (Q + Q.T)
        self.D = D
        self.Q.setflags(write=False)
        self.D.setflags(write=False)
        self.recession = _recession_cone(D)
        self.rays = enumerate_extreme_rays(self.recession)
        self.verdict = check_copositive(self.Q, D, seed, rays=self.rays)
        self.subsets = tuple(c for size in range(self.k + 1) for c in combinations(range(self.k), size))
        self._kkt = {s: self._kkt_system(s) for s in self.subsets}

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    @property
    def k(self) -> int:
        return self.D.shape[0]

    @property
    def n_params(self) -> int:
        return self.m + self.k

    def objective(self, z, q) -> float:
        z = np.asarray(z, dtype=float)
        return float(q @ z + 0.5 * z @ self.Q @ z)

    def feasible_set(self, b) -> Polyhedron:
        return Polyhedron.from_geq(self.D, b) if self.k else Polyhedron(np.zeros((0, self.m)), [], dim=self.m)

    def split(self, w) -> Tuple[np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != self.n_params:
            raise ArgumentError(f"parameter vector needs {self.n_params} entries, got {w.shape[0]}")
        return w[:self.m], w[self.m:]

    def _kkt_system(self, subset):
        m, I = self.m, list(subset)
        K = np.zeros((m + len(I), m + len(I)))
        K[:m, :m] = self.Q
        K[:m, m:] = -self.D[I].T
        K[m:, :m] = self.D[I]
        sv = np.linalg.svd(K, compute_uv=False) if K.size else np.zeros(0)
        nonsingular = bool(sv.size == 0 or sv[-1] > VERTEX_TOL * max(1.0, sv[0]))
        return K, nonsingular

    @cached_property
    def dom_generators(self) -> List[DomGenerator]:
        """
        v-parts of the extreme rays of {(v, xi) : Qv = D_I' xi, D_I v = 0, xi >= 0, D_J v >= 0}
        over all index sets I; together they generate {v in D_inf : v'Qv = 0}.
        """
        m = self.m
        found: List[DomGenerator] = []
        for subset in self.subsets:
            I = list(subset)
            J = [j for j in range(self.k) if j not in subset]
            n = m + len(I)
            rows = [np.hstack([self.Q, -self.D[I].T]), np.hstack([self.D[I], np.zeros((len(I), len(I)))])]
            n_eq = m + len(I)
            rows.append(np.hstack([np.zeros((len(I), m)), -np.eye(len(I))]))
            rows.append(np.hstack([-self.D[J], np.zeros((len(J), len(I)))]))
            A = np.vstack(rows)
            cone = Polyhedron(A, np.zeros(A.shape[0]), eq_rows=range(n_eq), dim=n)
            for d in enumerate_extreme_rays(cone).directions:
                v = d[:m]
                if np.abs(v).max() <= VERTEX_TOL:
                    continue
                scale = np.abs(v).max()
                v = v / scale
                if any(np.allclose(v, g.v, atol=1e-9) for g in found):
                    continue
                found.append(DomGenerator(subset, v + 0.0, d[m:] / scale + 0.0))
        return found

    def to_dict(self):
        return {"Q": self.Q.tolist(), "D": self.D.tolist()}


# ============================================================================
# DOMAIN
# ============================================================================

@dataclass
class DomCertificate:
    feasible: bool
    member: bool
    generators: List[DomGenerator] = field(default_factory=list)
    multipliers: List[Optional[np.ndarray]] = field(default_factory=list)
    margins: List[float] = field(default_factory=list)     # q'v + b'mu per generator

    def to_dict(self):
        return {
            "feasible": self.feasible,
            "member": self.member,
            "generators": [{"subset": list(g.subset), "v": g.v.tolist(), "xi": g.xi.tolist()}
                           for g in self.generators],
            "multipliers": [None if mu is None else mu.tolist() for mu in self.multipliers],
            "margins": [float(x) if np.isfinite(x) else "-inf" for x in self.margins],
        }


def dom_certificate(inst: QpInstance, q, b) -> DomCertificate:
    """
    (q, b) is in dom(Q, D) iff P_D(b) is nonempty and, for every generator v,
    q'v + min_{Dz >= b} (Qv)'z >= 0; each minimum is an LP whose dual mu
    satisfies D'mu = Qv, mu >= 0.
    """
    if not inst.verdict.passed:
        raise FailedCopositivity(f"Q is not copositive on D_inf (witness {inst.verdict.witness.tolist()})")
    q = np.asarray(q, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    P = inst.feasible_set(b)
    if not lp_solve(np.zeros(inst.m), P).optimal:
        return DomCertificate(False, False)
    gens = inst.dom_generators
    mus, margins = [], []
    for g in gens:
        res = lp_solve(inst.Q @ g.v, P, "min")
        if res.optimal:
            mus.append(res.dual)
            margins.append(float(q @ g.v + res.value))
        else:
            mus.append(None)
            margins.append(-np.inf)
    member = all(x >= -DOM_TOL * (1.0 + float(np.abs(q).max(initial=0.0))) for x in margins)
    return DomCertificate(True, member, list(gens), mus, margins)


def dom_membership(inst: QpInstance, q, b) -> bool:
    return dom_certificate(inst, q, b).member


def dom_convexity_certificate(inst: QpInstance) -> str:
    """Which sufficient condition for convexity of dom(Q, D) holds: psd, trivial_recession or none."""
    if np.linalg.eigvalsh(inst.Q)[0] >= -EPS_PSD:
        return "psd"
    if len(inst.rays) == 0 and inst.rays.lineality_dim == 0:
        return "trivial_recession"
    return "none"


@dataclass
class DescentRay:
    z: np.ndarray
    v: np.ndarray
    t: float
    objective: float


def find_descent_ray(inst: QpInstance, q, b) -> Optional[DescentRay]:
    """
    A feasible z and a recession direction v with zeta(z + t v) <= UNBOUNDED_THRESHOLD,
    or None when P_D(b) is empty or no such ray is found.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    P = inst.feasible_set(b)
    start = lp_solve(np.zeros(inst.m), P)
    if not start.optimal:
        return None
    candidates = []
    for v in inst.rays.directions:
        if v @ inst.Q @ v < -EPS_PSD:
            candidates.append((start.point, v))
    for g in inst.dom_generators:
        res = lp_solve(inst.Q @ g.v, P, "min")
        if res.optimal:
            if q @ g.v + res.value < -DOM_TOL:
                candidates.append((res.point, g.v))
            continue
        for radius in (1e1, 1e2, 1e3, 1e4, 1e5, 1e6):
            box = Polyhedron.from_box(start.point - radius, start.point + radius)
            capped = lp_solve(inst.Q @ g.v, P.intersect(box), "min")
            if capped.optimal and (q + inst.Q @ capped.point) @ g.v < -DOM_TOL:
                candidates.append((capped.point, g.v))
                break
    for z, v in candidates:
        t = 1.0
        while t < 1e15:
            value = inst.objective(z + t * v, q)
            if value <= UNBOUNDED_THRESHOLD:
                return DescentRay(z, v, t, value)
            t *= 2.0
    return None


# ============================================================================
# SOLVING
# ============================================================================

@dataclass
class KktPoint:
    subset: Tuple[int, ...]
    z: np.ndarray
    eta: np.ndarray            # multipliers on all k rows (zero off the subset)
    value: float
    degenerate: bool = False

    def residual(self, inst: QpInstance, q, b) -> float:
        """Largest violation of stationarity, feasibility, sign and complementarity."""
        slack = inst.D @ self.z - b
        parts = [
            np.abs(q + inst.Q @ self.z - inst.D.T @ self.eta).max(initial=0.0),
            np.maximum(-slack, 0.0).max(initial=0.0),
            np.maximum(-self.eta, 0.0).max(initial=0.0),
            np.abs(self.eta * slack).max(initial=0.0),
        ]
        return float(max(parts))

    def to_dict(self):
        return {"subset": list(self.subset), "z": self.z.tolist(), "eta": self.eta.tolist(),
                "value": self.value, "degenerate": self.degenerate}


@dataclass
class QpSolution:
    value: float
    minimizer: np.ndarray
    faces: List[KktPoint]
    stationary_points: int = 0

    def to_dict(self):
        return {"value": self.value, "minimizer": self.minimizer.tolist(),
                "faces": [f.to_dict() for f in self.faces], "stationary_points": self.stationary_points}


def _face_point(inst: QpInstance, subset, K, rhs, q, b, rng) -> Optional[np.ndarray]:
    """Point of a singular KKT family meeting the sign and slack conditions, by one LP."""
    m, I = inst.m, list(subset)
    J = [j for j in range(inst.k) if j not in subset]
    n = m + len(I)
    A = np.vstack([
        K,
        np.hstack([np.zeros((len(I), m)), -np.eye(len(I))]),
        np.hstack([-inst.D[J], np.zeros((len(J), len(I)))]),
    ])
    bb = np.concatenate([rhs, np.zeros(len(I)), -b[J]])
    face = Polyhedron(A, bb, eq_rows=range(K.shape[0]), dim=n)
    res = lp_solve(np.zeros(n), face)
    if not res.optimal:
        return None
    y0 = res.point
    ref = inst.objective(y0[:m], q)
    box = Polyhedron.from_box(y0 - 1.0, y0 + 1.0)
    local = face.intersect(box)
    for _ in range(FACE_CONSTANCY_POINTS):
        other = lp_solve(rng.normal(size=n), local)
        if other.optimal:
            value = inst.objective(other.point[:m], q)
            if abs(value - ref) > FACE_TOL * (1.0 + abs(ref)):
                print(f"[WARNING] Objective not constant on KKT face {list(subset)}: "
                      f"{ref:.10g} vs {value:.10g}")
                break
    return y0


def _kkt_points(inst: QpInstance, q, b, seed: int = DEFAULT_SEED) -> List[KktPoint]:
    m, k = inst.m, inst.k
    rng = np.random.default_rng(seed)
    scale = 1.0 + max(np.abs(q).max(initial=0.0), np.abs(b).max(initial=0.0))
    tol = KKT_TOL * scale
    points = []
    for subset in inst.subsets:
        I = list(subset)
        J = [j for j in range(k) if j not in subset]
        K, nonsingular = inst._kkt[subset]
        rhs = np.concatenate([-q, b[I]])
        if nonsingular:
            y = np.linalg.solve(K, rhs)
            degenerate = False
        else:
            y = _face_point(inst, subset, K, rhs, q, b, rng)
            if y is None:
                continue
            degenerate = True
        z, eta_I = y[:m], y[m:]
        if np.any(eta_I < -tol) or np.any(inst.D[J] @ z < b[J] - tol):
            continue
        eta = np.zeros(k)
        eta[I] = eta_I
        points.append(KktPoint(tuple(subset), z + 0.0, eta + 0.0, inst.objective(z, q), degenerate))
    return points


def qp_solve(inst: QpInstance, q, b, check_domain: bool = True) -> QpSolution:
    """
    qp_opt(q, b) as the least objective over all KKT points, with every face
    attaining it within FACE_TOL.

    Raises:
        NotInDomain: (q, b) outside dom(Q, D)
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if q.shape[0] != inst.m or b.shape[0] != inst.k:
        raise ArgumentError(f"need q in R^{inst.m} and b in R^{inst.k}")
    if check_domain and not dom_membership(inst, q, b):
        raise NotInDomain(f"(q, b) = ({q.tolist()}, {b.tolist()}) is outside dom(Q, D)")
    points = _kkt_points(inst, q, b)
    if not points:
        raise NotInDomain("no KKT point found")
    best = min(p.value for p in points)
    faces = [p for p in points if p.value <= best + FACE_TOL * (1.0 + abs(best))]
    return QpSolution(best, faces[0].z, faces, len(points))


def qp_value_batch(inst: QpInstance, W, check_domain: bool = False) -> np.ndarray:
    W = np.atleast_2d(np.asarray(W, dtype=float))
    return np.array([qp_solve(inst, w[:inst.m], w[inst.m:], check_domain).value for w in W])


# ============================================================================
# PIECES
# ============================================================================

@dataclass
class KktPiece:
    subset: Tuple[int, ...]
    solution_map: np.ndarray         # z = Z w
    multiplier_map: np.ndarray       # eta_I = E w
    validity: Polyhedron             # cone in w-space where the point is a KKT point
    region: Polyhedron               # validity restricted to the query region
    H: np.ndarray                    # piece value 1/2 w'Hw
    degenerate: bool = False

    def value(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        return 0.5 * np.einsum("ij,jk,ik->i", W, self.H, W)

    def z(self, w) -> np.ndarray:
        return self.solution_map @ np.asarray(w, dtype=float)

    def as_quadratic(self) -> QuadraticPiece:
        return QuadraticPiece(self.H, np.zeros(self.H.shape[0]), 0.0)

    def to_dict(self):
        return {
            "subset": list(self.subset),
            "solution_map": self.solution_map.tolist(),
            "H": self.H.tolist(),
            "validity": self.validity.to_dict(),
            "degenerate": self.degenerate,
        }


def domain_polyhedron(domain: Domain) -> Polyhedron:
    if domain.kind == "box":
        return Polyhedron.from_box(domain.lower, domain.upper)
    return domain.polyhedron


def enumerate_pieces(inst: QpInstance, region=None, include_degenerate: bool = False) -> List[KktPiece]:
    """
    One piece per index set I with a nonsingular KKT matrix: the linear maps
    w -> (z, eta_I), the validity cone {eta_I >= 0, D_J z >= b_J} and the value
    1/2 w'Hw. Singular index sets give flat pieces through the pseudo-inverse
    when include_degenerate is set. Pieces whose region misses `region` are dropped.
    """
    m, k, N = inst.m, inst.k, inst.n_params
    if isinstance(region, Domain):
        region = domain_polyhedron(region)
    select_q = np.hstack([np.eye(m), np.zeros((m, k))])
    pieces = []
    for subset in inst.subsets:
        I = list(subset)
        J = [j for j in range(k) if j not in subset]
        K, nonsingular = inst._kkt[subset]
        if not nonsingular and not include_degenerate:
            continue
        R = np.zeros((m + len(I), N))
        R[:m, :m] = -np.eye(m)
        for t, i in enumerate(I):
            R[m + t, m + i] = 1.0
        if nonsingular:
            M = np.linalg.solve(K, R)
            consistency = np.zeros((0, N))
        else:
            M = np.linalg.pinv(K) @ R
            consistency = K @ M - R
            consistency = consistency[np.abs(consistency).max(axis=1) > VERTEX_TOL]
        Z, E = M[:m], M[m:]
        select_b = np.zeros((len(J), N))
        for t, j in enumerate(J):
            select_b[t, m + j] = 1.0
        A = np.vstack([consistency, -E, -(inst.D[J] @ Z - select_b)])
        validity = Polyhedron(A, np.zeros(A.shape[0]), eq_rows=range(consistency.shape[0]), dim=N)
        restricted = validity if region is None else validity.intersect(region)
        if region is not None and is_empty(restricted):
            continue
        H = select_q.T @ Z + Z.T @ select_q + Z.T @ inst.Q @ Z
        pieces.append(KktPiece(tuple(subset), Z, E, validity, restricted, 0.5 * (H + H.T), not nonsingular))
    return pieces


def _represent(candidates, region: Domain, oracle, rng, label: str) -> DcFunction:
    """
    Keep the full-dimensional candidate pieces that equal the oracle on their
    region, check they cover the region, and build the min-representation.
    """
    kept = []
    for name, piece, poly in candidates:
        if chebyshev_radius(poly) <= RADIUS_TOL:
            continue
        X = Domain.from_polyhedron(poly).sample(rng, SELECTION_SAMPLES)
        ref = oracle(X)
        match = np.abs(piece.eval_batch(X) - ref) <= SELECTION_TOL * (1.0 + np.abs(ref))
        if match.all():
            kept.append((name, piece, poly))
        elif match.any():
            raise PieceNotQuadratic(f"{label}: piece {name} is the minimum on only part of its region")
    if not kept:
        raise PieceNotQuadratic(f"{label}: no quadratic piece matches the value function")
    Xc = region.sample(rng, COVERAGE_SAMPLES)
    covered = np.zeros(Xc.shape[0], dtype=bool)
    for _, _, poly in kept:
        covered |= poly.contains(Xc, 1e-7)
    if not covered.all():
        k = int(np.flatnonzero(~covered)[0])
        raise PieceNotQuadratic(f"{label}: no quadratic piece covers {Xc[k].tolist()}")
    pw = PiecewiseLc1([p for _, p, _ in kept], [r for _, _, r in kept], domain=region)
    theta = build_min_representation(pw).theta
    theta.meta["pieces"] = [list(name) for name, _, _ in kept]
    return theta


def _check_region(inst: QpInstance, W: np.ndarray, what: str) -> None:
    for w in W:
        q, b = inst.split(w)
        if not dom_membership(inst, q, b):
            raise RegionNotInDomain(f"{what} point {w.tolist()} lies outside dom(Q, D)")


def value_dc(inst: QpInstance, region: Domain, seed: int = DEFAULT_SEED) -> DcFunction:
    """qp_opt as a dc function of w = (q, b) on a convex region inside dom(Q, D)."""
    if region.dim != inst.n_params:
        raise ArgumentError(f"region must live in R^{inst.n_params}")
    rng = np.random.default_rng(seed)
    _check_region(inst, region.sample(rng, DOM_SAMPLES), "region")
    candidates = [(p.subset, p.as_quadratic(), p.region) for p in enumerate_pieces(inst, region)]
    return _represent(candidates, region, lambda X: qp_value_batch(inst, X), rng, "value_dc")


class RhsValueFunction(ConvexExpr):
    """phi(b') = min 1/2 y'Qy subject to Dy >= b' for positive definite Q."""

    kind = "rhs_value"

    def __init__(self, inst: QpInstance):
        super().__init__(inst.k)
        self.inst = inst
        self._zero = np.zeros(inst.m)

    def eval_batch(self, X):
        return np.array([qp_solve(self.inst, self._zero, b, check_domain=False).value
                         for b in np.atleast_2d(X)])

    def lower_bound(self, domain):
        return 0.0


def _require_pd(inst: QpInstance) -> np.ndarray:
    smallest = float(np.linalg.eigvalsh(inst.Q)[0])
    if smallest < EPS_PSD:
        raise NotPositiveDefinite(f"Q has smallest eigenvalue {smallest:.3e}")
    return np.linalg.inv(inst.Q)


def pd_value_dc(inst: QpInstance, region: Optional[Domain] = None) -> DcFunction:
    """
    For positive definite Q: qp_opt(q, b) = phi(b + D Q^-1 q) - 1/2 q'Q^-1 q,
    both terms convex in (q, b).
    """
    Qinv = _require_pd(inst)
    m, k, N = inst.m, inst.k, inst.n_params
    W = np.hstack([inst.D @ Qinv, np.eye(k)])
    g = AffinePrecompose(RhsValueFunction(inst), W)
    H = np.zeros((N, N))
    H[:m, :m] = Qinv
    h = QuadForm(H)
    if region is None:
        region = Domain.box(np.full(N, -np.inf), np.full(N, np.inf))
    return DcFunction(g, h, region, meta={"shortcut": "positive_definite"})


# ============================================================================
# RECOURSE
# ============================================================================

@dataclass
class RecourseScenario:
    f: np.ndarray
    G: np.ndarray
    C: np.ndarray
    xi: np.ndarray


class RecourseMap:
    """q(x, w^s) = f_s + G_s x and b(x, w^s) = xi_s - C_s x per scenario."""

    def __init__(self, scenarios: Sequence[RecourseScenario], inst: QpInstance):
        if not scenarios:
            raise ArgumentError("recourse map needs at least one scenario")
        n = np.atleast_2d(scenarios[0].G).shape[1]
        for s in scenarios:
            if s.f.shape != (inst.m,) or s.xi.shape != (inst.k,):
                raise ArgumentError("recourse offsets do not match (Q, D)")
            if s.G.shape != (inst.m, n) or s.C.shape != (inst.k, n):
                raise ArgumentError("recourse matrices do not match (Q, D) and the x dimension")
        self.scenarios = list(scenarios)
        self.x_dim = n

    def affine_map(self, s: int) -> Tuple[np.ndarray, np.ndarray]:
        """(W, w0) with w(x) = W x + w0 = (q(x), b(x))."""
        if not 0 <= s < len(self.scenarios):
            raise ArgumentError(f"scenario index {s} out of range")
        sc = self.scenarios[s]
        return np.vstack([sc.G, -sc.C]), np.concatenate([sc.f, sc.xi])

    def __len__(self):
        return len(self.scenarios)


def recourse_dc(inst: QpInstance, rm: RecourseMap, scenario: int, x_region: Domain,
                seed: int = DEFAULT_SEED) -> DcFunction:
    """psi(x) = qp_opt(q(x), b(x)) as a dc function of x on x_region."""
    if x_region.dim != rm.x_dim:
        raise ArgumentError(f"x region must live in R^{rm.x_dim}")
    W, w0 = rm.affine_map(scenario)
    rng = np.random.default_rng(seed)
    _check_region(inst, x_region.sample(rng, DOM_SAMPLES) @ W.T + w0, "recourse image")

    if np.linalg.eigvalsh(inst.Q)[0] >= EPS_PSD:
        pd = pd_value_dc(inst)
        return DcFunction(AffinePrecompose(pd.g, W, w0), AffinePrecompose(pd.h, W, w0), x_region,
                          meta={"shortcut": "positive_definite", "scenario": scenario})

    region_poly = domain_polyhedron(x_region)
    candidates = []
    for p in enumerate_pieces(inst):
        HW = p.H @ W
        piece = QuadraticPiece(W.T @ HW, W.T @ p.H @ w0, 0.5 * w0 @ p.H @ w0)
        V = p.validity
        pulled = Polyhedron(V.A @ W, V.b - V.A @ w0, eq_rows=V.eq_rows, dim=rm.x_dim)
        restricted = pulled.intersect(region_poly)
        if is_empty(restricted):
            continue
        candidates.append((p.subset, piece, restricted))

    def oracle(X):
        return qp_value_batch(inst, X @ W.T + w0)

    out = _represent(candidates, x_region, oracle, rng, "recourse_dc")
    out.meta["scenario"] = scenario
    return out


def parse_instance(data) -> QpInstance:
    try:
        return QpInstance(data["Q"], data["D"])
    except KeyError as e:
        raise InputFormatError(f"QP instance needs 'Q' and 'D': missing {e}")
