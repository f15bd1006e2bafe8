"""
Min-representation of piecewise quadratic functions.

For a continuous selection theta of quadratic pieces theta_i on polyhedral
regions S^i with convex union,

    psi_i(x) = theta_i(x) + dist(x; S^i) max_j ||grad theta_j(x) - grad theta_i(x)||
               + (3 L_i / 2) dist(x; S^i)^2

majorizes theta, agrees with theta_i on S^i, and theta = min_i psi_i.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from dc_modules.dc_config import DEFAULT_SEED, CONVEXITY_TRIALS, FACE_TOL
from dc_modules.convex_core import (
    Affine,
    Domain,
    MaxOf,
    Norm2Affine,
    NonnegScale,
    PolyhedralDistance,
    QuadForm,
    SquareOfNonneg,
    Sum,
    constant,
)
from dc_modules.dc_core import DcFunction, combine_linear, pointwise_extremum, product
from dc_modules.errors import ArgumentError, EmptyRegion, NonConvexUnion
from dc_modules.polyhedral import Polyhedron, bounding_box, is_empty, project_batch

AGREEMENT_SAMPLES = 100
REGION_TOL = 1e-7


class QuadraticPiece:
    """theta(x) = 1/2 x'Ax + a'x + c (A symmetric; zero for affine pieces)."""

    def __init__(self, A, a, c: float = 0.0):
        a = np.array(a, dtype=float).reshape(-1)
        A = np.array(A, dtype=float)
        if A.size == 1 and a.shape[0] == 1:
            A = A.reshape(1, 1)
        if A.shape != (a.shape[0], a.shape[0]):
            raise ArgumentError(f"piece matrix {A.shape} does not match linear term of length {a.shape[0]}")
        self.A = 0.5 * (A + A.T)
        self.a = a
        self.c = float(c)

    @classmethod
    def affine(cls, a, alpha: float) -> "QuadraticPiece":
        a = np.array(a, dtype=float).reshape(-1)
        return cls(np.zeros((a.shape[0], a.shape[0])), a, alpha)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @property
    def is_affine(self) -> bool:
        return not np.any(self.A)

    def eval_batch(self, X):
        X = np.atleast_2d(X)
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.a + self.c

    def grad_batch(self, X):
        return np.atleast_2d(X) @ self.A.T + self.a

    def as_dc(self, domain: Domain) -> DcFunction:
        """Eigen split A = A+ - A- into two PSD quadratics."""
        if self.is_affine:
            return DcFunction(Affine(self.a, self.c), constant(self.dim), domain)
        lam, V = np.linalg.eigh(self.A)
        plus = (V * np.maximum(lam, 0.0)) @ V.T
        minus = (V * np.maximum(-lam, 0.0)) @ V.T
        return DcFunction(
            QuadForm(0.5 * (plus + plus.T), self.a, self.c),
            QuadForm(0.5 * (minus + minus.T)),
            domain,
        )

    def to_dict(self):
        return {"A": self.A.tolist(), "a": self.a.tolist(), "c": self.c}

    def __repr__(self):
        return f"QuadraticPiece(dim={self.dim}, affine={self.is_affine})"


def _as_piece(p) -> QuadraticPiece:
    if isinstance(p, QuadraticPiece):
        return p
    A, a, c = p
    return QuadraticPiece(A, a, c)


def lipschitz_modulus(piece_i, piece_j) -> float:
    """L_ji = ||A_j - A_i||_2, the Lipschitz modulus of grad(theta_j - theta_i)."""
    piece_i, piece_j = _as_piece(piece_i), _as_piece(piece_j)
    diff = piece_j.A - piece_i.A
    if not np.any(diff):
        return 0.0
    return float(np.linalg.norm(diff, 2))


class PiecewiseLc1:
    """
    Quadratic pieces with polyhedral regions whose union is convex.

    Args:
        pieces: QuadraticPiece or (A, a, c) per region
        regions: Polyhedron per piece
        domain: evaluation domain, by default the bounding box of the union
        check: run the sampled region / agreement / convex-union checks
    """

    def __init__(self, pieces: Sequence, regions: Sequence[Polyhedron], domain: Optional[Domain] = None,
                 check: bool = True, seed: int = DEFAULT_SEED):
        if not pieces or len(pieces) != len(regions):
            raise ArgumentError("need one region per piece and at least one piece")
        self.pieces = [_as_piece(p) for p in pieces]
        self.regions = list(regions)
        n = self.pieces[0].dim
        for p, r in zip(self.pieces, self.regions):
            if p.dim != n or r.dim != n:
                raise ArgumentError("pieces and regions must share one dimension")
        for i, r in enumerate(self.regions):
            if is_empty(r):
                raise EmptyRegion(f"region {i} is empty")
        self.domain = domain if domain is not None else self._union_box()
        I = len(self.pieces)
        self.moduli = np.array([[lipschitz_modulus(self.pieces[i], self.pieces[j]) for i in range(I)]
                                for j in range(I)])
        self.piece_moduli = self.moduli.max(axis=0)
        if check and I > 1:
            rng = np.random.default_rng(seed)
            samples = [Domain.from_polyhedron(r).sample(rng, AGREEMENT_SAMPLES) for r in self.regions]
            self._check_agreement(samples)
            self._check_convex_union(rng)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    def _union_box(self) -> Domain:
        boxes = [bounding_box(r) for r in self.regions]
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return Domain.box(lo, hi)

    def region_index(self, X) -> np.ndarray:
        """First region containing each point, -1 outside the union."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], -1)
        for i in reversed(range(len(self.regions))):
            out[self.regions[i].contains(X, REGION_TOL)] = i
        return out

    def eval_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        idx = self.region_index(X)
        out = np.full(X.shape[0], np.nan)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = p.eval_batch(X[mask])
        return out

    def value(self, x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        v = self.eval_batch(X)
        return float(v[0]) if np.asarray(x).ndim <= 1 else v

    def _check_agreement(self, samples: List[np.ndarray]) -> None:
        for i, Xi in enumerate(samples):
            vi = self.pieces[i].eval_batch(Xi)
            ref = self.eval_batch(Xi)
            if np.any(np.abs(vi - ref) > FACE_TOL * (1.0 + np.abs(vi))):
                raise ArgumentError(f"piece {i} disagrees with the selection on its own region")
            for j, rj in enumerate(self.regions):
                if j == i:
                    continue
                Y = project_batch(Xi, rj)
                shared = self.regions[i].contains(Y, REGION_TOL)
                if not shared.any():
                    continue
                a = self.pieces[i].eval_batch(Y[shared])
                b = self.pieces[j].eval_batch(Y[shared])
                if np.any(np.abs(a - b) > FACE_TOL * (1.0 + np.abs(a))):
                    raise ArgumentError(f"pieces {i} and {j} disagree on their shared boundary")

    def _check_convex_union(self, rng: np.random.Generator, trials: int = CONVEXITY_TRIALS) -> None:
        pools = [Domain.from_polyhedron(r).sample(rng, trials) for r in self.regions]
        which = rng.integers(0, len(pools), size=(trials, 2))
        pick = rng.integers(0, trials, size=(trials, 2))
        X = np.array([pools[w][k] for w, k in zip(which[:, 0], pick[:, 0])])
        Y = np.array([pools[w][k] for w, k in zip(which[:, 1], pick[:, 1])])
        M = 0.5 * (X + Y)
        outside = self.region_index(M) < 0
        if outside.any():
            k = int(np.flatnonzero(outside)[0])
            raise NonConvexUnion(f"midpoint of {X[k].tolist()} and {Y[k].tolist()} leaves the union")

    def to_dict(self):
        return {
            "pieces": [p.to_dict() for p in self.pieces],
            "regions": [r.to_dict() for r in self.regions],
        }


@dataclass
class MinRepresentation:
    psi: List[DcFunction]
    theta: DcFunction


def _gradient_gap(pw: PiecewiseLc1, i: int):
    """max_j ||grad theta_j - grad theta_i|| as a convex expression, or a constant."""
    pi = pw.pieces[i]
    terms, constants = [], []
    for j, pj in enumerate(pw.pieces):
        if j == i:
            continue
        dA, da = pj.A - pi.A, pj.a - pi.a
        if np.any(dA):
            terms.append(Norm2Affine(dA, da))
        else:
            constants.append(float(np.linalg.norm(da)))
    if not terms:
        return None, max(constants) if constants else 0.0
    if constants and max(constants) > 0.0:
        terms.append(constant(pw.dim, max(constants)))
    return (terms[0] if len(terms) == 1 else MaxOf(terms)), None


def build_min_representation(pw: PiecewiseLc1) -> MinRepresentation:
    """psi_i for every piece and theta = min_i psi_i, all as dc functions on pw.domain."""
    domain = pw.domain
    psis = []
    for i, (piece, region) in enumerate(zip(pw.pieces, pw.regions)):
        theta_i = piece.as_dc(domain)
        if len(pw.pieces) == 1:
            psis.append(theta_i)
            continue
        dist = PolyhedralDistance(region)
        gap, k = _gradient_gap(pw, i)
        terms = [(1.0, theta_i)]
        if gap is None:
            if k > 0.0:
                terms.append((1.0, DcFunction(NonnegScale(k, dist), constant(pw.dim), domain)))
        else:
            zero = constant(pw.dim)
            terms.append((1.0, product(DcFunction(dist, zero, domain), DcFunction(gap, zero, domain))))
        L = float(pw.piece_moduli[i])
        if L > 0.0:
            terms.append((1.5 * L, DcFunction(SquareOfNonneg(dist, 0.0), constant(pw.dim), domain)))
        psis.append(combine_linear(terms))
    return MinRepresentation(psis, pointwise_extremum("min", psis))


def pwa_min_representation(pieces: Sequence, regions: Sequence[Polyhedron],
                           domain: Optional[Domain] = None, check: bool = True) -> DcFunction:
    """
    theta(x) = min_i [a^i.x + alpha_i + dist(x; S^i) max_j ||a^j - a^i||]

    Args:
        pieces: (a^i, alpha_i) per region
    """
    pw = PiecewiseLc1([QuadraticPiece.affine(a, alpha) for a, alpha in pieces], regions, domain, check)
    out = []
    for i, piece in enumerate(pw.pieces):
        k = max((float(np.linalg.norm(q.a - piece.a)) for q in pw.pieces), default=0.0)
        g = Affine(piece.a, piece.c)
        if k > 0.0:
            g = Sum([g, NonnegScale(k, PolyhedralDistance(pw.regions[i]))])
        out.append(DcFunction(g, constant(pw.dim), pw.domain))
    return pointwise_extremum("min", out)
