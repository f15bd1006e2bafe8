"""
Numerical certification harness.

Every check draws its samples from numpy.random.default_rng(seed) and
returns a CheckReport; the same seed reproduces the same report.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from dc_modules.dc_config import (
    DEFAULT_SEED,
    DEFAULT_SAMPLE_RADIUS,
    CONVEXITY_TOL,
    CONVEXITY_TRIALS,
    IDENTITY_TOL,
    IDENTITY_SAMPLES,
    LC1_TOL,
    LC1_SAMPLES,
)
from dc_modules.convex_core import Domain
from dc_modules.errors import ArgumentError, InputFormatError


@dataclass
class CheckReport:
    check: str
    trials: int
    max_violation: float
    tol: float
    passed: bool
    witness: Optional[List] = None
    seed: int = DEFAULT_SEED
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        data = {
            "check": self.check,
            "trials": int(self.trials),
            "max_violation": float(self.max_violation),
            "tol": float(self.tol),
            "pass": bool(self.passed),
            "witness": self.witness,
            "seed": int(self.seed),
        }
        if self.details:
            data["details"] = self.details
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "CheckReport":
        try:
            return cls(
                check=str(data["check"]),
                trials=int(data["trials"]),
                max_violation=float(data["max_violation"]),
                tol=float(data["tol"]),
                passed=bool(data["pass"]),
                witness=data.get("witness"),
                seed=int(data.get("seed", DEFAULT_SEED)),
                details=dict(data.get("details", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"malformed check report: {e}")


def _batch_eval(fn, X: np.ndarray) -> np.ndarray:
    if hasattr(fn, "eval_batch"):
        return np.asarray(fn.eval_batch(X), dtype=float)
    return np.array([float(fn(x)) for x in X])


def _finish(name, trials, violations, witnesses, tol, seed) -> CheckReport:
    if violations.size == 0:
        return CheckReport(name, trials, 0.0, tol, True, None, seed)
    k = int(np.argmax(violations))
    worst = float(violations[k])
    passed = worst <= tol
    witness = None if passed else [np.asarray(w).tolist() for w in witnesses[k]]
    return CheckReport(name, trials, max(worst, 0.0), tol, passed, witness, seed)


# ============================================================================
# CHECKS
# ============================================================================

def check_convexity(fn, domain: Domain, trials: int = CONVEXITY_TRIALS,
                    tol: float = CONVEXITY_TOL, seed: int = DEFAULT_SEED,
                    name: str = "convexity") -> CheckReport:
    """
    Midpoint test f((x+y)/2) <= (f(x)+f(y))/2 on random pairs of the domain.
    The violation is measured relative to 1 + max |values|.
    """
    rng = np.random.default_rng(seed)
    X = domain.sample(rng, trials)
    Y = domain.sample(rng, trials)
    M = 0.5 * (X + Y)
    fx, fy, fm = _batch_eval(fn, X), _batch_eval(fn, Y), _batch_eval(fn, M)
    scale = 1.0 + np.max(np.abs(np.stack([fx, fy, fm])), axis=0)
    violations = (fm - 0.5 * (fx + fy)) / scale
    return _finish(name, trials, violations, list(zip(X, Y)), tol, seed)


def check_dc_identity(dc, reference, samples: int = IDENTITY_SAMPLES,
                      tol: float = IDENTITY_TOL, seed: int = DEFAULT_SEED,
                      name: str = "dc_identity") -> CheckReport:
    """
    |(g - h)(x) - reference(x)| <= tol (1 + |reference(x)|) at random domain points.

    Args:
        dc: DcFunction
        reference: callable on one point, or anything with eval_batch
    """
    rng = np.random.default_rng(seed)
    X = dc.domain.sample(rng, samples)
    values = dc.g.eval_batch(X) - dc.h.eval_batch(X)
    ref = _batch_eval(reference, X)
    violations = np.abs(values - ref) / (1.0 + np.abs(ref))
    return _finish(name, samples, violations, [(x,) for x in X], tol, seed)


def check_lc1_bound(pieces: Sequence, samples: int = LC1_SAMPLES, tol: float = LC1_TOL,
                    seed: int = DEFAULT_SEED, moduli=None, domain: Optional[Domain] = None,
                    name: str = "lc1_bound") -> CheckReport:
    """
    theta(x) - theta(y) <= grad theta(y).(x - y) + L/2 ||x - y||^2 for every
    ordered difference theta = theta_j - theta_i of quadratic pieces.

    Args:
        pieces: list of (A, a, c) with theta(x) = 1/2 x'Ax + a'x + c
        moduli: optional matrix L[j][i]; defaults to ||A_j - A_i||_2
        domain: sampling domain, default the box [-R, R]^n
    """
    pieces = [(np.atleast_2d(np.asarray(A, dtype=float)), np.asarray(a, dtype=float).reshape(-1), float(c))
              for A, a, c in pieces]
    if not pieces:
        raise ArgumentError("check_lc1_bound needs at least one piece")
    n = pieces[0][0].shape[0]
    if domain is None:
        domain = Domain.box(np.full(n, -DEFAULT_SAMPLE_RADIUS), np.full(n, DEFAULT_SAMPLE_RADIUS))
    rng = np.random.default_rng(seed)
    X = domain.sample(rng, samples)
    Y = domain.sample(rng, samples)
    D = X - Y

    def theta(k, Z):
        A, a, c = pieces[k]
        return 0.5 * np.einsum("ij,jk,ik->i", Z, A, Z) + Z @ a + c

    def grad(k, Z):
        A, a, _ = pieces[k]
        return Z @ A.T + a

    worst = np.zeros(0)
    witnesses: List = []
    for j in range(len(pieces)):
        for i in range(len(pieces)):
            if i == j:
                continue
            if moduli is None:
                L = float(np.linalg.norm(pieces[j][0] - pieces[i][0], 2))
            else:
                L = float(np.asarray(moduli, dtype=float)[j, i])
            lhs = (theta(j, X) - theta(i, X)) - (theta(j, Y) - theta(i, Y))
            rhs = np.sum((grad(j, Y) - grad(i, Y)) * D, axis=1) + 0.5 * L * np.sum(D * D, axis=1)
            v = (lhs - rhs) / (1.0 + np.abs(lhs))
            worst = np.concatenate([worst, v])
            witnesses.extend((x, y, [j, i]) for x, y in zip(X, Y))
    return _finish(name, samples, worst, witnesses, tol, seed)


def merge_reports(reports: Sequence[CheckReport]) -> Dict:
    """Reports keyed and ordered by check name, with an overall flag."""
    ordered = sorted(reports, key=lambda r: r.check)
    return {
        "checks": [r.to_dict() for r in ordered],
        "pass": all(r.passed for r in ordered),
    }
