"""
Problem file parsing.

Every JSON input format of the command line is read and written here:
scenario files (risk), QP instance and query files (qp), recourse files,
piecewise files. Parsing problems surface as InputFormatError; the loader
never falls back to a default.
"""
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from dc_modules.convex_core import Domain, expr_from_dict
from dc_modules.errors import DcForgeError, InputFormatError
from dc_modules.piecewise_dc import PiecewiseLc1, QuadraticPiece
from dc_modules.polyhedral import Polyhedron
from dc_modules.qp_value import QpInstance, RecourseMap, RecourseScenario
from dc_modules.risk import PwlUtility, RandomDcFunctional, ScenarioSet


def read_json(path) -> Dict:
    """Read a problem file; any I/O or JSON problem is an InputFormatError."""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise InputFormatError(f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path} is not valid JSON: {e}")
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e}")
    if not isinstance(data, dict):
        raise InputFormatError(f"{path} must hold a JSON object")
    return data


def _require(data: Dict, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise InputFormatError(f"missing field(s) {missing}")
    return [data[k] for k in keys]


def _matrix(value, name: str, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputFormatError(f"{name} must be numeric: {e}")
    if M.ndim == 1 and cols is not None and M.size == 0:
        M = np.zeros((0, cols))
    M = np.atleast_2d(M)
    if (rows is not None and M.shape[0] != rows) or (cols is not None and M.shape[1] != cols):
        raise InputFormatError(f"{name} has shape {M.shape}, expected ({rows}, {cols})")
    return M


def _vector(value, name: str, length: Optional[int] = None) -> np.ndarray:
    try:
        v = np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise InputFormatError(f"{name} must be numeric: {e}")
    if length is not None and v.shape[0] != length:
        raise InputFormatError(f"{name} has {v.shape[0]} entries, expected {length}")
    return v


def _wrap(fn, what: str):
    try:
        return fn()
    except InputFormatError:
        raise
    except DcForgeError as e:
        raise InputFormatError(f"invalid {what}: {e}")


# ============================================================================
# RISK
# ============================================================================

@dataclass
class ScenarioProblem:
    functional: RandomDcFunctional
    utility: Optional[PwlUtility] = None
    points: Optional[np.ndarray] = None


def parse_scenario_file(data: Dict) -> ScenarioProblem:
    """
    {"domain": Domain, "p": [...], "scenarios": [{"pExpr": expr, "qExpr": expr}, ...],
     "utility": {"slopes", "intercepts"}?, "points": [[...], ...]?}
    """
    domain_data, probs, scenarios = _require(data, "domain", "p", "scenarios")
    domain = _wrap(lambda: Domain.from_dict(domain_data), "domain")
    if not isinstance(scenarios, list):
        raise InputFormatError("scenarios must be a list")
    p_exprs, q_exprs = [], []
    for k, s in enumerate(scenarios):
        if not isinstance(s, dict) or "pExpr" not in s:
            raise InputFormatError(f"scenario {k} needs a 'pExpr' expression")
        p_exprs.append(_wrap(lambda: expr_from_dict(s["pExpr"], domain), f"scenario {k} pExpr"))
        q = s.get("qExpr", {"kind": "affine", "a": [0.0] * domain.dim, "c": 0.0})
        q_exprs.append(_wrap(lambda: expr_from_dict(q, domain), f"scenario {k} qExpr"))
    rf = _wrap(lambda: RandomDcFunctional(ScenarioSet(_vector(probs, "p")), p_exprs, q_exprs, domain),
               "scenario set")
    utility = _wrap(lambda: PwlUtility.from_dict(data["utility"]), "utility") if data.get("utility") is not None else None
    points = None
    if data.get("points") is not None:
        points = _matrix(data["points"], "points", cols=domain.dim)
    return ScenarioProblem(rf, utility, points)


def scenario_to_dict(problem: ScenarioProblem) -> Dict:
    rf = problem.functional
    data = {
        "domain": rf.domain.to_dict(),
        "p": rf.probs.tolist(),
        "scenarios": [{"pExpr": p.to_dict(), "qExpr": q.to_dict()} for p, q in zip(rf.p_exprs, rf.q_exprs)],
    }
    if problem.utility is not None:
        data["utility"] = problem.utility.to_dict()
    if problem.points is not None:
        data["points"] = problem.points.tolist()
    return data


# ============================================================================
# QP
# ============================================================================

def parse_qp_file(data: Dict) -> QpInstance:
    """{"Q": [[...]], "D": [[...]]}"""
    Q, D = _require(data, "Q", "D")
    Q = _matrix(Q, "Q")
    D = _matrix(D, "D", cols=Q.shape[1])
    return _wrap(lambda: QpInstance(Q, D), "QP instance")


def qp_to_dict(inst: QpInstance) -> Dict:
    return inst.to_dict()


@dataclass
class QpQuery:
    points: np.ndarray                      # rows w = (q, b)
    region: Optional[Domain] = None
    grid: Optional[Tuple[int, int]] = None


def parse_query_file(data: Dict, inst: QpInstance) -> QpQuery:
    """
    {"q": [...], "b": [...]}, {"points": [{"q", "b"}, ...]} or
    {"region": Domain, "grid": [n_q, n_b]} (n_q points per q axis, n_b per b axis).
    """
    m, k = inst.m, inst.k
    if "region" in data:
        region = _wrap(lambda: Domain.from_dict(data["region"]), "query region")
        if region.dim != m + k:
            raise InputFormatError(f"query region must live in R^{m + k}, got dimension {region.dim}")
        grid = data.get("grid", [5, 5])
        try:
            n_q, n_b = int(grid[0]), int(grid[1])
        except (TypeError, ValueError, IndexError):
            raise InputFormatError(f"grid must be [n_q, n_b], got {grid!r}")
        if n_q < 1 or n_b < 1:
            raise InputFormatError("grid counts must be positive")
        lo, hi = region.sampling_box()
        axes = [np.linspace(lo[i], hi[i], n_q if i < m else n_b) for i in range(m + k)]
        W = np.array(list(itertools.product(*axes)))
        if region.kind == "polyhedron":
            W = W[region.contains(W)]
        return QpQuery(W, region, (n_q, n_b))
    if "points" in data:
        rows = [np.concatenate([_vector(p.get("q"), "q", m), _vector(p.get("b"), "b", k)])
                for p in data["points"]]
        return QpQuery(np.array(rows).reshape(-1, m + k))
    q, b = _require(data, "q", "b")
    return QpQuery(np.concatenate([_vector(q, "q", m), _vector(b, "b", k)])[None, :])


def query_to_dict(query: QpQuery, inst: QpInstance) -> Dict:
    if query.region is not None:
        return {"region": query.region.to_dict(), "grid": list(query.grid)}
    return {"points": [{"q": w[:inst.m].tolist(), "b": w[inst.m:].tolist()} for w in query.points]}


# ============================================================================
# RECOURSE
# ============================================================================

@dataclass
class RecourseProblem:
    instance: QpInstance
    recourse: RecourseMap
    x_region: Domain


def parse_recourse_file(data: Dict) -> RecourseProblem:
    """
    {"Q", "D", "scenarios": [{"f", "G", "C", "xi"}, ...], "x_region": Domain}
    """
    inst = parse_qp_file(data)
    scenarios, region = _require(data, "scenarios", "x_region")
    x_region = _wrap(lambda: Domain.from_dict(region), "x region")
    n = x_region.dim
    parsed = []
    for s in scenarios:
        if not isinstance(s, dict):
            raise InputFormatError("each recourse scenario must be an object")
        f, G, C, xi = _require(s, "f", "G", "C", "xi")
        parsed.append(RecourseScenario(
            _vector(f, "f", inst.m), _matrix(G, "G", inst.m, n),
            _matrix(C, "C", inst.k, n), _vector(xi, "xi", inst.k),
        ))
    rm = _wrap(lambda: RecourseMap(parsed, inst), "recourse map")
    return RecourseProblem(inst, rm, x_region)


def recourse_to_dict(problem: RecourseProblem) -> Dict:
    data = qp_to_dict(problem.instance)
    data["scenarios"] = [
        {"f": s.f.tolist(), "G": s.G.tolist(), "C": s.C.tolist(), "xi": s.xi.tolist()}
        for s in problem.recourse.scenarios
    ]
    data["x_region"] = problem.x_region.to_dict()
    return data


# ============================================================================
# PIECEWISE
# ============================================================================

@dataclass
class PiecewiseProblem:
    pieces: List[QuadraticPiece]
    regions: List[Polyhedron]
    domain: Optional[Domain] = None
    affine: bool = field(default=False)

    def build(self, check: bool = True) -> PiecewiseLc1:
        return PiecewiseLc1(self.pieces, self.regions, self.domain, check)


def parse_piecewise_file(data: Dict) -> PiecewiseProblem:
    """{"pieces": [{"A", "a", "c"} | {"a", "c"}], "regions": [Polyhedron...], "domain": Domain?}"""
    pieces_data, regions_data = _require(data, "pieces", "regions")
    if not isinstance(pieces_data, list) or not isinstance(regions_data, list):
        raise InputFormatError("pieces and regions must be lists")
    if len(pieces_data) != len(regions_data) or not pieces_data:
        raise InputFormatError("need one region per piece and at least one piece")
    pieces = []
    for k, p in enumerate(pieces_data):
        if not isinstance(p, dict) or "a" not in p:
            raise InputFormatError(f"piece {k} needs a linear term 'a'")
        a = _vector(p["a"], f"piece {k} a")
        A = _matrix(p["A"], f"piece {k} A", len(a), len(a)) if "A" in p else np.zeros((len(a), len(a)))
        pieces.append(_wrap(lambda: QuadraticPiece(A, a, float(p.get("c", 0.0))), f"piece {k}"))
    regions = [_wrap(lambda: Polyhedron.from_dict(r), "region") for r in regions_data]
    domain = _wrap(lambda: Domain.from_dict(data["domain"]), "domain") if data.get("domain") is not None else None
    return PiecewiseProblem(pieces, regions, domain, all(p.is_affine for p in pieces))


def piecewise_to_dict(problem: PiecewiseProblem) -> Dict:
    data = {
        "pieces": [p.to_dict() for p in problem.pieces],
        "regions": [r.to_dict() for r in problem.regions],
    }
    if problem.domain is not None:
        data["domain"] = problem.domain.to_dict()
    return data
