"""
Bundled acceptance suite.

Runs the property checks of every module on small seeded instances and
returns merged CheckReports. Sample counts are reduced so the whole suite
finishes in well under a minute; the same seed gives the same report.
"""
from typing import Callable, Dict, List, Optional

import numpy as np

from dc_modules.dc_config import DEFAULT_SEED
from dc_modules.convex_core import Affine, Domain, QuadForm
from dc_modules.errors import ArgumentError, DcForgeError, NotDcError
from dc_modules.folded import concave_branches, decompose, parse_penalty
from dc_modules.piecewise_dc import PiecewiseLc1, QuadraticPiece, build_min_representation, pwa_min_representation
from dc_modules.polyhedral import Polyhedron
from dc_modules.qp_value import (
    QpInstance,
    dom_membership,
    enumerate_pieces,
    qp_solve,
    value_dc,
)
from dc_modules.risk import (
    PwlUtility,
    RandomDcFunctional,
    ScenarioSet,
    WPolytope,
    build_measure_dc,
    cvar_dc,
    cvar_value,
    deviation_value,
    oce_value,
    risk_oracle,
    var_dc,
)
from dc_modules.verification import CheckReport, check_convexity, merge_reports

SUITE_INSTANCES = 25
SUITE_POINTS = 5
SUITE_SAMPLES = 200

ORACLE_MEASURES = (
    "expectation", "cvar:0.5", "var:0.5", "oce:0.5", "mu:0.5", "variance", "std",
    "dev:sq@mean", "dev:sqrt_sq@mean", "dev:pos@mean", "dev:abs@mean", "dev:abs@cvar:0.5",
)


def _report(name: str, violations, tol: float, trials: int, seed: int,
            witness=None, details=None) -> CheckReport:
    violations = np.asarray(violations, dtype=float).reshape(-1)
    worst = float(violations.max()) if violations.size else 0.0
    passed = worst <= tol
    return CheckReport(name, trials, max(worst, 0.0), tol, passed,
                       None if passed else witness, seed, details or {})


def _relative(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / (1.0 + np.abs(b))


def random_functional(rng: np.random.Generator, S: int, n: int) -> RandomDcFunctional:
    """S scenarios of convex quadratic minus affine-or-quadratic pieces on [-1, 1]^n."""
    domain = Domain.box(-np.ones(n), np.ones(n))
    p_exprs, q_exprs = [], []
    for _ in range(S):
        B = rng.normal(size=(n, n))
        p_exprs.append(QuadForm(B @ B.T, rng.normal(size=n), rng.normal()))
        if rng.random() < 0.5:
            q_exprs.append(Affine(rng.normal(size=n), rng.normal()))
        else:
            C = rng.normal(size=(n, n))
            q_exprs.append(QuadForm(0.5 * C @ C.T, rng.normal(size=n), 0.0))
    probs = rng.dirichlet(np.ones(S))
    probs[-1] = 1.0 - probs[:-1].sum()
    return RandomDcFunctional(ScenarioSet(probs), p_exprs, q_exprs, domain)


def constant_functional(z, probs) -> RandomDcFunctional:
    """Scenario values fixed at z on [0, 1]."""
    domain = Domain.box([0.0], [1.0])
    return RandomDcFunctional(ScenarioSet(probs), [Affine([0.0], v) for v in z],
                              [Affine([0.0], 0.0) for _ in z], domain, check_pieces=False)


# ============================================================================
# CHECKS
# ============================================================================

def risk_oracle_check(seed: int, instances: int) -> CheckReport:
    rng = np.random.default_rng(seed)
    worst, witness = [], None
    for _ in range(instances):
        rf = random_functional(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)))
        X = rf.domain.sample(rng, SUITE_POINTS)
        for text in ORACLE_MEASURES:
            dc = build_measure_dc(text, rf)
            got = dc.eval_batch(X)
            ref = np.array([risk_oracle(text, rf, x) for x in X])
            v = _relative(got, ref)
            if v.max() > (max(worst) if worst else 0.0):
                k = int(np.argmax(v))
                witness = {"measure": text, "x": X[k].tolist(), "dc": float(got[k]), "oracle": float(ref[k])}
            worst.append(float(v.max()))
    return _report("risk_oracle_equivalence", worst, 1e-7, instances, seed, witness,
                   {"measures": list(ORACLE_MEASURES)})


def var_cvar_linkage_check(seed: int) -> CheckReport:
    probs, z, alpha = [0.5, 0.5], [0.0, 1.0], 0.5
    rf = constant_functional(z, probs)
    vertices = WPolytope(alpha, probs).vertices
    x = np.array([[0.5]])
    var = float(var_dc(rf, alpha).eval_batch(x)[0])
    cvar = float(cvar_dc(rf, alpha).eval_batch(x)[0])
    shape_ok = vertices.shape == (1, 2) and np.allclose(vertices, 1.0, atol=1e-10)
    violations = [abs(var - 0.0), abs(cvar - 1.0), 0.0 if shape_ok else 1.0]
    return _report("var_cvar_linkage", violations, 1e-10, 1, seed,
                   {"vertices": vertices.tolist(), "var": var, "cvar": cvar},
                   {"vertices": vertices.tolist(), "var": var, "cvar": cvar})


def oce_specialization_check(seed: int, instances: int) -> CheckReport:
    rng = np.random.default_rng(seed)
    worst = []
    for _ in range(instances):
        S = int(rng.integers(1, 7))
        alpha = float(rng.uniform(0.05, 0.95))
        z = rng.normal(size=S)
        probs = rng.dirichlet(np.ones(S))
        u = PwlUtility.cvar_type(alpha)
        worst.append(abs(oce_value(z, probs, u) + cvar_value(-z, probs, alpha)))
    return _report("oce_specialization", worst, 1e-8, instances, seed)


def deviation_identity_check(seed: int, instances: int) -> CheckReport:
    rng = np.random.default_rng(seed)
    worst = []
    for _ in range(instances):
        S = int(rng.integers(1, 7))
        z = rng.normal(size=S)
        probs = rng.dirichlet(np.ones(S))
        worst.append(abs(deviation_value(z, probs, "abs") - 2.0 * deviation_value(z, probs, "pos")))
    z, probs = np.array([0.0, 1.0]), np.array([0.5, 0.5])
    ad = deviation_value(z, probs, "abs", "cvar", 0.5)
    asd = deviation_value(z, probs, "pos", "cvar", 0.5)
    # the cvar-centred analogue must break on this instance
    worst.append(0.0 if abs(ad - 2.0 * asd - 0.5) <= 1e-12 else 1.0)
    return _report("deviation_identities", worst, 1e-9, instances + 1, seed,
                   details={"cvar_centred": {"abs": ad, "pos": asd}})


def _brute_force(inst: QpInstance, q, b, width: float = 2.0, step: float = 1e-3) -> float:
    axes = [np.arange(bi, bi + width + 0.5 * step, step) for bi in b]
    Z = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, inst.m)
    return float((Z @ q + 0.5 * np.einsum("ij,jk,ik->i", Z, inst.Q, Z)).min())


def qp_value_check(seed: int, samples: int = SUITE_SAMPLES) -> List[CheckReport]:
    scalar = QpInstance([[2.0]], [[1.0]], seed)
    saddle = QpInstance([[0.0, 1.0], [1.0, 0.0]], np.eye(2), seed)
    queries = [
        (scalar, [-2.0], [0.0]), (scalar, [2.0], [0.0]), (scalar, [-1.0], [-1.5]),
        (saddle, [1.0, 1.0], [0.0, 0.0]), (saddle, [0.5, 0.0], [0.0, 0.25]),
    ]
    brute = [abs(qp_solve(inst, q, b).value - _brute_force(inst, np.array(q), b)) for inst, q, b in queries]
    reports = [_report("qp_brute_force", brute, 1e-4, len(queries), seed)]

    def min_of_pieces(inst, W):
        pieces = enumerate_pieces(inst)
        out = []
        for w in W:
            vals = [float(p.value(w)[0]) for p in pieces if p.validity.contains(w[None, :], 1e-9)[0]]
            q, b = inst.split(w)
            out.append(abs(min(vals) - qp_solve(inst, q, b).value) if vals else np.inf)
        return out

    grid = np.linspace(-2.0, 2.0, 8)
    W1 = np.array([[q, b] for q in grid for b in grid])
    g = np.linspace(0.0, 1.0, 3)
    W2 = np.array([[q1 + 0.5, q2 + 0.5, b1, b2] for q1 in g for q2 in g for b1 in g for b2 in g])
    gaps = min_of_pieces(scalar, W1) + min_of_pieces(saddle, W2)
    reports.append(_report("qp_min_of_pieces", gaps, 1e-6, len(gaps), seed))

    region = Domain.box([-2.0, -2.0], [2.0, 2.0])
    dc = value_dc(scalar, region, seed)
    rng = np.random.default_rng(seed)
    X = region.sample(rng, 20)
    ref = np.array([qp_solve(scalar, x[:1], x[1:]).value for x in X])
    reports.append(_report("qp_value_dc_identity", _relative(dc.eval_batch(X), ref), 1e-6, 20, seed))
    for part in ("g", "h"):
        r = check_convexity(getattr(dc, part), region, trials=samples, seed=seed,
                            name=f"qp_value_dc_convex_{part}")
        reports.append(r)
    return reports


def eaves_domain_check(seed: int, samples: int) -> CheckReport:
    inst = QpInstance([[0.0]], [[1.0]], seed)
    rng = np.random.default_rng(seed)
    W = rng.uniform(-1.0, 1.0, size=(samples, 2))
    W = W[np.abs(W[:, 0]) > 1e-6]
    wrong = [float(dom_membership(inst, w[:1], w[1:]) != (w[0] >= 0.0)) for w in W]
    return _report("eaves_domain", wrong, 0.0, W.shape[0], seed)


def piecewise_check(seed: int, samples: int) -> CheckReport:
    rng = np.random.default_rng(seed)
    worst = []
    domain = Domain.box([-3.0], [3.0])
    X = domain.sample(rng, samples)

    absx = PiecewiseLc1([QuadraticPiece.affine([1.0], 0.0), QuadraticPiece.affine([-1.0], 0.0)],
                        [Polyhedron([[-1.0]], [0.0]), Polyhedron([[1.0]], [0.0])], domain, seed=seed)
    squares = PiecewiseLc1([QuadraticPiece([[2.0]], [0.0], 0.0), QuadraticPiece([[2.0]], [-2.0], 1.0)],
                           [Polyhedron([[1.0], [-1.0]], [0.5, 3.0]), Polyhedron([[-1.0], [1.0]], [-0.5, 3.0])],
                           domain, seed=seed)
    references = [np.abs(X[:, 0]), np.minimum(X[:, 0] ** 2, (X[:, 0] - 1.0) ** 2)]
    for pw, ref in zip((absx, squares), references):
        rep = build_min_representation(pw)
        worst.append(float(np.abs(rep.theta.eval_batch(X) - ref).max()))
        for psi in rep.psi:
            worst.append(float(np.maximum(ref - psi.eval_batch(X), 0.0).max()))

    for _ in range(max(samples // 20, 5)):
        cuts = np.sort(rng.uniform(-2.0, 2.0, size=2))
        slopes = rng.normal(size=3)
        offsets = [0.0, 0.0, 0.0]
        offsets[1] = slopes[0] * cuts[0] - slopes[1] * cuts[0]
        offsets[2] = slopes[1] * cuts[1] + offsets[1] - slopes[2] * cuts[1]
        edges = [-3.0, cuts[0], cuts[1], 3.0]
        regions = [Polyhedron([[1.0], [-1.0]], [edges[i + 1], -edges[i]]) for i in range(3)]
        theta = pwa_min_representation([([a], c) for a, c in zip(slopes, offsets)], regions, domain)
        idx = np.searchsorted(cuts, X[:, 0])
        direct = slopes[idx] * X[:, 0] + np.asarray(offsets)[idx]
        worst.append(float(np.abs(theta.eval_batch(X) - direct).max()))
    return _report("piecewise_min_representation", worst, 1e-8, samples, seed)


def folded_check(seed: int, samples: int) -> CheckReport:
    rng = np.random.default_rng(seed)
    worst, details = [], {}
    T = rng.uniform(-10.0, 10.0, size=samples)
    expected = {"fig1b1": (-4.0, 4.0), "fig1b2": (-np.inf, np.inf)}
    for name in ("fig1a", "fig1b1", "fig1b2", "scad", "mcp"):
        spec = parse_penalty(name)
        dc = decompose(spec)
        details[name] = {"case": dc.meta["case"], "t_minus": dc.meta["t_minus"], "t_plus": dc.meta["t_plus"]}
        worst.append(float(np.abs(dc.eval_batch(T[:, None]) - spec.theta(T)).max()))
        if name == "fig1a":
            worst.append(0.0 if dc.meta["case"] == "concave" else 1.0)
        if name in expected:
            _, _, t_minus, t_plus = concave_branches(spec)
            for got, want in zip((t_minus, t_plus), expected[name]):
                worst.append(0.0 if got == want else abs(got - want))
    try:
        decompose(parse_penalty("sqrtabs"))
        worst.append(1.0)
    except NotDcError:
        details["sqrtabs"] = "NotDcError"
    return _report("folded_decomposition", worst, 1e-8, samples, seed, details=details)


def _guarded(name: str, seed: int, fn: Callable) -> List[CheckReport]:
    try:
        out = fn()
    except DcForgeError as e:
        return [CheckReport(name, 0, float("inf"), 0.0, False, None, seed,
                            {"error": type(e).__name__, "message": str(e)})]
    return out if isinstance(out, list) else [out]


def with_tolerance(report: CheckReport, tol: float) -> CheckReport:
    """The same measurement judged against another tolerance."""
    return CheckReport(report.check, report.trials, report.max_violation, tol,
                       report.max_violation <= tol, report.witness, report.seed, report.details)


def run_verify_suite(seed: int = DEFAULT_SEED, instances: int = SUITE_INSTANCES,
                     samples: int = SUITE_SAMPLES, tol: Optional[float] = None) -> Dict:
    """
    All acceptance checks merged into {"checks": [...], "pass": bool}.

    samples sets the sampled check sizes; tol, when given, replaces every
    per-check tolerance.
    """
    if samples < 1:
        raise ArgumentError(f"samples must be positive, got {samples}")
    reports: List[CheckReport] = []
    reports += _guarded("risk_oracle_equivalence", seed, lambda: risk_oracle_check(seed, instances))
    reports += _guarded("var_cvar_linkage", seed, lambda: var_cvar_linkage_check(seed))
    reports += _guarded("oce_specialization", seed, lambda: oce_specialization_check(seed, 4 * instances))
    reports += _guarded("deviation_identities", seed, lambda: deviation_identity_check(seed, 4 * instances))
    reports += _guarded("qp_value", seed, lambda: qp_value_check(seed, samples))
    reports += _guarded("eaves_domain", seed, lambda: eaves_domain_check(seed, samples))
    reports += _guarded("piecewise_min_representation", seed, lambda: piecewise_check(seed, samples))
    reports += _guarded("folded_decomposition", seed, lambda: folded_check(seed, samples))
    if tol is not None:
        reports = [with_tolerance(r, tol) for r in reports]
    return merge_reports(reports)
