"""
Discrete-scenario risk and deviation functionals.

A RandomDcFunctional holds S scenarios f(x, w^s) = P_s(x) - Q_s(x) with
probabilities p_s. Each *_dc constructor returns a DcFunction of x; the
risk_oracle computes the same quantities directly from the scenario values
z_s = f(x, w^s) by breakpoint scans, independent of the dc machinery.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from dc_modules.dc_config import (
    PROB_SUM_TOL,
    MAX_W_SCENARIOS,
    MAX_PHI_VARIABLES,
    ORACLE_TIE_TOL,
    PIECE_CONVEXITY_TRIALS,
    SHIFT_MARGIN,
)
from dc_modules.convex_core import (
    ConvexExpr,
    CvarEnvelope,
    Domain,
    NegOceEnvelope,
    NonnegScale,
    SquareOfNonneg,
    Sum,
    constant,
    evaluate,
)
from dc_modules.dc_core import (
    DcFunction,
    combine_linear,
    compose_neg_log,
    lower_bound_or_estimate,
    norm2,
    pointwise_extremum,
    pos_part_abs,
    square,
)
from dc_modules.errors import (
    ArgumentError,
    CertificationError,
    DomainError,
    InputFormatError,
    ScaleError,
    UnboundedAuxiliary,
)
from dc_modules.polyhedral import Polyhedron, enumerate_vertices
from dc_modules.verification import check_convexity


# ============================================================================
# TYPES
# ============================================================================

class ScenarioSet:
    """Positive probabilities summing to one."""

    def __init__(self, probs):
        probs = np.array(probs, dtype=float).reshape(-1)
        if probs.shape[0] == 0:
            raise ArgumentError("scenario set needs at least one scenario")
        if np.any(probs <= 0.0):
            raise ArgumentError("scenario probabilities must be positive")
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise ArgumentError(f"scenario probabilities sum to {probs.sum():.15g}, not 1")
        probs.setflags(write=False)
        self.probs = probs

    @property
    def S(self) -> int:
        return self.probs.shape[0]

    def __len__(self):
        return self.S


class RandomDcFunctional:
    """Scenario pieces (P_s, Q_s) on one domain; f(x, w^s) = P_s(x) - Q_s(x)."""

    def __init__(self, scenarios: ScenarioSet, p_exprs: Sequence[ConvexExpr],
                 q_exprs: Sequence[ConvexExpr], domain: Domain, check_pieces: bool = True):
        if len(p_exprs) != scenarios.S or len(q_exprs) != scenarios.S:
            raise ArgumentError(f"need {scenarios.S} (pExpr, qExpr) pairs, got {len(p_exprs)}/{len(q_exprs)}")
        for e in list(p_exprs) + list(q_exprs):
            if e.dim != domain.dim:
                raise DomainError(f"scenario piece of dimension {e.dim} on a {domain.dim}-dimensional domain")
        self.scenarios = scenarios
        self.p_exprs = tuple(p_exprs)
        self.q_exprs = tuple(q_exprs)
        self.domain = domain
        if check_pieces:
            for k, e in enumerate(self.p_exprs + self.q_exprs):
                report = check_convexity(e, domain, trials=PIECE_CONVEXITY_TRIALS, name=f"piece_{k}")
                if not report.passed:
                    raise CertificationError(f"scenario piece {k} failed the sampled convexity test")

    @property
    def probs(self) -> np.ndarray:
        return self.scenarios.probs

    @property
    def S(self) -> int:
        return self.scenarios.S

    def scenario_functions(self) -> List[DcFunction]:
        return [DcFunction(p, q, self.domain) for p, q in zip(self.p_exprs, self.q_exprs)]

    def values(self, x) -> np.ndarray:
        """Scenario values z_s = f(x, w^s) at one point."""
        return np.array([evaluate(p, x, self.domain) - evaluate(q, x)
                         for p, q in zip(self.p_exprs, self.q_exprs)])


class PwlUtility:
    """u(t) = min_i (a_i t + alpha_i) with a_i >= 0, u(0) = 0 and 1 in du(0)."""

    def __init__(self, slopes, intercepts):
        slopes = np.array(slopes, dtype=float).reshape(-1)
        intercepts = np.array(intercepts, dtype=float).reshape(-1)
        if slopes.shape[0] == 0 or slopes.shape != intercepts.shape:
            raise ArgumentError("utility needs matching nonempty slope and intercept lists")
        if np.any(slopes < 0.0):
            raise ArgumentError("utility slopes must be nonnegative")
        if abs(intercepts.min()) > PROB_SUM_TOL:
            raise ArgumentError(f"utility needs u(0) = 0, got min intercept {intercepts.min():.3g}")
        active = slopes[np.abs(intercepts) <= PROB_SUM_TOL]
        if not (active.min() <= 1.0 <= active.max()):
            raise ArgumentError("utility needs 1 in the superdifferential at 0")
        self.slopes = slopes
        self.intercepts = intercepts

    @classmethod
    def cvar_type(cls, alpha: float) -> "PwlUtility":
        """u(t) = min(0, t) / (1 - alpha)."""
        if not 0.0 < alpha < 1.0:
            raise ArgumentError(f"alpha must lie in (0, 1), got {alpha}")
        return cls([1.0 / (1.0 - alpha), 0.0], [0.0, 0.0])

    @property
    def I(self) -> int:
        return self.slopes.shape[0]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.min(np.multiply.outer(t, self.slopes) + self.intercepts, axis=-1)

    def kinks(self) -> np.ndarray:
        """Crossing points of every pair of pieces with distinct slopes."""
        out = []
        for i in range(self.I):
            for j in range(i + 1, self.I):
                if self.slopes[i] != self.slopes[j]:
                    out.append((self.intercepts[j] - self.intercepts[i]) / (self.slopes[i] - self.slopes[j]))
        return np.array(sorted(out))

    def to_dict(self):
        return {"slopes": self.slopes.tolist(), "intercepts": self.intercepts.tolist()}

    @classmethod
    def from_dict(cls, data) -> "PwlUtility":
        try:
            return cls(data["slopes"], data["intercepts"])
        except (KeyError, TypeError) as e:
            raise InputFormatError(f"malformed utility: {e}")


class WPolytope:
    """
    {v >= 0 : [I - p 1^T / (1 - alpha)] v + p / (1 - alpha) <= 0}
    with its vertices, which depend only on (alpha, p).
    """

    def __init__(self, alpha: float, probs):
        if not 0.0 < alpha < 1.0:
            raise ArgumentError(f"alpha must lie in (0, 1), got {alpha}")
        probs = np.asarray(probs, dtype=float).reshape(-1)
        S = probs.shape[0]
        if S > MAX_W_SCENARIOS:
            raise ScaleError(f"W vertex enumeration capped at S <= {MAX_W_SCENARIOS}, got {S}")
        scaled = probs / (1.0 - alpha)
        self.alpha = float(alpha)
        self.probs = probs
        self.A = np.eye(S) - np.outer(scaled, np.ones(S))
        self.b = -scaled
        self.polyhedron = Polyhedron(np.vstack([self.A, -np.eye(S)]), np.concatenate([self.b, np.zeros(S)]))
        self.vertices = enumerate_vertices(self.polyhedron).points

    def __len__(self):
        return self.vertices.shape[0]


class PhiPolytope:
    """
    {phi >= 0 : sum_{i,s'} (p_s a_i - delta_{s's}) phi_{is'} = p_s for all s},
    variables phi_{is} at index i*S + s.
    """

    def __init__(self, utility: PwlUtility, probs):
        probs = np.asarray(probs, dtype=float).reshape(-1)
        S, I = probs.shape[0], utility.I
        if I * S > MAX_PHI_VARIABLES:
            raise ScaleError(f"Phi vertex enumeration capped at I*S <= {MAX_PHI_VARIABLES}, got {I * S}")
        E = np.zeros((S, I * S))
        for s in range(S):
            for i in range(I):
                for sp in range(S):
                    E[s, i * S + sp] = probs[s] * utility.slopes[i] - (1.0 if sp == s else 0.0)
        self.utility = utility
        self.probs = probs
        self.E = E
        self.rhs = probs.copy()
        n = I * S
        self.polyhedron = Polyhedron(
            np.vstack([E, -np.eye(n)]), np.concatenate([probs, np.zeros(n)]), eq_rows=range(S)
        )
        listing = enumerate_vertices(self.polyhedron)
        self.status = listing.status
        self.vertices = listing.points

    def __len__(self):
        return self.vertices.shape[0]


# ============================================================================
# CONSTRUCTORS
# ============================================================================

def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _weighted(weights, exprs: Sequence[ConvexExpr]) -> ConvexExpr:
    parts = [e if w == 1.0 else NonnegScale(float(w), e) for w, e in zip(weights, exprs)]
    return parts[0] if len(parts) == 1 else Sum(parts)


def expectation_dc(rf: RandomDcFunctional) -> DcFunction:
    return combine_linear(list(zip(rf.probs, rf.scenario_functions())))


def cvar_dc(rf: RandomDcFunctional, alpha: float) -> DcFunction:
    """CVaR_alpha(f(x, .)) = CvarEnvelope - E Q / (1 - alpha)."""
    alpha = _check_alpha(alpha)
    g = CvarEnvelope(alpha, rf.probs, rf.p_exprs, rf.q_exprs)
    h = NonnegScale(1.0 / (1.0 - alpha), _weighted(rf.probs, rf.q_exprs))
    return DcFunction(g, h, rf.domain, meta={"alpha": alpha})


def var_dc(rf: RandomDcFunctional, alpha: float) -> DcFunction:
    """
    VaR = CVaR + max_j sum_s (f_s - CVaR) v^j_s over the vertices v^j of W,
    i.e. max_j [(1 - sum v^j) CVaR + sum_s v^j_s f_s].
    """
    alpha = _check_alpha(alpha)
    W = WPolytope(alpha, rf.probs)
    cvar = cvar_dc(rf, alpha)
    fs = rf.scenario_functions()
    branches = []
    for v in W.vertices:
        terms = [(1.0 - float(v.sum()), cvar)] + [(float(v_s), f) for v_s, f in zip(v, fs)]
        branches.append(combine_linear(terms))
    out = pointwise_extremum("max", branches)
    out.meta.update({"alpha": alpha, "vertices": int(len(W))})
    return out


def oce_dc(rf: RandomDcFunctional, utility: PwlUtility) -> DcFunction:
    """O_u = (sum a_i) E P - NegOceEnvelope."""
    g = NonnegScale(float(utility.slopes.sum()), _weighted(rf.probs, rf.p_exprs))
    h = NegOceEnvelope(utility.slopes, utility.intercepts, rf.probs, rf.p_exprs, rf.q_exprs)
    return DcFunction(g, h, rf.domain)


def mu_dc(rf: RandomDcFunctional, utility: PwlUtility) -> DcFunction:
    """
    m_u = min_j [(1 - sum a_i phi_is) O_u + sum_s (sum_i a_i phi_is) f_s + sum alpha_i phi_is]
    over the vertices phi^j of Phi.
    """
    Phi = PhiPolytope(utility, rf.probs)
    if len(Phi) == 0:
        raise UnboundedAuxiliary("Phi has no vertices: the largest maximizer is not attained")
    S, I = rf.S, utility.I
    oce = oce_dc(rf, utility)
    fs = rf.scenario_functions()
    branches = []
    for phi in Phi.vertices:
        grid = phi.reshape(I, S)
        weights = utility.slopes @ grid
        offset = float(np.sum(utility.intercepts @ grid))
        terms = [(1.0 - float(weights.sum()), oce)]
        terms += [(float(w), f) for w, f in zip(weights, fs)]
        terms.append((1.0, _constant_dc(rf.domain, offset)))
        branches.append(combine_linear(terms))
    out = pointwise_extremum("min", branches)
    out.meta["vertices"] = int(len(Phi))
    return out


def _constant_dc(domain: Domain, value: float) -> DcFunction:
    if value >= 0:
        return DcFunction(constant(domain.dim, value), constant(domain.dim), domain)
    return DcFunction(constant(domain.dim), constant(domain.dim, -value), domain)


def variance_dc(rf: RandomDcFunctional) -> DcFunction:
    """
    With one shift c making every P~_s = P_s + c and Q~_s = Q_s + c nonnegative:

        g = 2 E(P~^2 + Q~^2) + (E(P~ + Q~))^2
        h = E(P~ + Q~)^2 + 2 (E P~)^2 + 2 (E Q~)^2
    """
    dim = rf.domain.dim
    lbs_p = [lower_bound_or_estimate(e, rf.domain) for e in rf.p_exprs]
    lbs_q = [lower_bound_or_estimate(e, rf.domain) for e in rf.q_exprs]
    c = max(0.0, -min(lbs_p + lbs_q)) + SHIFT_MARGIN
    shift = constant(dim, c)
    pt = [Sum([e, shift]) for e in rf.p_exprs]
    qt = [Sum([e, shift]) for e in rf.q_exprs]
    lp = [lb + c for lb in lbs_p]
    lq = [lb + c for lb in lbs_q]
    probs = rf.probs

    sq_sum = [Sum([SquareOfNonneg(a, la), SquareOfNonneg(b, lb)]) for a, b, la, lb in zip(pt, qt, lp, lq)]
    mixed = [Sum([a, b]) for a, b in zip(pt, qt)]
    lower_mixed = [la + lb for la, lb in zip(lp, lq)]
    mean_mixed = _weighted(probs, mixed)
    g = Sum([
        NonnegScale(2.0, _weighted(probs, sq_sum)),
        SquareOfNonneg(mean_mixed, float(probs @ np.array(lower_mixed))),
    ])
    h = Sum([
        _weighted(probs, [SquareOfNonneg(m, lm) for m, lm in zip(mixed, lower_mixed)]),
        NonnegScale(2.0, SquareOfNonneg(_weighted(probs, pt), float(probs @ np.array(lp)))),
        NonnegScale(2.0, SquareOfNonneg(_weighted(probs, qt), float(probs @ np.array(lq)))),
    ])
    return DcFunction(g, h, rf.domain, meta={"shift": c})


def std_dc(rf: RandomDcFunctional) -> DcFunction:
    """sigma = || (sqrt(p_s) (f_s - E f))_s ||_2 through norm2."""
    fs = rf.scenario_functions()
    mean = expectation_dc(rf)
    comps = [combine_linear([(np.sqrt(p), f), (-np.sqrt(p), mean)]) for p, f in zip(rf.probs, fs)]
    return norm2(comps)


def _center_dc(rf: RandomDcFunctional, center: str, alpha: Optional[float]) -> DcFunction:
    if center == "mean":
        return expectation_dc(rf)
    if center == "cvar":
        return cvar_dc(rf, _require_alpha(alpha, "cvar center"))
    if center == "var":
        return var_dc(rf, _require_alpha(alpha, "var center"))
    raise ArgumentError(f"center must be mean, cvar or var, got {center!r}")


def _require_alpha(alpha, what):
    if alpha is None:
        raise ArgumentError(f"{what} needs an alpha")
    return _check_alpha(alpha)


DEVIATION_KINDS = ("sq", "sqrt_sq", "pos", "abs")


def deviation_dc(rf: RandomDcFunctional, kind: str, center: str = "mean",
                 alpha: Optional[float] = None) -> DcFunction:
    """
    E[Z - c]^2, sqrt(E[Z - c]^2), E[Z - c]_+ or E|Z - c| for a center c
    given as 'mean', 'cvar' / 'var' with alpha, or 'cvar:0.9' / 'var:0.9'.
    """
    if kind not in DEVIATION_KINDS:
        raise ArgumentError(f"deviation kind must be one of {DEVIATION_KINDS}, got {kind!r}")
    center, alpha = _split_center(center, alpha)
    c = _center_dc(rf, center, alpha)
    diffs = [combine_linear([(1.0, f), (-1.0, c)]) for f in rf.scenario_functions()]
    probs = rf.probs
    if kind == "sq":
        return combine_linear([(p, square(d)) for p, d in zip(probs, diffs)])
    if kind == "sqrt_sq":
        return norm2([combine_linear([(np.sqrt(p), d)]) for p, d in zip(probs, diffs)])
    return combine_linear([(p, pos_part_abs(kind, d)) for p, d in zip(probs, diffs)])


def _split_center(center: str, alpha: Optional[float]):
    if ":" in center:
        name, _, value = center.partition(":")
        try:
            return name, float(value)
        except ValueError:
            raise ArgumentError(f"bad center alpha in {center!r}")
    return center, alpha


def expected_neg_log_dc(rf: RandomDcFunctional) -> DcFunction:
    """E[-log f(x, .)] for scenario values bounded away from zero."""
    return combine_linear([(p, compose_neg_log(f)) for p, f in zip(rf.probs, rf.scenario_functions())])


# ============================================================================
# MEASURE SPECS
# ============================================================================

@dataclass
class MeasureSpec:
    kind: str
    alpha: Optional[float] = None
    lam: Optional[float] = None
    dev_kind: Optional[str] = None
    center: Optional[str] = None
    deviation: Optional["MeasureSpec"] = None
    text: str = ""


MEASURE_KINDS = ("expectation", "cvar", "var", "oce", "mu", "variance", "std", "dev", "rlambda", "neglog")
DEVIATION_MEASURES = ("variance", "std", "dev", "cvar", "var")


def parse_measure(text: str, alpha: Optional[float] = None, lam: Optional[float] = None) -> MeasureSpec:
    """
    Parse a measure string:

        expectation | cvar:A | var:A | oce[:A] | mu[:A] | variance | std
        dev:KIND@CENTER  (CENTER = mean | cvar:A | var:A)
        Rlambda:L:DEVIATION | neglog

    alpha / lam fill a missing A / L.
    """
    if not isinstance(text, str) or not text.strip():
        raise ArgumentError("empty measure spec")
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    try:
        if head in ("expectation", "variance", "std", "neglog"):
            if rest:
                raise ArgumentError(f"{head} takes no parameter")
            return MeasureSpec(head, text=text)
        if head in ("cvar", "var"):
            a = float(rest) if rest else alpha
            return MeasureSpec(head, alpha=_require_alpha(a, head), text=text)
        if head in ("oce", "mu"):
            a = float(rest) if rest else alpha
            return MeasureSpec(head, alpha=None if a is None else _check_alpha(a), text=text)
        if head == "dev":
            kind, sep, center = rest.partition("@")
            if not sep:
                raise ArgumentError(f"deviation spec needs KIND@CENTER: {text!r}")
            if kind not in DEVIATION_KINDS:
                raise ArgumentError(f"deviation kind must be one of {DEVIATION_KINDS}, got {kind!r}")
            name, a = _split_center(center, alpha)
            if name not in ("mean", "cvar", "var"):
                raise ArgumentError(f"center must be mean, cvar or var, got {name!r}")
            if name != "mean":
                a = _require_alpha(a, f"{name} center")
            return MeasureSpec("dev", alpha=a if name != "mean" else None, dev_kind=kind,
                               center=name, text=text)
        if head == "rlambda":
            value, _, dev_text = rest.partition(":")
            try:
                lam_value = float(value)
            except ValueError:
                if lam is None:
                    raise ArgumentError(f"Rlambda spec needs a lambda and a deviation: {text!r}")
                lam_value, dev_text = float(lam), rest
            if lam_value < 0.0:
                raise ArgumentError(f"lambda must be nonnegative, got {lam_value}")
            deviation = parse_measure(dev_text, alpha=alpha)
            if deviation.kind not in DEVIATION_MEASURES:
                raise ArgumentError(f"{deviation.kind} is not a deviation measure")
            return MeasureSpec("rlambda", lam=lam_value, deviation=deviation, text=text)
    except ValueError as e:
        raise ArgumentError(f"malformed measure spec {text!r}: {e}")
    raise ArgumentError(f"unknown measure {head!r}; choose from {MEASURE_KINDS}")


def _as_spec(spec: Union[str, MeasureSpec]) -> MeasureSpec:
    return parse_measure(spec) if isinstance(spec, str) else spec


def _utility_for(spec: MeasureSpec, utility: Optional[PwlUtility]) -> PwlUtility:
    if utility is not None:
        return utility
    if spec.alpha is not None:
        return PwlUtility.cvar_type(spec.alpha)
    raise ArgumentError(f"{spec.kind} needs a utility or an alpha")


def risk_lambda_dc(rf: RandomDcFunctional, lam: float, deviation: Union[str, MeasureSpec]) -> DcFunction:
    """R_lambda = E f + lambda D(f)."""
    if lam < 0.0:
        raise ArgumentError(f"lambda must be nonnegative, got {lam}")
    deviation = _as_spec(deviation)
    if deviation.kind not in DEVIATION_MEASURES:
        raise ArgumentError(f"{deviation.kind} is not a deviation measure")
    return combine_linear([(1.0, expectation_dc(rf)), (float(lam), build_measure_dc(deviation, rf))])


def build_measure_dc(spec: Union[str, MeasureSpec], rf: RandomDcFunctional,
                     utility: Optional[PwlUtility] = None) -> DcFunction:
    spec = _as_spec(spec)
    if spec.kind == "expectation":
        return expectation_dc(rf)
    if spec.kind == "cvar":
        return cvar_dc(rf, spec.alpha)
    if spec.kind == "var":
        return var_dc(rf, spec.alpha)
    if spec.kind == "oce":
        return oce_dc(rf, _utility_for(spec, utility))
    if spec.kind == "mu":
        return mu_dc(rf, _utility_for(spec, utility))
    if spec.kind == "variance":
        return variance_dc(rf)
    if spec.kind == "std":
        return std_dc(rf)
    if spec.kind == "dev":
        return deviation_dc(rf, spec.dev_kind, spec.center, spec.alpha)
    if spec.kind == "rlambda":
        return risk_lambda_dc(rf, spec.lam, spec.deviation)
    if spec.kind == "neglog":
        return expected_neg_log_dc(rf)
    raise ArgumentError(f"unknown measure {spec.kind!r}")


# ============================================================================
# ORACLES
# ============================================================================

def cvar_value(z, probs, alpha: float) -> float:
    """Average of the upper (1 - alpha) tail of the distribution."""
    z, probs = np.asarray(z, dtype=float), np.asarray(probs, dtype=float)
    remaining = 1.0 - alpha
    total = 0.0
    for s in np.argsort(-z, kind="stable"):
        take = min(probs[s], remaining)
        total += take * z[s]
        remaining -= take
        if remaining <= 0.0:
            break
    return total / (1.0 - alpha)


def var_value(z, probs, alpha: float) -> float:
    """Smallest minimizer of t + E[Z - t]_+ / (1 - alpha) over t in {z_s}."""
    z, probs = np.asarray(z, dtype=float), np.asarray(probs, dtype=float)
    t = np.sort(z)
    obj = t + (np.maximum(z[None, :] - t[:, None], 0.0) @ probs) / (1.0 - alpha)
    best = obj.min()
    k = int(np.flatnonzero(obj <= best + ORACLE_TIE_TOL * (1.0 + abs(best)))[0])
    return float(t[k])


def _oce_scan(z, probs, utility: PwlUtility):
    z, probs = np.asarray(z, dtype=float), np.asarray(probs, dtype=float)
    kinks = utility.kinks()
    if kinks.size:
        eta = np.unique((z[:, None] - kinks[None, :]).reshape(-1))
    else:
        eta = np.unique(z)
    obj = eta + utility(z[None, :] - eta[:, None]) @ probs
    return eta, obj


def oce_value(z, probs, utility: PwlUtility) -> float:
    _, obj = _oce_scan(z, probs, utility)
    return float(obj.max())


def mu_value(z, probs, utility: PwlUtility) -> float:
    """Largest maximizer of eta + E u(Z - eta)."""
    if utility.slopes.max() <= 1.0:
        raise UnboundedAuxiliary("eta + E u(Z - eta) is flat to +inf: no largest maximizer")
    eta, obj = _oce_scan(z, probs, utility)
    best = obj.max()
    k = int(np.flatnonzero(obj >= best - ORACLE_TIE_TOL * (1.0 + abs(best)))[-1])
    return float(eta[k])


def _center_value(z, probs, center: str, alpha: Optional[float]) -> float:
    if center == "mean":
        return float(probs @ z)
    if center == "cvar":
        return cvar_value(z, probs, alpha)
    return var_value(z, probs, alpha)


def deviation_value(z, probs, kind: str, center: str = "mean", alpha: Optional[float] = None) -> float:
    center, alpha = _split_center(center, alpha)
    d = np.asarray(z, dtype=float) - _center_value(z, probs, center, alpha)
    if kind == "sq":
        return float(probs @ d ** 2)
    if kind == "sqrt_sq":
        return float(np.sqrt(probs @ d ** 2))
    if kind == "pos":
        return float(probs @ np.maximum(d, 0.0))
    if kind == "abs":
        return float(probs @ np.abs(d))
    raise ArgumentError(f"deviation kind must be one of {DEVIATION_KINDS}, got {kind!r}")


def measure_value(spec: Union[str, MeasureSpec], z, probs, utility: Optional[PwlUtility] = None) -> float:
    """Direct value of a measure for the discrete distribution (z_s, p_s)."""
    spec = _as_spec(spec)
    z = np.asarray(z, dtype=float)
    probs = np.asarray(probs, dtype=float)
    mean = float(probs @ z)
    if spec.kind == "expectation":
        return mean
    if spec.kind == "cvar":
        return cvar_value(z, probs, spec.alpha)
    if spec.kind == "var":
        return var_value(z, probs, spec.alpha)
    if spec.kind == "oce":
        return oce_value(z, probs, _utility_for(spec, utility))
    if spec.kind == "mu":
        return mu_value(z, probs, _utility_for(spec, utility))
    if spec.kind == "variance":
        return float(probs @ (z - mean) ** 2)
    if spec.kind == "std":
        return float(np.sqrt(probs @ (z - mean) ** 2))
    if spec.kind == "dev":
        return deviation_value(z, probs, spec.dev_kind, spec.center, spec.alpha)
    if spec.kind == "rlambda":
        return mean + spec.lam * measure_value(spec.deviation, z, probs)
    if spec.kind == "neglog":
        if np.any(z <= 0.0):
            raise DomainError("negative log needs positive scenario values")
        return float(probs @ -np.log(z))
    raise ArgumentError(f"unknown measure {spec.kind!r}")


def risk_oracle(spec: Union[str, MeasureSpec], rf: RandomDcFunctional, x,
                utility: Optional[PwlUtility] = None) -> float:
    """Measure value at x from the scenario values alone."""
    return measure_value(spec, rf.values(x), rf.probs, utility)
