# cli_backend.py
"""
Backend logic for the dcforge command line.
Connects parsed arguments to the dc modules, runs the checks and hands
finished report dictionaries to the layout.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from config.app_settings import get_run_settings, get_sample_settings, get_tolerance_settings
from dc_modules.convex_core import ConvexExpr
from dc_modules.dc_core import DcFunction
from dc_modules.errors import ArgumentError, DcForgeError, InputFormatError
from dc_modules.folded import decompose, parse_penalty, right_derivative_at_zero, sampled_curve
from dc_modules.piecewise_dc import build_min_representation, pwa_min_representation
from dc_modules.qp_value import (
    dom_certificate,
    dom_convexity_certificate,
    enumerate_pieces,
    find_descent_ray,
    pd_value_dc,
    qp_solve,
    qp_value_batch,
    recourse_dc,
    value_dc,
)
from dc_modules.risk import build_measure_dc, parse_measure, risk_oracle
from dc_modules.suite import run_verify_suite
from dc_modules.verification import CheckReport, check_convexity, check_dc_identity, check_lc1_bound, merge_reports
from utils.problem_files import (
    parse_piecewise_file,
    parse_qp_file,
    parse_query_file,
    parse_recourse_file,
    parse_scenario_file,
    read_json,
)
from utils.report_store import save_reports

COMMANDS = ("risk", "qp", "recourse", "piecewise", "folded", "verify-suite")

# Exit codes
EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

MAX_SEED = 2 ** 64 - 1


@dataclass
class RunConfig:
    """One run: settings from app_settings.json overridden by command-line flags."""

    command: str
    input_path: Optional[Path] = None
    query_path: Optional[Path] = None
    out_path: Optional[Path] = None
    seed: int = 42
    tolerances: Dict[str, float] = field(default_factory=dict)
    samples: Dict[str, int] = field(default_factory=dict)
    verify: bool = False
    measure: Optional[str] = None
    penalty: Optional[str] = None
    alpha: Optional[float] = None
    lam: Optional[float] = None
    dc: bool = False
    scenario: int = 0
    radius: Optional[float] = None
    tol_override: Optional[float] = None
    samples_override: Optional[int] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ArgumentError(f"unknown command {self.command!r}")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise InputFormatError(f"seed must be a 64-bit unsigned value, got {self.seed}")
        for p in (self.input_path, self.query_path):
            if p is not None and not Path(p).exists():
                raise InputFormatError(f"file not found: {p}")

    @classmethod
    def from_args(cls, args, settings_path=None) -> "RunConfig":
        run = get_run_settings(settings_path)
        tolerances = get_tolerance_settings(settings_path)
        samples = get_sample_settings(settings_path)
        if getattr(args, "tol", None) is not None:
            tolerances = {k: float(args.tol) for k in tolerances}
        if getattr(args, "samples", None) is not None:
            samples = {k: int(args.samples) for k in samples}
        seed = args.seed if getattr(args, "seed", None) is not None else run["seed"]
        out = getattr(args, "out", None)
        if out is None:
            out = Path(run["output_dir"]) / f"{args.command.replace('-', '_')}_report.json"
        return cls(
            command=args.command,
            input_path=Path(args.input) if getattr(args, "input", None) else None,
            query_path=Path(args.query) if getattr(args, "query", None) else None,
            out_path=Path(out),
            seed=int(seed),
            tolerances=tolerances,
            samples=samples,
            verify=bool(getattr(args, "verify", False)),
            measure=getattr(args, "measure", None),
            penalty=getattr(args, "penalty", None),
            alpha=getattr(args, "alpha", None),
            lam=getattr(args, "lam", None),
            dc=bool(getattr(args, "dc", False)),
            scenario=int(getattr(args, "scenario", 0) or 0),
            radius=getattr(args, "radius", None),
            tol_override=getattr(args, "tol", None),
            samples_override=getattr(args, "samples", None),
        )

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "input": None if self.input_path is None else str(self.input_path),
            "query": None if self.query_path is None else str(self.query_path),
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "samples": dict(self.samples),
            "verify": self.verify,
            "measure": self.measure,
            "penalty": self.penalty,
            "alpha": self.alpha,
            "lambda": self.lam,
            "dc": self.dc,
            "scenario": self.scenario,
        }


def describe_expr(expr: ConvexExpr) -> Dict:
    """Serialized tree where the file grammar allows, a kind-only outline elsewhere."""
    try:
        return expr.to_dict()
    except ArgumentError:
        pass
    out = {"kind": expr.kind, "dim": expr.dim}
    if hasattr(expr, "children"):
        out["children"] = [describe_expr(c) for c in expr.children]
    elif isinstance(getattr(expr, "child", None), ConvexExpr):
        out["child"] = describe_expr(expr.child)
    return out


def describe_dc(dc: DcFunction) -> Dict:
    meta = {k: v for k, v in dc.meta.items() if isinstance(v, (int, float, str, list, type(None)))}
    return {"g": describe_expr(dc.g), "h": describe_expr(dc.h), "domain": dc.domain.to_dict(), "meta": meta}


class DcForgeBackend:
    """Backend handler for dcforge commands.

    Each handler returns a report dictionary with "command", "status",
    "summary", "tables" and "checks"; run() adds the exit code and
    writes the report file.
    """

    def __init__(self, layout, config: RunConfig):
        """
        Args:
            layout: ReportLayout used to print the finished report
            config: RunConfig for this run
        """
        self.layout = layout
        self.config = config
        self.handlers = {
            "risk": self.run_risk,
            "qp": self.run_qp,
            "recourse": self.run_recourse,
            "piecewise": self.run_piecewise,
            "folded": self.run_folded,
            "verify-suite": self.run_suite,
        }

    # ------------------------------------------------------------------
    def run(self) -> int:
        """
        Dispatch, render and save. InputFormatError propagates to the caller;
        other dcforge errors become an error report with exit 1.
        """
        cfg = self.config
        try:
            report = self.handlers[cfg.command]()
        except InputFormatError:
            raise
        except DcForgeError as e:
            report = {
                "command": cfg.command,
                "status": "error",
                "error": type(e).__name__,
                "message": str(e),
                "checks": [],
            }
        report["config"] = cfg.to_dict()
        code = EXIT_OK if report["status"] == "ok" else EXIT_FAIL
        report["exit_code"] = code
        self.layout.show_report(report)
        if cfg.out_path is not None:
            save_reports(cfg.out_path, report)
        return code

    def _finish(self, command: str, summary: Dict, tables: Dict, checks: List[CheckReport], **extra) -> Dict:
        merged = merge_reports(checks)
        report = {
            "command": command,
            "status": "ok" if merged["pass"] else "fail",
            "summary": summary,
            "tables": tables,
            "checks": merged["checks"],
        }
        report.update(extra)
        return report

    def _require_input(self) -> Dict:
        if self.config.input_path is None:
            raise InputFormatError(f"{self.config.command} needs --in")
        return read_json(self.config.input_path)

    def _identity(self, dc: DcFunction, reference, name: str) -> CheckReport:
        cfg = self.config
        return check_dc_identity(dc, reference, samples=cfg.samples["oracle"], tol=cfg.tolerances["identity"],
                                 seed=cfg.seed, name=name)

    def _convexity(self, dc: DcFunction, prefix: str = "") -> List[CheckReport]:
        cfg = self.config
        return [
            check_convexity(getattr(dc, part), dc.domain, trials=cfg.samples["convexity"],
                            tol=cfg.tolerances["convexity"], seed=cfg.seed, name=f"{prefix}convexity_{part}")
            for part in ("g", "h")
        ]

    # ------------------------------------------------------------------
    def run_risk(self) -> Dict:
        cfg = self.config
        problem = parse_scenario_file(self._require_input())
        rf = problem.functional
        if not cfg.measure:
            raise InputFormatError("risk needs --measure")
        try:
            spec = parse_measure(cfg.measure, alpha=cfg.alpha, lam=cfg.lam)
        except ArgumentError as e:
            raise InputFormatError(f"bad --measure: {e}")
        dc = build_measure_dc(spec, rf, problem.utility)

        def oracle(x):
            return risk_oracle(spec, rf, x, problem.utility)

        points = problem.points
        if points is None:
            points = rf.domain.sample(np.random.default_rng(cfg.seed), min(cfg.samples["oracle"], 10))
        values = dc.eval_batch(points)
        reference = np.array([oracle(x) for x in points])
        checks = [self._identity(dc, oracle, "oracle_match")]
        if cfg.verify:
            checks += self._convexity(dc)
        rows = [[f"x{k}", float(v), float(r), float(abs(v - r))] for k, (v, r) in enumerate(zip(values, reference))]
        return self._finish(
            "risk",
            {"measure": spec.text, "scenarios": rf.S, "dim": rf.domain.dim},
            {"values": {"headers": ["point", "dc", "oracle", "gap"], "rows": rows}},
            checks,
            decomposition=describe_dc(dc),
            points=points.tolist(),
            values=values.tolist(),
            oracle=reference.tolist(),
        )

    def run_qp(self) -> Dict:
        cfg = self.config
        inst = parse_qp_file(self._require_input())
        query = parse_query_file(read_json(cfg.query_path), inst) if cfg.query_path else None
        region = query.region if query is not None else None
        pieces = enumerate_pieces(inst, region)
        piece_rows = [[str(list(p.subset)), p.degenerate, float(np.abs(p.H).max(initial=0.0))] for p in pieces]
        summary = {
            "m": inst.m,
            "k": inst.k,
            "copositivity": inst.verdict.status,
            "dom_convexity": dom_convexity_certificate(inst),
            "pieces": len(pieces),
        }
        tables = {"pieces": {"headers": ["subset", "degenerate", "max|H|"], "rows": piece_rows}}
        checks: List[CheckReport] = []
        extra: Dict = {"pieces": [p.to_dict() for p in pieces], "copositivity": inst.verdict.to_dict()}

        if query is not None:
            rows, solutions, gaps = [], [], []
            for w in query.points:
                q, b = inst.split(w)
                cert = dom_certificate(inst, q, b)
                if cert.member:
                    sol = qp_solve(inst, q, b, check_domain=False)
                    containing = [float(p.value(w)[0]) for p in pieces
                                  if p.validity.contains(w[None, :], 1e-9)[0]]
                    if containing:
                        gaps.append(abs(min(containing) - sol.value) / (1.0 + abs(sol.value)))
                    rows.append([str(w.tolist()), True, sol.value, len(sol.faces)])
                    solutions.append({"w": w.tolist(), "in_dom": True, **sol.to_dict()})
                else:
                    ray = find_descent_ray(inst, q, b) if cert.feasible else None
                    rows.append([str(w.tolist()), False, None, 0])
                    solutions.append({
                        "w": w.tolist(), "in_dom": False, "feasible": cert.feasible,
                        "descent_ray": None if ray is None else
                        {"z": ray.z.tolist(), "v": ray.v.tolist(), "t": ray.t, "objective": ray.objective},
                    })
            tables["query"] = {"headers": ["w", "in_dom", "value", "faces"], "rows": rows}
            extra["solutions"] = solutions
            checks.append(CheckReport("min_of_pieces", len(gaps), max(gaps, default=0.0), 1e-6,
                                      max(gaps, default=0.0) <= 1e-6, None, cfg.seed))

        if cfg.dc:
            if region is None:
                raise InputFormatError("--dc needs a query file with a region")
            dc = value_dc(inst, region, cfg.seed)
            checks.append(self._identity(dc, _Batch(lambda X: qp_value_batch(inst, X)), "value_dc_identity"))
            if np.linalg.eigvalsh(inst.Q)[0] >= 1e-9:
                pd = pd_value_dc(inst, region)
                checks.append(self._identity(pd, dc, "pd_shortcut_match"))
            if cfg.verify:
                checks += self._convexity(dc, "value_dc_")
            extra["decomposition"] = describe_dc(dc)
        return self._finish("qp", summary, tables, checks, **extra)

    def run_recourse(self) -> Dict:
        cfg = self.config
        problem = parse_recourse_file(self._require_input())
        inst, rm = problem.instance, problem.recourse
        dc = recourse_dc(inst, rm, cfg.scenario, problem.x_region, cfg.seed)
        W, w0 = rm.affine_map(cfg.scenario)
        checks = [self._identity(dc, _Batch(lambda X: qp_value_batch(inst, X @ W.T + w0)), "recourse_identity")]
        if cfg.verify:
            checks += self._convexity(dc)
        X = problem.x_region.sample(np.random.default_rng(cfg.seed), 5)
        rows = [[str(x.tolist()), float(v)] for x, v in zip(X, dc.eval_batch(X))]
        return self._finish(
            "recourse",
            {"scenario": cfg.scenario, "scenarios": len(rm), "x_dim": rm.x_dim,
             "shortcut": dc.meta.get("shortcut", "pieces")},
            {"samples": {"headers": ["x", "psi"], "rows": rows}},
            checks,
            decomposition=describe_dc(dc),
        )

    def run_piecewise(self) -> Dict:
        cfg = self.config
        problem = parse_piecewise_file(self._require_input())
        pw = problem.build()
        rep = build_min_representation(pw)
        checks = [self._identity(rep.theta, pw, "min_representation_identity")]
        X = pw.domain.sample(np.random.default_rng(cfg.seed), cfg.samples["identity"])
        theta = pw.eval_batch(X)
        worst = max(float(np.maximum(theta - psi.eval_batch(X), 0.0).max()) for psi in rep.psi)
        checks.append(CheckReport("majorization", X.shape[0], worst, cfg.tolerances["identity"],
                                  worst <= cfg.tolerances["identity"], None, cfg.seed))
        checks.append(check_lc1_bound([(p.A, p.a, p.c) for p in pw.pieces], samples=cfg.samples["lc1"],
                                      tol=cfg.tolerances["lc1"], seed=cfg.seed, moduli=pw.moduli,
                                      domain=pw.domain))
        extra = {"decomposition": describe_dc(rep.theta)}
        if problem.affine:
            pwa = pwa_min_representation([(p.a, p.c) for p in pw.pieces], pw.regions, pw.domain, check=False)
            checks.append(self._identity(pwa, pw, "pwa_identity"))
        if cfg.verify:
            for i, psi in enumerate(rep.psi):
                checks += self._convexity(psi, f"psi{i}_")
        rows = [[f"piece {i}", p.is_affine, float(L)] for i, (p, L) in enumerate(zip(pw.pieces, pw.piece_moduli))]
        return self._finish(
            "piecewise",
            {"pieces": len(pw.pieces), "dim": pw.dim},
            {"pieces": {"headers": ["piece", "affine", "L_i"], "rows": rows}},
            checks,
            moduli=pw.moduli.tolist(),
            **extra,
        )

    def run_folded(self) -> Dict:
        cfg = self.config
        if not cfg.penalty:
            raise InputFormatError("folded needs --penalty")
        spec = parse_penalty(cfg.penalty, cfg.radius) if cfg.radius else parse_penalty(cfg.penalty)
        derivative = right_derivative_at_zero(spec)
        dc = decompose(spec)
        reference = _Batch(lambda X: spec.theta(X[:, 0]))
        checks = [self._identity(dc, reference, "reconstruction")]
        if cfg.verify:
            checks += self._convexity(dc)
        curve = sampled_curve(spec, dc)
        rows = [[t, th, g, h] for t, th, g, h in zip(curve["t"], curve["theta"], curve["g"], curve["h"])]
        return self._finish(
            "folded",
            {"penalty": spec.label, "derivative": derivative, "case": dc.meta["case"],
             "t_minus": dc.meta["t_minus"], "t_plus": dc.meta["t_plus"], "radius": spec.radius},
            {"curve": {"headers": ["t", "theta", "g", "h"], "rows": rows}},
            checks,
            curve=curve,
            decomposition=describe_dc(dc),
        )

    def run_suite(self) -> Dict:
        cfg = self.config
        kwargs = {} if cfg.samples_override is None else {"samples": int(cfg.samples_override)}
        result = run_verify_suite(cfg.seed, tol=cfg.tol_override, **kwargs)
        return {
            "command": "verify-suite",
            "status": "ok" if result["pass"] else "fail",
            "summary": {"checks": len(result["checks"]), "seed": cfg.seed},
            "tables": {},
            "checks": result["checks"],
        }


class _Batch:
    """Adapter giving a batch evaluator the eval_batch interface."""

    def __init__(self, fn):
        self.fn = fn

    def eval_batch(self, X):
        return np.asarray(self.fn(np.atleast_2d(X)), dtype=float)
