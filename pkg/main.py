# main.py
"""
Main entry point for dcforge.
Builds the command-line grammar and wires the report layout and the
backend together.
"""
import argparse
import json
import sys

from ui_modules.cli_backend import COMMANDS, EXIT_INPUT, DcForgeBackend, RunConfig
from ui_modules.report_layout import ReportLayout
from dc_modules.errors import InputFormatError


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="problem file (JSON)")
    common.add_argument("--out", help="report file, default <output_dir>/<command>_report.json")
    common.add_argument("--seed", type=int, help="random seed (default from app_settings.json)")
    common.add_argument("--tol", type=float, help="override every check tolerance")
    common.add_argument("--samples", type=int, help="override every sample count")
    common.add_argument("--verify", action="store_true", help="also check convexity of g and h")
    common.add_argument("--settings", help="settings file instead of config/app_settings.json")

    parser = argparse.ArgumentParser(prog="dcforge", description="dc decompositions with numerical certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    risk = sub.add_parser("risk", parents=[common], help="risk measure of a random dc functional")
    risk.add_argument("--measure", required=True, help="cvar:0.5, var:0.9, dev:std@mean, Rlambda:1:variance, ...")
    risk.add_argument("--alpha", type=float, help="level for measures given without one")
    risk.add_argument("--lambda", dest="lam", type=float, help="weight for Rlambda without one")

    qp = sub.add_parser("qp", parents=[common], help="value function of a parametric QP")
    qp.add_argument("--query", help="query file: one (q, b), a list of points or a region grid")
    qp.add_argument("--dc", action="store_true", help="build the dc decomposition on the query region")

    recourse = sub.add_parser("recourse", parents=[common], help="second-stage value as a dc function of x")
    recourse.add_argument("--scenario", type=int, default=0, help="scenario index")

    sub.add_parser("piecewise", parents=[common], help="min-representation of a piecewise LC1 function")

    folded = sub.add_parser("folded", parents=[common], help="dc split of a folded concave penalty")
    folded.add_argument("--penalty", required=True, help="catalog id such as scad:a=3.7 or expr:<formula in u>")
    folded.add_argument("--radius", type=float, help="half-width T of the interval [-T, T]")

    sub.add_parser("verify-suite", parents=[common], help="run the built-in verification suite")
    return parser


def run(argv=None) -> int:
    """Run one command; returns 0 when every check passes, 1 on a failure, 2 on bad input."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_INPUT
    assert args.command in COMMANDS

    layout = ReportLayout()
    try:
        config = RunConfig.from_args(args, getattr(args, "settings", None))
        backend = DcForgeBackend(layout, config)
        return backend.run()
    except (InputFormatError, OSError, json.JSONDecodeError) as e:
        layout.error_line(str(e))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(run())
