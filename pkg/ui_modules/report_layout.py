# report_layout.py
"""
Fixed-width text layout for dcforge reports.
Prints the same content the JSON report holds, as diffable tables.
"""
import sys
from typing import Dict, List, Optional, Sequence, TextIO

WIDTH = 78
CELL = 14


def format_cell(value, width: int = CELL) -> str:
    """One table cell: floats in exponent form, everything else as text."""
    if isinstance(value, bool):
        text = "yes" if value else "no"
    elif isinstance(value, float):
        text = f"{value:.6e}" if value == value and abs(value) != float("inf") else str(value)
    elif value is None:
        text = "-"
    elif isinstance(value, (list, tuple)):
        text = "[" + ",".join(format_cell(v, 0).strip() for v in value) + "]"
    else:
        text = str(value)
    if width and len(text) > width:
        text = text[:width - 1] + "~"
    return text.rjust(width) if width else text


class ReportLayout:
    """Text renderer for the command-line front end."""

    def __init__(self, stream: Optional[TextIO] = None, width: int = WIDTH):
        self.stream = stream or sys.stdout
        self.width = width

    def _line(self, text: str = ""):
        print(text, file=self.stream)

    def banner(self, title: str):
        self._line("=" * self.width)
        self._line(f" {title}")
        self._line("=" * self.width)

    def section(self, title: str):
        self._line("")
        self._line(f"-- {title} " + "-" * max(0, self.width - len(title) - 4))

    def key_values(self, pairs: Dict):
        if not pairs:
            return
        pad = max(len(str(k)) for k in pairs)
        for key, value in pairs.items():
            self._line(f"  {str(key).ljust(pad)} : {format_cell(value, 0)}")

    def table(self, headers: Sequence[str], rows: List[Sequence]):
        """Right-aligned columns of width CELL; the first column is left-aligned."""
        if not rows:
            self._line("  (none)")
            return
        first = max([len(str(headers[0]))] + [len(format_cell(r[0], 0)) for r in rows])
        first = min(first, 28)
        head = str(headers[0]).ljust(first) + "".join(str(h).rjust(CELL + 1) for h in headers[1:])
        self._line("  " + head)
        self._line("  " + "-" * len(head))
        for row in rows:
            cells = format_cell(row[0], 0)[:first].ljust(first)
            cells += "".join(" " + format_cell(v) for v in row[1:])
            self._line("  " + cells)

    def check_table(self, checks: List[Dict]):
        rows = [[c["check"], c["trials"], c["max_violation"], c["tol"], "PASS" if c["pass"] else "FAIL"]
                for c in checks]
        self.table(["check", "trials", "max_violation", "tol", "result"], rows)

    def status(self, report: Dict):
        state = report.get("status", "ok")
        if state == "error":
            self._line(f"[ERROR] {report.get('error')}: {report.get('message')}")
        elif state == "fail":
            self._line("[WARNING] One or more checks failed")
        else:
            self._line("[OK] All checks passed")

    def show_report(self, report: Dict):
        """Render a full command report."""
        self.banner(f"dcforge {report.get('command', '')}")
        summary = {k: v for k, v in report.get("summary", {}).items()}
        self.key_values(summary)
        for title, block in report.get("tables", {}).items():
            self.section(title)
            self.table(block["headers"], block["rows"])
        if report.get("checks"):
            self.section("checks")
            self.check_table(report["checks"])
        self._line("")
        self.status(report)

    def error_line(self, message: str):
        self._line(f"[ERROR] {message}")
