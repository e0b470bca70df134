"""Run reports and their JSON / CSV / text serializations."""

from __future__ import annotations

import csv
import json
import math
import numbers
import os
from dataclasses import dataclass, field

from .errors import IoError

SCHEMA = 1
FORMATS = ("json", "csv", "text")


@dataclass
class RunReport:
    scenario: str
    config: dict
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    threads: int = 1
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check_names(self):
        return [c.name for c in self.checks]


def _num(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, numbers.Integral):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def report_dict(report: RunReport) -> dict:
    return {
        "schema": SCHEMA,
        "scenario": report.scenario,
        "config": _num(report.config),
        "threads": report.threads,
        "checks": [_num(c.as_dict()) for c in report.checks],
        "results": _num(report.results),
        "artifacts": sorted(report.artifacts),
        "passed": report.passed,
        "wall_time": report.wall_time,
    }


def emit_report(report: RunReport, out_dir, formats=("json",)):
    """Write ``report.<ext>`` for each requested format; returns the paths written."""
    paths = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for fmt in formats:
            if fmt not in FORMATS:
                raise ValueError(f"unknown report format {fmt!r}")
            if fmt == "json":
                p = os.path.join(out_dir, "report.json")
                with open(p, "w") as fh:
                    json.dump(report_dict(report), fh, indent=2)
                    fh.write("\n")
            elif fmt == "csv":
                p = os.path.join(out_dir, "report.csv")
                with open(p, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["name", "value", "op", "tol", "pass"])
                    for c in report.checks:
                        w.writerow([c.name, repr(float(c.value)), c.op, repr(float(c.tol)),
                                    "pass" if c.passed else "fail"])
            else:
                p = os.path.join(out_dir, "report.txt")
                with open(p, "w") as fh:
                    fh.write(format_text(report))
            paths.append(p)
    except OSError as exc:
        raise IoError(f"cannot write report under {out_dir}: {exc}") from exc
    return paths


def format_text(report: RunReport) -> str:
    lines = [f"scenario {report.scenario} ({len(report.checks)} checks, threads={report.threads})"]
    for c in report.checks:
        tag = "PASS" if c.passed else "FAIL"
        lines.append(f"{tag} {c.name}: {c.value:.6g} {c.op} {c.tol:g}")
    for k, v in report.results.items():
        lines.append(f"  {k} = {v}")
    lines.append("all checks passed" if report.passed else "some checks failed")
    return "\n".join(lines) + "\n"
