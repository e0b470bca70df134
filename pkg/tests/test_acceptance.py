"""Acceptance criteria 1-14 at their stated tolerances.

Run under pytest (one PASS/FAIL line per criterion in the terminal summary)
or directly with ``python tests/test_acceptance.py``.
"""

import json
import os
import subprocess
import sys
import tempfile
import time

import pytest

from adsland.checks import CRITERIA, criterion_13

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # running as a script
    ACCEPTANCE_LINES = {}


def _line(k, title, checks, seconds):
    bad = [c for c in checks if not c.passed]
    tag = "PASS" if not bad else "FAIL"
    detail = "; ".join(f"{c.name}={c.value:.3g} (needs {c.op} {c.tol:g})" for c in bad)
    text = f"criterion {k:2d} {tag}  {title} [{len(checks)} checks, {seconds:.1f}s]"
    return text + (f"  failing: {detail}" if detail else "")


def _record(k, title, checks, seconds):
    line = _line(k, title, checks, seconds)
    ACCEPTANCE_LINES[k] = line
    print(line)
    return line


def _cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "adsland.cli", *args], cwd=cwd,
                          capture_output=True, text=True)


def criterion_14():
    """Exit-code contract and determinism of the command-line front end."""
    from adsland.checks import Check

    out = []
    with tempfile.TemporaryDirectory() as tmp:
        reports = []
        for d in ("a", "b"):
            r = _cli("duality", "--out", d, cwd=tmp)
            out.append(Check(f"exit_ok[{d}]", r.returncode, 0))
            with open(os.path.join(tmp, d, "report.json")) as fh:
                rep = json.load(fh)
            rep.pop("wall_time")
            reports.append(rep)
        out.append(Check("deterministic_report", 0.0 if reports[0] == reports[1] else 1.0, 0.0))
        codes = {
            "exit_check_failure": (_cli("duality", "--tol", "dual_involution=-1", "--out", "c", cwd=tmp), 1),
            "exit_config_error": (_cli("duality", "--curvature", "-0.5", cwd=tmp), 2),
        }
        with open(os.path.join(tmp, "blocker"), "w") as fh:
            fh.write("x")
        codes["exit_internal_error"] = (_cli("duality", "--out", "blocker", cwd=tmp), 3)
        for name, (r, want) in codes.items():
            out.append(Check(name, abs(r.returncode - want), 0))
    return out


ALL = dict(CRITERIA)
ALL[14] = ("CLI determinism and exit codes", criterion_14)


@pytest.mark.parametrize("k", sorted(ALL))
def test_criterion(k):
    title, fn = ALL[k]
    t0 = time.perf_counter()
    checks = fn()
    _record(k, title, checks, time.perf_counter() - t0)
    if k == 13:
        # the quoted collar width is covered separately below
        checks = [c for c in checks if c.name != "collar_w"]
    bad = [c for c in checks if not c.passed]
    assert not bad, bad


@pytest.mark.xfail(strict=True, reason="quoted w(pi/3, l=2) = 0.414318 disagrees with its own "
                   "formula, which evaluates to 0.4135684508; see the decisions ledger")
def test_criterion_13_quoted_collar_width():
    (w,) = [c for c in criterion_13(quoted=True) if c.name == "collar_w"]
    assert w.passed, w


def test_criterion_13_collar_width_oracle():
    (w,) = [c for c in criterion_13(quoted=False) if c.name == "collar_w"]
    assert w.value < 1e-12


if __name__ == "__main__":
    failed = 0
    for k in sorted(ALL):
        title, fn = ALL[k]
        t0 = time.perf_counter()
        checks = fn()
        line = _record(k, title, checks, time.perf_counter() - t0)
        failed += line.split()[2] == "FAIL"
    sys.exit(1 if failed else 0)
