"""Every acceptance criterion at its stated tolerance, one PASS/FAIL line each.

Criteria 1-11 run once in-process; criterion 12 runs ``verify-all --seed 0``
as a separate process and compares its report with the in-process one.
"""

import subprocess
import sys
import time

import pytest

from tau3ternary.acceptance import CRITERIA, Context, criterion_12, run_criterion, suite_report
from tau3ternary.report import serialize_report

_results = {}


@pytest.fixture(scope="module")
def ctx(tmp_path_factory):
    return Context(seed=0, cache_dir=tmp_path_factory.mktemp("tables"))


def _report(res, capsys):
    with capsys.disabled():
        print("\n" + res.line())


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, ctx, capsys):
    res = run_criterion(number, ctx)
    _results[number] = res
    _report(res, capsys)
    assert res.passed, serialize_report(res.metrics)


@pytest.mark.slow
def test_criterion_12_determinism(ctx, tmp_path, capsys):
    missing = [n for n in CRITERIA if n not in _results]
    for n in missing:
        _results[n] = run_criterion(n, ctx)
    first = serialize_report(suite_report([_results[n] for n in sorted(CRITERIA)], 0)).encode()
    out = tmp_path / "verify.json"
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "tau3ternary", "verify-all", "--seed", "0", "--output", str(out),
         "--cache-dir", str(ctx.cache_dir)],
        capture_output=True, text=True,
    )
    assert proc.returncode in (0, 1), proc.stderr
    res = criterion_12(first, out.read_bytes())
    res.seconds = time.perf_counter() - t0
    _report(res, capsys)
    assert res.passed
