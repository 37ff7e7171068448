"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria share a Suite instance so Pietsch certificates computed for the
sandwich check are reused by the later criteria, as the CLI ``suite`` does.
"""

import json
import subprocess
import sys

import pytest

from blochfactor.cli import _plain
from blochfactor.suite import Suite

SEED = 0
# seconds; criterion 2 allows 30 s for each of its four atoms
LIMITS = {1: 5, 2: 120, 3: 120, 4: 120, 5: 300, 6: 60, 7: 120, 8: 120, 9: 120, 10: 180}

_results: dict = {}


@pytest.fixture(scope="module")
def suite():
    return Suite(SEED)


def _report(capsys, ident, name, passed, detail):
    with capsys.disabled():
        print(f"\nCRITERION {ident:>2} {'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.mark.parametrize("ident", sorted(LIMITS))
def test_criterion(ident, suite, capsys):
    (res,) = suite.run([ident])
    _results[ident] = res
    in_time = res.seconds <= LIMITS[ident]
    _report(capsys, ident, res.name, res.passed and in_time,
            f"{res.seconds:.1f}s / {LIMITS[ident]}s")
    assert res.passed, json.dumps(_plain(res.metrics))[:2000]
    assert in_time, f"took {res.seconds:.1f}s, limit {LIMITS[ident]}s"


def test_criterion_11_determinism(suite, tmp_path, capsys):
    missing = [k for k in LIMITS if k not in _results]
    for res in suite.run(missing):
        _results[res.id] = res
    first = json.dumps(_plain([_results[k].to_dict() for k in sorted(LIMITS)]), sort_keys=True)

    out = tmp_path / "suite.json"
    proc = subprocess.run([sys.executable, "-m", "blochfactor.cli", "suite", "--seed", str(SEED),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode in (0, 2), proc.stderr
    second = json.dumps(json.loads(out.read_text())["result"]["criteria"], sort_keys=True)

    same = first == second
    _report(capsys, 11, "determinism", same, "in-process run vs fresh CLI process")
    assert same
