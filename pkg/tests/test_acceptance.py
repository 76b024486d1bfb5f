"""Acceptance criteria 1-10, one test each, sharing a single verification session.

Each test prints one PASS/FAIL line with the measured value, then asserts.
Tests run in criterion order so that the degree-monotonicity check also sees
the traces recorded by criteria 4-6.
"""

import math
import time

import pytest

from siciak.verify import CHECKS, Session

# frozen independent values: log sqrt(1.62) is the log-convex hull gauge of the
# union at (0.9, 0.9); log 1.8 is its plain Minkowski gauge there
HULL_UNION = 0.5 * math.log(1.62)
GAUGE_UNION = math.log(1.8)

# criterion -> (check name, wall-clock limit in seconds or None)
CRITERIA = {
    1: ("jensen", 10.0),
    2: ("homogeneity", 60.0),
    3: ("minkowski", 30.0),
    4: ("closed-forms", None),  # per-point limit is enforced inside the check
    5: ("strict-improvement", 120.0),
    6: ("projective-necessity", 180.0),
    7: ("consistency", None),
    8: ("monotonicity", None),
    9: ("sandwich", None),
    10: ("determinism", None),
}


@pytest.fixture(scope="module")
def session():
    return Session(seed=0)


def run(session, capsys, criterion):
    name, limit = CRITERIA[criterion]
    t = time.perf_counter()
    r = CHECKS[name](session)
    elapsed = time.perf_counter() - t
    in_time = limit is None or elapsed < limit
    ok = r.status == "pass" and in_time
    with capsys.disabled():
        timing = f"{elapsed:.1f}s" + ("" if limit is None else f" (limit {limit:.0f}s)")
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion} {name}: measured={r.measured} "
              f"[{r.threshold}] {r.detail} {timing}")
    return r, ok


def test_criterion_01_jensen(session, capsys):
    r, ok = run(session, capsys, 1)
    assert ok and r.measured < 1e-6


def test_criterion_02_homogeneity(session, capsys):
    r, ok = run(session, capsys, 2)
    assert ok and r.measured < 1e-3


def test_criterion_03_minkowski(session, capsys):
    r, ok = run(session, capsys, 3)
    assert ok and r.measured < 1e-3


def test_criterion_04_closed_forms(session, capsys):
    r, ok = run(session, capsys, 4)
    assert ok and r.measured < 5e-3


def test_criterion_05_strict_improvement(session, capsys):
    r, ok = run(session, capsys, 5)
    assert ok
    assert 0.236 <= r.measured <= 0.30
    assert GAUGE_UNION - r.measured >= 0.25
    assert abs(r.measured - HULL_UNION) <= 0.06


def test_criterion_06_projective_necessity(session, capsys):
    r, ok = run(session, capsys, 6)
    assert r.measured is not None and abs(r.measured + math.log(2)) <= 0.05
    assert ok, f"best disc crossing count: {r.detail}"


def test_criterion_07_consistency(session, capsys):
    r, ok = run(session, capsys, 7)
    assert ok and r.measured < 1e-2


def test_criterion_08_monotonicity(session, capsys):
    r, ok = run(session, capsys, 8)
    assert ok and r.measured == 0


def test_criterion_09_sandwich(session, capsys):
    r, ok = run(session, capsys, 9)
    assert ok and r.measured >= -1e-3


def test_criterion_10_determinism(session, capsys):
    r, ok = run(session, capsys, 10)
    assert ok
