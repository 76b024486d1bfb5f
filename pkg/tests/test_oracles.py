import math

import pytest
from hypothesis import given, settings, strategies as st

from siciak import domains as D
from siciak.envelope import EnvelopeResult
from siciak.oracles import (CASES, CandidateFunction, fixture_provenance, lelong_defect, loghomog_residual,
                            reference_candidate, reference_vh, reinhardt_hull_gauge, sandwich_certify,
                            validate_lower)
from siciak.weights import zero_weight

UNION = [[1.0, 0.5], [0.5, 1.0]]


def analytic_union_hull(z):
    a, b = abs(z[0]), abs(z[1])
    return max(a, b, math.sqrt(2 * a * b))


def test_reference_values():
    assert reference_vh("punctured-ball", (0.3, 0.4)) == pytest.approx(math.log(0.5))
    assert reference_vh("annulus", 1.0) == pytest.approx(math.log(0.5))
    assert reference_vh("punctured-polydisc", (0.9, 0.2)) == pytest.approx(math.log(0.9))
    assert reference_vh("polydisc-union", (0.9, 0.9)) == pytest.approx(math.log(math.sqrt(1.62)))
    assert reference_vh("sector", (0.5, 1.0)) == pytest.approx(-math.log(2))
    assert fixture_provenance("sector").startswith("conjectured")
    with pytest.raises(KeyError):
        reference_vh("nonesuch", 1.0)


def test_hull_matches_union_example():
    assert reinhardt_hull_gauge(UNION, (0.9, 0.9)) == pytest.approx(math.sqrt(1.62), abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 3.0), st.floats(0.02, 3.0), st.floats(0, 2 * math.pi))
def test_hull_matches_analytic(a, b, t):
    z = (a, b * complex(math.cos(t), math.sin(t)))
    assert reinhardt_hull_gauge(UNION, z) == pytest.approx(analytic_union_hull(z), rel=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0), st.floats(0.1, 5.0))
def test_hull_homogeneous_and_below_gauge(a, b, s):
    region = D.polydisc_union(UNION)
    g = reinhardt_hull_gauge(UNION, (a, b))
    assert reinhardt_hull_gauge(UNION, (s * a, s * b)) == pytest.approx(s * g, rel=1e-6)
    assert g <= D.minkowski_gauge(region, (a, b)) * (1 + 1e-3)


def test_hull_axis_points():
    assert reinhardt_hull_gauge(UNION, (0.5, 0.0)) == pytest.approx(0.5, rel=1e-6)
    assert reinhardt_hull_gauge(UNION, (0.0, 2.0)) == pytest.approx(2.0, rel=1e-6)


def test_hull_rejects_other_dimensions():
    with pytest.raises(ValueError):
        reinhardt_hull_gauge([[1.0, 1.0, 1.0]], (1, 1, 1))


def test_lelong_examples():
    norm = CandidateFunction.from_expr("log(sqrt(abs(z1)*abs(z1) + abs(z2)*abs(z2)))", 2)
    rep = lelong_defect(norm)
    assert rep.verdict == "bounded" and rep.defect <= 1e-12
    quad = CandidateFunction.from_expr("2*log(sqrt(abs(z1)*abs(z1) + abs(z2)*abs(z2)))", 2)
    assert lelong_defect(quad).verdict == "unbounded-evidence"
    with pytest.raises(ValueError):
        lelong_defect(norm, radii=(10.0, 1.0))


def test_loghomog_examples():
    u = reference_candidate("polydisc-union")
    assert loghomog_residual(u, (0.3, 0.7j), 2.5 - 1j) < 1e-12
    sq = CandidateFunction.from_expr("log(abs(z1)*abs(z1) + abs(z2))", 2)
    assert loghomog_residual(sq, (1.0, 1.0), 3.0) > 0.1
    assert loghomog_residual(u, (0.0, 0.0 + 1e-300), 0.5) < 1e-9
    with pytest.raises(ValueError):
        loghomog_residual(u, (1.0, 1.0), 0)


@pytest.mark.parametrize("case", CASES)
def test_references_validate(case):
    regions = {"punctured-ball": D.ball(), "annulus": D.annulus(), "punctured-polydisc": D.polydisc(),
               "polydisc-union": D.polydisc_union(UNION), "sector": D.sector()}
    region = regions[case]
    assert validate_lower(reference_candidate(case, region.dimension), region, zero_weight()) == ""


def test_validator_rejects_bad_candidates():
    region = D.ball()
    too_big = CandidateFunction.from_expr("log(sqrt(abs(z1)*abs(z1) + abs(z2)*abs(z2))) + 0.1", 2)
    assert validate_lower(too_big, region, zero_weight()).startswith("domination")
    squared = CandidateFunction.from_expr("2*log(abs(z1) + abs(z2))", 2)
    assert validate_lower(squared, region, zero_weight()).startswith("log-homogeneity")


def _upper(v):
    return EnvelopeResult(v, None, 0, 0.0, [v], True)


def test_sandwich_verdicts():
    region, w = D.ball(), zero_weight()
    low = reference_candidate("punctured-ball")
    z = (0.3, 0.4)
    assert sandwich_certify(z, low, _upper(math.log(0.5) + 0.01), region, w).verdict == "certified"
    assert sandwich_certify(z, low, _upper(math.log(0.5) + 0.2), region, w).verdict == "not-certified"
    assert sandwich_certify(z, low, _upper(math.log(0.5) - 0.01), region, w).verdict == "unsound"
    assert sandwich_certify(z, None, _upper(0.0), region, w).verdict == "upper-bound-only"
    bad = CandidateFunction.from_expr("log(sqrt(abs(z1)*abs(z1) + abs(z2)*abs(z2))) + 1", 2)
    rep = sandwich_certify(z, bad, _upper(0.0), region, w)
    assert rep.verdict == "failed-check" and rep.failed_check
