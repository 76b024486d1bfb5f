import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siciak import domains as D
from siciak.errors import DimensionError, GaugeError


def two_annuli():
    def g(Z):
        r = np.abs(Z[:, 0])
        return np.column_stack([np.minimum(np.maximum(1 - r, r - 2), np.maximum(3 - r, r - 4))])

    return D.RegionSpec(1, (1.0, 4.0), inequalities=g, circled=True, name="two-annuli")


def two_balls():
    c1, c2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])

    def member(Z):
        return (np.linalg.norm(Z - c1, axis=1) < 0.2) | (np.linalg.norm(Z - c2, axis=1) < 0.2)

    return D.RegionSpec(2, (0.8, 1.2), membership=member, name="two-balls")


def test_contains_examples():
    a = D.annulus()
    assert D.contains(a, 1.0)
    assert not D.contains(a, 3.0)
    assert not D.contains(a, 0.0)
    assert not D.contains(D.ball(), [0, 0])


def test_contains_dimension_mismatch():
    with pytest.raises(DimensionError):
        D.contains(D.ball(), [1, 2, 3])


def test_non_finite_points_rejected():
    with pytest.raises(ValueError):
        D.as_points([np.nan, 1], 2)


def test_boundary_counts_as_outside():
    assert not D.contains(D.ball(), [1.0, 0.0])
    assert not D.contains(D.annulus(), 0.5)


def test_admissible_scalings_annulus():
    s = D.admissible_scalings(D.annulus(), 4.0)
    assert not s.exhausted_budget
    r = np.abs(s.scalings)
    # mu * 4 in {1/2 < |w| < 2}  <=>  1/8 < |mu| < 1/2
    assert r.min() > 1 / 8 and r.max() < 1 / 2
    assert r.min() < 0.25 < r.max()
    assert np.all(D.annulus().member(s.scalings[:, None] * 4.0))


def test_admissible_scalings_sector_empty():
    s = D.admissible_scalings(D.sector(), (0.5, 1.0))
    assert s.exhausted_budget and s.scalings.size == 0


def test_admissible_scalings_ball():
    s = D.admissible_scalings(D.ball(), (0.3, 0.4))
    assert not s.exhausted_budget
    assert np.abs(s.scalings).max() > 1.9


def test_admissible_scalings_zero():
    with pytest.raises(ValueError):
        D.admissible_scalings(D.ball(), (0, 0))


def test_gauge_examples():
    assert D.minkowski_gauge(D.ball(), (0.3, 0.4)) == pytest.approx(0.5, rel=1e-9)
    assert D.minkowski_gauge(D.polydisc(), (0.9, 0.45)) == pytest.approx(0.9, rel=1e-9)
    # 0.9/t < 1/2 forces t > 1.8
    assert D.minkowski_gauge(D.polydisc_union(), (0.9, 0.9)) == pytest.approx(1.8, rel=1e-9)


def test_gauge_needs_balanced_claim():
    with pytest.raises(GaugeError):
        D.minkowski_gauge(D.annulus(), 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi))
def test_gauge_absolutely_homogeneous(a, b, logr, arg):
    region = D.polydisc_union()
    z = np.array([a, b * 1j])
    mu = math.exp(logr) * complex(math.cos(arg), math.sin(arg))
    g1 = D.minkowski_gauge(region, mu * z)
    g0 = D.minkowski_gauge(region, z)
    assert g1 == pytest.approx(abs(mu) * g0, rel=1e-8)


def test_penalty_examples():
    assert D.boundary_penalty(D.annulus(), 1.0) == 0.0
    assert D.boundary_penalty(D.sector(), (0.5, 1.0)) > 0.0
    assert D.boundary_penalty(D.ball(), (0, 0)) == 1.0


def test_penalty_continuous_along_path():
    # (1, t) leaves the sector cone {|w| < |z|} at t = 1
    ts = np.linspace(1.5, 0.5, 201)
    pen = D.penalty_batch(D.sector(), np.column_stack([np.ones_like(ts), ts]))
    assert np.all(np.diff(pen) <= 1e-12)
    assert pen[-1] == 0.0 and pen[0] > 0
    assert np.max(np.abs(np.diff(pen))) < 0.05


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3))
def test_zero_penalty_implies_scaling_found(a, b):
    region = D.sector()
    z = (a, b)
    if D.boundary_penalty(region, z) == 0.0:
        assert not D.admissible_scalings(region, z).exhausted_budget


def test_listed_scalings_are_members():
    region = D.polydisc_union()
    z = np.array([0.9, 0.2j])
    s = D.admissible_scalings(region, z)
    assert np.all(region.member(s.scalings[:, None] * z[None, :]))


def test_connectivity_probe():
    assert D.cone_connectivity_probe(D.annulus()) == "connected-evidence"
    assert D.cone_connectivity_probe(two_annuli()) == "connected-evidence"
    assert D.cone_connectivity_probe(two_balls()) == "disconnected-evidence"
    assert D.cone_connectivity_probe(D.sector()) == "connected-evidence"


def test_cone_region_membership():
    cone = D.cone_region(D.sector())
    assert np.array_equal(cone.member(np.array([[1.0, 0.5], [0.5, 1.0]])), [True, False])
