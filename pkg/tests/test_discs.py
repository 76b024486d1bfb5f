import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siciak import domains as D
from siciak.discs import (PolyDisc, ProjDisc, QuadratureWarning, aberth_roots, boundary_trace, disc_from_record,
                          disc_to_record, horner, infinity_crossings, jensen_defect, normalize_reduced,
                          roots_in_unit_disc, unit_roots)
from siciak.envelope import h_projective
from siciak.weights import HomogenizedWeight, zero_weight


def from_roots(roots):
    """Ascending coefficients of prod (zeta - a)."""
    return np.poly(roots)[::-1]


def test_constant_trace():
    z = np.array([0.3, 0.4j])
    T = boundary_trace(PolyDisc.constant(z), 7)
    assert T.shape == (7, 2) and np.all(T == z)


def test_identity_trace():
    T = boundary_trace(PolyDisc([[0, 1]]), 4)[:, 0]
    assert np.allclose(T, [1, 1j, -1, -1j], atol=1e-15)


def test_horner_matches_power_sums():
    rng = np.random.default_rng(0)
    nodes = unit_roots(64)
    for _ in range(20):
        c = rng.normal(size=11) + 1j * rng.normal(size=11)
        direct = (c[None, :] * nodes[:, None] ** np.arange(11)[None, :]).sum(axis=1)
        assert np.max(np.abs(horner(c, nodes)[0] - direct)) < 1e-14 * np.abs(c).sum()


def test_disc_invariants():
    f = PolyDisc([[0.3, 1, 2], [0.4, 0, 1j]])
    assert np.all(f.center == [0.3, 0.4]) and f.degree == 2 and f.dimension == 2
    with pytest.raises(ValueError):
        ProjDisc([[2.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        f.coefficients[0, 0] = 1.0


def test_roots_examples():
    rs = roots_in_unit_disc(from_roots([0.5, 3.0]))
    assert len(rs) == 1
    assert rs.locations[0] == pytest.approx(0.5, abs=1e-12) and rs.multiplicities[0] == 1
    rs = roots_in_unit_disc([0, 0, 0, 1])
    assert rs.roots == [(0j, 3)]


def test_planted_roots_recovered():
    rng = np.random.default_rng(11)
    for _ in range(10):
        planted = rng.uniform(0.05, 2.5, 10) * np.exp(2j * np.pi * rng.uniform(size=10))
        got = roots_in_unit_disc(from_roots(planted))
        inside = planted[np.abs(planted) < 1 - 1e-9]
        assert len(got) == inside.size
        for a in inside:
            assert np.min(np.abs(got.locations - a)) < 1e-8


def test_aberth_agrees_with_companion_matrix():
    rng = np.random.default_rng(12)
    for d in range(1, 13):
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        ours = np.sort_complex(aberth_roots(c))
        ref = np.sort_complex(np.roots(c[::-1]))
        assert np.max(np.abs(ours - ref)) < 1e-8


def test_multiplicities_cluster():
    rs = roots_in_unit_disc(from_roots([0.5, 0.5, -0.2j]))
    assert sorted(rs.multiplicities.tolist()) == [1, 2]
    assert rs.multiplicities.sum() <= 3


def test_jensen_examples():
    assert jensen_defect([1.0]) == 0.0
    assert abs(jensen_defect([1.0, -2.0], N=4096)) < 1e-12


def test_jensen_needs_normalisation():
    with pytest.raises(ValueError):
        jensen_defect([2.0, 1.0])


def test_jensen_warns_near_circle():
    with pytest.warns(QuadratureWarning):
        jensen_defect(np.array([1.0, -1 / 1.0005]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 3.0), st.floats(0, 2 * math.pi)), min_size=1, max_size=8))
def test_jensen_defect_small_and_shrinking(roots):
    a = np.array([r * complex(math.cos(t), math.sin(t)) for r, t in roots if abs(r - 1) >= 0.05])
    # repeated roots of rounded coefficients are only resolved to about eps**(1/m)
    gaps = np.abs(a[:, None] - a[None, :]) + np.eye(a.size)
    if a.size == 0 or gaps.min() < 1e-2:
        return
    p = from_roots(a)
    p = p / p[0]
    d1 = abs(jensen_defect(p, N=4096))
    assert d1 < 1e-6
    d_small, d_big = abs(jensen_defect(p, N=64)), abs(jensen_defect(p, N=128))
    assert d_big <= d_small + 1e-12


def test_infinity_crossings_examples():
    assert len(infinity_crossings(ProjDisc.constant([0.5, 1.0]))) == 0
    one = infinity_crossings(ProjDisc([[1, -2], [0.5, 0], [1, 0]]))
    assert one.locations[0] == pytest.approx(0.5) and one.multiplicities[0] == 1
    two = infinity_crossings(ProjDisc([[1, -4, 4], [0.5, 0, 0], [1, 0, 0]]))
    assert two.multiplicities.tolist() == [2]


def test_normalize_common_factor():
    z = 0.7
    f = ProjDisc(np.array([[1, -2], [z, -2 * z]]))
    g = normalize_reduced(f)
    assert g.degree == 0 and np.allclose(g.coefficients, [[1], [z]])


def test_normalize_keeps_reduced_disc():
    f = ProjDisc(np.array([[1, -2], [0.5, 1]]))
    assert normalize_reduced(f) is f


def test_planted_common_root_drops_functional():
    hw = HomogenizedWeight(D.annulus(), zero_weight())
    base = np.array([[1.0, 0.2], [0.9, 0.1j]])
    g = np.array([1.0, -1 / 0.3])  # 1 - zeta/0.3, root at 0.3
    lifted = ProjDisc(np.array([np.convolve(row, g) for row in base]))
    reduced = normalize_reduced(lifted)
    assert reduced.degree == 1
    assert np.allclose(reduced.coefficients, base, atol=1e-10)
    drop = h_projective(hw, lifted) - h_projective(hw, reduced)
    assert drop == pytest.approx(-math.log(0.3), abs=1e-9)


def test_reduction_preserves_projective_points():
    rng = np.random.default_rng(7)
    base = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    base[:, 0] = [1.0, 0.3, -0.2j]
    g = np.convolve([1.0, -1 / 0.4], [1.0, -1 / (0.6j)])
    lifted = ProjDisc(np.array([np.convolve(row, g) for row in base]))
    a, b = boundary_trace(lifted, 256), boundary_trace(normalize_reduced(lifted), 256)
    ok = np.abs(a[:, 0]) > 1e-8
    assert np.max(np.abs(a[ok, 1:] / a[ok, :1] - b[ok, 1:] / b[ok, :1])) < 1e-10


coeffs = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 5), st.data())
def test_record_round_trip(n, d, data):
    C = np.array([[data.draw(coeffs) for _ in range(d + 1)] for _ in range(n)])
    f = PolyDisc(C)
    assert np.array_equal(disc_from_record(disc_to_record(f)).coefficients, f.coefficients)
    P = np.vstack([np.r_[1.0, np.zeros(d)], C])
    g = ProjDisc(P)
    back = disc_from_record(disc_to_record(g))
    assert isinstance(back, ProjDisc) and np.array_equal(back.coefficients, g.coefficients)


def test_record_shape_check():
    with pytest.raises(ValueError):
        disc_from_record("affine | 2 | 1 | 1.0 0.0 0.0 0.0")
