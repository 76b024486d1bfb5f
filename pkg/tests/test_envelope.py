import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siciak import domains as D
from siciak.discs import PolyDisc, ProjDisc, normalize_reduced
from siciak.envelope import (EnvelopeResult, OptimizerConfig, QuadratureGrid, consistency_check, h_affine,
                             h_projective, h_weighted, minimize_envelope, point_seed)
from siciak.errors import InfeasibleDiscError, NoFeasibleDiscError, PreconditionError
from siciak.weights import HomogenizedWeight, constant_weight, zero_weight

LOG_HALF = math.log(0.5)
QUICK = OptimizerConfig(max_degree=2, starts=3, max_evals=600)


@pytest.fixture(scope="module")
def annulus_hw():
    return HomogenizedWeight(D.annulus(), zero_weight())


@pytest.fixture(scope="module")
def sector_hw():
    return HomogenizedWeight(D.sector(), zero_weight())


def test_quadrature_grid_validation():
    assert QuadratureGrid(8).nodes.shape == (8,)
    assert QuadratureGrid(8).weights.sum() == pytest.approx(1.0)
    for bad in (2, 12, 100):
        with pytest.raises(ValueError):
            QuadratureGrid(bad)


def test_constant_disc_is_tilde_phi(annulus_hw):
    for z in (1.0, 0.3j, -4 + 1j):
        assert h_affine(annulus_hw, PolyDisc.constant([z])) == pytest.approx(annulus_hw.tilde_phi([z]), abs=1e-12)


def test_affine_mean_value(annulus_hw):
    assert h_affine(annulus_hw, PolyDisc([[1.0, 0.1]])) == pytest.approx(LOG_HALF, abs=1e-3)


def test_projective_examples(annulus_hw):
    for z in (1.0, 0.4 + 0.3j):
        target = math.log(abs(z) / 2)
        assert h_projective(annulus_hw, ProjDisc.constant([z])) == pytest.approx(target, abs=1e-3)
        lift = ProjDisc([[1, -2], [z, -2 * z]])
        assert h_projective(annulus_hw, lift) == pytest.approx(target + math.log(2), abs=1e-3)
        assert h_projective(annulus_hw, normalize_reduced(lift)) == pytest.approx(target, abs=1e-3)


def test_projective_with_trivial_f0_is_affine(annulus_hw):
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = np.array([[1.0, *(0.2 * (rng.normal(size=3) + 1j * rng.normal(size=3)))]])
        f = PolyDisc(c)
        assert h_projective(annulus_hw, ProjDisc.from_affine(f)) == pytest.approx(h_affine(annulus_hw, f), abs=1e-9)


def test_weighted_examples(annulus_hw):
    X = D.cone_region(D.annulus(), annulus_hw.search)

    def psi(P):
        return annulus_hw.log_rho_batch(P)[0]

    for z in (1.0, 0.7j):
        target = math.log(abs(z) / 2)
        assert h_weighted(X, psi, ProjDisc.constant([z])) == pytest.approx(target, abs=1e-3)
        assert h_weighted(X, psi, ProjDisc([[1, -2], [z, 0]])) == pytest.approx(target, abs=1e-3)
    ball = D.ball()
    assert h_weighted(ball, lambda P: np.zeros(len(P)), ProjDisc.constant([0.3, 0.4])) == 0.0


def test_infeasible_boundary_raises(sector_hw):
    # w-coordinate overtakes z on part of the circle
    with pytest.raises(InfeasibleDiscError) as info:
        h_projective(sector_hw, ProjDisc([[1, 0], [0.5, 0], [1.0, 0.9]]))
    assert info.value.residual > 0 and len(info.value.nodes) > 0


def test_f0_zero_on_circle_is_infeasible(annulus_hw):
    with pytest.raises(InfeasibleDiscError):
        h_projective(annulus_hw, ProjDisc([[1, -1], [1.0, 0]]))


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0, 2 * math.pi), st.floats(0.01, 0.5))
def test_sector_lift_value(gamma_re, theta, excess):
    """[1 : 0.5 + a zeta : 1 + g zeta] stays in the cone when |a| > 1.5 + |g|."""
    hw = HomogenizedWeight(D.sector(), zero_weight())
    g = complex(gamma_re, 0.3 * gamma_re)
    a = (1.5 + abs(g) + excess) * complex(math.cos(theta), math.sin(theta))
    zeta = np.exp(2j * np.pi * np.arange(4096) / 4096)
    assert np.all(np.abs(1 + g * zeta) < np.abs(0.5 + a * zeta))
    lift = ProjDisc([[1, 0], [0.5, a], [1, g]])
    assert h_projective(hw, lift) == pytest.approx(math.log(abs(a)) - math.log(2), abs=1e-3)


def test_quadrature_stability(annulus_hw):
    f = PolyDisc([[1.0, 0.3, -0.1j, 0.05]])
    a = h_affine(annulus_hw, f, QuadratureGrid(512))
    b = h_affine(annulus_hw, f, QuadratureGrid(1024))
    assert abs(a - b) < 1e-6


def test_ball_degree_zero():
    hw = HomogenizedWeight(D.ball(), zero_weight())
    r = minimize_envelope(hw, (0.3, 0.4), "affine", QUICK)
    assert isinstance(r, EnvelopeResult) and r.converged
    assert r.value == pytest.approx(LOG_HALF, abs=1e-3)
    assert r.value <= r.trace[0] + 1e-12


def test_annulus_envelope_and_trace(annulus_hw):
    r = minimize_envelope(annulus_hw, 1.0, "affine", QUICK)
    assert r.value == pytest.approx(LOG_HALF, abs=1e-3)
    assert len(r.trace) == QUICK.max_degree + 1
    assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))
    assert r.value <= h_affine(annulus_hw, PolyDisc.constant([1.0])) + 1e-9


def test_constant_weight_shift():
    z = (0.3, 0.4)
    base = minimize_envelope(HomogenizedWeight(D.ball(), zero_weight()), z, "affine", QUICK).value
    shifted = minimize_envelope(HomogenizedWeight(D.ball(), constant_weight(1.5)), z, "affine", QUICK).value
    assert shifted - base == pytest.approx(1.5, abs=2e-3)


def test_preconditions(sector_hw):
    with pytest.raises(PreconditionError):
        minimize_envelope(sector_hw, (1.0, 0.5), "affine", QUICK)
    region = D.RegionSpec(2, (0.5, 1.0), inequalities=D.ball().inequalities, claimed_full_cone=True)
    with pytest.raises(PreconditionError):
        minimize_envelope(HomogenizedWeight(region, zero_weight()), (0.3, 0.4), "projective", QUICK)
    with pytest.raises(ValueError):
        minimize_envelope(sector_hw, (1.0, 0.5), "nonsense", QUICK)


def test_no_feasible_disc(sector_hw):
    # (0, 1) lies outside the cone {|w| < |z|}; small budget keeps every disc infeasible
    cfg = OptimizerConfig(max_degree=1, starts=1, max_evals=50, penalty_weights=(10.0,))
    with pytest.raises(NoFeasibleDiscError) as info:
        minimize_envelope(sector_hw, (0.0, 1.0), "projective", cfg)
    assert info.value.residual > 0


def test_seed_determinism(annulus_hw):
    cfg = OptimizerConfig(max_degree=1, starts=3, max_evals=300, seed=7)
    a = minimize_envelope(annulus_hw, 0.8 + 0.1j, "affine", cfg)
    b = minimize_envelope(annulus_hw, 0.8 + 0.1j, "affine", cfg)
    assert a.value == b.value and a.trace == b.trace
    assert np.array_equal(a.best_disc.coefficients, b.best_disc.coefficients)


def test_point_seed_depends_on_point_and_seed():
    s = [point_seed(k, z).generate_state(2).tolist() for k, z in ((0, (1, 2)), (0, (1, 2)), (1, (1, 2)), (0, (2, 1)))]
    assert s[0] == s[1] and s[0] != s[2] and s[0] != s[3]


def test_time_budget_marks_unconverged(annulus_hw):
    cfg = OptimizerConfig(max_degree=8, starts=16, time_budget=0.05)
    r = minimize_envelope(annulus_hw, 1.0, "affine", cfg)
    assert not r.converged and r.message
    assert math.isfinite(r.value)


def test_consistency_on_annulus(annulus_hw):
    rep = consistency_check(annulus_hw, 1.0, OptimizerConfig(max_degree=1, starts=2, max_evals=400))
    assert rep.ok
    assert rep.projective_weighted_gap < 1e-2
    assert rep.projective_affine_gap <= 1e-3
