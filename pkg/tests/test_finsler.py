"""Homogeneity gates, Christoffel contraction, Finsler identities."""

import numpy as np
import pytest

from lagmech.dsl import bind_scalar, parse
from lagmech.errors import FinslerModeError
from lagmech.finsler import (
    christoffel_at,
    finsler_identities,
    homogeneity_report,
    require_finsler_mode,
)
from lagmech.geometry import canonical_connection_at, canonical_spray_at
from lagmech.mechanics import MechanicalSystem, evolution_connection_at
from lagmech.phase import PhasePoint, VerticalField
from lagmech.systems import instantiate, standard_samples


def test_homogeneity_quartic_root(sys_c, samples_c):
    rep = homogeneity_report(sys_c, samples_c[:25])
    assert rep.accepted
    assert rep.lagrangian_residual <= 1e-10
    assert rep.metric_residual <= 1e-10  # g is 0-homogeneous
    assert rep.force_residual == 0.0


def test_homogeneity_quadratic_forms(sys_b, samples_b):
    rep = homogeneity_report(sys_b, samples_b[:25])
    assert rep.accepted
    assert rep.lagrangian_residual <= 1e-10


def test_homogeneity_defect_of_inhomogeneous_term():
    # L = y^2 + y: Euler defect (dL/dy) y - 2L = -y, magnitude 1 at y=1
    L = bind_scalar(parse("y1^2 + y1", 1), 1)
    sys_ = MechanicalSystem(L, VerticalField.zero(1), 1)
    rep = homogeneity_report(sys_, [PhasePoint((0.0,), (1.0,))])
    assert not rep.accepted
    assert rep.lagrangian_residual == pytest.approx(1.0, abs=1e-14)


def test_homogeneity_oscillator_not_finsler(sys_a, samples_a):
    rep = homogeneity_report(sys_a, samples_a[:20])
    assert not rep.accepted
    with pytest.raises(FinslerModeError):
        require_finsler_mode(sys_a, PhasePoint((1.0,), (2.0,)))


def test_liouville_force_is_one_homogeneous(sys_e_finsler, samples_c):
    # (dV/dy) y = e y for V = e y: degree-1 field, not degree 0
    rep = homogeneity_report(sys_e_finsler, samples_c[:15])
    worst = max(np.linalg.norm(np.array([float(v) for v in p.y]) * -1.0, ord=np.inf)
                for p in samples_c[:15])
    assert rep.force_residual == pytest.approx(worst, rel=1e-12)
    assert rep.force_residual > 0.1


def test_christoffel_x_independent_zero(sys_c, samples_c):
    for p in samples_c[:6]:
        assert np.abs(christoffel_at(sys_c, p)).max() == 0.0


def test_christoffel_sys_b_value(sys_b):
    # gamma^1_11 = x1 / (1 + x1^2), equal to 0.5 at x1 = 1
    gamma = christoffel_at(sys_b, PhasePoint((1.0, 0.0), (1.0, 1.0)))
    assert gamma[0, 0, 0] == pytest.approx(0.5, rel=1e-12)
    assert np.abs(gamma[1]).max() <= 1e-14


def test_christoffel_contraction_identity(sys_b, samples_b):
    for p in samples_b[:20]:
        gamma = christoffel_at(sys_b, p)
        yv = np.array([float(v) for v in p.y])
        lhs = gamma.dot(yv).dot(yv)
        rhs = 2.0 * canonical_spray_at(sys_b.L, p)
        assert np.abs(lhs - rhs).max() <= 1e-8 * (1.0 + np.abs(rhs).max())


def test_identities_free_finsler(sys_c, samples_c):
    rep = finsler_identities(sys_c, samples_c[:15])
    assert rep.points_tested == 15
    assert rep.energy_residual <= 1e-10
    assert rep.spray_homogeneity_residual <= 1e-8
    assert rep.energy_slope_residual <= 1e-8
    assert rep.christoffel_residual <= 1e-8


def test_identities_sys_d(sys_d, samples_c):
    rep = finsler_identities(sys_d, samples_c[:15])
    assert rep.energy_slope_residual <= 1e-8
    # the energy slope itself also vanishes for the zero-homogeneous force
    from lagmech.mechanics import horizontal_dE

    for p in samples_c[:8]:
        assert np.abs(horizontal_dE(sys_d, p)).max() <= 1e-8


def test_identities_reject_inhomogeneous(sys_a):
    # the Euler defect of y^2 - x^2 is 2 x^2, so any point off x = 0 fails
    pts = [PhasePoint((0.5 + 0.1 * k,), (1.0 + 0.2 * k,)) for k in range(5)]
    rep = finsler_identities(sys_a, pts)
    assert rep.points_tested == 0
    assert len(rep.failures) == 5


def test_geodesic_coincidence_pointwise(sys_d, samples_c):
    # zero-homogeneous force: the force term drops out of the horizontal
    # SODE, so N y = N0 y at every point
    for p in samples_c[:10]:
        n = evolution_connection_at(sys_d, p)
        n0 = canonical_connection_at(sys_d.L, p)
        yv = np.array([float(v) for v in p.y])
        assert np.abs(n.dot(yv) - n0.dot(yv)).max() <= 1e-8


def test_euclid_any_dimension_is_finsler():
    sys_ = instantiate("EUCLID", {"n": 3})
    pts = standard_samples("EUCLID", {"n": 3}, count=10)
    rep = homogeneity_report(sys_, pts)
    assert rep.accepted
