import math

import numpy as np
import pytest

from gapedge import charges
from gapedge.charges import ChargeDistribution, PointCharge, RegularCharge
from gapedge.errors import InvalidInputError, SingularEvaluationError


def two_point_dipole(a=1.0, nu=0.3):
    return ChargeDistribution(
        points=(PointCharge((a, 0.0), nu), PointCharge((-a, 0.0), -nu))
    )


def quadrupole(a=1.0, nu=0.3):
    return ChargeDistribution(
        points=(
            PointCharge((a, 0.0), nu),
            PointCharge((-a, 0.0), nu),
            PointCharge((0.0, a), -nu),
            PointCharge((0.0, -a), -nu),
        )
    )


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_good_dipole():
    assert charges.validate(two_point_dipole()).ok


def test_validate_critical_coupling():
    dist = ChargeDistribution(points=(PointCharge((0.0, 0.0), 0.5),))
    report = charges.validate(dist)
    assert not report.ok
    assert any("critical coupling" in v for v in report.violations)


def test_validate_coincident_positions():
    dist = ChargeDistribution(
        points=(PointCharge((1.0, 0.0), 0.3), PointCharge((1.0, 0.0), -0.2))
    )
    report = charges.validate(dist)
    assert any("coincident" in v for v in report.violations)


def test_empty_distribution_rejected():
    with pytest.raises(InvalidInputError):
        ChargeDistribution()


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def test_moments_two_point_dipole():
    a, nu = 1.5, 0.3
    mom = charges.moments(two_point_dipole(a, nu))
    assert mom.total_charge == 0.0
    assert mom.dipole == (2.0 * a * nu, 0.0)
    assert mom.gamma == 2.0 * a


def test_moments_single_gaussian():
    dist = ChargeDistribution(regulars=(RegularCharge((0.0, 0.0, 0.0), 1.0, 0.5),))
    mom = charges.moments(dist)
    assert mom.total_charge == 1.0
    assert mom.dipole == (0.0, 0.0)
    assert mom.gamma == 0.0


def test_moments_quadrupole_cancels():
    mom = charges.moments(quadrupole())
    assert mom.total_charge == 0.0
    assert mom.dipole == (0.0, 0.0)


def test_moments_additive_over_unions():
    rng = np.random.default_rng(12)
    pts1 = tuple(PointCharge(tuple(rng.normal(size=2)), float(rng.uniform(0.05, 0.45))) for _ in range(3))
    pts2 = tuple(PointCharge(tuple(rng.normal(size=2)), float(-rng.uniform(0.05, 0.45))) for _ in range(2))
    m1 = charges.moments(ChargeDistribution(points=pts1))
    m2 = charges.moments(ChargeDistribution(points=pts2))
    m = charges.moments(ChargeDistribution(points=pts1 + pts2))
    assert abs(m.total_charge - (m1.total_charge + m2.total_charge)) < 1e-14
    np.testing.assert_allclose(m.dipole, np.add(m1.dipole, m2.dipole), atol=1e-14)


def test_rotation_covariance():
    rng = np.random.default_rng(4)
    pts = tuple(PointCharge(tuple(rng.normal(size=2)), float(rng.uniform(-0.45, 0.45) or 0.1)) for _ in range(4))
    dist = ChargeDistribution(points=pts)
    mom = charges.moments(dist)
    phi = 0.7
    c, s = math.cos(phi), math.sin(phi)
    rot = tuple(
        PointCharge((c * p.position[0] - s * p.position[1], s * p.position[0] + c * p.position[1]), p.coupling)
        for p in pts
    )
    mom_r = charges.moments(ChargeDistribution(points=rot))
    want = (c * mom.dipole[0] - s * mom.dipole[1], s * mom.dipole[0] + c * mom.dipole[1])
    np.testing.assert_allclose(mom_r.dipole, want, atol=1e-12)
    assert abs(mom_r.total_charge - mom.total_charge) < 1e-12
    assert abs(mom_r.gamma - mom.gamma) < 1e-12


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------


def test_potential_symmetry_zero():
    dist = two_point_dipole(a=1.0, nu=0.3)
    assert abs(charges.potential(dist, (0.0, 1.0))) < 1e-15


def test_potential_single_point():
    dist = ChargeDistribution(points=(PointCharge((0.0, 0.0), 0.3),))
    assert abs(charges.potential(dist, (2.0, 0.0)) - 0.15) < 1e-15


def test_potential_gaussian_far_field():
    w = 0.25
    dist = ChargeDistribution(regulars=(RegularCharge((0.0, 0.0, 0.0), 1.3, w),))
    x = (20.0 * w, 0.0)
    want = 1.3 / (20.0 * w)
    assert abs(charges.potential(dist, x) - want) <= 1e-10 * abs(want)


def test_potential_additivity():
    rng = np.random.default_rng(8)
    pts = tuple(PointCharge(tuple(rng.normal(size=2)), 0.2) for _ in range(3))
    regs = tuple(RegularCharge(tuple(rng.normal(size=3)), 0.7, 0.4) for _ in range(2))
    d1 = ChargeDistribution(points=pts)
    d2 = ChargeDistribution(regulars=regs)
    both = ChargeDistribution(points=pts, regulars=regs)
    x = (0.3, -1.2)
    assert abs(charges.potential(both, x) - charges.potential(d1, x) - charges.potential(d2, x)) < 1e-13


def test_potential_singularity_error():
    dist = ChargeDistribution(points=(PointCharge((1.0, 0.0), 0.3),))
    with pytest.raises(SingularEvaluationError):
        charges.potential(dist, (1.0, 0.0))


def test_gaussian_center_value():
    w = 0.5
    dist = ChargeDistribution(regulars=(RegularCharge((0.0, 0.0, 0.0), 2.0, w),))
    want = 2.0 * math.sqrt(2.0 / math.pi) / w
    assert abs(charges.potential(dist, (0.0, 0.0)) - want) < 1e-13


# ---------------------------------------------------------------------------
# rest potential
# ---------------------------------------------------------------------------


def test_rest_potential_next_multipole_order():
    a, nu = 0.5, 0.3
    dist = two_point_dipole(a, nu)
    for t in (10.0 * a, 100.0 * a, 1000.0 * a):
        r = charges.rest_potential(dist, (t, 0.0))
        # after dipole subtraction the on-axis decay is t^-4, so |R| t^3 -> 0
        assert abs(r) * t**3 < 8.0 * nu * a**3


def test_rest_potential_inside_ball_no_regulars():
    dist = two_point_dipole(a=1.0, nu=0.3)
    assert charges.rest_potential(dist, (0.5, 0.3)) == 0.0


def test_rest_potential_reduces_to_regular():
    dist = ChargeDistribution(regulars=(RegularCharge((0.0, 0.0, 0.0), 1.0, 0.7),))
    x = (1.3, -0.4)
    # no point charges and zero dipole: R == V_reg everywhere
    assert charges.rest_potential(dist, x) == charges.potential(dist, x)


def test_far_field_bounds_for_neutral():
    dist = two_point_dipole(a=0.7, nu=0.4)
    mom = charges.moments(dist)
    for t in (8.0, 32.0, 128.0):
        for direction in ((1.0, 0.0), (0.6, 0.8)):
            x = (t * direction[0], t * direction[1])
            v = charges.potential(dist, x)
            assert abs(v) <= 2.0 * abs(2.0 * 0.7 * 0.4) / t**2
            tail = (mom.dipole[0] * x[0] + mom.dipole[1] * x[1]) / t**3
            assert abs(v - tail) <= 4.0 * 0.4 * 0.7**3 / t**3


# ---------------------------------------------------------------------------
# hypothesis diagnostics
# ---------------------------------------------------------------------------


def test_diagnostics_two_point_dipole():
    diag = charges.hypothesis_diagnostics(two_point_dipole())
    assert diag.charge_vanishes
    assert diag.dipole_nonzero
    assert diag.abs_converged and diag.square_converged
    assert diag.applicable
    assert diag.abs_integral > 0 and diag.square_integral > 0
    assert diag.rearr_abs_integral > 0


def test_diagnostics_single_charge_flagged():
    dist = ChargeDistribution(points=(PointCharge((0.2, 0.0), 0.3),))
    diag = charges.hypothesis_diagnostics(dist)
    assert not diag.charge_vanishes
    assert not diag.applicable
    # R ~ Q/|x| at infinity: the log-weighted integral cannot converge
    assert not diag.abs_converged


def test_diagnostics_quadrupole_flagged():
    diag = charges.hypothesis_diagnostics(quadrupole())
    assert diag.charge_vanishes
    assert not diag.dipole_nonzero
    assert not diag.applicable
