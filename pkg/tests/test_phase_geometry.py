import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chlab.errors import PoleOfPhase, PreconditionError
from chlab.phase_geometry import (OPEN_COUNTS, Region, admissible_angle, classify_region, contour_intervals,
                                  im_theta, phase_geometry, pole_partition, sector_sign_check, soliton_velocity,
                                  stationary_points, stationary_points_scan, theta, theta_prime)


def test_theta_value():
    assert theta(1.0, 0.0) == pytest.approx(-0.4, abs=1e-15)


def test_theta_pole_guard():
    with pytest.raises(PoleOfPhase):
        theta(0.5j, 1.0)


def test_soliton_ray():
    assert soliton_velocity(0.3) == pytest.approx(3.125)
    assert abs(im_theta(0.3j, 3.125)) < 1e-14


def test_im_theta_example():
    assert im_theta(0.4j, -1.0) == pytest.approx(0.4 * (-1 - 1 / 0.18), abs=1e-12)
    assert im_theta(0.4j, -1.0) == pytest.approx(-2.62222, abs=1e-5)
    assert np.all(im_theta(np.linspace(-3, 3, 7) + 0j, 0.7) == 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 5))
def test_theta_odd_and_closed_form(re, im, xi):
    k = complex(re, im)
    if abs(2 * k * k + 0.5) < 1e-3:
        return
    assert abs(theta(-k, xi) + theta(k, xi)) <= 1e-12 * (1 + abs(theta(k, xi)))
    assert abs(im_theta(k, xi) - np.imag(theta(k, xi))) <= 1e-12 * (1 + abs(theta(k, xi)))


@pytest.mark.parametrize("xi, expected", [
    (1.0, [np.sqrt((-2 + np.sqrt(5)) / 4), -np.sqrt((-2 + np.sqrt(5)) / 4)]),
    (-0.125, sorted([s * np.sqrt(r / 2) for r in ((7 + np.sqrt(32)) / 2, (7 - np.sqrt(32)) / 2) for s in (1, -1)],
                    reverse=True)),
])
def test_stationary_point_examples(xi, expected):
    np.testing.assert_allclose(stationary_points(xi), expected, atol=1e-12)


def test_stationary_frozen_values():
    np.testing.assert_allclose(stationary_points(1.0), [0.2429, -0.2429], atol=1e-4)
    np.testing.assert_allclose(stationary_points(-0.125), [1.7788, 0.5795, -0.5795, -1.7788], atol=1e-4)


def test_tangency_and_merge():
    np.testing.assert_allclose(stationary_points(-0.25), [np.sqrt(3) / 2, -np.sqrt(3) / 2], atol=1e-8)
    assert stationary_points(2.0) == [0.0]


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 6))
def test_stationary_points_vs_scan(xi):
    if min(abs(xi + 0.25), abs(xi), abs(xi - 2)) < 1e-3:
        return
    # the scan covers [-10, 10]; near xi = 0- the outer pair escapes to infinity
    fast = [k for k in stationary_points(xi) if abs(k) < 9.9]
    scan = [k for k in stationary_points_scan(xi, samples=10**5) if abs(k) < 9.9]
    assert len(fast) == len(scan)
    np.testing.assert_allclose(fast, scan, atol=1e-9)
    assert all(abs(theta_prime(k, xi)) < 1e-10 for k in fast)


@pytest.mark.parametrize("xi, region", [(-0.5, Region.LeftNoPoints), (1.0, Region.TwoPoints),
                                        (-0.125, Region.FourPoints), (3.0, Region.RightNoPoints),
                                        (-0.25, Region.BoundaryMinusQuarter), (0.0, Region.BoundaryZero),
                                        (2.0, Region.BoundaryTwo)])
def test_classify(xi, region):
    assert classify_region(xi) == region
    if region in OPEN_COUNTS:
        assert len(stationary_points(xi)) == OPEN_COUNTS[region]


def test_admissible_angle():
    thr = -1 + np.sqrt(1 + 2 / 0.3)
    assert thr == pytest.approx(1.7689, abs=1e-4)
    assert admissible_angle(-0.3) == pytest.approx(min(np.pi / 8, np.arccos(thr / 2) / 2), abs=1e-12)
    assert admissible_angle(-1e6) == pytest.approx(np.pi / 8)
    with pytest.raises(PreconditionError):
        admissible_angle(1.0)


def test_admissible_angle_right_region():
    # for xi > 2 only a lower bound on 2cos(phi) constrains the sign of Im theta
    phi = admissible_angle(3.0)
    assert phi == pytest.approx(np.pi / 8)
    assert 2 * np.cos(phi) > 1 - np.sqrt(1 / 3)


def test_sector_sign_checks():
    left = sector_sign_check(-1.0, admissible_angle(-1.0))
    right = sector_sign_check(3.0, admissible_angle(3.0))
    assert left.constant < 0 and right.constant > 0
    with pytest.raises(PreconditionError):
        sector_sign_check(1.0, 0.1)


def test_pole_partition_examples():
    p = pole_partition([0.3], 3.125)
    assert p.lambda_set == (0,) and p.delta_plus == () and p.delta_minus == () and p.rho0 == float("inf")
    p = pole_partition([0.3], -1.0, delta=0.1)
    assert p.delta_minus == (0,)
    assert p.rho0 == pytest.approx(1.2375, abs=1e-12)
    p = pole_partition([0.1, 0.3], -1.0, delta=100.0)
    assert p.lambda_set == (0, 1) and p.rho0 == float("inf")


def test_contour_intervals():
    assert contour_intervals(-1.0) == []
    assert contour_intervals(3.0) == [(-np.inf, np.inf)]
    k0 = stationary_points(1.0)[0]
    assert contour_intervals(1.0) == [(-np.inf, -k0), (k0, np.inf)]
    pts = stationary_points(-0.125)
    assert contour_intervals(-0.125) == [(pts[3], pts[2]), (pts[1], pts[0])]


def test_phase_geometry_bundle():
    g = phase_geometry(-1.0, [0.3])
    assert g.region == Region.LeftNoPoints and g.rho0 == pytest.approx(1.2375)
    assert np.isnan(phase_geometry(1.0).phi)
