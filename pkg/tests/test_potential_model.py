import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from chlab.errors import GridError, InsufficientDecay, MomentumNotPositive
from chlab.potential_model import (SpatialGrid, build_profile, conserved_shift, sech2_profile, y_of_x,
                                   zero_profile)


def test_zero_profile_is_trivial():
    p = zero_profile()
    assert np.all(p.m == 0) and np.all(p.sqrt_weight == 1)
    smap = y_of_x(p)
    assert smap.total_shift == 0
    np.testing.assert_array_equal(smap.y, smap.x)


def test_small_sech2_accepted(small_sech2):
    x = small_sech2.grid.nodes
    sech = 1 / np.cosh(x / 4)
    # u_xx of A sech^2(x/w) in closed form
    uxx = 0.1 / 16 * (4 * sech**2 - 6 * sech**4)
    np.testing.assert_allclose(small_sech2.m, 0.1 * sech**2 - uxx, atol=1e-12)
    assert small_sech2.m.min() + 1 > 0


def test_negative_momentum_rejected():
    # m + 1 = 1 - 2 - (-2)(4 - 6) = -5 at x = 0
    with pytest.raises(MomentumNotPositive):
        sech2_profile(-2.0, 1.0)


def test_slow_decay_rejected():
    with pytest.raises(InsufficientDecay):
        sech2_profile(0.1, 20.0)


def test_grid_validation():
    with pytest.raises(GridError):
        SpatialGrid.uniform(10.0, 15)
    with pytest.raises(GridError):
        SpatialGrid(nodes=np.r_[np.arange(15.0), 20.0], h=1.0)


def test_fd4_matches_spectral(small_sech2):
    p = build_profile(small_sech2.u0, small_sech2.grid, method="fd4")
    assert np.max(np.abs(p.m - small_sech2.m)) < 1e-6


def test_total_shift_of_narrow_bump():
    # choose u so that sqrt(m+1) - 1 is a unit-mass Gaussian g: m = (1+g)^2 - 1,
    # u = (1 - d^2)^{-1} m solved spectrally
    grid = SpatialGrid.uniform(60.0, 2048)
    x = grid.nodes
    g = np.exp(-x**2 / 2) / np.sqrt(2 * np.pi)
    m = (1 + g) ** 2 - 1
    kf = 2 * np.pi * np.fft.fftfreq(grid.n, grid.h)
    u = np.real(np.fft.ifft(np.fft.fft(m) / (1 + kf**2)))
    p = build_profile(u, grid, delta_decay=1e-6)
    exact, _ = quad(lambda s: np.exp(-s * s / 2) / np.sqrt(2 * np.pi), -60, 60)
    assert abs(conserved_shift(p) - exact) < 1e-8


def test_one_soliton_shift(one_soliton):
    assert abs(conserved_shift(one_soliton) - 2 * np.log(4)) < 1e-6


def test_shift_translation_invariant():
    a = conserved_shift(sech2_profile(0.1, 4.0))
    b = conserved_shift(sech2_profile(0.1, 4.0, x0=3.7))
    assert abs(a - b) < 1e-8


def test_y_monotone_and_trapezoid_agrees(small_sech2):
    s = y_of_x(small_sech2)
    t = y_of_x(small_sech2, quadrature="trapezoid")
    assert np.all(np.diff(s.y) > 0)
    # trapezoid is O(h^2) with h ~ 0.06
    assert np.max(np.abs(s.y - t.y)) < 1e-5
    assert abs(s.y[-1] - s.x[-1]) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.3, 0.5), st.floats(2.0, 6.0), st.floats(-80.0, 80.0))
def test_scale_map_roundtrip(A, w, q):
    if abs(A) < 1e-3:
        A = 1e-3
    p = sech2_profile(A, w)
    smap = y_of_x(p)
    assert np.all(np.diff(smap.y) > 0)
    # two independent PCHIP interpolants are inverse only up to O(h^3)
    assert abs(smap.x_of_y(smap.y_of_x(q)) - q) < 1e-6
