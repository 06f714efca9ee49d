import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from chlab.errors import ContourCollision, NonMonotoneX, PoleQuery
from chlab.forward_scattering import ScatteringData, symmetric_k_grid
from chlab.harness import peak_positions
from chlab.phase_geometry import pole_partition
from chlab.soliton_rh import (DiscreteSpectrum, asymptotic_approximant, delta_factor, evaluate_M_Lambda,
                              modified_data, reconstruct, sample_solution, solve_residue_system,
                              symmetry_defect, t_factor)

ONE = DiscreteSpectrum((0.3,), (1.0,))
TWO = DiscreteSpectrum((0.2, 0.35), (1.0, 1.0))


def traveling_wave(c):
    """Independent oracle: phi = A - s^2, s = sqrt(A)(1 - e^-z), dx/dz = 2 sqrt(2+s^2)/(sqrt(A)+s), A = c-2."""
    A = c - 2
    z = np.linspace(0, 120, 400001)
    s = np.sqrt(A) * (1 - np.exp(-z))
    xz = cumulative_trapezoid(2 * np.sqrt(2 + s * s) / (np.sqrt(A) + s), z, initial=0)
    spl = CubicSpline(xz, A - s * s)
    return lambda x: spl(np.abs(x))


def test_spectrum_invariants():
    d = DiscreteSpectrum((0.35, 0.2), (2.0, 1.0))
    assert d.poles == (0.2, 0.35) and d.constants == (1.0, 2.0)
    with pytest.raises(ValueError):
        DiscreteSpectrum((0.6,), (1.0,))
    with pytest.raises(ValueError):
        DiscreteSpectrum((0.2, 0.2), (1.0, 1.0))
    with pytest.raises(ValueError):
        DiscreteSpectrum((0.2,), (0.0,))


def test_delta_trivial_cases(small_sech2_data):
    assert delta_factor(0.3 + 0.2j, -1.0, small_sech2_data) == 1
    k = symmetric_k_grid(8.0, 256)
    assert delta_factor(0.5j, 3.0, (k, np.zeros(k.size))) == 1


def test_delta_constant_r_closed_form():
    K = 8.0
    k = symmetric_k_grid(K, 1024)
    r = 0.5 * np.ones(k.size)
    v1 = np.log(1 - 0.25) / (2 * np.pi)
    exact = np.exp(-1j * v1 * (np.log(K - 0.5j) - np.log(-K - 0.5j)))
    assert abs(delta_factor(0.5j, 3.0, (k, r)) - exact) < 1e-8


def test_delta_contour_collision(small_sech2_data):
    with pytest.raises(ContourCollision):
        delta_factor(1.0 + 1e-4j, 3.0, small_sech2_data)


def test_t_factor_examples():
    k = symmetric_k_grid(8.0, 256)
    zero_r = (k, np.zeros(k.size))
    T = t_factor(0.7j, -1.0, ONE, pole_partition(ONE.poles, -1.0), zero_r)
    assert T.value == 1 and T.J0 == 1 and T.J1 == 0
    part = pole_partition(ONE.poles, 5.0)
    assert part.delta_plus == (0,)
    T = t_factor(0.7j, 5.0, ONE, part, zero_r)
    assert T.value_at_half_i == pytest.approx(4.0, abs=1e-14)
    with pytest.raises(PoleQuery):
        t_factor(0.3j, 5.0, ONE, part, zero_r)


def test_t_factor_reflection_symmetry(small_sech2_data):
    spec = DiscreteSpectrum.from_scattering(small_sech2_data)
    part = pole_partition(spec.poles, 3.0)
    rng = np.random.default_rng(1)
    ks = rng.uniform(-4, 4, 200) + 1j * rng.uniform(0.1, 3, 200) * rng.choice([-1, 1], 200)
    for k in ks:
        if abs(k - 1j * spec.poles[0]) < 0.05 or abs(k + 1j * spec.poles[0]) < 0.05:
            continue
        T = t_factor(k, 3.0, spec, part, small_sech2_data).value
        Tc = t_factor(np.conj(k), 3.0, spec, part, small_sech2_data).value
        assert abs(np.conj(Tc) * T - 1) < 1e-10
    big = t_factor(1e3j, 3.0, spec, part, small_sech2_data).value
    assert abs(abs(big) - 1) < 1e-3


def test_modified_data_conventions(small_sech2_data):
    spec = DiscreteSpectrum.from_scattering(small_sech2_data)
    # no passed solitons and L(xi) empty: convention-independent, c_tilde = c
    m = modified_data(spec, -1.0, small_sech2_data)
    assert m.c_tilde == spec.constants
    # reflectionless and Delta_1^+ empty
    m = modified_data(TWO, 1.0, None)
    assert m.c_tilde == TWO.constants
    # paper convention: |c_tilde/c| = |delta(i kappa)|
    m = modified_data(spec, 3.0, small_sech2_data, delta_power=1, include_blaschke=False)
    d = delta_factor(1j * spec.poles[0], 3.0, small_sech2_data)
    assert abs(m.c_tilde[0] / spec.constants[0]) == pytest.approx(abs(d), rel=1e-12)
    # delta depends on |r| only and is real on the imaginary axis
    flipped = ScatteringData(K_max=8.0, k_grid=small_sech2_data.k_grid, r_values=np.conj(small_sech2_data.r_values))
    dc = delta_factor(1j * spec.poles[0], 3.0, flipped)
    assert abs(dc - np.conj(d)) < 1e-14 and abs(d.imag) < 1e-14


def test_modified_constants_reproduce_two_soliton():
    # on the faster soliton's ray the model one-soliton must equal the exact two-soliton
    xi = 2.0 / (1 - 4 * 0.35**2)
    t = 60.0
    mod = modified_data(TWO, xi, None)
    assert mod.partition.delta_plus == (0,) and mod.partition.lambda_set == (1,)
    model = mod.model()
    y = xi * t + np.linspace(-15, 15, 301)
    u_exact, x_exact = reconstruct(TWO, y, t)
    u_model, x_model = reconstruct(model, y, t)
    assert np.max(np.abs(u_exact - u_model)) < 1e-7
    assert np.max(np.abs(x_exact - x_model)) < 1e-7
    paper = modified_data(TWO, xi, None, delta_power=1, include_blaschke=False).model()
    u_paper, _ = reconstruct(paper, y, t)
    assert np.max(np.abs(u_exact - u_paper)) > 1e-2


def test_empty_data():
    d = DiscreteSpectrum()
    c = solve_residue_system(d, [0.0, 1.0], 3.0)
    assert c.z.shape == (2, 0)
    mu, dmu = evaluate_M_Lambda(c, d, 0.3 + 0.1j)
    np.testing.assert_array_equal(mu, np.ones((2, 2)))
    np.testing.assert_array_equal(dmu, np.zeros((2, 2)))
    u, x = reconstruct(d, np.array([-1.0, 2.0]), 5.0)
    np.testing.assert_array_equal(u, 0)
    np.testing.assert_array_equal(x, [-1.0, 2.0])
    sol = sample_solution(d, 10.0, (-5, 5), 101)
    assert np.all(sol.u_on_x == 0)


def test_residue_condition_holds():
    y = np.array([-3.0, 0.0, 0.7, 5.0])
    t = 1.3
    c = solve_residue_system(TWO, y, t)
    for n, kap in enumerate(TWO.poles):
        kn = 1j * kap
        C = 1j * TWO.constants[n] * np.exp(2 * kap * (y - 2 / (1 - 4 * kap**2) * t))
        eps = 1e-6
        # symmetric difference removes the regular part to O(eps^2)
        res = 0.5 * eps * (evaluate_M_Lambda(c, TWO, kn + eps)[0][:, 1] - evaluate_M_Lambda(c, TWO, kn - eps)[0][:, 1])
        mu1_n = 0.5 * (evaluate_M_Lambda(c, TWO, kn + eps)[0][:, 0] + evaluate_M_Lambda(c, TWO, kn - eps)[0][:, 0])
        np.testing.assert_allclose(res, C * mu1_n, rtol=1e-8)


def test_symmetry_and_normalization():
    rng = np.random.default_rng(0)
    y = rng.uniform(-30, 30, 50)
    c = solve_residue_system(TWO, y, 4.0)
    for k in rng.uniform(-3, 3, 20) + 1j * rng.uniform(-3, 3, 20):
        assert symmetry_defect(c, TWO, k) < 1e-10
    mu, _ = evaluate_M_Lambda(c, TWO, 1e6j)
    assert np.max(np.abs(mu - 1)) < 1e-5
    with pytest.raises(PoleQuery):
        evaluate_M_Lambda(c, TWO, 0.2j)


def test_coefficients_decay_off_ray():
    # one pole on the ray xi = -1: |z| ~ exp(-2 rho0 t)
    rho0 = pole_partition(ONE.poles, -1.0).rho0
    ts = np.array([5.0, 10.0, 20.0, 40.0])
    z = [abs(solve_residue_system(ONE, [-t], t).z[0, 0]) for t in ts]
    slope = np.polyfit(ts, np.log(z), 1)[0]
    assert slope == pytest.approx(-2 * rho0, rel=0.1)


def test_traveling_wave_invariance():
    y = np.linspace(-30, 30, 601)
    u0, x0 = reconstruct(ONE, y, 2.0)
    u1, x1 = reconstruct(ONE, y + 3.125 * 7.5, 9.5)
    assert np.max(np.abs(u0 - u1)) < 1e-8
    assert np.max(u0) == pytest.approx(np.max(u1), abs=1e-8)


def test_one_soliton_matches_traveling_wave():
    tw = traveling_wave(3.125)
    (xp, up), = peak_positions(ONE, 0.0)
    assert up == pytest.approx(1.125, abs=1e-9)
    xs = xp + np.linspace(-30, 30, 1201)
    sol = sample_solution(ONE, 0.0, (-60, 60), 2001, x_grid=xs)
    assert np.max(np.abs(sol.u_on_x - tw(xs - xp))) < 1e-6


def test_x_t_equals_u():
    # along particle paths y fixed in the Lagrangian sense, x_t(y, t) = u
    y = np.linspace(-10, 10, 41)
    h = 1e-4
    u, _ = reconstruct(TWO, y, 1.0)
    _, xp = reconstruct(TWO, y, 1.0 + h)
    _, xm = reconstruct(TWO, y, 1.0 - h)
    assert np.max(np.abs((xp - xm) / (2 * h) - u)) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(-60, 60), st.floats(0, 50))
def test_reconstruction_is_real(y, t):
    # reconstruct raises SymmetryViolation when the imaginary part exceeds 1e-10
    u, x = reconstruct(TWO, [y], t)
    assert np.isfinite(u[0]) and np.isfinite(x[0])


def test_sample_solution_peak_drift():
    p10 = peak_positions(ONE, 10.0)[0][0]
    p20 = peak_positions(ONE, 20.0)[0][0]
    assert (p20 - p10) / 10 == pytest.approx(3.125, rel=1e-2)
    sol = sample_solution(ONE, 10.0, (31.25 - 40, 31.25 + 40))
    assert np.all(np.diff(sol.x_of_y) > 0)
    assert max(sol.u_of_y[0], sol.u_of_y[-1]) < 1e-8
    assert int(np.sum((sol.u_of_y[1:-1] > sol.u_of_y[:-2]) & (sol.u_of_y[1:-1] > sol.u_of_y[2:]))) == 1


def test_pchip_and_newton_resampling_agree():
    a = sample_solution(ONE, 0.0, (-40, 40), 4001, resample="newton")
    b = sample_solution(ONE, 0.0, (-40, 40), 4001, resample="pchip")
    assert np.max(np.abs(a.u_on_x - b.u_on_x)) < 1e-4


def test_approximant_on_and_off_velocity():
    data = DiscreteSpectrum((0.2, 0.35), (1.0, 1.0))
    on = asymptotic_approximant(data, 2.0 / (1 - 4 * 0.2**2), 40.0)
    assert np.max(on.u_of_y) == pytest.approx(2 / (1 - 0.16) - 2, abs=1e-3)
    off = asymptotic_approximant(data, -3.0, 40.0)
    assert np.all(off.u_of_y == 0)
    assert asymptotic_approximant(DiscreteSpectrum(), 3.0, 10.0).u_of_y.max() == 0
