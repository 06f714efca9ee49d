import numpy as np
import pytest

from chlab import forward_scattering as fs
from chlab.errors import NearZeroK
from chlab.potential_model import conserved_shift


def test_vacuum_jost_is_identity(vacuum):
    for k in (1.0, -2.5, 0.3 + 0.2j):
        field = fs.jost_solve(vacuum, k, "left", columns="all")
        np.testing.assert_allclose(field.phi, np.broadcast_to(np.eye(2), field.phi.shape), atol=1e-14)
    a, b = fs.scattering_coefficients(vacuum, 1.3)
    assert abs(a - 1) < 1e-14 and abs(b) < 1e-14
    assert fs.find_eigenvalues(vacuum) == []


def test_near_zero_k_rejected(vacuum):
    with pytest.raises(NearZeroK):
        fs.scattering_coefficients(vacuum, 1e-4)


def test_unimodular_jost(small_sech2):
    phi = fs.jost_solve(small_sech2, 1.0, "left", columns="all").phi
    det = phi[:, 0, 0] * phi[:, 1, 1] - phi[:, 0, 1] * phi[:, 1, 0]
    assert np.max(np.abs(det - 1)) < 1e-6


def test_jost_conjugation_symmetry(small_sech2):
    p = fs.jost_solve(small_sech2, 2.0, "right", columns="all").phi
    m = fs.jost_solve(small_sech2, -2.0, "right", columns="all").phi
    assert np.max(np.abs(p - np.conj(m))) < 1e-8


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_unimodular_scattering(small_sech2, k):
    a, b = fs.scattering_coefficients(small_sech2, k)
    assert abs(abs(a) ** 2 - abs(b) ** 2 - 1) < 1e-6


def test_a_tends_to_one(small_sech2):
    a, _ = fs.scattering_coefficients(small_sech2, 8.0)
    assert abs(abs(a) - 1) <= 1e-2


def test_richardson_estimate_small(small_sech2):
    _, _, err = fs.scattering_coefficients(small_sech2, 1.0, richardson=True)
    assert err < 1e-8


def test_reflection_symmetry_and_bound(small_sech2_data):
    d = small_sech2_data
    order = np.argsort(d.k_grid)
    r = d.r_values[order]
    assert np.max(np.abs(r - np.conj(r[::-1]))) < 1e-6
    assert np.max(np.abs(r)) < 1


def test_small_sech2_frozen(small_sech2_data):
    # frozen from this implementation (L=60, n=2048, K_max=8, nk=1024)
    d = small_sech2_data
    assert len(d.poles) == 1
    assert d.poles[0] == pytest.approx(0.0764220, abs=1e-6)
    assert d.norming[0] == pytest.approx(0.0855756, rel=1e-4)
    assert d.a_half_i == pytest.approx(0.8216343240, abs=1e-9)


def test_one_soliton_recovered(one_soliton):
    poles = fs.find_eigenvalues(one_soliton)
    assert len(poles) == 1 and abs(poles[0] - 0.3) < 1e-4
    a = np.real(fs.a_imag_axis(one_soliton, [poles[0] - 1e-3, poles[0] + 1e-3]))
    assert a[0] * a[1] < 0  # simple root
    c = fs.norming_constants(one_soliton, poles)
    assert abs(c[0] - 1.0) < 1e-2


def test_a_half_matches_shift(one_soliton):
    assert abs(fs.a_at_half_i(one_soliton) * np.exp(conserved_shift(one_soliton) / 2) - 1) < 1e-6
    assert fs.a_at_half_i(one_soliton) == pytest.approx(0.25, abs=1e-6)


def test_reflectionless_trace_formula(one_soliton):
    data = fs.reflection(one_soliton, fs.symmetric_k_grid(6.0, 96))
    data.poles = [0.3]
    assert np.max(np.abs(data.r_values)) < 1e-6
    rep = fs.trace_formula_check(data, one_soliton, kmin=0.1, kmax=6.0)
    assert rep["max_rel_residual"] < 1e-6
