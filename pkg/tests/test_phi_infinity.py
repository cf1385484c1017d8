import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from tripledeck.criterion import far_radius
from tripledeck.phi_infinity import (Method, NearSpectrumError, eigenfunction, eigenfunction_residual,
                                     phi_infinity, phi_infinity_boundary, phi_infinity_derivative_at_zero,
                                     phi_infinity_direct, phi_infinity_g_form)
from tripledeck.profiles import make_profile

NAMES = ["couette", "example1", "example2"]


def test_couette_direct(flat):
    r = phi_infinity_direct(flat, 1 + 1j)
    assert r.method is Method.DIRECT
    assert abs(r.value + 1) < 1e-12
    assert phi_infinity_g_form(flat, 0.3 + 2j).value == -1
    assert phi_infinity_boundary(flat, 3.0).value == -1


@pytest.mark.parametrize("name,mu", [("example1", 1 + 1j), ("example2", -1 + 0.5j), ("example2", 1 + 1j),
                                     ("example1", 2j), ("example2", 3 + 0.01j), ("example1", 1.5 + 1e-3j)])
def test_against_mpmath(name, mu):
    assert abs(phi_infinity(make_profile(name), mu) - oracles.phi_direct(name, mu)) < 1e-9


@pytest.mark.parametrize("name,mu", [("example2", 1 + 1j), ("example1", 2j)])
def test_method_agreement_examples(name, mu):
    p = make_profile(name)
    assert abs(phi_infinity_direct(p, mu).value - phi_infinity_g_form(p, mu).value) < 1e-8


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_method_agreement_grid(name):
    p = make_profile(name)
    worst = 0.0
    for re in np.linspace(-5, 5, 20):
        for im in np.linspace(0.05, 5, 20):
            mu = complex(re, im)
            worst = max(worst, abs(phi_infinity_direct(p, mu).value - phi_infinity_g_form(p, mu).value))
    assert worst <= 1e-8


def test_near_spectrum_refused(ex1):
    with pytest.raises(NearSpectrumError):
        phi_infinity_direct(ex1, 3 + 1e-5j)
    with pytest.raises(NearSpectrumError):
        phi_infinity_g_form(ex1, 3 + 1e-8j)
    with pytest.raises(ValueError):
        phi_infinity_boundary(ex1, 0.0)


def test_far_field_example(ex1):
    mu = 1e4 * np.exp(3j * np.pi / 4)
    assert abs(phi_infinity_direct(ex1, mu).value + 1) < 1e-2


@pytest.mark.parametrize("name", NAMES)
def test_far_field_limit(name):
    p = make_profile(name)
    R = far_radius(p, delta=0.05)
    assert R < 100
    worst = 0.0
    for r in R * np.array([1.0, 1.5, 3.0, 10.0, 100.0]):
        for th in np.linspace(0.005, np.pi - 0.005, 41):
            for s in (1, -1):
                worst = max(worst, abs(phi_infinity(p, r * np.exp(1j * s * th)) + 1))
    assert worst <= 0.05


@pytest.mark.parametrize("name", NAMES)
def test_left_half_plane_sign(name):
    p = make_profile(name)
    re = np.linspace(-5, 0, 20)
    im = np.concatenate([np.linspace(-5, -0.01, 10), np.linspace(0.01, 5, 10)])
    vals = [phi_infinity(p, complex(x, y)) for x in re for y in im]
    assert len(vals) == 400
    assert max(v.real for v in vals) < 0


def test_left_half_plane_limit(ex1):
    assert phi_infinity_direct(ex1, -1e-6 + 1e-6j).value.real == pytest.approx(-0.2, abs=1e-4)
    assert phi_infinity_boundary(ex1, 1e-4).value.real == pytest.approx(-0.2, abs=1e-3)


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_boundary_uniformity(name):
    p = make_profile(name)
    a = np.linspace(1e-3, 16.0, 161)
    edge = np.array([phi_infinity_boundary(p, x).value for x in a])
    sup = [np.max(np.abs([phi_infinity(p, complex(x, b)) for x in a] - edge)) for b in (0.1, 0.05, 0.01)]
    assert sup[0] > sup[1] > sup[2]


def test_boundary_imaginary_part(ex2):
    for a in (0.5, 2.0, 4.0):
        assert phi_infinity_boundary(ex2, a).value.imag == pytest.approx(-np.pi * a * ex2.g(a), abs=1e-14)


@pytest.mark.parametrize("name", ["example1", "example2"])
@given(re=st.floats(-6, 6), im=st.floats(0.02, 6))
def test_conjugate_symmetry(name, re, im):
    p = make_profile(name)
    mu = complex(re, im)
    assert abs(phi_infinity(p, mu.conjugate()) - phi_infinity(p, mu).conjugate()) < 1e-12


def test_eigenfunction_couette(flat):
    ef = eigenfunction(flat, 1j, np.linspace(0, 20, 41))
    np.testing.assert_allclose(ef.phi, -1, atol=1e-10)


@pytest.mark.parametrize("name,mu", [("example2", 1 + 1j), ("example1", 0.5 + 0.5j)])
def test_eigenfunction_wall_and_far(name, mu):
    p = make_profile(name)
    ef = eigenfunction(p, mu, np.concatenate([np.linspace(0, 10, 21), [1e3, 1e5]]))
    assert abs(ef.phi[0] - phi_infinity(p, mu)) < 1e-9
    assert abs(ef.far_field_value + 1) < 1e-4
    assert ef.samples[0][0] == 0.0


def test_eigenfunction_residual(ex1):
    res = eigenfunction_residual(ex1, 0.5 + 0.5j, np.linspace(0.1, 6, 12))
    assert res.max() <= 1e-8


def test_eigenfunction_requires_upper_half_plane(ex1):
    with pytest.raises(ValueError):
        eigenfunction(ex1, 1 - 1j, [0, 1])


def test_wall_derivative(ex2):
    mu = 1 + 1j
    h = 1e-3
    ef = eigenfunction(ex2, mu, [0, h, 2 * h])
    fd = (-3 * ef.phi[0] + 4 * ef.phi[1] - ef.phi[2]) / (2 * h)
    assert abs(phi_infinity_derivative_at_zero(ex2, mu) - fd) < 1e-5
