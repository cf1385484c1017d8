import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripledeck.couette import airy, principal_power
from tripledeck.finitek import (BvpDomainError, BvpResolutionError, ConvergenceStudy, SolverConfig,
                                boundary_layer, decay_root, default_z_max, growth_rate_floor, phi_k,
                                solve_os_mu, track_mu_k)
from tripledeck.phi_infinity import eigenfunction, phi_infinity, phi_infinity_derivative_at_zero
from tripledeck.rootfind import count_zeros


@pytest.fixture(scope="module")
def sol_1e3(ex2, mu_inf):
    return solve_os_mu(ex2, mu_inf + 0.2j, 1e3)


def test_residual_triple(sol_1e3):
    assert len(sol_1e3.bc_residuals) == 3
    assert max(sol_1e3.bc_residuals) <= 1e-8
    assert sol_1e3.interior_residual <= 1e-8
    assert sol_1e3.truncation_estimate <= 1e-6


def test_boundary_conditions_by_evaluation(ex2, sol_1e3, mu_inf):
    mu, k, Z = mu_inf + 0.2j, 1e3, sol_1e3.grid[-1]
    assert abs(sol_1e3(0.0, 1)[0] - 1 / k) < 1e-8
    assert abs(sol_1e3(Z, 1)[0]) < 1e-8
    assert abs(sol_1e3(Z)[0] - (-1 + (mu - ex2.a_infinity) / k)) < 1e-8


def test_interior_equation_off_grid(ex2, sol_1e3, mu_inf):
    mu, k = mu_inf + 0.2j, 1e3
    z = np.linspace(0.013, 25.0, 157)
    lhs = sol_1e3(z, 3) / (1j * k) + (mu - ex2.eval(z)) * sol_1e3(z, 1) + ex2.eval(z, 1) * sol_1e3(z)
    rhs = -1 + (mu - ex2.U(z) + z * ex2.U(z, 1)) / k
    scale = np.abs(sol_1e3(z, 3) / k) + np.abs(mu - ex2.eval(z)) * np.abs(sol_1e3(z, 1)) + 1
    assert np.max(np.abs(lhs - rhs) / scale) < 1e-5


def test_domain_errors(ex2):
    with pytest.raises(BvpDomainError):
        solve_os_mu(ex2, 1 + 1j, 5.0)
    with pytest.raises(BvpDomainError):
        solve_os_mu(ex2, 1 + 1e-5j, 100.0)


def test_resolution_error(ex2, mu_inf):
    with pytest.raises(BvpResolutionError):
        phi_k(ex2, mu_inf, 1e4, SolverConfig(n_grid=48, nodes_per_element=16))


def test_grid_refinement_invariance(ex2, sol_1e3, mu_inf):
    finer = solve_os_mu(ex2, mu_inf + 0.2j, 1e3, n_grid=2 * len(sol_1e3.grid))
    assert abs(finer.phi0 - sol_1e3.phi0) <= 1e-6


def test_domain_length_invariance(ex2, sol_1e3, mu_inf):
    longer = solve_os_mu(ex2, mu_inf + 0.2j, 1e3, z_max=2 * sol_1e3.grid[-1])
    assert abs(longer.phi0 - sol_1e3.phi0) <= 1e-6


@given(re=st.floats(-3, 5), im=st.floats(0.2, 3), k=st.sampled_from([30.0, 300.0, 3000.0]))
def test_conjugation(ex1, re, im, k):
    mu = complex(re, im)
    a = solve_os_mu(ex1, mu, k)
    b = solve_os_mu(ex1, mu.conjugate(), -k)
    assert abs(a.phi0 - b.phi0.conjugate()) <= 1e-7


def test_couette_tends_to_minus_one(flat):
    errs = [abs(phi_k(flat, 0.3 + 0.5j, k) + 1) for k in (1e2, 1e3, 1e4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


@pytest.mark.parametrize("k,mu", [(100.0, 1j), (1e3, 0.5 + 1j), (300.0, -1 + 0.5j)])
def test_couette_against_airy(flat, k, mu):
    # with U = 0, phi'' = C Ai(c (z - mu)) with c = (ik)^(1/3), so the wall
    # ratios are fixed by the Airy triple at c (0 - mu)
    s = solve_os_mu(flat, mu, k)
    c = principal_power(1j * k, 1 / 3)
    t = airy(-c * mu)
    d1, d2, d3 = (s(0.0, n)[0] for n in (1, 2, 3))
    assert d2 / d1 == pytest.approx(c * t.ai / t.ai_anti, rel=1e-5)
    assert d3 / d2 == pytest.approx(c * t.ai_deriv / t.ai, rel=1e-3)


def test_couette_finite_k_stable(flat):
    # no zeros of Phi_k in the unstable half plane (cross-check with the dispersion scan)
    f = lambda m: phi_k(flat, m, 100.0)
    assert count_zeros(f, (complex(-5, 0.5), complex(5, 5)), n_per_side=8) == 0


# -- boundary layer corrector -------------------------------------------------

def test_decay_root():
    for mu in (1j, 2 + 0.5j, -3 + 0.1j):
        for k in (10.0, 1e4):
            r = decay_root(mu, k)
            assert r.real > 0
            assert r * r == pytest.approx(-1j * k * mu)


def test_corrector_closed_form(flat):
    mu, k = 1j, 100.0
    bl = boundary_layer(flat, mu, k)
    r = np.sqrt(-1j * k * mu)
    r = r if r.real > 0 else -r
    # Couette: phi_inf = -1, phi_inf'(0) = 0
    assert bl.amplitude == pytest.approx(1 / k)
    assert bl.value_at_zero == pytest.approx(mu / k - (1 / k) / r)
    assert bl.value_at_zero_phi_variant == pytest.approx(mu / k - (1 + 1 / k) / r)
    assert bl.derivative(0.0) == pytest.approx(1 / k)


def test_corrector_decay(ex2, mu_inf):
    mu, k = mu_inf + 0.2j, 1e3
    bl = boundary_layer(ex2, mu, k)
    half = math.log(2) / bl.decay_rate.real
    z = np.array([0.0, half, 2 * half])
    d = np.abs(bl(z) - (mu - ex2.a_infinity) / k)
    assert d[1] / d[0] == pytest.approx(0.5, rel=1e-12)
    assert d[2] / d[1] == pytest.approx(0.5, rel=1e-12)


def test_corrector_wall_bound(ex2, mu_inf):
    mu = mu_inf + 0.2j
    vals = [abs(boundary_layer(ex2, mu, k).value_at_zero - mu / k) * math.sqrt(k) for k in (1e2, 1e4, 1e6)]
    # k^{1/2} |phi_bl(0) - (mu - A)/k| stays bounded
    assert max(vals) < 2 * min(vals)
    assert abs(boundary_layer(ex2, mu, 1e8).value_at_zero) < 1e-3


def test_corrector_matches_derivative_condition(ex2, mu_inf):
    mu, k = mu_inf + 0.2j, 1e3
    bl = boundary_layer(ex2, mu, k)
    # phi_inf'(0) + phi_bl'(0) = 1/k
    assert phi_infinity_derivative_at_zero(ex2, mu) + bl.derivative(0.0) == pytest.approx(1 / k)


def test_corrector_requires_upper_half_plane(ex2):
    with pytest.raises(ValueError):
        boundary_layer(ex2, 1 - 1j, 10.0)


def test_approximation_structure(ex2, mu_inf):
    mu = mu_inf + 0.2j
    z = np.linspace(0, 20, 81)
    ef = eigenfunction(ex2, mu, z)
    errs = []
    for k in (1e2, 1e3, 1e4):
        s = solve_os_mu(ex2, mu, k)
        bl = boundary_layer(ex2, mu, k, ef.phi[0])
        errs.append(np.max(np.abs(s(z) - ef.phi - bl(z))))
    assert errs[0] > errs[1] > errs[2]


# -- convergence and tracking ---------------------------------------------------

def test_convergence_study_type():
    st_ = ConvergenceStudy(1j, np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.5, 1.3, 1.2, 1.1]), 1.0, -1.0)
    np.testing.assert_allclose(st_.differences, [0.5, 0.3, 0.2, 0.1])
    assert st_.eventually_decreasing()


def test_phi_k_near_phi_inf(ex2, mu_inf):
    d = [abs(phi_k(ex2, mu_inf, k) - phi_infinity(ex2, mu_inf)) for k in (1e2, 1e3, 1e4)]
    assert d[0] > d[1] > d[2]
    # within the k^{-1/4} envelope with a unit constant
    assert all(x < k ** -0.25 for x, k in zip(d, (1e2, 1e3, 1e4)))


def test_track_mu_k_short(ex2, mu_inf):
    tr = track_mu_k(ex2, mu_inf, [1e2, 1e3])
    assert all(t.mu_k is not None for t in tr)
    for t in tr:
        assert abs(t.mu_k - mu_inf) < 0.5 * mu_inf.imag
        assert abs(phi_k(ex2, t.mu_k, t.k)) < 1e-8
    assert abs(tr[1].mu_k - mu_inf) < abs(tr[0].mu_k - mu_inf)
    assert growth_rate_floor(tr) == min(t.mu_k.imag for t in tr)


def test_track_couette_finds_nothing(flat):
    tr = track_mu_k(flat, 1 + 1j, [1e2])
    assert tr[0].mu_k is None and tr[0].error
    assert math.isnan(growth_rate_floor(tr))


def test_default_domain():
    assert default_z_max(1j, 100.0) > 40
