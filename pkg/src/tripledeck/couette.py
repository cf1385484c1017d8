"""Plain shear (U = 0): complex Airy functions and the dispersion relation

    1 = i k |k| Ai(eta, 1) / Ai(eta, -1),    eta = (ik)^(-2/3) lambda,

with Ai(., -1) = Ai' and Ai(., 1) the antiderivative of Ai vanishing at +inf.

Evaluation of Ai, Ai' and Ai(., 1):
  * |z| <= 4.5: Maclaurin series (Ai(z, 1) = int_0^z Ai - 1/3);
  * |arg z| <= pi/2: Bessel-type integrals, trapezoid rule on a path
    rotated into the steepest-descent direction;
  * otherwise: Taylor continuation of w'' = z w, I' = w along the
    ray from |z| = 4.5, where Ai is dominant so errors do not grow.
The Poincare expansion is kept for the large-|eta| regime analysis only.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .rootfind import find_roots, rectangle_winding

AI0 = 0.355028053887817239260063186004   # Ai(0)
AIP0 = -0.258819403792806798405183560189  # Ai'(0)
SERIES_RADIUS = 4.5
MAX_ABS_Z = 50.0
A_PLUS = 41.0 / 72.0    # a(1)
A_MINUS = -7.0 / 72.0   # a(-1)
ZERO_RATIO = 3.0 ** (-2.0 / 3.0) * math.gamma(1.0 / 3.0)  # Ai(0,1)/Ai'(0)


def a_coefficient(p: float) -> float:
    return (12 * p * p + 24 * p + 5) / 72.0


@dataclass(frozen=True)
class AiryTriple:
    z: complex
    ai: complex
    ai_deriv: complex
    ai_anti: complex
    error_estimate: float = 0.0
    degraded: bool = False


class AiryDomainError(ValueError):
    pass


class DispersionPoleError(ArithmeticError):
    pass


def _phase(z: complex) -> float:
    # cmath.phase overflows on subnormal parts
    return math.atan2(z.imag, z.real)


# -- Maclaurin series --------------------------------------------------------

@lru_cache(maxsize=1)
def _series_coefficients(n_terms: int = 140):
    a = np.zeros(n_terms)
    a[0], a[1] = AI0, AIP0
    for n in range(n_terms - 3):
        a[n + 3] = a[n] / ((n + 3) * (n + 2))
    n = np.arange(n_terms)
    return a, a[1:] * n[1:], a / (n + 1)   # Ai, Ai', int_0^z Ai (shifted by one power)


def _series(z: complex):
    a, da, ia = _series_coefficients()
    powers = z ** np.arange(len(a))
    terms = a * powers
    ai = terms.sum()
    aip = (da * powers[:-1]).sum()
    anti = z * (ia * powers).sum() - 1.0 / 3.0
    err = 4e-16 * (np.abs(terms).sum() + 1.0)
    return ai, aip, anti, err


# -- steepest-descent integrals ------------------------------------------------

def _bessel_integrals(z: complex):
    """Ai, Ai' and int_z^inf Ai for |arg z| <= pi/2.

    K_nu(zeta) = 1/2 int_R exp(-zeta cosh t) cosh(nu t) dt, rotated along
    t = tau + i beta tanh(tau) with beta = -arg(zeta)/2.
    """
    zeta = (2.0 / 3.0) * z ** 1.5
    beta = -_phase(zeta) / 2.0
    # step resolves the saddle width 1/sqrt|zeta|; range covers decay to e^-60
    h = min(0.05, 0.4 / math.sqrt(abs(zeta)))
    T = math.acosh(max(2.0, 160.0 / abs(zeta))) + 1.0
    tau = np.arange(-T, T + 0.5 * h, h)
    t = tau + 1j * beta * np.tanh(tau)
    dt = 1.0 + 1j * beta / np.cosh(tau) ** 2
    e = np.exp(-zeta * np.cosh(t)) * dt * h
    k13 = 0.5 * np.sum(e * np.cosh(t / 3.0))
    k23 = 0.5 * np.sum(e * np.cosh(2.0 * t / 3.0))
    tail = 0.5 * np.sum(e * np.cosh(t / 3.0) / np.cosh(t))
    s3 = math.sqrt(3.0)
    ai = cmath.sqrt(z / 3.0) * k13 / math.pi
    aip = -z * k23 / (math.pi * s3)
    upper = tail / (math.pi * s3)
    err = 1e-15 * max(abs(ai), abs(aip), abs(upper)) + 1e-300
    return ai, aip, -upper, err


# -- Taylor continuation -------------------------------------------------------

def _taylor_step(z0: complex, w: complex, dw: complex, integral: complex, h: complex, n_terms: int = 60):
    c = np.zeros(n_terms, dtype=complex)
    c[0], c[1] = w, dw
    c[2] = z0 * w / 2.0
    for n in range(1, n_terms - 2):
        c[n + 2] = (z0 * c[n] + c[n - 1]) / ((n + 2) * (n + 1))
    hp = h ** np.arange(n_terms)
    w1 = np.sum(c * hp)
    dw1 = np.sum(c[1:] * np.arange(1, n_terms) * hp[:-1])
    i1 = integral + np.sum(c * hp * h / np.arange(1, n_terms + 1))
    return w1, dw1, i1


def _continue_along_ray(z: complex):
    """Taylor continuation along the ray from radius SERIES_RADIUS to |z| (either way)."""
    r, th = abs(z), _phase(z)
    direction = cmath.exp(1j * th)
    z0 = SERIES_RADIUS * direction
    w, dw, integral, err = _series(z0)
    pos = SERIES_RADIUS
    while abs(r - pos) > 1e-15:
        h = math.copysign(min(0.5, 2.0 / math.sqrt(pos), abs(r - pos)), r - pos)
        w, dw, integral = _taylor_step(pos * direction, w, dw, integral, h * direction)
        pos += h
    scale = max(abs(w), abs(dw), abs(integral))
    return w, dw, integral, 1e-14 * scale + err


def airy(z: complex) -> AiryTriple:
    """Ai(z), Ai'(z) and Ai(z, 1) = -int_z^inf Ai for |z| <= 50."""
    z = complex(z)
    if not abs(z) <= MAX_ABS_Z:
        raise AiryDomainError(f"|z| = {abs(z):.3g} exceeds {MAX_ABS_Z}")
    if abs(z) <= SERIES_RADIUS:
        ai, aip, anti, err = _series(z)
    elif abs(_phase(z)) <= math.pi / 2:
        ai, aip, anti, err = _bessel_integrals(z)
    else:
        ai, aip, anti, err = _continue_along_ray(z)
    rel = err / max(abs(ai), 1e-300)
    return AiryTriple(z, complex(ai), complex(aip), complex(anti), float(err), rel > 1e-8)


def airy_asymptotic(z: complex, n_terms: int = 6):
    """Poincare expansions of (Ai, Ai', Ai(., 1)) valid for |arg z| < pi."""
    z = complex(z)
    zeta = (2.0 / 3.0) * z ** 1.5
    u = [1.0]
    v = [1.0]
    for k in range(1, n_terms):
        uk = u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        u.append(uk)
        v.append(-uk * (6 * k + 1) / (6 * k - 1))
    s_u = sum((-1) ** k * u[k] / zeta ** k for k in range(n_terms))
    s_v = sum((-1) ** k * v[k] / zeta ** k for k in range(n_terms))
    pre = cmath.exp(-zeta) / (2 * math.sqrt(math.pi))
    ai = pre * z ** -0.25 * s_u
    aip = -pre * z ** 0.25 * s_v
    anti = -pre * z ** -0.75 * (1.0 - A_PLUS / zeta)
    return ai, aip, anti


def asymptotic_ratio(eta: complex) -> complex:
    """Ai(eta,1)/Ai(eta,-1) ~ (1/eta)(1 - 3a(1)/2 eta^-3/2)/(1 - 3a(-1)/2 eta^-3/2)."""
    eta = complex(eta)
    s = eta ** -1.5
    return (1.0 - 1.5 * A_PLUS * s) / (1.0 - 1.5 * A_MINUS * s) / eta


# -- dispersion relation -------------------------------------------------------

class Regime(str, Enum):
    SMALL = "eta_small"
    LARGE = "eta_large"
    ORDER_ONE = "eta_order_one"


ETA_SMALL = 0.05
ETA_LARGE = 20.0


def classify(eta: complex) -> Regime:
    r = abs(eta)
    if r < ETA_SMALL:
        return Regime.SMALL
    if r > ETA_LARGE:
        return Regime.LARGE
    return Regime.ORDER_ONE


def ratio(eta: complex) -> complex:
    t = airy(eta)
    if abs(t.ai_deriv) < 1e-280:
        raise DispersionPoleError(f"Ai'(eta) vanishes at eta = {eta}")
    return t.ai_anti / t.ai_deriv


def dispersion_residual(k: float, eta: complex) -> complex:
    """1 - i k |k| Ai(eta, 1) / Ai(eta, -1)."""
    if k == 0:
        raise ValueError("k must be nonzero")
    return 1.0 - 1j * k * abs(k) * ratio(eta)


def simplified_residual(k: float, eta: complex) -> complex:
    """The regime's leading-order model of the residual."""
    reg = classify(eta)
    if reg is Regime.SMALL:
        r = ZERO_RATIO
    elif reg is Regime.LARGE:
        r = asymptotic_ratio(eta)
    else:
        r = ratio(eta)
    return 1.0 - 1j * k * abs(k) * r


def dispersion_entire(k: float, eta: complex) -> complex:
    """Ai'(eta) - i k |k| Ai(eta, 1): same zeros as the residual, no poles."""
    t = airy(eta)
    return t.ai_deriv - 1j * k * abs(k) * t.ai_anti


def principal_power(z: complex, p: float) -> complex:
    return cmath.exp(p * cmath.log(z)) if z != 0 else 0j


def eta_from_lambda(k: float, lam: complex) -> complex:
    return principal_power(1j * k, -2.0 / 3.0) * lam


def lambda_from_eta(k: float, eta: complex) -> complex:
    return principal_power(1j * k, 2.0 / 3.0) * eta


@dataclass(frozen=True)
class DispersionRoot:
    k: float
    eta: complex
    lam: complex
    regime: Regime
    residual: float


def default_lambda_box(k: float, re_min: float = 10.0):
    """Re lambda in [re_min, L], |Im lambda| <= L with L = 6 |k|^(2/3),
    i.e. |eta| <= 6 sqrt 2 beyond which the large-eta regime applies."""
    L = 6.0 * abs(k) ** (2.0 / 3.0)
    return complex(re_min, -L), complex(L, L)


def scan_unstable_roots(k_values, re_min: float = 10.0, box=None, n_per_side: int = 64) -> list[DispersionRoot]:
    """Zeros of the dispersion relation with Re lambda in the search box."""
    out = []
    for k in k_values:
        ll, ur = box if box is not None else default_lambda_box(k, re_min)
        f = lambda lam, k=k: dispersion_entire(k, eta_from_lambda(k, lam))
        n = rectangle_winding(f, ll, ur, n_per_side)
        if n == 0:
            continue
        # shift to the upper half plane for the box search, then map back
        shift = 1j * (1.0 - ll.imag)
        g = lambda m, k=k: f(m - shift)
        for lam_s, res in find_roots(g, (ll + shift, ur + shift), tol=1e-10 * max(1.0, k * k)):
            lam = lam_s - shift
            eta = eta_from_lambda(k, lam)
            out.append(DispersionRoot(float(k), eta, lam, classify(eta), abs(dispersion_residual(k, eta))))
    return out


def anti_zeros(radius: float = 15.0, count: int | None = None) -> list[complex]:
    """Zeros of Ai(., 1) with |z| < radius (conjugate pairs; none are real)."""
    f = lambda z: airy(z).ai_anti
    upper = [z for z, _ in find_roots(f, (complex(-radius, 1e-3), complex(radius, radius)), tol=1e-12)]
    upper = [z for z in upper if abs(z) < radius]
    zs = sorted(upper + [z.conjugate() for z in upper], key=lambda z: (abs(z), z.imag))
    return zs[:count] if count else zs
