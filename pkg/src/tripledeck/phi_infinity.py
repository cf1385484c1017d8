"""The infinite-frequency spectral function and its explicit eigenfunction.

For mu off the spectrum [0, inf),

    Phi(mu) = mu * int_0^inf (mu - V(y))^-2 dy
            = -1/V'(0) + mu * int_0^inf g(u) / (mu - u) du,

and on the positive axis Phi is continued by its Plemelj boundary value

    Phi(a) = -1/V'(0) + a PV int g(u)/(a - u) du - i pi a g(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .profiles import ShearProfile
from .quadrature import (DEFAULT, QuadratureConfig, TailMap, integrate_interval,
                         integrate_semi_infinite, plemelj_limit)


class NearSpectrumError(ValueError):
    """mu lies on (or within the guard band of) the positive real axis."""


class Method(str, Enum):
    DIRECT = "direct"
    G_FORM = "g_form"
    BOUNDARY = "boundary_extension"


@dataclass(frozen=True)
class SpectralFunctionValue:
    mu: complex
    value: complex
    method: Method
    error_estimate: float

    def __complex__(self):
        return complex(self.value)


@dataclass
class Eigenfunction:
    mu: complex
    z: np.ndarray
    phi: np.ndarray

    @property
    def samples(self):
        return list(zip(self.z.tolist(), self.phi.tolist()))

    @property
    def far_field_value(self) -> complex:
        return complex(self.phi[-1])


def guard_band(mu: complex) -> float:
    """Distance from the positive axis below which direct quadrature is refused."""
    return 1e-4 * (1.0 + abs(mu.real))


def g_form_band(mu: complex) -> float:
    """Narrower band for the g-form, whose integrand has a simple (not double) pole."""
    return 1e-6 * (1.0 + abs(mu.real))


def _check_off_spectrum(mu: complex, band=guard_band):
    if mu.real > 0 and abs(mu.imag) < band(mu):
        raise NearSpectrumError(
            f"mu = {mu} is within the guard band of the positive real axis; use phi_infinity_boundary")
    if mu == 0:
        raise NearSpectrumError("mu = 0 is the edge of the spectrum")


def _critical_points(p: ShearProfile, mu: complex) -> list[float]:
    """y where V(y) = Re mu (the near-pole of the integrand), if any."""
    if mu.real <= 0:
        return []
    return [float(p.invert(mu.real))]


class QuadratureFailure(ArithmeticError):
    pass


def _require(res, what):
    if not res.converged:
        raise QuadratureFailure(f"{what}: quadrature did not converge (error {res.error_estimate:.3g})")
    return res


def phi_infinity_direct(p: ShearProfile, mu: complex, cfg: QuadratureConfig = DEFAULT) -> SpectralFunctionValue:
    mu = complex(mu)
    _check_off_spectrum(mu)
    pts = _critical_points(p, mu)
    scale = max(1.0, abs(mu))
    res = integrate_semi_infinite(lambda y: (mu - p.eval(y)) ** -2,
                                  cfg.with_(tail_map=TailMap.ALGEBRAIC, tail_scale=scale,
                                            max_subdivisions=max(cfg.max_subdivisions, 4000)),
                                  points=pts)
    _require(res, f"direct Phi at mu={mu}")
    return SpectralFunctionValue(mu, mu * res.value, Method.DIRECT, abs(mu) * res.error_estimate)


def _g_weight(p: ShearProfile, y):
    """V''/V'^2, the density g(V(y)) V'(y) in the y variable."""
    return p.eval(y, 2) / p.eval(y, 1) ** 2


def phi_infinity_g_form(p: ShearProfile, mu: complex, cfg: QuadratureConfig = DEFAULT) -> SpectralFunctionValue:
    mu = complex(mu)
    _check_off_spectrum(mu, g_form_band)
    base = -1.0 / p.vprime_at_zero
    if p.is_affine:
        return SpectralFunctionValue(mu, complex(base), Method.G_FORM, 0.0)
    pts = _critical_points(p, mu)
    res = integrate_semi_infinite(lambda y: _g_weight(p, y) / (mu - p.eval(y)),
                                  cfg.with_(tail_map=TailMap.EXP, tail_scale=1.0 / p.decay_rate,
                                            max_subdivisions=max(cfg.max_subdivisions, 4000)),
                                  points=pts)
    _require(res, f"g-form Phi at mu={mu}")
    return SpectralFunctionValue(mu, base + mu * res.value, Method.G_FORM, abs(mu) * res.error_estimate)


def phi_infinity_boundary(p: ShearProfile, a: float, cfg: QuadratureConfig = DEFAULT) -> SpectralFunctionValue:
    a = float(a)
    if not a > 0:
        raise ValueError("boundary extension is defined for a > 0 only")
    base = -1.0 / p.vprime_at_zero
    if p.is_affine:
        return SpectralFunctionValue(complex(a), complex(base), Method.BOUNDARY, 0.0)
    u_max = max(p.g_support, 2.0 * a + 1.0)
    lim = plemelj_limit(p.g, a, u_max, cfg, g_at_a=float(p.g(a)), tail=True)
    return SpectralFunctionValue(complex(a), base + a * lim, Method.BOUNDARY, a * cfg.rel_tol)


def phi_infinity(p: ShearProfile, mu: complex, cfg: QuadratureConfig = DEFAULT) -> complex:
    """Phi at any mu in the closed upper/lower half plane minus {0}.

    Away from the axis the g-form is used (it is cheaper and the
    exponentially decaying integrand suits the exp map); inside the g-form band
    above the positive axis the Plemelj boundary value is returned.
    """
    mu = complex(mu)
    if mu.real > 0 and abs(mu.imag) < g_form_band(mu):
        val = phi_infinity_boundary(p, mu.real, cfg).value
        return val.conjugate() if mu.imag < 0 else val
    return phi_infinity_g_form(p, mu, cfg).value


def eigenfunction(p: ShearProfile, mu: complex, z_grid, cfg: QuadratureConfig = DEFAULT) -> Eigenfunction:
    """Samples of (mu - V(z)) * int_z^inf (mu - V(y))^-2 dy on an increasing grid."""
    mu = complex(mu)
    if not mu.imag > 0:
        raise ValueError("eigenfunction requires Im mu > 0")
    z = np.asarray(z_grid, dtype=float)
    if np.any(np.diff(z) <= 0) or z[0] < 0:
        raise ValueError("z_grid must be increasing and nonnegative")
    f = lambda y: (mu - p.eval(y)) ** -2
    crit = _critical_points(p, mu)
    tail = _require(integrate_semi_infinite(f, cfg.with_(tail_map=TailMap.ALGEBRAIC,
                                                         tail_scale=max(1.0, abs(mu))),
                                            lower=z[-1], points=crit), "eigenfunction tail")
    pieces = np.empty(len(z), dtype=complex)
    pieces[-1] = tail.value
    for i in range(len(z) - 1):
        lo, hi = z[i], z[i + 1]
        pts = list(crit)
        if hi > 10 * max(lo, 1.0):
            # long gaps: geometric panels suit the algebraic decay
            pts += list(np.geomspace(max(lo, 1.0), hi, int(4 * np.log10(hi / max(lo, 1.0))) + 2)[1:-1])
        pieces[i] = _require(integrate_interval(f, lo, hi, cfg, points=pts), "eigenfunction").value
    integral = np.cumsum(pieces[::-1])[::-1]
    return Eigenfunction(mu, z, (mu - p.eval(z)) * integral)


def phi_infinity_derivative_at_zero(p: ShearProfile, mu: complex, phi0: complex | None = None) -> complex:
    """phi'(0) from the first-order equation at the wall."""
    mu = complex(mu)
    if phi0 is None:
        phi0 = phi_infinity(p, mu)
    return -(1.0 + p.vprime_at_zero * phi0) / mu


def eigenfunction_residual(p: ShearProfile, mu: complex, z, h: float = 1e-2, cfg: QuadratureConfig = DEFAULT):
    """|(mu - V) phi' + V' phi + 1| with phi' from Richardson-extrapolated
    central differences of fresh evaluations."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = []
    for zi in z:
        hh = min(h, 0.5 * zi) if zi > 0 else h
        if zi - 2 * hh < 0:
            raise ValueError("residual points must sit at least 2h from the wall")
        pts = zi + hh * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        ph = eigenfunction(p, mu, pts, cfg).phi
        d1 = (ph[3] - ph[1]) / (2 * hh)
        d2 = (ph[4] - ph[0]) / (4 * hh)
        deriv = (4 * d1 - d2) / 3
        # second Richardson level with half step
        pts2 = zi + 0.5 * hh * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        ph2 = eigenfunction(p, mu, pts2, cfg).phi
        e1 = (ph2[3] - ph2[1]) / hh
        e2 = (ph2[4] - ph2[0]) / (2 * hh)
        deriv2 = (4 * e1 - e2) / 3
        deriv = (16 * deriv2 - deriv) / 15
        out.append(abs((mu - p.eval(zi)) * deriv + p.eval(zi, 1) * ph[2] + 1.0))
    return np.array(out)
