"""Monotone shear profiles V(z) = z + U(z) and the density g(u) = V''/V'^3.

All built-in profiles belong to one analytic family

    U(z) = A + sum_i c_i z^e_i exp(-a_i z) + sum_j s_j sin(w_j z) exp(-b_j z)

which is closed under differentiation, so derivatives up to order 3 are
evaluated in closed form (no finite differences anywhere).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np


class ProfileError(ValueError):
    """Invalid profile data (non-monotone, bad coefficients, bad spec string)."""


class DerivativeOrderError(ValueError):
    pass


class MonotonicityError(ProfileError):
    pass


class DegenerateZeroWarning(UserWarning):
    """A zero of g where g does not change sign."""


class ProfileKind(str, Enum):
    COUETTE = "couette"
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    PARAMETRIC = "parametric"


MAX_ORDER = 3
# far-field check point and tolerance for the V - z -> A, V' -> 1 invariants
Z_FAR = 200.0
FAR_TOL = 1e-10


@dataclass(frozen=True)
class ExpTerm:
    """c * z**e * exp(-a z), e a nonnegative integer."""

    c: float
    e: int
    a: float


@dataclass(frozen=True)
class SinTerm:
    """s * sin(w z) * exp(-b z)."""

    s: float
    w: float
    b: float


def _falling(e: int, j: int) -> float:
    out = 1.0
    for m in range(j):
        out *= e - m
    return out


@dataclass(frozen=True)
class ShearProfile:
    """Analytic monotone shear flow.

    Construct with :func:`make_profile` or :meth:`parametric`; the
    constructor validates monotonicity and the far-field limits.
    """

    kind: ProfileKind
    a_infinity: float = 0.0
    exp_terms: tuple[ExpTerm, ...] = ()
    sin_terms: tuple[SinTerm, ...] = ()
    name: str = ""
    vprime_at_zero: float = field(init=False)

    def __post_init__(self):
        for t in self.exp_terms:
            if t.a <= 0 or t.e < 0 or int(t.e) != t.e:
                raise ProfileError(f"bad exponential term {t}")
        for t in self.sin_terms:
            if t.b <= 0:
                raise ProfileError(f"bad oscillating term {t}")
        object.__setattr__(self, "vprime_at_zero", float(self.eval(0.0, 1)))
        u0 = self.a_infinity + sum(t.c for t in self.exp_terms if t.e == 0)
        if abs(u0) > 1e-14 * (1 + abs(self.a_infinity)):
            raise ProfileError(f"U(0) = {u0} but must vanish")
        self._check_monotone()
        self._check_far_field()

    # -- construction -------------------------------------------------

    @classmethod
    def parametric(cls, params) -> "ShearProfile":
        """Build from the flat list ``A, m, (c, e, a) * m, (s, w, b) * n``."""
        p = [float(x) for x in params]
        if len(p) < 2:
            raise ProfileError("parametric profile needs at least A and m")
        a_inf, m = p[0], p[1]
        if m < 0 or int(m) != m:
            raise ProfileError("m (number of exponential terms) must be a nonnegative integer")
        m = int(m)
        rest = p[2:]
        if len(rest) < 3 * m or (len(rest) - 3 * m) % 3:
            raise ProfileError("coefficient list does not split into (c,e,a) and (s,w,b) triples")
        exp_terms = tuple(ExpTerm(rest[3 * i], int(rest[3 * i + 1]), rest[3 * i + 2]) for i in range(m))
        if any(rest[3 * i + 1] != int(rest[3 * i + 1]) for i in range(m)):
            raise ProfileError("exponents e must be integers")
        tail = rest[3 * m:]
        sin_terms = tuple(SinTerm(*tail[3 * j:3 * j + 3]) for j in range(len(tail) // 3))
        return cls(ProfileKind.PARAMETRIC, a_inf, exp_terms, sin_terms, name="parametric")

    @property
    def params(self) -> list[float]:
        out = [self.a_infinity, float(len(self.exp_terms))]
        for t in self.exp_terms:
            out += [t.c, float(t.e), t.a]
        for t in self.sin_terms:
            out += [t.s, t.w, t.b]
        return out

    @property
    def is_affine(self) -> bool:
        return not self.exp_terms and not self.sin_terms

    # -- evaluation ---------------------------------------------------

    def eval(self, z, order: int = 0):
        """d^order V / dz^order at z (scalar or array)."""
        if order not in range(MAX_ORDER + 1):
            raise DerivativeOrderError(f"derivative order {order} not supported (0..{MAX_ORDER})")
        z = np.asarray(z, dtype=float)
        if order == 0:
            out = z + self.a_infinity
        elif order == 1:
            out = np.ones_like(z)
        else:
            out = np.zeros_like(z)
        for t in self.exp_terms:
            ez = np.exp(-t.a * z)
            acc = np.zeros_like(z)
            for j in range(min(order, t.e) + 1):
                coef = math.comb(order, j) * _falling(t.e, j) * (-t.a) ** (order - j)
                acc = acc + coef * z ** (t.e - j)
            out = out + t.c * acc * ez
        for t in self.sin_terms:
            r = complex(-t.b, t.w)
            out = out + t.s * np.imag(r ** order * np.exp(r * z))
        return out if out.ndim else float(out)

    def U(self, z, order: int = 0):
        """Derivatives of the deviation U = V - z."""
        v = self.eval(z, order)
        if order == 0:
            return v - np.asarray(z, dtype=float)
        if order == 1:
            return v - 1.0
        return v

    # -- validation ---------------------------------------------------

    @cached_property
    def decay_rate(self) -> float:
        rates = [t.a for t in self.exp_terms] + [t.b for t in self.sin_terms]
        return min(rates) if rates else math.inf

    def decay_length(self, tol: float = 1e-17) -> float:
        """A z beyond which |U - A| and its derivatives are below ``tol``."""
        if self.is_affine:
            return 0.0
        z = 1.0
        while z < 1e4:
            zz = np.linspace(z, 2 * z, 64)
            if max(np.max(np.abs(self.U(zz, n) - (self.a_infinity if n == 0 else 0.0)))
                   for n in range(MAX_ORDER + 1)) < tol:
                return z
            z *= 1.25
        raise ProfileError("profile does not decay")

    def _check_monotone(self):
        grid = np.concatenate([[0.0], np.geomspace(1e-6, Z_FAR, 2048)])
        vp = self.eval(grid, 1)
        if np.any(vp <= 1e-12):
            bad = grid[np.argmax(vp <= 1e-12)]
            raise MonotonicityError(f"V' <= 0 near z = {bad:.6g}")

    def _check_far_field(self):
        if abs(self.eval(Z_FAR) - Z_FAR - self.a_infinity) > FAR_TOL or abs(self.eval(Z_FAR, 1) - 1) > FAR_TOL:
            raise ProfileError("V - z does not settle to A_s (or V' to 1) at the far-field check point")

    # -- inversion and g ----------------------------------------------

    def invert(self, u, tol: float = 1e-13):
        """Solve V(y) = u for y >= 0 (vectorised, safeguarded Newton)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("u must be nonnegative")
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        lo = np.zeros_like(u)
        hi = np.maximum(u - self.a_infinity, 0.0) + 1.0
        # widen bracket until V(hi) >= u
        for _ in range(200):
            short = self.eval(hi) < u
            if not short.any():
                break
            hi = np.where(short, 2 * hi + 1, hi)
        else:
            raise MonotonicityError("could not bracket the preimage")
        if np.any(self.eval(lo) > u + tol):
            raise MonotonicityError("V(0) exceeds target value")
        y = np.clip(u - self.a_infinity, lo, hi)
        y = np.where(u == 0, 0.0, y)
        for _ in range(100):
            f = self.eval(y) - u
            lo = np.where(f < 0, y, lo)
            hi = np.where(f > 0, y, hi)
            step = f / self.eval(y, 1)
            y_new = y - step
            outside = (y_new <= lo) | (y_new >= hi)
            y_new = np.where(outside, 0.5 * (lo + hi), y_new)
            done = np.abs(y_new - y) <= tol * (1 + np.abs(y))
            y = y_new
            if done.all():
                break
        y = np.where(u == 0, 0.0, y)
        res = np.abs(self.eval(y) - u)
        if np.any(res > 1e3 * tol * (1 + np.abs(u))):
            raise MonotonicityError("inversion failed to converge; profile may not be monotone")
        return float(y[0]) if scalar else y

    def g_of_y(self, y):
        """V''/V'^3 evaluated at y (so that g(V(y)) = g_of_y(y))."""
        return self.eval(y, 2) / self.eval(y, 1) ** 3

    def g(self, u):
        if self.is_affine:
            z = np.zeros_like(np.asarray(u, dtype=float))
            return z if z.ndim else 0.0
        return self.g_of_y(self.invert(u))

    @cached_property
    def g_support(self) -> float:
        """Smallest u past which |g| < 1e-12 over a full decade; fallback 100."""
        if self.is_affine:
            return 1.0
        y = np.geomspace(1e-3, 1e3, 6001)
        u = self.eval(y)
        small = np.abs(self.g_of_y(y)) < 1e-12
        for i in range(len(u)):
            if small[i]:
                stop = np.searchsorted(u, 10 * max(u[i], 1.0))
                if stop < len(u) and small[i:stop + 1].all():
                    return float(u[i])
        return 100.0

    def __str__(self):
        return self.name or self.kind.value


def couette() -> ShearProfile:
    return ShearProfile(ProfileKind.COUETTE, name="couette")


def example1() -> ShearProfile:
    """V(z) = z + 4 z exp(-2z)."""
    return ShearProfile(ProfileKind.EXAMPLE1, 0.0, (ExpTerm(4.0, 1, 2.0),), name="example1")


def example2() -> ShearProfile:
    """V(z) = sin(2z) exp(-z) + z (1 - exp(-z))."""
    return ShearProfile(ProfileKind.EXAMPLE2, 0.0, (ExpTerm(-1.0, 1, 1.0),), (SinTerm(1.0, 2.0, 1.0),),
                        name="example2")


BUILTIN = {"couette": couette, "example1": example1, "example2": example2}


def make_profile(spec: str) -> ShearProfile:
    """Parse ``couette``, ``example1``, ``example2`` or ``parametric:A,m,c1,e1,a1,...,s1,w1,b1,...``."""
    spec = spec.strip()
    key = spec.lower()
    if key in BUILTIN:
        return BUILTIN[key]()
    if key.startswith("parametric:"):
        body = spec.split(":", 1)[1]
        try:
            values = [float(x) for x in body.split(",") if x.strip()]
        except ValueError as exc:
            raise ProfileError(f"bad parametric coefficient list: {body!r}") from exc
        return ShearProfile.parametric(values)
    raise ProfileError(f"unknown profile {spec!r}")


def find_g_zeros(p: ShearProfile, u_max: float | None = None, n_scan: int = 10_000, tol: float = 1e-12):
    """Sign changes of g on (0, u_max], refined by bisection.

    Returns a list of ``(a, direction)`` with direction ``"increasing"``
    when g goes from negative to positive.  Tangential zeros (no sign
    change) are reported with a :class:`DegenerateZeroWarning` and left out.
    """
    if p.is_affine:
        return []
    if u_max is None:
        u_max = p.g_support
    # scan in y to avoid a root solve per sample
    y_max = p.invert(u_max)
    y = np.linspace(0.0, y_max, n_scan + 1)[1:]
    gv = p.g_of_y(y)
    scale = np.max(np.abs(gv))
    out = []
    for i in range(len(y) - 1):
        g0, g1 = gv[i], gv[i + 1]
        if g0 == 0.0 or g0 * g1 > 0:
            continue
        if g1 == 0.0 and not (i + 2 < len(y) and g0 * gv[i + 2] < 0):
            continue
        lo, hi = y[i], y[i + 1]
        flo = g0
        while hi - lo > tol * (1 + hi):
            mid = 0.5 * (lo + hi)
            fm = p.g_of_y(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        ya = 0.5 * (lo + hi)
        out.append((float(p.eval(ya)), "increasing" if g1 > g0 else "decreasing"))
    # tangential zeros: local minima of |g| that touch zero without a sign change
    ag = np.abs(gv)
    for i in range(1, len(y) - 1):
        if ag[i] <= ag[i - 1] and ag[i] <= ag[i + 1] and ag[i] < 1e-6 * scale \
                and gv[i - 1] * gv[i + 1] > 0:
            warnings.warn(f"degenerate zero of g near u = {p.eval(y[i]):.6g} excluded",
                          DegenerateZeroWarning, stacklevel=2)
    return out
