"""Instability decision: crossings of the positive real axis, winding
numbers of Phi(boundary of Omega_eps), and the g-zero count n_+/n_-.

Orientation convention used throughout: the contour boundary of
Omega_eps = {Im mu > eps, |mu| < R} is traversed counter-clockwise, so its
bottom edge runs in the direction of increasing Re mu.  A crossing "from
below" has Im Phi going from negative to positive along the curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .phi_infinity import guard_band, phi_infinity, phi_infinity_boundary
from .profiles import ShearProfile, find_g_zeros
from .quadrature import DEFAULT, QuadratureConfig, principal_value


class AmbiguousCrossingError(ArithmeticError):
    """A sign change of Im with Re too close to 0 to classify."""


class NearZeroContourError(ArithmeticError):
    """The curve passes within the clearance of the origin."""


class MarginalCriterionError(ArithmeticError):
    """A g-zero whose PV test value is numerically zero."""


@dataclass
class ComplexCurve:
    params: np.ndarray
    values: np.ndarray
    failed: list = field(default_factory=list)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.params.shape != self.values.shape or self.params.ndim != 1:
            raise ValueError("params and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.params) <= 0):
            raise ValueError("params must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")

    def __len__(self):
        return len(self.params)

    def concat(self, other: "ComplexCurve") -> "ComplexCurve":
        """Join two curves; ``other`` is re-parametrised to follow this one."""
        shift = self.params[-1] - other.params[0] + 1.0
        return ComplexCurve(np.concatenate([self.params, other.params + shift]),
                            np.concatenate([self.values, other.values]))


class Direction(str, Enum):
    FROM_BELOW = "from_below"
    FROM_ABOVE = "from_above"


@dataclass(frozen=True)
class CrossingRecord:
    param_at_crossing: float
    direction: Direction
    real_part_at_crossing: float


@dataclass
class SpectralVerdict:
    n_plus: int
    n_minus: int
    winding_number: int
    unstable: bool
    epsilon_used: float
    zeros: list = field(default_factory=list)   # (a, direction, pv_test_value)

    @property
    def net(self) -> int:
        return self.n_plus - self.n_minus


# -- curve sampling ----------------------------------------------------------

def _wrapped(d):
    return (d + np.pi) % (2 * np.pi) - np.pi


def sample_adaptive(fn, t0: float, t1: float, n: int, max_arg_step: float = np.pi / 6,
                    max_depth: int = 14) -> ComplexCurve:
    """Sample fn on [t0, t1], bisecting steps whose argument jump is large
    or across which Im changes sign."""
    t = list(np.linspace(t0, t1, n))
    v = [complex(fn(x)) for x in t]
    for _ in range(max_depth):
        new_t, new_v, changed = [t[0]], [v[0]], False
        for i in range(len(t) - 1):
            a, b = v[i], v[i + 1]
            need = abs(_wrapped(np.angle(b) - np.angle(a))) > max_arg_step
            if not need and a.imag * b.imag < 0 and t[i + 1] - t[i] > 1e-4 * (t1 - t0) / n:
                need = True
            if need and t[i + 1] - t[i] > 1e-12 * max(1.0, abs(t[i])):
                m = 0.5 * (t[i] + t[i + 1])
                new_t.append(m)
                new_v.append(complex(fn(m)))
                changed = True
            new_t.append(t[i + 1])
            new_v.append(b)
        t, v = new_t, new_v
        if not changed:
            break
    return ComplexCurve(np.array(t), np.array(v))


def boundary_point(p: ShearProfile, a: float, epsilon: float, cfg: QuadratureConfig = DEFAULT) -> complex:
    """Phi(a + i eps); for eps = 0 the boundary extension (a > 0) or the
    value just above the axis (a <= 0)."""
    if epsilon > 0:
        return phi_infinity(p, complex(a, epsilon), cfg)
    if a > 0:
        return phi_infinity_boundary(p, a, cfg).value
    return phi_infinity(p, complex(a, guard_band(complex(a))), cfg)


def sample_boundary_curve(p: ShearProfile, epsilon: float, a_range=(-10.0, 50.0), n: int = 400,
                          cfg: QuadratureConfig = DEFAULT) -> ComplexCurve:
    """The image of the line a + i eps, a in a_range."""
    if n < 2:
        raise ValueError("need at least two samples")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    failed = []

    def fn(a):
        try:
            return boundary_point(p, a, epsilon, cfg)
        except ArithmeticError:
            failed.append(a)
            return complex("nan")

    lo, hi = a_range
    if epsilon == 0 and lo <= 0 <= hi:
        # the spectrum edge mu = 0 is excluded
        grid_fn = lambda a: fn(a if abs(a) > 1e-9 else 1e-9)
    else:
        grid_fn = fn
    curve = sample_adaptive(grid_fn, lo, hi, n)
    ok = np.isfinite(curve.values)
    out = ComplexCurve(curve.params[ok], curve.values[ok])
    out.failed = failed
    return out


# -- crossings and winding -------------------------------------------------

def count_crossings(curve: ComplexCurve, evaluator=None, refine_band: float = 1e-3,
                    resolution: float = 1e-8):
    """Crossings of the positive real axis.

    Returns ``(n_from_below, n_from_above, records)``.  A sign change of Im
    whose interpolated Re is within ``refine_band`` of 0 is re-located by
    bisection with fresh evaluations (``evaluator(param) -> complex``).
    """
    if len(curve) < 2:
        raise ValueError("curve needs at least two samples")
    t, v = curve.params, curve.values
    nz = np.flatnonzero(v.imag != 0)
    records = []
    for i, j in zip(nz[:-1], nz[1:]):
        if v[i].imag * v[j].imag > 0:
            continue
        w = v[i].imag / (v[i].imag - v[j].imag)
        tc = t[i] + w * (t[j] - t[i])
        rc = v[i].real + w * (v[j].real - v[i].real)
        if abs(rc) <= refine_band:
            if evaluator is None:
                raise AmbiguousCrossingError(f"crossing near param {tc:.6g} has Re ~ {rc:.3g}; refine sampling")
            lo, hi, flo = t[i], t[j], v[i]
            while hi - lo > resolution:
                mid = 0.5 * (lo + hi)
                fm = complex(evaluator(mid))
                if (fm.imag < 0) == (flo.imag < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            tc = 0.5 * (lo + hi)
            rc = complex(evaluator(tc)).real
            if abs(rc) <= resolution:
                raise AmbiguousCrossingError(f"crossing at param {tc:.10g} passes through the origin")
        if rc > 0:
            d = Direction.FROM_BELOW if v[j].imag > v[i].imag else Direction.FROM_ABOVE
            records.append(CrossingRecord(float(tc), d, float(rc)))
    below = sum(r.direction is Direction.FROM_BELOW for r in records)
    return below, len(records) - below, records


def _too_close(v, clearance: float) -> bool:
    a = np.abs(np.asarray(v, dtype=complex))
    if np.any(a == 0):
        return True
    nb = np.maximum(np.concatenate([[a[0]], a[:-1]]), np.concatenate([a[1:], [a[-1]]]))
    return bool(np.any(a < clearance * nb))


def winding_number(curve: ComplexCurve, closed: bool = True, evaluator=None, clearance: float = 1e-10,
                   max_step: float = np.pi / 3) -> int:
    """Winding number about 0 from accumulated argument increments.

    Steps with |d arg| > max_step are bisected with ``evaluator`` when one
    is given.  A sample is too close to the origin when its modulus is
    below ``clearance`` times that of its larger neighbour (scale free, so
    functions with a large dynamic range are handled).
    """
    t = list(curve.params)
    v = list(curve.values)
    if closed and abs(v[0] - v[-1]) > 1e-6 * max(1.0, abs(v[0])):
        raise ValueError("closed curve endpoints do not match")
    if _too_close(v, clearance):
        raise NearZeroContourError("curve passes within clearance of the origin")
    total = 0.0
    stack = [(t[i], v[i], t[i + 1], v[i + 1], 0) for i in range(len(t) - 1)][::-1]
    while stack:
        ta, va, tb, vb, depth = stack.pop()
        d = _wrapped(np.angle(vb) - np.angle(va))
        if abs(d) > max_step and evaluator is not None and depth < 30:
            tm = 0.5 * (ta + tb)
            vm = complex(evaluator(tm))
            if _too_close([va, vm, vb], clearance):
                raise NearZeroContourError(f"curve passes within clearance of the origin at {tm}")
            stack.append((tm, vm, tb, vb, depth + 1))
            stack.append((ta, va, tm, vm, depth + 1))
            continue
        if abs(d) > 0.9 * np.pi:
            raise ArithmeticError("argument step too large to resolve; sample the curve more densely")
        total += d
    w = total / (2 * np.pi)
    if closed and abs(w - round(w)) > 1e-6:
        raise ArithmeticError(f"non-integer winding {w}")
    return int(round(w)) if closed else w


# -- the contour of Omega_eps ----------------------------------------------

def contour_point(s: float, epsilon: float, R: float) -> complex:
    """Counter-clockwise parametrisation of the boundary of Omega_eps by
    s in [0, 2]: s in [0, 1] the bottom segment, s in [1, 2] the arc."""
    half = math.sqrt(R * R - epsilon * epsilon)
    th0 = math.asin(epsilon / R)
    if s <= 1.0:
        return complex(-half + 2 * half * s, epsilon)
    th = th0 + (s - 1.0) * (math.pi - 2 * th0)
    return R * complex(math.cos(th), math.sin(th))


def contour_curve(p: ShearProfile, epsilon: float, R: float, n: int = 400,
                  cfg: QuadratureConfig = DEFAULT):
    """Phi along the closed contour; returns (curve, evaluator)."""
    if not 0 < epsilon < R:
        raise ValueError("need 0 < epsilon < R")
    ev = lambda s: phi_infinity(p, contour_point(s, epsilon, R), cfg)
    curve = sample_adaptive(ev, 0.0, 2.0, n)
    return curve, ev


def far_radius(p: ShearProfile, delta: float = 0.25, n: int = 64, start: float = 4.0,
               cfg: QuadratureConfig = DEFAULT) -> float:
    """Smallest R in a doubling sequence with |Phi + 1| <= delta on the upper
    half circle of radius R and on the real half line beyond it."""
    R = start
    while R < 1e6:
        th = np.linspace(0.0, np.pi, n)
        pts = [R * complex(math.cos(x), math.sin(x)) for x in th]
        pts += [complex(a, 0.0) for a in np.linspace(R, 4 * R, n)]
        vals = [phi_infinity(p, m if m.imag > 0 or m.real <= 0 else complex(m.real, 0.0), cfg) for m in pts]
        if max(abs(x + 1) for x in vals) <= delta:
            return R
        R *= 2
    raise ArithmeticError("could not find a far-field radius")


def contour_winding(p: ShearProfile, epsilon: float, R: float | None = None, n: int = 400,
                    cfg: QuadratureConfig = DEFAULT):
    """(winding number, crossing counts) of Phi along the boundary of Omega_eps."""
    if R is None:
        R = far_radius(p, cfg=cfg)
    curve, ev = contour_curve(p, epsilon, R, n, cfg)
    w = winding_number(curve, closed=True, evaluator=ev)
    below, above, recs = count_crossings(curve, evaluator=ev)
    return w, below, above, recs, R


# -- the g-zero criterion ---------------------------------------------------

def pv_test_value(p: ShearProfile, a: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """-1/V'(0) + a PV int g(u)/(a-u) du, the real part of Phi at a g-zero."""
    u_max = max(p.g_support, 2.0 * a + 1.0)
    pv = principal_value(p.g, a, u_max, cfg, tail=True)
    if not pv.converged:
        raise ArithmeticError(f"PV did not converge at a = {a}")
    return -1.0 / p.vprime_at_zero + a * pv.value.real


def n_pm_from_g(p: ShearProfile, cfg: QuadratureConfig = DEFAULT, marginal_tol: float = 1e-8) -> SpectralVerdict:
    """Count n_+ / n_- over the simple zeros of g.

    n_+ counts zeros where g increases (boundary curve crosses the positive
    axis from above), n_- where g decreases (crossing from below).  The
    winding number of the small-eps contour therefore equals n_- - n_+.
    """
    n_plus = n_minus = 0
    zeros = []
    for a, direction in find_g_zeros(p):
        val = pv_test_value(p, a, cfg)
        if abs(val) <= marginal_tol * (1.0 + abs(val)):
            raise MarginalCriterionError(f"PV test value at a = {a:.10g} is numerically zero")
        zeros.append((a, direction, val))
        if val > 0:
            if direction == "increasing":
                n_plus += 1
            else:
                n_minus += 1
    return SpectralVerdict(n_plus, n_minus, n_minus - n_plus, n_plus != n_minus, 0.0, zeros)


def crossings_match_zeros(p: ShearProfile, verdict: SpectralVerdict, curve: ComplexCurve,
                          records, tol: float = 1e-3) -> bool:
    """The eps = 0 crossing points coincide with the g-zeros passing the PV test."""
    passing = sorted(a for a, _, val in verdict.zeros if val > 0)
    found = sorted(r.param_at_crossing for r in records)
    return len(passing) == len(found) and all(abs(x - y) <= tol * (1 + x) for x, y in zip(passing, found))


# -- convex hull test -------------------------------------------------------

def q_curve(mu: complex, extent: float, n: int) -> np.ndarray:
    """q_mu(u) = mu / (mu - u)^2 on [0, extent] (linear + geometric samples)."""
    u = np.unique(np.concatenate([np.linspace(0.0, extent, n // 2),
                                  np.geomspace(1e-6, extent, n - n // 2)]))
    return mu / (mu - u) ** 2


def origin_in_convex_hull(mu: complex, p_curve_extent: float = 1e3, n: int = 10_000,
                          diagnostics: dict | None = None) -> bool:
    """Is 0 strictly inside the convex hull of q_mu([0, extent])?"""
    q = q_curve(complex(mu), p_curve_extent, n)
    pts = np.column_stack([q.real, q.imag])
    scale = np.max(np.abs(q))
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        if diagnostics is not None:
            diagnostics["degenerate"] = str(exc).splitlines()[0]
        return False
    offsets = hull.equations[:, 2]  # n . x + c <= 0 inside; at x = 0 this is c
    if diagnostics is not None:
        diagnostics["max_offset"] = float(offsets.max() / scale)
    return bool(np.all(offsets < -1e-12 * scale))


def origin_in_hull_by_angles(q: np.ndarray) -> bool:
    """Independent check: 0 is strictly inside the hull iff every open
    half plane through 0 contains a point, i.e. the largest angular gap
    between the points' arguments is below pi."""
    ang = np.sort(np.angle(q[np.abs(q) > 0]))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    return bool(gaps.max() < np.pi - 1e-12)
