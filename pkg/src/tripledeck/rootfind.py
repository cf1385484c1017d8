"""Zeros of holomorphic functions in rectangles of the upper half plane:
argument-principle counting, recursive quadrisection, Muller refinement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criterion import NearZeroContourError, sample_adaptive, winding_number

QUADRISECTION_FLOOR = 1e-6


@dataclass
class RootBox:
    lower_left: complex
    upper_right: complex
    zero_count: int = 0
    refined_roots: list = field(default_factory=list)  # (root, residual)

    def __post_init__(self):
        self.lower_left = complex(self.lower_left)
        self.upper_right = complex(self.upper_right)
        if not self.lower_left.imag > 0:
            raise ValueError("boxes must lie in the open upper half plane")
        if not (self.upper_right.real > self.lower_left.real and self.upper_right.imag > self.lower_left.imag):
            raise ValueError("upper_right must lie above and to the right of lower_left")

    @property
    def width(self) -> float:
        return self.upper_right.real - self.lower_left.real

    @property
    def height(self) -> float:
        return self.upper_right.imag - self.lower_left.imag

    @property
    def center(self) -> complex:
        return 0.5 * (self.lower_left + self.upper_right)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.lower_left.real - pad <= z.real <= self.upper_right.real + pad
                and self.lower_left.imag - pad <= z.imag <= self.upper_right.imag + pad)

    def quadrants(self, cx: float, cy: float):
        ll, ur = self.lower_left, self.upper_right
        return [RootBox(ll, complex(cx, cy)), RootBox(complex(cx, ll.imag), complex(ur.real, cy)),
                RootBox(complex(ll.real, cy), complex(cx, ur.imag)), RootBox(complex(cx, cy), ur)]


class CachedFunction:
    """Memoises f on exact complex arguments."""

    def __init__(self, f):
        self.f = f
        self.cache: dict[complex, complex] = {}

    def __call__(self, z):
        z = complex(z)
        if z not in self.cache:
            self.cache[z] = complex(self.f(z))
        return self.cache[z]


def _as_box(box) -> RootBox:
    if isinstance(box, RootBox):
        return box
    ll, ur = box
    return RootBox(ll, ur)


def rectangle_winding(f, lower_left: complex, upper_right: complex, n_per_side: int = 32,
                      clearance: float = 1e-10) -> int:
    """Winding of f along any axis-parallel rectangle (no half-plane check)."""
    ll, ur = complex(lower_left), complex(upper_right)
    w, h = ur.real - ll.real, ur.imag - ll.imag

    def point(s):
        side, t = min(int(s), 3), s - min(int(s), 3)
        return (complex(ll.real + t * w, ll.imag), complex(ur.real, ll.imag + t * h),
                complex(ur.real - t * w, ur.imag), complex(ll.real, ur.imag - t * h))[side]

    ev = lambda s: f(point(s))
    curve = sample_adaptive(ev, 0.0, 4.0, 4 * n_per_side + 1)
    return winding_number(curve, closed=True, evaluator=ev, clearance=clearance)


def count_zeros(f, box, n_per_side: int = 32, clearance: float = 1e-10) -> int:
    """Number of zeros of f inside the box, with multiplicity."""
    box = _as_box(box)
    return rectangle_winding(f, box.lower_left, box.upper_right, n_per_side, clearance)


def muller(f, z0: complex, z1: complex, z2: complex, tol: float = 1e-10, max_iter: int = 100):
    """Muller's method; returns (root, |f(root)|, converged)."""
    f0, f1, f2 = f(z0), f(z1), f(z2)
    best = min(((abs(v), z) for z, v in ((z0, f0), (z1, f1), (z2, f2))), key=lambda t: t[0])
    for _ in range(max_iter):
        if abs(f2) <= tol:
            return complex(z2), float(abs(f2)), True
        h1, h2 = z1 - z0, z2 - z1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            break
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(complex(b * b - 4 * f2 * a))
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            break
        step = -2 * f2 / den
        z0, z1, z2 = z1, z2, z2 + step
        f0, f1, f2 = f1, f2, f(z2)
        if abs(f2) < best[0]:
            best = (abs(f2), z2)
        if abs(step) <= 1e-15 * max(1.0, abs(z2)):
            break
    return complex(best[1]), float(best[0]), best[0] <= tol


def _refine_in(f, box: RootBox, tol: float):
    c = box.center
    h = 0.25 * min(box.width, box.height)
    z, res, ok = muller(f, c - h, c + h, c + 1j * h, tol)
    return z, res, ok and box.contains(z, pad=1e-9 * max(1.0, abs(z)))


def _split_counts(f, box: RootBox, n_per_side, clearance):
    """Quadrisect, shifting the split point off zeros on the internal edges."""
    for shift in (0.0, 0.0731, -0.1137, 0.1931):
        cx = box.lower_left.real + (0.5 + shift) * box.width
        cy = box.lower_left.imag + (0.5 - shift) * box.height
        kids = box.quadrants(cx, cy)
        try:
            counts = [count_zeros(f, k, n_per_side, clearance) for k in kids]
        except (NearZeroContourError, ArithmeticError):
            continue
        if sum(counts) == box.zero_count:
            return kids, counts
    raise NearZeroContourError("could not split box without touching a zero")


def find_root_boxes(f, box, tol: float = 1e-10, n_per_side: int = 32, clearance: float = 1e-10,
                    max_boxes: int = 4096) -> list[RootBox]:
    """Boxes holding the zeros of f, each with its refined roots.

    A box with one zero is refined by Muller from its centre; if that
    fails (or lands outside) the box is quadrisected further.  Below the
    quadrisection floor a box is refined regardless and its zero count
    reported as multiplicity.
    """
    f = f if isinstance(f, CachedFunction) else CachedFunction(f)
    root = _as_box(box)
    root.zero_count = count_zeros(f, root, n_per_side, clearance)
    out, stack, visited = [], [root], 0
    while stack:
        b = stack.pop()
        visited += 1
        if visited > max_boxes:
            raise ArithmeticError("box budget exhausted")
        if b.zero_count == 0:
            continue
        small = b.width < QUADRISECTION_FLOOR and b.height < QUADRISECTION_FLOOR
        if b.zero_count == 1 or small:
            z, res, ok = _refine_in(f, b, tol)
            if ok or small:
                b.refined_roots = [(z, res)] * b.zero_count
                out.append(b)
                continue
        kids, counts = _split_counts(f, b, n_per_side, clearance)
        for k, c in zip(kids, counts):
            k.zero_count = c
            stack.append(k)
    return out


def find_roots(f, box, tol: float = 1e-10, **kw) -> list[tuple[complex, float]]:
    """Zeros of f in the box as (root, |f(root)|), repeated by multiplicity."""
    roots = [r for b in find_root_boxes(f, box, tol, **kw) for r in b.refined_roots]
    return sorted(roots, key=lambda r: (r[0].real, r[0].imag))
