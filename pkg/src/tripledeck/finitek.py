"""Finite-frequency problem: the third-order boundary-value problem

    (1/ik) phi''' + (mu - V) phi' + V' phi = -1 + (mu - U + z U')/|k|,
    phi'(0) = 1/|k|,  phi'(Z) = 0,  phi(Z) = -1 + (mu - A)/|k|,

its value Phi_k(mu) = phi(0), the boundary-layer corrector, and the
tracking of roots mu_k near a root of Phi.

The problem is discretised by multi-domain Chebyshev collocation: each
element carries values at its own Chebyshev-Lobatto nodes, the equation is
collocated at N - 3 first-kind Chebyshev points per element, and phi,
phi', phi'' are matched across interfaces.  Elements are geometric in the
wall layer of width 1/Re sqrt(-ik mu), then doubling out to Z.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .phi_infinity import phi_infinity, phi_infinity_derivative_at_zero
from .profiles import ShearProfile
from .rootfind import find_root_boxes

K_MIN = 10.0
COND_LIMIT = 1e14
MIN_NODES_PER_ELEMENT = 16


class BvpResolutionError(ArithmeticError):
    """Ill-conditioned or unresolved discretisation; change the grid."""


class BvpDomainError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    n_grid: int | None = None          # total nodes; default max(256, 8 sqrt|k|)
    z_max: float | None = None         # default 40 + 10 / Re sqrt(-ik mu)
    mu_min: float = 1e-3               # smallest admissible Im mu
    k_min: float = K_MIN
    residual_tol: float = 1e-6
    nodes_per_element: int | None = None


@dataclass
class BvpSolution:
    k: float
    mu: complex
    grid: np.ndarray
    phi: np.ndarray
    bc_residuals: tuple
    interior_residual: float      # componentwise backward error of the collocation system
    truncation_estimate: float    # largest trailing Chebyshev coefficient, relative
    condition: float
    element_edges: np.ndarray
    _coeffs: list = field(default_factory=list, repr=False)

    @property
    def phi0(self) -> complex:
        return complex(self.phi[0])

    def __call__(self, z, order: int = 0):
        """Evaluate phi (or a derivative) anywhere in [0, Z] by Chebyshev series."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty(z.shape, dtype=complex)
        edges = self.element_edges
        idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, len(edges) - 2)
        for e in np.unique(idx):
            m = idx == e
            a, b = edges[e], edges[e + 1]
            x = (2 * z[m] - a - b) / (b - a)
            c = self._coeffs[e]
            for _ in range(order):
                c = np.polynomial.chebyshev.chebder(c) * (2.0 / (b - a))
            out[m] = np.polynomial.chebyshev.chebval(x, c)
        return out


@dataclass(frozen=True)
class BoundaryLayerCorrector:
    mu: complex
    k: float
    amplitude: complex
    decay_rate: complex
    a_infinity: float
    phi_inf_at_zero: complex

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return (self.mu - self.a_infinity) / self.k - self.amplitude * np.exp(-self.decay_rate * z) / self.decay_rate

    def derivative(self, z):
        return self.amplitude * np.exp(-self.decay_rate * np.asarray(z, dtype=float))

    @property
    def value_at_zero(self) -> complex:
        return complex(self(0.0))

    @property
    def value_at_zero_phi_variant(self) -> complex:
        """The closed form with phi(0) in place of phi'(0) in the amplitude."""
        amp = -self.phi_inf_at_zero + 1.0 / self.k
        return (self.mu - self.a_infinity) / self.k - amp / self.decay_rate


@dataclass
class ConvergenceStudy:
    mu: complex
    k_values: np.ndarray
    phi_k_values: np.ndarray
    phi_inf_value: complex
    fitted_slope: float

    @property
    def differences(self) -> np.ndarray:
        return np.abs(self.phi_k_values - self.phi_inf_value)

    def eventually_decreasing(self, tail: int = 3) -> bool:
        d = self.differences[-tail:]
        return bool(np.all(np.diff(d) < 0))


# -- Chebyshev machinery -----------------------------------------------------

@lru_cache(maxsize=64)
def _cheb(n: int):
    """Lobatto nodes (descending), differentiation matrix, barycentric weights."""
    j = np.arange(n)
    x = np.cos(np.pi * j / (n - 1))
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = (c[:, None] / c[None, :]) / (X + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, D, w


@lru_cache(maxsize=64)
def _collocation(n: int):
    """First-kind points (n - 3 of them) and the interpolation matrix onto them."""
    x, _, w = _cheb(n)
    m = n - 3
    xc = np.cos(np.pi * (2 * np.arange(m) + 1) / (2 * m))
    diff = xc[:, None] - x[None, :]
    hit = np.abs(diff) < 1e-15
    diff[hit] = 1.0
    P = w[None, :] / diff
    P /= P.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    P[rows] = hit[rows].astype(float)
    return xc, P


def wall_scale(mu: complex, k: float) -> float:
    return 1.0 / decay_root(mu, k).real


def decay_root(mu: complex, k: float) -> complex:
    """sqrt(-ik mu) with positive real part (k signed; (conj mu, -k) gives the conjugate)."""
    s = cmath.sqrt(-1j * k * complex(mu))
    return s if s.real > 0 else -s


def default_z_max(mu: complex, k: float) -> float:
    return 40.0 + 10.0 * wall_scale(mu, k)


def element_edges(mu: complex, k: float, z_max: float) -> np.ndarray:
    """[0, ell], then doubling elements ell, 2 ell, ... up to 1, 2, 4, ..., z_max."""
    ell = wall_scale(mu, k)
    edges = [0.0]
    x = ell
    while x < 1.0:
        edges.append(x)
        x *= 2.0
    x = 1.0
    while x < 0.75 * z_max:
        edges.append(x)
        x *= 2.0
    edges.append(z_max)
    return np.array(edges)


class OSDiscretisation:
    """The mu-independent parts of the collocation system for fixed (p, k, grid).

    ``solve(mu)`` assembles A0 + mu A1 (sparse, block structured) and
    solves; reuse one instance when many mu share a layout.
    """

    def __init__(self, p: ShearProfile, k: float, edges, nodes_per_element: int):
        if nodes_per_element < 8:
            raise BvpResolutionError("need at least 8 nodes per element")
        self.p, self.k, self.edges = p, float(k), np.asarray(edges, dtype=float)
        n = self.n = nodes_per_element
        ne = self.ne = len(self.edges) - 1
        x, D, _ = _cheb(n)
        xc, P = _collocation(n)
        size = ne * n
        r0, c0, v0, r1, c1, v1 = [], [], [], [], [], []

        def put(rows, cols, vals, target=0):
            rr, cc = np.meshgrid(rows, cols, indexing="ij")
            (r0 if target == 0 else r1).append(rr.ravel())
            (c0 if target == 0 else c1).append(cc.ravel())
            (v0 if target == 0 else v1).append(np.asarray(vals, dtype=complex).ravel())

        b0 = np.zeros(size, dtype=complex)
        b1 = np.zeros(size, dtype=complex)
        kk = abs(self.k)
        grid, Ds = [], []
        row = 0
        for e in range(ne):
            a, b = self.edges[e], self.edges[e + 1]
            sc = 2.0 / (b - a)
            z = a + (x + 1) * (b - a) / 2
            zc = a + (xc + 1) * (b - a) / 2
            D1 = D * sc
            D2 = D1 @ D1
            D3 = D2 @ D1
            grid.append(z)
            Ds.append((D1, D2))
            cols = np.arange(e * n, (e + 1) * n)
            rows = np.arange(row, row + n - 3)
            V, V1 = p.eval(zc), p.eval(zc, 1)
            PD1 = P @ D1
            put(rows, cols, (P @ D3) / (1j * self.k) - V[:, None] * PD1 + V1[:, None] * P)
            put(rows, cols, PD1, 1)
            U, U1 = V - zc, V1 - 1.0
            b0[rows] = -1.0 + (-U + zc * U1) / kk
            b1[rows] = 1.0 / kk
            row += n - 3
        # interface continuity of phi, phi', phi'' (node order is descending in x)
        for e in range(ne - 1):
            left, right = np.arange(e * n, (e + 1) * n), np.arange((e + 1) * n, (e + 2) * n)
            D1l, D2l = Ds[e]
            D1r, D2r = Ds[e + 1]
            put([row], [e * n, (e + 1) * n + n - 1], [[1.0, -1.0]])
            put([row + 1], np.concatenate([left, right]), np.concatenate([D1l[0], -D1r[-1]])[None, :])
            put([row + 2], np.concatenate([left, right]), np.concatenate([D2l[0], -D2r[-1]])[None, :])
            row += 3
        last = (ne - 1) * n
        put([row], np.arange(n), Ds[0][0][-1][None, :])              # phi'(0)
        b0[row] = 1.0 / kk
        put([row + 1], np.arange(last, size), Ds[-1][0][0][None, :])  # phi'(Z)
        put([row + 2], [last], [[1.0]])                               # phi(Z)
        b0[row + 2] = -1.0 - p.a_infinity / kk
        b1[row + 2] = 1.0 / kk
        assert row + 3 == size
        mk = lambda r, c, v: sp.csr_matrix((np.concatenate(v), (np.concatenate(r), np.concatenate(c))),
                                           shape=(size, size))
        self.A0, self.A1 = mk(r0, c0, v0), mk(r1, c1, v1)
        self.b0, self.b1 = b0, b1
        self.grid_blocks = grid
        self.D_blocks = Ds

    @property
    def size(self) -> int:
        return self.ne * self.n

    def solve(self, mu: complex, check_condition: bool = True) -> BvpSolution:
        mu = complex(mu)
        A = (self.A0 + mu * self.A1).tocsr()
        rhs = self.b0 + mu * self.b1
        # row equilibration before factorising
        scale = 1.0 / abs(A).max(axis=1).toarray().ravel()
        A = sp.diags(scale) @ A
        rhs = rhs * scale
        lu = spla.splu(A.tocsc())
        cond = math.nan
        if check_condition:
            inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="H"),
                                      dtype=complex)
            with np.errstate(over="ignore", invalid="ignore"):
                cond = spla.norm(A, 1) * spla.onenormest(inv)
            if not cond < COND_LIMIT:
                raise BvpResolutionError(f"condition estimate {cond:.3g} exceeds {COND_LIMIT:.0e}; change the grid")
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise BvpResolutionError("singular collocation system")
        return self._package(mu, sol, cond)

    def _package(self, mu, sol, cond) -> BvpSolution:
        n, kk, p = self.n, abs(self.k), self.p
        blocks = [sol[e * n:(e + 1) * n] for e in range(self.ne)]
        # ascending order, dropping duplicated interface nodes
        z = np.concatenate([self.grid_blocks[0][::-1]] + [g[::-1][1:] for g in self.grid_blocks[1:]])
        phi = np.concatenate([blocks[0][::-1]] + [b[::-1][1:] for b in blocks[1:]])
        d1_0 = complex(self.D_blocks[0][0][-1] @ blocks[0])
        d1_Z = complex(self.D_blocks[-1][0][0] @ blocks[-1])
        res_bc = (abs(d1_0 - 1.0 / kk), abs(d1_Z), abs(blocks[-1][0] - (-1.0 + (mu - p.a_infinity) / kk)))
        coeffs = []
        trunc = 0.0
        xs = np.cos(np.pi * np.arange(n) / (n - 1))
        for blk in blocks:
            c = np.polynomial.chebyshev.chebfit(xs, blk, n - 1)
            coeffs.append(c)
            trunc = max(trunc, float(np.max(np.abs(c[-3:]))) / max(1.0, float(np.max(np.abs(c)))))
        A = self.A0 + mu * self.A1
        b = self.b0 + mu * self.b1
        r = A @ sol - b
        rows = abs(A) @ np.abs(sol) + np.abs(b)
        backward = float(np.max(np.abs(r) / rows))
        return BvpSolution(self.k, mu, z, phi, res_bc, backward, trunc, cond, self.edges, coeffs)


def _layout(p, mu, k, cfg: SolverConfig):
    z_max = cfg.z_max if cfg.z_max is not None else default_z_max(mu, k)
    if z_max <= 0:
        raise BvpDomainError("z_max must be positive")
    n_grid = cfg.n_grid if cfg.n_grid is not None else int(max(256, 8 * math.sqrt(abs(k))))
    edges = element_edges(mu, k, z_max)
    npe = cfg.nodes_per_element or max(MIN_NODES_PER_ELEMENT, n_grid // (len(edges) - 1))
    return edges, npe


def _check_inputs(mu, k, cfg):
    if abs(k) < cfg.k_min:
        raise BvpDomainError(f"|k| = {abs(k)} below k_min = {cfg.k_min}")
    if complex(mu).imag * np.sign(k) < cfg.mu_min:
        raise BvpDomainError(f"Im mu = {complex(mu).imag} below mu_min = {cfg.mu_min}")


def discretise(p: ShearProfile, mu: complex, k: float, cfg: SolverConfig = SolverConfig()) -> OSDiscretisation:
    edges, npe = _layout(p, mu, k, cfg)
    return OSDiscretisation(p, k, edges, npe)


def solve_os_mu(p: ShearProfile, mu: complex, k: float, z_max: float | None = None,
                n_grid: int | None = None, cfg: SolverConfig = SolverConfig()) -> BvpSolution:
    """Solve the finite-k problem at one (mu, k).

    For k < 0 the problem is solved as written with |k| in the inviscid
    terms; the solution is then the conjugate of the (conj mu, -k) one.
    """
    mu = complex(mu)
    cfg = SolverConfig(**{**cfg.__dict__, **{kk: v for kk, v in (("z_max", z_max), ("n_grid", n_grid)) if v is not None}})
    _check_inputs(mu, k, cfg)
    return discretise(p, mu, k, cfg).solve(mu)


def _released(sol: BvpSolution, cfg: SolverConfig) -> complex:
    worst = max(*sol.bc_residuals, sol.interior_residual, sol.truncation_estimate)
    if not worst <= cfg.residual_tol:
        raise BvpResolutionError(f"residuals {sol.bc_residuals}, interior {sol.interior_residual:.3g}, "
                                 f"truncation {sol.truncation_estimate:.3g} exceed {cfg.residual_tol}; "
                                 "refine the grid")
    return sol.phi0


def phi_k(p: ShearProfile, mu: complex, k: float, cfg: SolverConfig = SolverConfig()) -> complex:
    """Phi_k(mu) = phi(0), released only if the residuals pass."""
    _check_inputs(mu, k, cfg)
    return _released(discretise(p, mu, k, cfg).solve(mu), cfg)


def boundary_layer(p: ShearProfile, mu: complex, k: float, phi_inf0: complex | None = None) -> BoundaryLayerCorrector:
    mu = complex(mu)
    if not mu.imag > 0 or not k > 0:
        raise ValueError("boundary layer needs Im mu > 0 and k > 0")
    if phi_inf0 is None:
        phi_inf0 = phi_infinity(p, mu)
    d0 = phi_infinity_derivative_at_zero(p, mu, phi_inf0)
    return BoundaryLayerCorrector(mu, float(k), -d0 + 1.0 / k, decay_root(mu, k), p.a_infinity, complex(phi_inf0))


def convergence_study(p: ShearProfile, mu: complex, k_values, cfg: SolverConfig = SolverConfig()) -> ConvergenceStudy:
    ks = np.asarray(sorted(k_values), dtype=float)
    vals = np.array([phi_k(p, mu, k, cfg) for k in ks])
    ref = phi_infinity(p, complex(mu))
    diff = np.abs(vals - ref)
    slope = float(np.polyfit(np.log(ks), np.log(diff), 1)[0])
    return ConvergenceStudy(complex(mu), ks, vals, ref, slope)


@dataclass
class TrackedRoot:
    k: float
    mu_k: complex | None
    residual: float = math.nan
    error: str | None = None


def track_mu_k(p: ShearProfile, mu_infinity: complex, k_list, tol: float = 1e-10,
               cfg: SolverConfig = SolverConfig(), n_per_side: int = 12) -> list[TrackedRoot]:
    """Roots of Phi_k in the square inscribed in D(mu_inf, Im mu_inf / 2).

    The discretisation layout is frozen at mu_inf for each k so that Phi_k
    is one holomorphic function over the whole box.
    """
    mu_infinity = complex(mu_infinity)
    if not mu_infinity.imag > 0:
        raise ValueError("mu_infinity must lie in the upper half plane")
    h = 0.5 * mu_infinity.imag / math.sqrt(2.0) * 0.999
    box = (mu_infinity - h - 1j * h, mu_infinity + h + 1j * h)
    out = []
    for k in k_list:
        try:
            disc = discretise(p, mu_infinity, k, cfg)
            f = lambda m, d=disc: _released(d.solve(m, check_condition=False), cfg)
            boxes = find_root_boxes(f, box, tol, n_per_side=n_per_side)
            roots = [r for b in boxes for r in b.refined_roots]
            if not roots:
                out.append(TrackedRoot(float(k), None, error="no root in the disk"))
                continue
            z, res = min(roots, key=lambda r: abs(r[0] - mu_infinity))
            out.append(TrackedRoot(float(k), complex(z), float(res)))
        except ArithmeticError as exc:
            out.append(TrackedRoot(float(k), None, error=str(exc)))
    return out


def growth_rate_floor(tracked: list[TrackedRoot]) -> float:
    """min Im mu_k over the located roots (the sigma_m estimate)."""
    ims = [t.mu_k.imag for t in tracked if t.mu_k is not None]
    return min(ims) if ims else math.nan
