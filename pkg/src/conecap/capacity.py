"""Equilibrium potential and capacity of a radial graph in a circular cone.

The exterior region is written in log-radius ``s = log|x|`` and polar angle
``theta``. With ``K = w e^{(n-2)s} sin^{n-2}(theta)`` the energy is
``|S^{n-2}| * int K (phi_s^2 + phi_theta^2) ds dtheta`` for every dimension,
so one two-dimensional solver serves all n.

The domain between the surface ``s = u(theta)`` and the truncation ``s = s_max``
is mapped to the unit square by ``s = u + xi (s_max - u)`` and discretized with
bilinear elements and 2x2 Gauss quadrature, cross terms included. Beyond
``s_max`` each ray carries the exact radial (monopole) solution, which turns
into a Robin term on ``xi = 1``. The wall and the axis carry the natural
(zero-flux) condition.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import _backend
from .cone import DomainError
from .surface import RadialGraph, simpson_weights

_GAUSS = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])
_TAIL_NODES, _TAIL_WEIGHTS = np.polynomial.legendre.leggauss(32)


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class ExteriorGrid:
    graph: RadialGraph
    m_s: int = 256
    m_theta: int | None = None
    s_max: float | None = None
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = self.graph
        m_theta = g.m if self.m_theta is None else int(self.m_theta)
        if m_theta < 4 or m_theta % 2:
            raise DomainError(f"m_theta must be even and >= 4, got {m_theta}")
        if self.m_s < 4:
            raise DomainError(f"m_s must be >= 4, got {self.m_s}")
        umax, umin = float(g.u.max()), float(g.u.min())
        if umax - umin > math.log(1e6):
            raise DomainError("surface comes too close to the vertex (min rho < 1e-6 max rho)")
        s_max = umax + 4.0 if self.s_max is None else float(self.s_max)
        if s_max < umax + 2.0 - 1e-12:
            raise DomainError(
                f"outer truncation s_max={s_max:.4g} must be at least max(u)+2={umax + 2:.4g}"
            )
        object.__setattr__(self, "m_theta", m_theta)
        object.__setattr__(self, "s_max", s_max)
        spline = CubicSpline(g.theta, g.u, bc_type=((1, 0.0), (1, 0.0)))
        object.__setattr__(self, "_spline", spline)

    @property
    def n(self) -> int:
        return self.graph.cone.n

    @property
    def cone(self):
        return self.graph.cone

    @property
    def h_xi(self) -> float:
        return 1.0 / self.m_s

    @property
    def h_theta(self) -> float:
        return self.cone.theta0 / self.m_theta

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m_s + 1)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, self.cone.theta0, self.m_theta + 1)

    def surface(self, theta):
        """Log-radius of the surface and its theta-derivative."""
        return self._spline(theta), self._spline(theta, 1)

    def surface_second(self, theta):
        return self._spline(theta, 2)

    def log_radius(self, xi, theta):
        us, _ = self.surface(theta)
        return us + xi * (self.s_max - us)

    def node_s(self) -> np.ndarray:
        """Log-radius at every node, shape (m_s + 1, m_theta + 1)."""
        return self.log_radius(self.xi[:, None], self.theta[None, :])

    def scaled(self, k: float) -> "ExteriorGrid":
        """Same geometry with both resolutions multiplied by ``k``."""
        m_th = max(4, int(round(self.m_theta * k / 2)) * 2)
        return ExteriorGrid(self.graph, max(4, int(round(self.m_s * k))), m_th, self.s_max)


def _weight_at(weight, grid: ExteriorGrid, xi, theta):
    if weight is None:
        return np.ones(np.broadcast(xi, theta).shape)
    if callable(weight):
        return np.asarray(weight(grid.log_radius(xi, theta), theta), dtype=float) * np.ones(
            np.broadcast(xi, theta).shape
        )
    # nodal values: bilinear interpolation in (xi, theta)
    W = np.asarray(weight, dtype=float)
    fx = np.clip(np.asarray(xi) * grid.m_s, 0, grid.m_s - 1e-12)
    fy = np.clip(np.asarray(theta) / grid.h_theta, 0, grid.m_theta - 1e-12)
    fx, fy = np.broadcast_arrays(fx, fy)
    i0 = np.floor(fx).astype(int)
    j0 = np.floor(fy).astype(int)
    tx, ty = fx - i0, fy - j0
    return (
        W[i0, j0] * (1 - tx) * (1 - ty)
        + W[i0 + 1, j0] * tx * (1 - ty)
        + W[i0, j0 + 1] * (1 - tx) * ty
        + W[i0 + 1, j0 + 1] * tx * ty
    )


def _tail_integral(weight, grid: ExteriorGrid, theta):
    """``int_{s_max}^inf e^{-(n-2)s} / w(s, theta) ds`` along each ray."""
    n, s_max = grid.n, grid.s_max
    base = math.exp(-(n - 2) * s_max) / (n - 2)
    if weight is None:
        return np.full(np.shape(theta), base)
    if callable(weight):
        # y = e^{-(n-2)(s - s_max)} maps the ray onto (0, 1]
        y = 0.5 * (_TAIL_NODES + 1.0)
        s = s_max - np.log(y) / (n - 2)
        th = np.asarray(theta)[..., None]
        vals = 1.0 / np.asarray(weight(s, th), dtype=float)
        return base * 0.5 * np.sum(_TAIL_WEIGHTS * vals, axis=-1)
    return base / _weight_at(weight, grid, np.ones_like(theta), theta)


@dataclass
class _Operator:
    stiffness: np.ndarray  # (9, m_s, m_theta+1) energy part, unknown rows xi_1..xi_m
    robin: np.ndarray  # (3, m_theta+1) edge mass on xi = 1, offsets dj = -1, 0, 1
    rhs: np.ndarray


def stiffness_operator(grid: ExteriorGrid, weight=None) -> np.ndarray:
    """Full 9-point stiffness ``(9, m_s + 1, m_theta + 1)`` of ``int w |D phi|^2 dx`` inside the grid."""
    n, ms, mt = grid.n, grid.m_s, grid.m_theta
    hx, hy = grid.h_xi, grid.h_theta
    S_link = grid.cone.link_factor
    xi_l = grid.xi[:-1][:, None]
    th_l = grid.theta[:-1][None, :]
    # basis derivative tables on the reference square, nodes (0,0),(1,0),(0,1),(1,1)
    corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
    Ke = np.zeros((4, 4, ms, mt))
    for gx in _GAUSS:
        for gy in _GAUSS:
            xi = xi_l + gx * hx
            th = th_l + gy * hy
            us, dus = grid.surface(th)
            L = grid.s_max - us
            s = us + xi * L
            a = dus * (1.0 - xi)
            w = _weight_at(weight, grid, xi, th)
            K = S_link * w * np.exp((n - 2) * s) * np.sin(th) ** (n - 2)
            A = K * (1 + a**2) / L
            B = -K * a
            C = K * L
            dq = 0.25 * hx * hy  # Gauss weight times Jacobian of the reference map
            dX, dY = [], []
            for cx, cy in corners:
                nx_ = (1 - gy) if cy == 0 else gy
                ny_ = (1 - gx) if cx == 0 else gx
                dX.append((1 if cx else -1) * nx_ / hx)
                dY.append((1 if cy else -1) * ny_ / hy)
            for p in range(4):
                for q in range(4):
                    Ke[p, q] += dq * (
                        A * dX[p] * dX[q] + B * (dX[p] * dY[q] + dY[p] * dX[q]) + C * dY[p] * dY[q]
                    )
    full = np.zeros((9, ms + 1, mt + 1))
    for p, (pi_, pj) in enumerate(corners):
        for q, (qi, qj) in enumerate(corners):
            k = (qi - pi_ + 1) * 3 + (qj - pj + 1)
            full[k, pi_ : pi_ + ms, pj : pj + mt] += Ke[p, q]
    return full


def _assemble(grid: ExteriorGrid, weight) -> _Operator:
    n, ms, mt = grid.n, grid.m_s, grid.m_theta
    hy = grid.h_theta
    S_link = grid.cone.link_factor
    full = stiffness_operator(grid, weight)
    # Robin term on xi = 1 from the exact radial tail
    robin = np.zeros((3, mt + 1))
    rhs_edge = np.zeros(mt + 1)
    for gy in _GAUSS:
        th = grid.theta[:-1] + gy * hy
        G = S_link * np.sin(th) ** (n - 2) / _tail_integral(weight, grid, th)
        Nv = (1 - gy, gy)
        wq = 0.5 * hy * G
        for p in range(2):
            rhs_edge[p : p + mt] += wq * Nv[p]
            for q in range(2):
                robin[q - p + 1, p : p + mt] += wq * Nv[p] * Nv[q]
    rhs = np.zeros((ms, mt + 1))
    rhs[-1] = rhs_edge
    return _Operator(stiffness=np.ascontiguousarray(full[:, 1:, :]), robin=robin, rhs=rhs)


def _system(op: _Operator) -> np.ndarray:
    S = op.stiffness.copy()
    for d, k in zip((-1, 0, 1), (3, 4, 5)):
        S[k, -1, :] += op.robin[d + 1]
    return S


@dataclass
class PotentialField:
    grid: ExteriorGrid
    phi: np.ndarray  # (m_s + 1, m_theta + 1), row 0 is the surface
    weight: object = None
    residual_norm: float = 0.0
    iterations: int = 0
    _op: _Operator | None = field(default=None, repr=False)

    def energy(self) -> float:
        """Weighted Dirichlet energy inside the grid plus the exact tail beyond it."""
        x = self.phi[1:]
        inner = float(np.sum(x * _backend.stencil_apply(self._op.stiffness, np.ascontiguousarray(x))))
        e = 1.0 - self.phi[-1]
        R = self._op.robin
        Me = R[1] * e
        Me[1:] += R[0, 1:] * e[:-1]
        Me[:-1] += R[2, :-1] * e[1:]
        return inner + float(np.dot(e, Me))

    def to_csv(self, path) -> None:
        write_field_csv(self, path)


def solve_mixed_bvp(
    grid: ExteriorGrid, weight=None, tol: float = 1e-10, maxiter: int | None = None
) -> PotentialField:
    """Solve ``div(w D phi) = 0`` outside the surface, ``phi = 0`` on it, ``phi -> 1`` far away.

    ``weight`` is ``None`` (flat), a callable ``w(s, theta)`` of log-radius and
    angle, or an array of nodal values on the grid. A callable is also used to
    build the exact tail beyond ``s_max``; nodal values are frozen at ``s_max``.
    """
    if weight is not None and not callable(weight):
        W = np.asarray(weight, dtype=float)
        if W.shape != (grid.m_s + 1, grid.m_theta + 1):
            raise DomainError(f"nodal weight has shape {W.shape}, grid needs {(grid.m_s + 1, grid.m_theta + 1)}")
        if not np.all(W > 0):
            raise DomainError("weight must be strictly positive")
    elif callable(weight):
        probe = _weight_at(weight, grid, grid.xi[:, None], grid.theta[None, :])
        if not np.all(probe > 0):
            raise DomainError("weight must be strictly positive")
    op = _assemble(grid, weight)
    S = _system(op)
    nodes = S.shape[1] * S.shape[2]
    if maxiter is None:
        maxiter = int(50 * math.sqrt(nodes))
    s = grid.node_s()
    us = s[0]
    x0 = 1.0 - np.exp(-(grid.n - 2) * (s[1:] - us[None, :]))
    x, it, rel = _backend.pcg_stencil(S, op.rhs, np.ascontiguousarray(x0), tol, maxiter)
    if not rel <= tol:
        raise SolverError(
            f"conjugate gradients stalled at relative residual {rel:.3e} after {it} iterations",
            rel,
            it,
        )
    phi = np.zeros((grid.m_s + 1, grid.m_theta + 1))
    phi[1:] = x
    return PotentialField(grid=grid, phi=phi, weight=weight, residual_norm=rel, iterations=it, _op=op)


@dataclass(frozen=True)
class CapacityResult:
    cap_energy: float
    cap_flux: float
    cap_extrapolated: float
    discrepancy: float
    alpha: float
    n: int
    resolution: tuple
    weighted: bool

    def as_dict(self) -> dict:
        return {
            "cap_energy": self.cap_energy,
            "cap_flux": self.cap_flux,
            "cap_extrapolated": self.cap_extrapolated,
            "discrepancy": self.discrepancy,
            "normalization_alpha": self.alpha,
            "n": self.n,
            "resolution": list(self.resolution),
            "weighted": self.weighted,
        }


def _surface_flux(fld: PotentialField) -> float:
    grid = fld.grid
    n, hx = grid.n, grid.h_xi
    th = grid.theta
    p = fld.phi
    dphi = (-25 * p[0] + 48 * p[1] - 36 * p[2] + 16 * p[3] - 3 * p[4]) / (12 * hx)
    us, dus = grid.surface(th)
    L = grid.s_max - us
    w = _weight_at(fld.weight, grid, np.zeros_like(th), th)
    A = grid.cone.link_factor * w * np.exp((n - 2) * us) * np.sin(th) ** (n - 2) * (1 + dus**2) / L
    return float(np.dot(simpson_weights(grid.m_theta, grid.h_theta), A * dphi))


def capacity_estimates(fld: PotentialField, companion: PotentialField | None = None) -> CapacityResult:
    """Energy and flux capacities, and a Richardson value from a half-resolution solve.

    The companion solve is done here unless supplied.
    """
    grid = fld.grid
    norm = (grid.n - 2) * grid.cone.alpha
    ce = fld.energy() / norm
    cf = _surface_flux(fld) / norm
    if companion is None and grid.m_s >= 8 and grid.m_theta >= 8 and grid.m_theta % 4 == 0:
        coarse = ExteriorGrid(grid.graph, grid.m_s // 2, grid.m_theta // 2, grid.s_max)
        w = fld.weight
        if w is not None and not callable(w):
            w = np.asarray(w)[::2, ::2]
        companion = solve_mixed_bvp(coarse, w)
    if companion is not None:
        cc = _surface_flux(companion) / norm
        cx = (4.0 * cf - cc) / 3.0
    else:
        cx = cf
    return CapacityResult(
        cap_energy=ce,
        cap_flux=cf,
        cap_extrapolated=cx,
        discrepancy=abs(ce - cf) / cf,
        alpha=grid.cone.alpha,
        n=grid.n,
        resolution=(grid.m_s, grid.m_theta),
        weighted=fld.weight is not None,
    )


def capacity(graph: RadialGraph, m_s: int = 256, m_theta: int | None = None, s_max=None, weight=None):
    """Convenience wrapper: solve and return the capacity estimates."""
    grid = ExteriorGrid(graph, m_s, m_theta, s_max)
    return capacity_estimates(solve_mixed_bvp(grid, weight))


# -- level-set volumes ------------------------------------------------------

def _level_log_radius(fld: PotentialField, levels) -> np.ndarray:
    """Log-radius where each ray crosses each level, shape (len(levels), m_theta + 1)."""
    grid = fld.grid
    n = grid.n
    s = grid.node_s()
    levels = np.asarray(levels, dtype=float)
    out = np.empty((levels.size, grid.m_theta + 1))
    for j in range(grid.m_theta + 1):
        col = fld.phi[:, j]
        if np.any(np.diff(col) <= 0):
            raise DomainError(
                f"potential is not increasing along the ray theta={grid.theta[j]:.4g}; refine the grid"
            )
        inv = PchipInterpolator(col, s[:, j])
        inside = levels <= col[-1]
        out[inside, j] = inv(levels[inside])
        # beyond the grid the ray carries the monopole tail 1 - phi ~ e^{-(n-2)s}
        out[~inside, j] = grid.s_max + np.log((1 - col[-1]) / (1 - levels[~inside])) / (n - 2)
    return out


def pfs_radius_profile(fld: PotentialField, levels=None) -> list[tuple[float, float]]:
    """Radius of the cap sector with the volume enclosed by ``{phi < t}``, per level t."""
    if fld.weight is not None:
        raise DomainError("the volume-radius profile is defined for the flat potential only")
    grid = fld.grid
    cone = grid.cone
    if levels is None:
        levels = np.round(np.arange(1, 20) * 0.05, 10)
    S = _level_log_radius(fld, levels)
    w = simpson_weights(grid.m_theta, grid.h_theta) * cone.link_factor * np.sin(grid.theta) ** (cone.n - 2)
    vol = (np.exp(cone.n * S) @ w) / cone.n
    R = (vol / cone.unit_sector_volume) ** (1.0 / cone.n)
    return [(float(t), float(r)) for t, r in zip(levels, R)]


def pfs_lower_bound(fld: PotentialField, t_max: float = 0.99, steps: int = 400) -> float:
    """``(1/(n-2)) int_0^1 R^{n-1} / R' dt`` from the volume-radius profile.

    The integrand is constant on the monopole tail, which closes the
    integral on ``[t_max, 1)``.
    """
    n = fld.grid.n
    t = np.linspace(0.0, t_max, steps + 1)
    prof = pfs_radius_profile(fld, t)
    R = np.array([r for _, r in prof])
    dR = np.gradient(R, t, edge_order=2)
    f = R ** (n - 1) / dR
    main = trapezoid(f, t)
    return float((main + f[-1] * (1.0 - t_max)) / (n - 2))


def write_field_csv(fld: PotentialField, path) -> None:
    grid = fld.grid
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["xi", "theta", "phi"])
        for i, x in enumerate(grid.xi):
            for j, t in enumerate(grid.theta):
                wr.writerow([repr(float(x)), repr(float(t)), repr(float(fld.phi[i, j]))])
