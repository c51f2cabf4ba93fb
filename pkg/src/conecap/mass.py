"""Conformally flat half-space metrics ``g = u^{4/(n-2)} delta`` outside a free-boundary hypersurface.

Orientation: ``N`` on Sigma and ``mu`` on the flat wall S both point into the
exterior region M. With this choice the boundary mean curvature
``H_g = u^{-n/(n-2)} (2(n-1)/(n-2) D u . normal + H u)`` vanishes on the
Schwarzschild horizon and on the wall.

Mass is normalized so that the half Schwarzschild factor
``u = 1 + (m/2) |x|^{2-n}`` has mass exactly m, i.e. the flux integral is
divided by ``(n-1) * |S^{n-1}| / 2``, the half-sphere measure.

Derivatives of u are fourth-order finite differences in the mapped grid
coordinates ``(xi, theta)`` followed by the chain rule; at the axis the data is
extended by even reflection.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .capacity import ExteriorGrid, capacity, solve_mixed_bvp, capacity_estimates
from .cone import ConeSpec, DomainError, sphere_area
from .surface import RadialGraph, functionals, mean_curvature_field, simpson_weights


def _fd_weights(offsets, deriv: int) -> np.ndarray:
    offs = np.asarray(offsets, dtype=float)
    A = np.vander(offs, len(offs), increasing=True).T
    rhs = np.zeros(len(offs))
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(A, rhs)


def diff_matrix(npts: int, h: float, deriv: int, even_start: bool = False) -> np.ndarray:
    """Dense fourth-order difference matrix on a uniform grid.

    Interior rows are centered five-point; end rows use skewed stencils, or an
    even reflection about the first node when ``even_start``.
    """
    if npts < 6:
        raise DomainError(f"need at least 6 nodes for fourth-order differences, got {npts}")
    m = npts - 1
    width = 5 if deriv == 1 else 6
    D = np.zeros((npts, npts))
    for i in range(npts):
        if 2 <= i <= m - 2 or (even_start and i < 2):
            offs = np.arange(-2, 3)
        elif i < 2:
            offs = np.arange(-i, -i + width)
        else:
            offs = np.arange(m - i - width + 1, m - i + 1)
        w = _fd_weights(offs, deriv) / h**deriv
        for o, wt in zip(offs, w):
            D[i, abs(i + o)] += wt
    return D


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class HalfSchwarzschild:
    n: int
    mass: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"dimension must be an integer >= 3, got {self.n}")
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")

    @property
    def horizon_radius(self) -> float:
        return (self.mass / 2.0) ** (1.0 / (self.n - 2))

    def u(self, s, theta=None):
        """Conformal factor as a function of log-radius (theta is ignored)."""
        return 1.0 + 0.5 * self.mass * np.exp(-(self.n - 2) * np.asarray(s, dtype=float))

    def horizon(self, m: int = 128) -> RadialGraph:
        return RadialGraph.cap(ConeSpec(self.n, math.pi / 2), self.horizon_radius, m)

    def grid(self, m_s: int = 256, m_theta: int = 128, s_max: float | None = None) -> ExteriorGrid:
        return ExteriorGrid(self.horizon(m_theta), m_s, m_theta, s_max)


@dataclass(frozen=True)
class ConformalFactorField:
    grid: ExteriorGrid
    u: np.ndarray  # (m_s + 1, m_theta + 1), row 0 on Sigma
    func: object = field(default=None, compare=False)  # optional u(s, theta)

    def __post_init__(self):
        if not self.grid.cone.is_half_space:
            raise DomainError("conformal fields live on the half-space (theta0 = 90 degrees)")
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.grid.m_s + 1, self.grid.m_theta + 1):
            raise DomainError(f"u has shape {u.shape}, grid needs {(self.grid.m_s + 1, self.grid.m_theta + 1)}")
        if not np.all(np.isfinite(u)) or not np.all(u > 0):
            raise DomainError("conformal factor must be finite and positive")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_function(cls, grid: ExteriorGrid, func) -> "ConformalFactorField":
        th = grid.theta[None, :]
        vals = np.asarray(func(grid.node_s(), th), dtype=float) * np.ones((grid.m_s + 1, grid.m_theta + 1))
        return cls(grid, vals, func)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def sigma_values(self) -> np.ndarray:
        return self.u[0]

    @property
    def wall_values(self) -> np.ndarray:
        return self.u[:, -1]

    @property
    def u_min(self) -> float:
        """Infimum of u on Sigma."""
        return float(self.u[0].min())


def schwarzschild_field(model: HalfSchwarzschild, grid: ExteriorGrid) -> ConformalFactorField:
    if grid.n != model.n:
        raise DomainError(f"grid dimension {grid.n} does not match model dimension {model.n}")
    u_sigma = grid.graph.u
    if np.max(np.abs(u_sigma - math.log(model.horizon_radius))) > 1e-9:
        raise DomainError("grid surface is not the horizon cap of the model")
    return ConformalFactorField.from_function(grid, model.u)


# ------------------------------------------------------------ derivatives


@dataclass(frozen=True)
class _Derivs:
    s: np.ndarray
    u_s: np.ndarray
    u_theta: np.ndarray
    laplacian: np.ndarray


def _derivatives(fld: ConformalFactorField) -> _Derivs:
    grid, U, n = fld.grid, fld.u, fld.n
    th = grid.theta
    us, dus = grid.surface(th)
    d2us = grid.surface_second(th)
    L = grid.s_max - us
    xi = grid.xi[:, None]
    Dx1 = diff_matrix(grid.m_s + 1, grid.h_xi, 1)
    Dx2 = diff_matrix(grid.m_s + 1, grid.h_xi, 2)
    Dt1 = diff_matrix(grid.m_theta + 1, grid.h_theta, 1, even_start=True)
    Dt2 = diff_matrix(grid.m_theta + 1, grid.h_theta, 2, even_start=True)
    Ux, Uxx = Dx1 @ U, Dx2 @ U
    Ut, Utt = U @ Dt1.T, U @ Dt2.T
    Uxt = Ux @ Dt1.T
    # inverse map xi(s, theta) = (s - us) / L
    xs = 1.0 / L
    xt = -dus * (1.0 - xi) / L
    xtt = -(1.0 - xi) * (d2us / L + 2.0 * dus**2 / L**2)
    u_s = Ux * xs
    u_ss = Uxx * xs**2
    u_t = Ux * xt + Ut
    u_tt = Uxx * xt**2 + 2.0 * Uxt * xt + Utt + Ux * xtt
    rot = np.empty_like(u_t)
    rot[:, 1:] = u_t[:, 1:] / np.tan(th[1:])
    rot[:, 0] = u_tt[:, 0]
    s = grid.node_s()
    lap = np.exp(-2.0 * s) * (u_ss + (n - 2) * u_s + u_tt + (n - 2) * rot)
    return _Derivs(s=s, u_s=u_s, u_theta=u_t, laplacian=lap)


def _sigma_graph(grid: ExteriorGrid) -> RadialGraph:
    g = grid.graph
    if g.m == grid.m_theta:
        return g
    return RadialGraph(g.cone, grid.surface(grid.theta)[0])


def _normal_derivatives(fld: ConformalFactorField, d: _Derivs):
    grid = fld.grid
    _, dus = grid.surface(grid.theta)
    s0 = d.s[0]
    v = np.sqrt(1.0 + dus**2)
    dN = np.exp(-s0) * (d.u_s[0] - dus * d.u_theta[0]) / v
    # mu = +e_n on the wall, i.e. towards smaller theta
    dmu = -np.exp(-d.s[:, -1]) * d.u_theta[:, -1]
    return dN, dmu


@dataclass(frozen=True)
class ConformalCurvatures:
    R_g: np.ndarray  # nodes, rows 1..m_s-1 are interior
    laplacian: np.ndarray
    H_g_sigma: np.ndarray
    H_g_wall: np.ndarray  # rows 1..m_s-1 of the wall column
    dN_u: np.ndarray
    dmu_u: np.ndarray

    def interior_max_abs_R(self) -> float:
        return float(np.max(np.abs(self.R_g[1:-1])))


def conformal_curvatures(fld: ConformalFactorField) -> ConformalCurvatures:
    n, U = fld.n, fld.u
    d = _derivatives(fld)
    R = -(4.0 * (n - 1) / (n - 2)) * d.laplacian * U ** (-(n + 2) / (n - 2))
    dN, dmu = _normal_derivatives(fld, d)
    H = mean_curvature_field(_sigma_graph(fld.grid))
    c = 2.0 * (n - 1) / (n - 2)
    Hs = U[0] ** (-n / (n - 2)) * (c * dN + H * U[0])
    Hw = U[:, -1] ** (-n / (n - 2)) * (c * dmu)
    return ConformalCurvatures(R, d.laplacian, Hs, Hw[1:-1], dN, dmu)


# -------------------------------------------------------------- integrals


def _omega(n: int) -> float:
    return sphere_area(n - 1)


def _volume_weights(grid: ExteriorGrid, s: np.ndarray) -> np.ndarray:
    n = grid.n
    us, _ = grid.surface(grid.theta)
    L = grid.s_max - us
    wx = simpson_weights(grid.m_s, grid.h_xi)[:, None]
    wt = simpson_weights(grid.m_theta, grid.h_theta)[None, :]
    return wx * wt * grid.cone.link_factor * np.exp(n * s) * np.sin(grid.theta) ** (n - 2) * L


def _sigma_weights(grid: ExteriorGrid) -> np.ndarray:
    g = _sigma_graph(grid)
    _, _, v, _ = g.curvature_terms()
    return g.link_weights() * g.rho ** (g.cone.n - 1) * v


def _wall_weights(grid: ExteriorGrid, s_wall: np.ndarray) -> np.ndarray:
    n = grid.n
    L = grid.s_max - grid.surface(grid.theta[-1])[0]
    return simpson_weights(grid.m_s, grid.h_xi) * L * grid.cone.link_factor * np.exp((n - 1) * s_wall)


def identity_terms(fld: ConformalFactorField) -> dict:
    """Volume and surface terms of the mass identity, plus the divergence-theorem mass."""
    grid, n, U = fld.grid, fld.n, fld.u
    om = _omega(n)
    d = _derivatives(fld)
    int_lap = float(np.sum(_volume_weights(grid, d.s) * d.laplacian))
    H = mean_curvature_field(_sigma_graph(grid))
    wS = _sigma_weights(grid)
    dN, dmu = _normal_derivatives(fld, d)
    ww = _wall_weights(grid, d.s[:, -1])
    # R_g u^{(n+2)/(n-2)} = -(4(n-1)/(n-2)) lap u
    volume = -(4.0 / ((n - 2) * om)) * int_lap
    sigma = (2.0 / ((n - 1) * om)) * float(np.dot(wS, H * U[0]))
    wall = 0.0  # flat wall: H = 0
    divergence = -(4.0 / ((n - 2) * om)) * (int_lap + float(np.dot(wS, dN)) + float(np.dot(ww, dmu)))
    return {"volume": volume, "sigma": sigma, "wall": wall, "divergence": divergence}


def mass_identity(fld: ConformalFactorField, sigma: RadialGraph | None = None) -> float:
    """Volume scalar-curvature term plus the boundary ``H u`` terms (Sigma minimal in g assumed)."""
    _check_sigma(fld, sigma)
    t = identity_terms(fld)
    return t["volume"] + t["sigma"] + t["wall"]


@dataclass(frozen=True)
class ExpansionFit:
    mass: float
    subleading: float
    residual: float  # relative weighted rms of the fit
    confident: bool


def mass_from_expansion(fld: ConformalFactorField, outer_fraction: float = 0.2,
                        residual_threshold: float = 1e-2) -> ExpansionFit:
    """Fit ``u - 1 = a r^{2-n} + b r^{1-n}`` on the outer rings; the mass is ``2a``."""
    grid, n = fld.grid, fld.n
    rows = grid.xi >= 1.0 - outer_fraction - 1e-12
    s = grid.node_s()[rows]
    r = np.exp(s)
    y = (fld.u[rows] - 1.0).ravel()
    X = np.stack([(r ** (2 - n)).ravel(), (r ** (1 - n)).ravel()], axis=1)
    w = np.broadcast_to(
        simpson_weights(grid.m_theta, grid.h_theta) * np.sin(grid.theta) ** (n - 2), r.shape
    ).ravel()
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    res = y - X @ coef
    scale = math.sqrt(float(np.sum(w * y**2)))
    rel = math.sqrt(float(np.sum(w * res**2))) / scale if scale > 0 else 0.0
    return ExpansionFit(2.0 * float(coef[0]), float(coef[1]), rel, rel <= residual_threshold)


def _extrapolate(r1: float, m1: float, r2: float, m2: float) -> float:
    # m(r) = m_inf + c / r
    return (r2 * m2 - r1 * m1) / (r2 - r1)


def _stations(grid: ExteriorGrid) -> tuple[float, float]:
    s2 = grid.s_max
    s1 = s2 + math.log(0.8)
    if s1 < float(grid.graph.u.max()) + 1.0:
        raise DomainError("outer margin too small for the mass flux stations; raise s_max")
    return s1, s2


def mass_flux(fld: ConformalFactorField) -> float:
    """Hemisphere flux of the conformal metric at two outer radii, extrapolated in 1/r.

    For ``g = U^q delta`` with ``q = 4/(n-2)`` the integrand reduces to
    ``-(n-1) q U^{q-1} U_r``, and the wall term vanishes because g is diagonal.
    """
    grid, n = fld.grid, fld.n
    q = 4.0 / (n - 2)
    om = _omega(n)
    s_nodes = grid.node_s()
    wl = _sigma_graph(grid).link_weights()
    vals = []
    stations = _stations(grid)
    for st in stations:
        U = np.empty(grid.m_theta + 1)
        Us = np.empty(grid.m_theta + 1)
        for j in range(grid.m_theta + 1):
            sp = CubicSpline(s_nodes[:, j], fld.u[:, j])
            U[j], Us[j] = sp(st), sp(st, 1)
        r = math.exp(st)
        Ur = Us / r
        vals.append(-(q / om) * r ** (n - 1) * float(np.dot(wl, U ** (q - 1) * Ur)))
    (s1, s2), (m1, m2) = stations, vals
    return _extrapolate(math.exp(s1), m1, math.exp(s2), m2)


def conformal_metric(func, n: int):
    """Cartesian metric ``x -> u(x)^{4/(n-2)} I`` of an axisymmetric factor ``u(s, theta)``.

    The symmetry axis is the last coordinate.
    """
    q = 4.0 / (n - 2)

    def g(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        th = np.arccos(np.clip(x[..., -1] / r, -1.0, 1.0))
        u = np.asarray(func(np.log(r), th), dtype=float)
        return (u**q)[..., None, None] * np.eye(n)

    return g


def mass_flux_general(metric, n: int, s_outer: float, m_theta: int = 128, fd_step: float = 1e-4) -> float:
    """Mass from the full coordinate flux ``(g_ij,j - g_jj,i) x_i / r`` plus the wall term ``g_{beta n} x_beta / r``.

    Slow validation path for metrics invariant under rotations about the
    last axis; derivatives by central differences of step ``fd_step * r``.
    """
    om = _omega(n)
    th = np.linspace(0.0, math.pi / 2, m_theta + 1)
    wl = simpson_weights(m_theta, th[1]) * sphere_area(n - 2) * np.sin(th) ** (n - 2)
    out = []
    stations = (s_outer + math.log(0.8), s_outer)
    for st in stations:
        r = math.exp(st)
        x = np.zeros((m_theta + 1, n))
        x[:, 0] = r * np.sin(th)
        x[:, -1] = r * np.cos(th)
        dx = fd_step * r
        dg = np.empty((m_theta + 1, n, n, n))  # [..., k, i, j] = d_k g_ij
        for k in range(n):
            e = np.zeros(n)
            e[k] = dx
            dg[:, k] = (metric(x + e) - metric(x - e)) / (2 * dx)
        div = np.einsum("pjij->pi", dg)  # sum_j d_j g_ij
        tr = np.einsum("pijj->pi", dg)  # sum_j d_i g_jj
        F = np.einsum("pi,pi->p", div - tr, x / r)
        bulk = r ** (n - 1) * float(np.dot(wl, F))
        xw = np.zeros((1, n))
        xw[0, 0] = r
        wall = sphere_area(n - 2) * r ** (n - 2) * float(metric(xw)[0, 0, n - 1])
        out.append((bulk + wall) / ((n - 1) * om))
    return _extrapolate(math.exp(stations[0]), out[0], math.exp(stations[1]), out[1])


# ------------------------------------------------------------ admissibility


@dataclass(frozen=True)
class Admissibility:
    scalar_curvature_nonnegative: bool  # condition i: R_g >= 0, i.e. lap u <= 0
    euclidean_sigma_mean_convex_wall_minimal: bool  # condition ii
    g_sigma_minimal_wall_mean_convex: bool  # condition iii
    equality_system: bool  # lap u = 0, D_mu u = 0, u = 2 on Sigma
    min_R_g: float
    max_abs_R_g: float
    max_abs_H_g_sigma: float
    min_H_g_wall: float
    max_abs_H_g_wall: float
    negative_R_nodes: int

    @property
    def in_M(self) -> bool:
        return (
            self.scalar_curvature_nonnegative
            and self.euclidean_sigma_mean_convex_wall_minimal
            and self.g_sigma_minimal_wall_mean_convex
        )

    def failed(self) -> list[str]:
        out = []
        if not self.scalar_curvature_nonnegative:
            out.append("i: R_g < 0 (lap u > 0) at %d interior nodes" % self.negative_R_nodes)
        if not self.euclidean_sigma_mean_convex_wall_minimal:
            out.append("ii: Sigma not mean convex in the flat metric")
        if not self.g_sigma_minimal_wall_mean_convex:
            out.append("iii: Sigma not minimal or wall not mean convex in g")
        return out


def admissibility(fld: ConformalFactorField, tol: float = 1e-5, curv: ConformalCurvatures | None = None) -> Admissibility:
    """Check membership in the admissible class node by node, each condition separately."""
    c = conformal_curvatures(fld) if curv is None else curv
    R = c.R_g[1:-1]
    Hsig = mean_curvature_field(_sigma_graph(fld.grid))
    i_ok = bool(np.all(R >= -tol))
    ii_ok = bool(np.all(Hsig > 0))  # the flat wall is always minimal
    iii_ok = bool(np.all(np.abs(c.H_g_sigma) <= tol) and np.all(c.H_g_wall >= -tol))
    eq = bool(
        np.all(np.abs(R) <= tol)
        and np.all(np.abs(c.dmu_u[1:-1]) <= tol)
        and np.all(np.abs(fld.u[0] - 2.0) <= tol)
    )
    return Admissibility(
        scalar_curvature_nonnegative=i_ok,
        euclidean_sigma_mean_convex_wall_minimal=ii_ok,
        g_sigma_minimal_wall_mean_convex=iii_ok,
        equality_system=eq,
        min_R_g=float(R.min()),
        max_abs_R_g=float(np.abs(R).max()),
        max_abs_H_g_sigma=float(np.abs(c.H_g_sigma).max()),
        min_H_g_wall=float(c.H_g_wall.min()),
        max_abs_H_g_wall=float(np.abs(c.H_g_wall).max()),
        negative_R_nodes=int(np.sum(R < -tol)),
    )


# ----------------------------------------------------------------- report

INEQUALITIES = ("mass_vs_capacity", "mass_vs_volume", "capacity_comparison", "mass_vs_mean_curvature", "mass_vs_capacity_weighted", "mass_vs_volume_weighted")


@dataclass
class PenroseReport:
    n: int
    mass: float  # the value used in the margins (expansion fit)
    mass_expansion: float
    mass_expansion_residual: float
    mass_flux: float
    mass_identity: float
    mass_divergence: float
    cap_flat: float
    cap_conformal: float
    vol_term: float
    total_mean_curvature: float
    u_min: float
    margins: dict
    verdicts: dict
    flags: dict
    diagnostics: dict
    tolerances: dict

    @property
    def violated(self) -> bool:
        return any(v == "violated" for v in self.verdicts.values())

    def to_dict(self) -> dict:
        """Flat JSON-ready mapping."""
        d = {}
        for k, v in asdict(self).items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    d[f"{k[:-1] if k.endswith('s') else k}_{kk}"] = vv
            else:
                d[k] = v
        d["violated"] = self.violated
        return d


def _check_sigma(fld: ConformalFactorField, sigma: RadialGraph | None) -> None:
    if sigma is None:
        return
    g = fld.grid.graph
    if sigma.cone != g.cone or sigma.u.shape != g.u.shape or np.max(np.abs(sigma.u - g.u)) > 1e-12:
        raise DomainError("sigma does not match the surface the field's grid was built on")


def _verdict(margin: float, scale: float, rel_tol: float, asserted: bool) -> str:
    if not asserted:
        return "not asserted"
    if abs(margin) <= rel_tol * scale:
        return "equality within tol"
    return "holds" if margin > 0 else "violated"


def penrose_check(fld: ConformalFactorField, sigma: RadialGraph | None = None, rel_tol: float = 1e-2,
                  admissible_tol: float = 1e-5) -> PenroseReport:
    """All mass estimates, both capacities and the margins of the mass inequalities.

    Margins are reported for every field. An inequality is asserted only when
    its hypotheses hold: membership in the admissible class, and for the two
    sharp forms also ``min u >= 2`` on Sigma.
    """
    _check_sigma(fld, sigma)
    grid, n = fld.grid, fld.n
    graph = grid.graph
    om = _omega(n)
    fit = mass_from_expansion(fld)
    mflux = mass_flux(fld)
    terms = identity_terms(fld)
    m_id = terms["volume"] + terms["sigma"] + terms["wall"]
    m = fit.mass

    cap_flat = capacity(graph, grid.m_s, grid.m_theta, grid.s_max).cap_extrapolated
    if fld.func is not None:
        f = fld.func
        weight = lambda s, th: np.asarray(f(s, th), dtype=float) ** 2  # noqa: E731
    else:
        weight = fld.u**2
    cap_conf = capacity_estimates(solve_mixed_bvp(grid, weight)).cap_extrapolated

    fn = functionals(graph)
    half_ball = graph.cone.unit_sector_volume
    vol_term = 2.0 * (fn.volume / half_ball) ** ((n - 2) / n)
    I = fn.total_mean_curvature
    ub = fld.u_min

    curv = conformal_curvatures(fld)
    adm = admissibility(fld, admissible_tol, curv)
    margins = {
        "mass_vs_capacity": m - cap_conf,
        "mass_vs_volume": m - vol_term,
        "capacity_comparison": (cap_flat + m / 2) - cap_conf,
        "mass_vs_mean_curvature": m - (2 * ub / ((n - 1) * om)) * I,
        "mass_vs_capacity_weighted": m - (2 * ub / (2 + ub)) * cap_conf,
        "mass_vs_volume_weighted": m - ub * vol_term / 2,
    }
    sharp = adm.in_M and ub >= 2.0 - admissible_tol
    asserted = {
        "mass_vs_capacity": sharp,
        "mass_vs_volume": sharp,
        "capacity_comparison": adm.in_M,
        "mass_vs_mean_curvature": adm.in_M,
        "mass_vs_capacity_weighted": adm.in_M,
        "mass_vs_volume_weighted": adm.in_M,
    }
    scale = max(abs(m), 1e-12)
    verdicts = {k: _verdict(margins[k], scale, rel_tol, asserted[k]) for k in INEQUALITIES}
    flags = {
        "u_min_ge_2": bool(ub >= 2.0 - admissible_tol),
        "M_i": adm.scalar_curvature_nonnegative,
        "M_ii": adm.euclidean_sigma_mean_convex_wall_minimal,
        "M_iii": adm.g_sigma_minimal_wall_mean_convex,
        "in_M": adm.in_M,
        "equality_system": adm.equality_system,
        "expansion_fit_confident": fit.confident,
    }
    diagnostics = {
        "max_abs_R_g": adm.max_abs_R_g,
        "min_R_g": adm.min_R_g,
        "max_abs_H_g_sigma": adm.max_abs_H_g_sigma,
        "max_abs_H_g_wall": adm.max_abs_H_g_wall,
        "identity_volume_term": terms["volume"],
        "identity_sigma_term": terms["sigma"],
        "expansion_subleading": fit.subleading,
    }
    return PenroseReport(
        n=n,
        mass=m,
        mass_expansion=fit.mass,
        mass_expansion_residual=fit.residual,
        mass_flux=mflux,
        mass_identity=m_id,
        mass_divergence=terms["divergence"],
        cap_flat=cap_flat,
        cap_conformal=cap_conf,
        vol_term=vol_term,
        total_mean_curvature=I,
        u_min=ub,
        margins=margins,
        verdicts=verdicts,
        flags=flags,
        diagnostics=diagnostics,
        tolerances={"relative": rel_tol, "admissible": admissible_tol},
    )
