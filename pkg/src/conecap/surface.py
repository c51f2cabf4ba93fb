"""Axisymmetric radial graphs over the cone's link and their geometric functionals.

The hypersurface is ``{ rho(theta) * omega }`` where ``theta`` is the polar angle
of ``omega`` from the cone axis. It is stored through ``u = log(rho)`` on a
uniform grid of ``m + 1`` nodes covering ``[0, theta0]``. The normal ``N`` points
away from the enclosed region.

Derivatives use one ghost node per end: an even reflection at the axis (smooth
axisymmetric data is even in theta there) and, at the wall, the value of the
cubic through the last three nodes whose slope vanishes at ``theta0``. Both
closures keep second-difference accuracy at the end nodes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .cone import ConeSpec, DomainError


class CurvatureError(ValueError):
    """Raised when a mean-convex surface is required and H <= 0 somewhere."""

    def __init__(self, message: str, node: int, value: float):
        super().__init__(message)
        self.node = node
        self.value = value


def simpson_weights(m: int, h: float) -> np.ndarray:
    if m % 2 or m < 2:
        raise DomainError(f"Simpson quadrature needs an even number of intervals, got {m}")
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def derivatives(u: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """First and second theta-derivatives of nodal values with the Neumann ghost closures."""
    up = np.zeros_like(u)
    upp = np.empty_like(u)
    up[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    upp[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    upp[0] = 2 * (u[1] - u[0]) / h**2
    upp[-1] = (8 * (u[-2] - u[-1]) - (u[-3] - u[-1])) / (2 * h**2)
    return up, upp


@dataclass(frozen=True)
class RadialGraph:
    cone: ConeSpec
    u: np.ndarray
    theta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.ndim != 1:
            raise DomainError("u must be one-dimensional")
        m = u.size - 1
        if m < 4 or m % 2:
            raise DomainError(f"graph needs an even number m >= 4 of intervals, got {m}")
        if not np.all(np.isfinite(u)):
            raise DomainError("log-radius values must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        th = np.linspace(0.0, self.cone.theta0, m + 1)
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)
        # gross violations of the orthogonality condition at either end
        slopes = self.end_slopes()
        up, _ = derivatives(u, self.h)
        tol = 1e-2 * (1.0 + float(np.max(np.abs(up))))
        if abs(slopes[0]) > tol or abs(slopes[1]) > tol:
            raise DomainError(
                f"profile does not meet the axis/wall orthogonally (end slopes {slopes})"
            )

    # -- constructors -------------------------------------------------
    @classmethod
    def cap(cls, cone: ConeSpec, r: float, m: int = 128) -> "RadialGraph":
        if not r > 0:
            raise DomainError(f"cap radius must be positive, got {r}")
        return cls(cone, np.full(m + 1, math.log(r)))

    @classmethod
    def from_rho(cls, cone: ConeSpec, rho, m: int = 128) -> "RadialGraph":
        """Sample a callable ``rho(theta)`` on the uniform grid."""
        th = np.linspace(0.0, cone.theta0, m + 1)
        vals = np.asarray(rho(th), dtype=float)
        if np.any(vals <= 0):
            raise DomainError("radial graph must have positive radius (star-shaped)")
        return cls(cone, np.log(vals))

    @classmethod
    def perturbed_cap(
        cls, cone: ConeSpec, r: float, eps: float, mode: int = 2, m: int = 128
    ) -> "RadialGraph":
        """``rho = r (1 + eps P_mode(cos(theta * pi / (2 theta0))))`` for even ``mode``.

        The angle is stretched so the wall sits at pi/2, where every even
        Legendre polynomial is flat; on the half-space this is the plain
        Legendre perturbation.
        """
        if mode % 2:
            raise DomainError(f"perturbation mode must be even, got {mode}")
        if abs(eps) >= 1.0:
            raise DomainError(f"|eps| must be < 1, got {eps}")
        scale = math.pi / (2 * cone.theta0)
        return cls.from_rho(
            cone, lambda t: r * (1.0 + eps * special.eval_legendre(mode, np.cos(scale * t))), m
        )

    # -- basic views --------------------------------------------------
    @property
    def m(self) -> int:
        return self.u.size - 1

    @property
    def h(self) -> float:
        return self.cone.theta0 / self.m

    @property
    def rho(self) -> np.ndarray:
        return np.exp(self.u)

    def scaled(self, lam: float) -> "RadialGraph":
        return RadialGraph(self.cone, self.u + math.log(lam))

    def with_u(self, u: np.ndarray) -> "RadialGraph":
        return RadialGraph(self.cone, u)

    def end_slopes(self) -> tuple[float, float]:
        """One-sided second-order du/dtheta at the axis and at the wall."""
        u, h = self.u, self.h
        s0 = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
        s1 = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
        return float(s0), float(s1)

    def link_weights(self) -> np.ndarray:
        """Simpson weights for ``dmu_link = |S^{n-2}| sin^{n-2} dtheta``.

        Rescaled to sum to alpha exactly, so caps integrate without error.
        """
        n = self.cone.n
        w = simpson_weights(self.m, self.h) * np.sin(self.theta) ** (n - 2)
        return w * (self.cone.alpha / w.sum())

    def derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        return derivatives(self.u, self.h)

    def curvature_terms(self):
        """Return ``(up, upp, v, D)`` where ``D = rho * H * v``."""
        n = self.cone.n
        up, upp = self.derivatives()
        v2 = 1.0 + up**2
        ct = np.empty_like(up)
        ct[1:] = up[1:] / np.tan(self.theta[1:])
        ct[0] = upp[0]
        D = (n - 1) - upp / v2 - (n - 2) * ct
        return up, upp, np.sqrt(v2), D

    def principal_curvatures(self) -> tuple[np.ndarray, np.ndarray]:
        """Meridian curvature and the (n-2)-fold rotational curvature at each node."""
        up, upp = self.derivatives()
        v = np.sqrt(1.0 + up**2)
        rho = self.rho
        k1 = (1.0 + up**2 - upp) / (rho * v**3)
        krot = np.empty_like(up)
        krot[1:] = (1.0 - up[1:] / np.tan(self.theta[1:])) / (v[1:] * rho[1:])
        krot[0] = (1.0 - upp[0]) / rho[0]
        return k1, krot

    def to_csv(self, path) -> None:
        write_profile_csv(self, path)


def mean_curvature_field(graph: RadialGraph, require_positive: bool = False) -> np.ndarray:
    """Mean curvature (sum of principal curvatures) at every node."""
    _, _, v, D = graph.curvature_terms()
    H = D / (v * graph.rho)
    if require_positive:
        i = int(np.argmin(H))
        if not H[i] > 0:
            raise CurvatureError(
                f"mean curvature not positive at node {i} (theta={graph.theta[i]:.6g}, H={H[i]:.6g})",
                i,
                float(H[i]),
            )
    return H


def umbilicity_field(graph: RadialGraph) -> np.ndarray:
    """``(n-1)|A|^2 - H^2`` at each node; non-negative, zero only where umbilical."""
    n = graph.cone.n
    k1, krot = graph.principal_curvatures()
    H = k1 + (n - 2) * krot
    A2 = k1**2 + (n - 2) * krot**2
    return (n - 1) * A2 - H**2


def umbilicity_residual(graph: RadialGraph) -> float:
    return float(np.max(np.abs(umbilicity_field(graph))))


@dataclass(frozen=True)
class SurfaceFunctionals:
    area: float
    volume: float
    total_mean_curvature: float
    min_H: float
    umbilicity_residual: float


def functionals(graph: RadialGraph) -> SurfaceFunctionals:
    n = graph.cone.n
    w = graph.link_weights()
    up, _, v, D = graph.curvature_terms()
    rho = graph.rho
    area = float(np.dot(w, rho ** (n - 1) * v))
    volume = float(np.dot(w, rho**n)) / n
    # H dsigma = rho^{n-2} (rho H v) dmu_link
    total = float(np.dot(w, rho ** (n - 2) * D))
    H = D / (v * rho)
    return SurfaceFunctionals(
        area=area,
        volume=volume,
        total_mean_curvature=total,
        min_H=float(H.min()),
        umbilicity_residual=umbilicity_residual(graph),
    )


def write_profile_csv(graph: RadialGraph, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["theta", "rho"])
        for t, r in zip(graph.theta, graph.rho):
            wr.writerow([repr(float(t)), repr(float(r))])


def read_profile_csv(path, cone: ConeSpec) -> RadialGraph:
    """Read a two-column (theta, rho) profile sampled on a uniform grid over [0, theta0]."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["theta", "rho"]:
        raise DomainError(f"{path}: expected header 'theta,rho'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise DomainError(f"{path}: malformed row ({exc})") from None
    th, rho = data[:, 0], data[:, 1]
    m = th.size - 1
    expected = np.linspace(0.0, cone.theta0, m + 1)
    if m < 4 or np.max(np.abs(th - expected)) > 1e-9 * max(1.0, cone.theta0):
        raise DomainError(f"{path}: theta column must be a uniform grid on [0, {cone.theta0}]")
    if np.any(rho <= 0):
        raise DomainError(f"{path}: rho must be positive")
    return RadialGraph(cone, np.log(rho))
