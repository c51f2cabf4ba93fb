"""Rotationally symmetric convex cones and their round-cap sectors.

A cone is described by its dimension ``n`` and half-angle ``theta0`` measured
from the symmetry axis. ``theta0 = pi/2`` is the half-space. All the closed
forms here serve as oracles for the discrete solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate, special


class DomainError(ValueError):
    """Raised when an input lies outside the admissible geometric domain."""


def sphere_area(k: int) -> float:
    """Volume of the unit k-sphere S^k embedded in R^{k+1}."""
    if k < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / special.gamma((k + 1) / 2.0)


def _check(n: int, theta0: float) -> None:
    if int(n) != n or n < 3:
        raise DomainError(f"dimension n must be an integer >= 3, got {n}")
    if not (0.0 < theta0 <= math.pi / 2 + 1e-15):
        raise DomainError(
            f"half-angle must lie in (0, pi/2] for a convex cone, got {theta0}"
        )


def solid_angle(n: int, theta0: float) -> float:
    """Link measure ``|S^{n-2}| * int_0^theta0 sin^{n-2}`` of the cone.

    This is the (n-1)-dimensional area of the cone's cross-section of the unit
    sphere, so a cap of radius r has area ``alpha * r**(n-1)``.
    """
    _check(n, theta0)
    val, _ = integrate.quad(
        lambda t: math.sin(t) ** (n - 2), 0.0, theta0, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return sphere_area(n - 2) * val


@dataclass(frozen=True)
class ConeSpec:
    n: int
    theta0: float
    alpha: float = field(init=False, repr=False)

    def __post_init__(self):
        _check(self.n, self.theta0)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "theta0", min(float(self.theta0), math.pi / 2))
        object.__setattr__(self, "alpha", solid_angle(self.n, self.theta0))

    @classmethod
    def from_degrees(cls, n: int, theta0_deg: float) -> "ConeSpec":
        if not (0.0 < theta0_deg <= 90.0):
            raise DomainError(
                f"half-angle must lie in (0, 90] degrees for a convex cone, got {theta0_deg}"
            )
        return cls(n, math.radians(theta0_deg))

    @property
    def is_half_space(self) -> bool:
        return abs(self.theta0 - math.pi / 2) < 1e-14

    @property
    def link_factor(self) -> float:
        """``|S^{n-2}|``, the measure of the rotation orbit at unit distance from the axis."""
        return sphere_area(self.n - 2)

    @property
    def unit_sector_volume(self) -> float:
        """Volume of the cone truncated at radius one."""
        return self.alpha / self.n

    @property
    def h_limit(self) -> float:
        """Limit value ``(n-1) alpha^{1/(n-1)}`` of the scale-invariant ratio I/Area^{(n-2)/(n-1)}."""
        return (self.n - 1) * self.alpha ** (1.0 / (self.n - 1))


@dataclass(frozen=True)
class CapSector:
    cone: ConeSpec
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"cap radius must be positive, got {self.r}")


def cap_metrics(sector: CapSector) -> dict:
    """Closed-form area, volume, total mean curvature and capacity of a cap sector."""
    n, a, r = sector.cone.n, sector.cone.alpha, sector.r
    return {
        "area": a * r ** (n - 1),
        "volume": a * r**n / n,
        "total_mean_curvature": (n - 1) * a * r ** (n - 2),
        "capacity": r ** (n - 2),
    }


def isoperimetric_bound(cone: ConeSpec, volume: float) -> float:
    """Lower bound for the area of a free-boundary hypersurface enclosing ``volume``."""
    if not volume > 0:
        raise DomainError(f"volume must be positive, got {volume}")
    n = cone.n
    return n * cone.unit_sector_volume ** (1.0 / n) * volume ** ((n - 1) / n)


def volume_radius(cone: ConeSpec, volume: float) -> float:
    """Radius of the cap sector with the given enclosed volume."""
    return (volume / cone.unit_sector_volume) ** (1.0 / cone.n)
