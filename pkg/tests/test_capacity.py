import math

import numpy as np
import pytest

from conecap.capacity import (
    ExteriorGrid,
    SolverError,
    capacity,
    capacity_estimates,
    pfs_lower_bound,
    pfs_radius_profile,
    solve_mixed_bvp,
    write_field_csv,
)
from conecap.cone import ConeSpec, DomainError
from conecap.surface import RadialGraph, functionals


@pytest.mark.parametrize("n,deg,r", [(3, 90, 1.0), (4, 60, 0.5), (5, 60, 1.5), (3, 45, 2.0)])
def test_cap_potential_and_capacity(n, deg, r):
    g = RadialGraph.cap(ConeSpec.from_degrees(n, deg), r, 64)
    grid = ExteriorGrid(g, 128, 64)
    fld = solve_mixed_bvp(grid)
    s = grid.node_s()
    exact = 1 - (r / np.exp(s)) ** (n - 2)
    assert np.max(np.abs(fld.phi - exact)) < 1e-3
    res = capacity_estimates(fld)
    want = r ** (n - 2)
    assert res.cap_energy == pytest.approx(want, rel=5e-3)
    assert res.cap_flux == pytest.approx(want, rel=5e-3)
    assert res.cap_extrapolated == pytest.approx(want, rel=5e-4)


def test_capacity_scales_like_r_power():
    cone = ConeSpec.from_degrees(4, 60)
    g = RadialGraph.perturbed_cap(cone, 1.0, 0.1, 2, 64)
    a = capacity(g, 128, 64).cap_extrapolated
    b = capacity(g.scaled(2.0), 128, 64).cap_extrapolated
    assert b == pytest.approx(4 * a, rel=1e-9)


@pytest.mark.parametrize("eps,mode", [(0.1, 2), (0.1, 4), (-0.1, 2)])
def test_perturbed_caps_sit_between_the_bounds(eps, mode):
    cone = ConeSpec.from_degrees(3, 90)
    g = RadialGraph.perturbed_cap(cone, 1.0, eps, mode, 64)
    c = capacity(g, 128, 64).cap_extrapolated
    f = functionals(g)
    upper = f.total_mean_curvature / (2 * cone.alpha)
    lower = (f.volume / cone.unit_sector_volume) ** (1 / 3)
    assert lower < c < upper


def test_weighted_schwarzschild_capacity_is_mass():
    m = 2.0
    R = m / 2
    g = RadialGraph.cap(ConeSpec.from_degrees(3, 90), R, 64)
    grid = ExteriorGrid(g, 128, 64)
    fld = solve_mixed_bvp(grid, lambda s, th: (1 + R * np.exp(-s)) ** 2)
    u = 1 + R * np.exp(-grid.node_s())
    assert np.max(np.abs(fld.phi - (2 - u) / u)) < 1e-3
    assert capacity_estimates(fld).cap_extrapolated == pytest.approx(m, rel=1e-3)


def test_pfs_profile_for_cap():
    r, n = 1.3, 3
    g = RadialGraph.cap(ConeSpec.from_degrees(n, 60), r, 64)
    fld = solve_mixed_bvp(ExteriorGrid(g, 128, 64))
    for t, R in pfs_radius_profile(fld, [0.2, 0.5, 0.8]):
        assert R == pytest.approx(r * (1 - t) ** (-1 / (n - 2)), rel=2e-3)
    assert pfs_lower_bound(fld) == pytest.approx(r ** (n - 2), rel=5e-3)


def test_solver_errors_and_validation():
    g = RadialGraph.cap(ConeSpec.from_degrees(3, 60), 1.0, 16)
    grid = ExteriorGrid(g, 32, 16)
    with pytest.raises(SolverError) as exc:
        solve_mixed_bvp(grid, maxiter=2)
    assert exc.value.iterations == 2
    with pytest.raises(DomainError):
        solve_mixed_bvp(grid, weight=np.ones((3, 3)))
    with pytest.raises(DomainError):
        solve_mixed_bvp(grid, weight=lambda s, th: -np.ones_like(s))


def test_field_csv(tmp_path):
    g = RadialGraph.cap(ConeSpec.from_degrees(3, 60), 1.0, 8)
    fld = solve_mixed_bvp(ExteriorGrid(g, 8, 8))
    p = tmp_path / "f.csv"
    write_field_csv(fld, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 1 + 9 * 9
