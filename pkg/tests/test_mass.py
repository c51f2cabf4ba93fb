import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_legendre

from conecap.capacity import ExteriorGrid
from conecap.cone import ConeSpec, DomainError
from conecap.mass import (
    ConformalFactorField,
    HalfSchwarzschild,
    admissibility,
    conformal_curvatures,
    conformal_metric,
    diff_matrix,
    identity_terms,
    mass_flux,
    mass_flux_general,
    mass_from_expansion,
    mass_identity,
    penrose_check,
    schwarzschild_field,
)
from conecap.surface import RadialGraph

HALF = ConeSpec.from_degrees(3, 90)


@given(coef=st.lists(st.floats(-3, 3), min_size=5, max_size=5), deriv=st.sampled_from([1, 2]),
       even=st.booleans())
def test_diff_matrix_exact_on_quartics(coef, deriv, even):
    x = np.linspace(0.0, 1.0, 21)
    p = np.polynomial.Polynomial(coef)
    if even:  # even reflection needs an even function about x = 0
        p = np.polynomial.Polynomial([coef[0], 0, coef[2], 0, coef[4]])
    D = diff_matrix(x.size, x[1], deriv, even_start=even)
    assert np.allclose(D @ p(x), p.deriv(deriv)(x), atol=1e-8 * (1 + np.abs(coef).max()))


def test_diff_matrix_needs_six_nodes():
    with pytest.raises(DomainError):
        diff_matrix(5, 0.1, 1)


@pytest.mark.parametrize("m", [0.5, 2.0])
def test_schwarzschild_is_scalar_flat_with_minimal_horizon(m):
    model = HalfSchwarzschild(3, m)
    fld = schwarzschild_field(model, model.grid(128, 64))
    c = conformal_curvatures(fld)
    assert c.interior_max_abs_R() < 1e-4
    assert np.abs(c.H_g_sigma).max() < 1e-4
    assert np.abs(c.H_g_wall).max() < 1e-10
    assert mass_from_expansion(fld).mass == pytest.approx(m, rel=1e-8)
    assert mass_flux(fld) == pytest.approx(m, rel=1e-2)
    assert mass_identity(fld) == pytest.approx(m, rel=1e-3)
    assert identity_terms(fld)["divergence"] == pytest.approx(m, rel=1e-3)
    adm = admissibility(fld)
    assert adm.in_M and adm.equality_system


@pytest.mark.parametrize("n", [4, 5])
def test_higher_dimensional_schwarzschild_mass(n):
    model = HalfSchwarzschild(n, 1.0)
    fld = schwarzschild_field(model, model.grid(128, 64))
    assert mass_from_expansion(fld).mass == pytest.approx(1.0, rel=1e-8)
    assert mass_identity(fld) == pytest.approx(1.0, rel=1e-3)


def test_mass_flux_general_agrees_with_reduced_form():
    model = HalfSchwarzschild(3, 1.0)
    fld = schwarzschild_field(model, model.grid(128, 64))
    general = mass_flux_general(conformal_metric(model.u, 3), 3, fld.grid.s_max, 64)
    assert general == pytest.approx(mass_flux(fld), rel=1e-3)


def test_quadrupole_curvatures_against_closed_form():
    # harmonic factor with a quadrupole term: R_g = 0, H_g known on r = 1
    f = lambda s, th: 1 + np.exp(-s) + 0.3 * np.exp(-3 * s) * eval_legendre(2, np.cos(th))  # noqa: E731
    g = RadialGraph.cap(HALF, 1.0, 64)
    grid = ExteriorGrid(g, 128, 64)
    fld = ConformalFactorField.from_function(grid, f)
    c = conformal_curvatures(fld)
    assert c.interior_max_abs_R() < 1e-4
    P2 = eval_legendre(2, np.cos(grid.theta))
    u = f(0.0, grid.theta)
    ur = -1 - 0.9 * P2
    # H_g = u^{-2} (H + 4 u_r / u) in n = 3 with outward radial normal
    want = u**-2 * (2 + 4 * ur / u)
    assert np.abs(c.H_g_sigma - want).max() < 1e-4
    assert mass_from_expansion(fld).mass == pytest.approx(2.0, rel=1e-6)


def test_flat_factor_has_zero_mass():
    g = RadialGraph.cap(HALF, 1.0, 32)
    fld = ConformalFactorField.from_function(ExteriorGrid(g, 64, 32), lambda s, th: np.ones_like(s + th))
    assert abs(mass_from_expansion(fld).mass) < 1e-12
    assert abs(mass_flux(fld)) < 1e-12


def test_bump_violates_condition_i_only():
    model = HalfSchwarzschild(3, 2.0)
    grid = model.grid(128, 64)
    bump = lambda s, th: model.u(s) + 0.05 * np.exp(-(((np.exp(s) - 3) / 0.5) ** 2))  # noqa: E731
    adm = admissibility(ConformalFactorField.from_function(grid, bump))
    assert not adm.scalar_curvature_nonnegative
    assert adm.negative_R_nodes > 0
    assert adm.failed()[0].startswith("i:")
    assert not adm.in_M


def test_inflated_factor_keeps_margins_and_is_not_asserted():
    model = HalfSchwarzschild(3, 2.0)
    fld = ConformalFactorField.from_function(model.grid(128, 64), HalfSchwarzschild(3, 2.5).u)
    rep = penrose_check(fld)
    assert not rep.flags["M_iii"]
    assert set(rep.verdicts.values()) == {"not asserted"}
    for k in ("mass_vs_capacity", "mass_vs_volume", "mass_vs_mean_curvature"):
        assert rep.margins[k] > 0
    # u is harmonic with zero wall flux, so this one is an identity
    assert abs(rep.margins["capacity_comparison"]) < 1e-2 * rep.mass


def test_report_dict_is_flat():
    model = HalfSchwarzschild(3, 1.0)
    d = penrose_check(schwarzschild_field(model, model.grid(64, 32))).to_dict()
    assert all(not isinstance(v, dict) for v in d.values())
    assert "margin_mass_vs_capacity" in d and "verdict_mass_vs_mean_curvature" in d and "flag_in_M" in d


def test_field_validation():
    model = HalfSchwarzschild(3, 1.0)
    grid = model.grid(32, 16)
    with pytest.raises(DomainError):
        ConformalFactorField(grid, np.ones((3, 3)))
    with pytest.raises(DomainError):
        ConformalFactorField(grid, -np.ones((33, 17)))
    with pytest.raises(DomainError):
        schwarzschild_field(HalfSchwarzschild(3, 2.0), grid)
    with pytest.raises(DomainError):
        schwarzschild_field(HalfSchwarzschild(4, 1.0), grid)
    cone60 = ConeSpec.from_degrees(3, 60)
    with pytest.raises(DomainError):
        ConformalFactorField(ExteriorGrid(RadialGraph.cap(cone60, 1.0, 16), 32, 16), np.ones((33, 17)))
    with pytest.raises(DomainError):
        HalfSchwarzschild(3, -1.0)
