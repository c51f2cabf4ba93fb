import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conecap.cone import ConeSpec, DomainError
from conecap.surface import (
    CurvatureError,
    RadialGraph,
    functionals,
    mean_curvature_field,
    read_profile_csv,
    umbilicity_field,
    umbilicity_residual,
    write_profile_csv,
)

CONES = [(3, 90), (3, 60), (4, 90), (5, 60), (4, 45)]


def _graph(row, m):
    cone = ConeSpec.from_degrees(row["n"], row["deg"])
    return RadialGraph.perturbed_cap(cone, 1.0, row["eps"], row["mode"], m)


def _H_at(graph, fractions):
    H = mean_curvature_field(graph)
    idx = [int(round(f * graph.m)) for f in fractions]
    return H[idx]


def test_H_matches_embedding_oracle_at_second_order(frozen):
    for row in frozen["surfaces"]:
        want = np.array(row["H"])
        errs = [np.abs(_H_at(_graph(row, m), row["fractions"]) - want).max() for m in (80, 160)]
        assert errs[1] < 2e-3
        assert errs[0] / errs[1] > 3.5, (row, errs)


def test_functionals_match_embedding_oracle(frozen):
    for row in frozen["surfaces"]:
        f = functionals(_graph(row, 320))
        assert f.area == pytest.approx(row["area"], rel=1e-5)
        assert f.volume == pytest.approx(row["volume"], rel=1e-5)
        assert f.total_mean_curvature == pytest.approx(row["I"], rel=1e-4)


@pytest.mark.parametrize("n,deg", CONES)
@pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
def test_cap_is_exact(n, deg, r):
    cone = ConeSpec.from_degrees(n, deg)
    g = RadialGraph.cap(cone, r, 64)
    f = functionals(g)
    a = cone.alpha
    assert np.allclose(mean_curvature_field(g), (n - 1) / r, rtol=1e-13)
    assert f.area == pytest.approx(a * r ** (n - 1), rel=1e-12)
    assert f.volume == pytest.approx(a * r**n / n, rel=1e-12)
    assert f.total_mean_curvature == pytest.approx((n - 1) * a * r ** (n - 2), rel=1e-12)
    # equality on caps, pure quadrature
    lhs = f.total_mean_curvature / (2 * (n - 1) * a)
    rhs = 0.5 * (f.area / a) ** ((n - 2) / (n - 1))
    assert abs(lhs - rhs) <= 1e-10
    assert umbilicity_residual(g) <= 1e-12


@st.composite
def smooth_graphs(draw):
    n = draw(st.integers(3, 5))
    deg = draw(st.sampled_from([30, 45, 60, 75, 90]))
    cone = ConeSpec.from_degrees(n, deg)
    mode = draw(st.sampled_from([0, 2, 4]))
    eps = draw(st.floats(-0.15, 0.15))
    r = draw(st.floats(0.2, 5.0))
    return RadialGraph.perturbed_cap(cone, r, eps, mode, 64)


@given(g=smooth_graphs(), lam=st.floats(0.1, 10.0))
def test_scaling_laws(g, lam):
    n = g.cone.n
    f, fl = functionals(g), functionals(g.scaled(lam))
    assert fl.area == pytest.approx(f.area * lam ** (n - 1), rel=1e-10)
    assert fl.volume == pytest.approx(f.volume * lam**n, rel=1e-10)
    assert fl.total_mean_curvature == pytest.approx(f.total_mean_curvature * lam ** (n - 2), rel=1e-10)
    h = f.total_mean_curvature / f.area ** ((n - 2) / (n - 1))
    hl = fl.total_mean_curvature / fl.area ** ((n - 2) / (n - 1))
    assert hl == pytest.approx(h, rel=1e-10)


@given(g=smooth_graphs())
def test_newton_maclaurin_pointwise(g):
    # (n-1)|A|^2 - H^2 is a sum of squares of curvature differences
    assert umbilicity_field(g).min() >= -1e-9


@given(g=smooth_graphs())
def test_even_profiles_meet_both_ends_orthogonally(g):
    # one-sided differences carry an O(h^2) truncation error
    s0, s1 = g.end_slopes()
    bound = 50 * g.h**2 * (1 + np.ptp(g.u) / g.cone.theta0**3)
    assert abs(s0) < bound and abs(s1) < bound


def test_mean_convexity_check_reports_node():
    cone = ConeSpec.from_degrees(3, 60)
    g = RadialGraph.perturbed_cap(cone, 1.0, 0.2, 4, 128)
    with pytest.raises(CurvatureError) as exc:
        mean_curvature_field(g, require_positive=True)
    assert exc.value.value <= 0
    assert 0 <= exc.value.node <= g.m


def test_odd_mode_and_bad_grids_rejected():
    cone = ConeSpec.from_degrees(3, 60)
    with pytest.raises(DomainError):
        RadialGraph.perturbed_cap(cone, 1.0, 0.1, 3)
    with pytest.raises(DomainError):
        RadialGraph(cone, np.zeros(8))  # odd interval count
    with pytest.raises(DomainError):
        RadialGraph.from_rho(cone, lambda t: 1 + 0.3 * t)  # tilted at the axis


def test_profile_csv_roundtrip(tmp_path):
    cone = ConeSpec.from_degrees(4, 60)
    g = RadialGraph.perturbed_cap(cone, 1.3, 0.1, 2, 32)
    p = tmp_path / "profile.csv"
    write_profile_csv(g, p)
    back = read_profile_csv(p, cone)
    assert np.array_equal(back.u, g.u)


def test_profile_csv_validation(tmp_path):
    cone = ConeSpec.from_degrees(3, 60)
    p = tmp_path / "bad.csv"
    p.write_text("theta,radius\n0,1\n")
    with pytest.raises(DomainError):
        read_profile_csv(p, cone)
    th = np.linspace(0, math.pi / 2, 9)  # wrong cone
    p.write_text("theta,rho\n" + "".join(f"{t!r},1.0\n" for t in th))
    with pytest.raises(DomainError):
        read_profile_csv(p, cone)
