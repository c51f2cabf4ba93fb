import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conecap import _backend, _fallback
from conecap.capacity import ExteriorGrid, _assemble, _system
from conecap.cone import ConeSpec
from conecap.flow import _cot
from conecap.surface import RadialGraph

try:
    from conecap import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def _system_for(n, deg, eps, m=16):
    g = RadialGraph.perturbed_cap(ConeSpec.from_degrees(n, deg), 1.0, eps, 2, m)
    op = _assemble(ExteriorGrid(g, 2 * m, m), None)
    return _system(op), op.rhs


@needs_ext
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 5), eps=st.floats(-0.2, 0.2))
def test_stencil_apply_parity(seed, n, eps):
    S, _ = _system_for(n, 60, eps)
    x = np.random.default_rng(seed).standard_normal(S.shape[1:])
    a = _fallback.stencil_apply(S, x)
    b = _kernels.stencil_apply(S, np.ascontiguousarray(x))
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(a))


def test_operator_is_symmetric_positive():
    S, _ = _system_for(3, 90, 0.1)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2,) + S.shape[1:])
    ax, ay = _backend.stencil_apply(S, x), _backend.stencil_apply(S, y)
    assert np.sum(y * ax) == pytest.approx(np.sum(x * ay), rel=1e-12)
    assert np.sum(x * ax) > 0


@needs_ext
def test_pcg_parity():
    S, b = _system_for(4, 60, 0.1)
    x0 = np.zeros_like(b)
    xa, ia, ra = _fallback.pcg_stencil(S, b, x0.copy(), 1e-11, 2000)
    xb, ib, rb = _kernels.pcg_stencil(S, b, x0.copy(), 1e-11, 2000)
    assert ra <= 1e-11 and rb <= 1e-11
    assert abs(ia - ib) <= 2
    assert np.max(np.abs(xa - xb)) <= 1e-9


@needs_ext
@given(n=st.integers(3, 6), deg=st.sampled_from([45, 60, 90]), eps=st.floats(-0.15, 0.15),
       mode=st.sampled_from([2, 4]), dt=st.floats(1e-4, 2e-2))
def test_imcf_step_parity(n, deg, eps, mode, dt):
    g = RadialGraph.perturbed_cap(ConeSpec.from_degrees(n, deg), 1.0, eps, mode, 32)
    a = _fallback.imcf_step(g.u, g.h, n, _cot(g), dt)
    b = _kernels.imcf_step(np.ascontiguousarray(g.u), g.h, n, _cot(g), dt)
    assert (a[0] is None) == (b[0] is None)
    if a[0] is not None:
        assert np.max(np.abs(a[0] - b[0])) <= 1e-13
    assert a[1] == b[1]


def test_imcf_step_flags_nonpositive_curvature():
    g = RadialGraph.perturbed_cap(ConeSpec.from_degrees(3, 60), 1.0, 0.2, 4, 64)
    u_new, imin, dmin = _backend.imcf_step(g.u, g.h, 3, _cot(g), 1e-3)
    assert u_new is None and dmin <= 0 and 0 <= imin <= g.m


@pytest.mark.parametrize("flag,expected", [("1", "python"), ("0", None)])
def test_backend_selection_by_environment(flag, expected):
    env = dict(os.environ, CONECAP_PURE_PYTHON=flag)
    out = subprocess.run([sys.executable, "-c", "import conecap; print(conecap.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    want = expected or ("cython" if _kernels is not None else "python")
    assert out == want
