"""Compiled kernels against the numpy fallback on solver-sized problems.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from conecap import _fallback
from conecap.capacity import ExteriorGrid, _assemble, _system
from conecap.cone import ConeSpec
from conecap.flow import _cot
from conecap.surface import RadialGraph

try:
    from conecap import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    cone = ConeSpec.from_degrees(3, 60)
    graph = RadialGraph.perturbed_cap(cone, 1.0, 0.1, 2, 128)
    op = _assemble(ExteriorGrid(graph, 256, 128), None)
    S = _system(op)
    x = np.ascontiguousarray(np.random.default_rng(0).random(S.shape[1:]))
    b = op.rhs
    flow_graph = RadialGraph.perturbed_cap(cone, 1.0, 0.2, 2, 128)
    u, h, cot = flow_graph.u, flow_graph.h, _cot(flow_graph)

    def flow(mod, steps=1000):
        v = u
        for _ in range(steps):
            v = mod.imcf_step(v, h, 3, cot, 1e-3)[0]

    return {
        "stencil_apply 256x129": lambda mod: mod.stencil_apply(S, x),
        "pcg_stencil 256x129 (200 it)": lambda mod: mod.pcg_stencil(S, b, np.zeros_like(b), 0.0, 200),
        "imcf_step m=128 (1000 steps)": flow,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        tp = _best(lambda: fn(_fallback), args.repeat) * 1e3
        if _kernels is None:
            print(f"{name:32s} {tp:12.3f} {'n/a':>12s} {'n/a':>8s}")
            continue
        tc = _best(lambda: fn(_kernels), args.repeat) * 1e3
        print(f"{name:32s} {tp:12.3f} {tc:12.3f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
