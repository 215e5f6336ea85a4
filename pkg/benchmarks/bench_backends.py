"""Times the hot kernels on both cores: compiled extension vs numpy fallback.

Usage: python benchmarks/bench_backends.py [--h 0.02] [--m 2,4] [--repeat 3]
"""

import argparse
import time

import numpy as np

import phsfd
from phsfd import _core_py
from phsfd.rbf import monomial_basis, stencil_size

try:
    from phsfd import _core
except ImportError:
    _core = None


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - start)
    return min(times), out


def bench_case(h, m, repeat):
    nodes = phsfd.discretize_disc(h, seed=0)
    stencils = phsfd.build_stencils(nodes, stencil_size(m))
    exps = monomial_basis(m).exponents

    rows = []
    weight_args = (nodes.xy, stencils.members, exps)
    t_py, (w, s, _) = best_of(repeat, _core_py.weight_systems, *weight_args)
    rows.append(("weights", "python", t_py))
    if _core is not None:
        t_c, (w_c, s_c, _) = best_of(repeat, _core.weight_systems, *weight_args)
        rows.append(("weights", "compiled", t_c))
        gap = np.abs(w_c - w).max() / np.abs(w).max()
        assert gap < 1e-10, f"backends disagree on weights: {gap:.2e}"

    weights = phsfd.WeightSet(centers=stencils.centers.copy(), weights=np.asarray(w), scales=np.asarray(s))
    system = phsfd.assemble(nodes, stencils, weights)
    b = phsfd.build_rhs(
        nodes, lambda x, y: phsfd.rhs_f(x, y, 1.0), lambda x, y: phsfd.exact_u(x, y, 1.0)
    )
    x0 = np.zeros(system.n)
    solve_args = (system.indptr, system.indices, system.data, b, x0, 1e-10, 10 * system.n)
    t_py, out_py = best_of(repeat, _core_py.bicgstab, *solve_args)
    rows.append(("bicgstab", "python", t_py))
    if _core is not None:
        t_c, out_c = best_of(repeat, _core.bicgstab, *solve_args)
        rows.append(("bicgstab", "compiled", t_c))
        assert out_py[3] and out_c[3]
    return nodes.n_nodes, rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--h", default="0.05,0.02", help="comma list of spacings")
    parser.add_argument("--m", default="2,4", help="comma list of degrees")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled core not built; timing the numpy fallback only\n")
    print(f"{'case':<24}{'kernel':<12}{'backend':<12}{'time [s]':>12}{'speedup':>10}")
    for h in (float(v) for v in args.h.split(",")):
        for m in (int(v) for v in args.m.split(",")):
            n_nodes, rows = bench_case(h, m, args.repeat)
            case = f"h={h:g} m={m} N={n_nodes}"
            by_kernel = {}
            for kernel, backend, t in rows:
                by_kernel.setdefault(kernel, {})[backend] = t
            for kernel, times in by_kernel.items():
                for backend, t in times.items():
                    speedup = ""
                    if backend == "compiled" and "python" in times:
                        speedup = f"{times['python'] / t:9.1f}x"
                    print(f"{case:<24}{kernel:<12}{backend:<12}{t:>12.4f}{speedup:>10}")


if __name__ == "__main__":
    main()
