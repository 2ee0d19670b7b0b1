"""Compiled vs numpy split-step kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--n-t 256 1024]

Times the nonlinear RK4 step, the per-bin linear coupling and a full Fig. 2
propagation with each backend, and checks the two agree.
"""

import argparse
import timeit
from dataclasses import replace

import numpy as np

from coupledfwm import _kernels_py
from coupledfwm.dispersion import FiberLP01
from coupledfwm.propagation import SimulationConfig, peak_kappa_analytic, propagate

try:
    from coupledfwm import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _fields(n_t, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2, 4, n_t)) + 1j * rng.standard_normal((2, 4, n_t))
    return np.ascontiguousarray(a)


def _best(stmt, repeat, number):
    return min(timeit.repeat(stmt, repeat=repeat, number=number)) / number


def bench_steps(n_t, repeat):
    gamma = np.array([0.02, 0.01, 0.013, 0.011])
    # unitary per-bin coupler so repeated application stays bounded
    th = np.random.default_rng(1).uniform(0, np.pi, (4, n_t))
    u = [np.ascontiguousarray(np.cos(th) + 0j), np.ascontiguousarray(1j * np.sin(th)),
         np.ascontiguousarray(np.cos(th) + 0j)]
    rows = []
    for name, mod in (("python", _kernels_py), ("cython", _kernels_c)):
        if mod is None:
            continue
        a = _fields(n_t)
        t_rk4 = _best(lambda: mod.nonlinear_rk4(a, gamma, 1e-9), repeat, 200)
        s = _fields(n_t, 2)
        t_lin = _best(lambda: mod.apply_linear(s, *u), repeat, 200)
        rows.append((name, t_rk4, t_lin))
    return rows


def bench_propagation(repeat):
    fiber = FiberLP01()
    cfg = SimulationConfig(fiber, length_m=5.7e-3, dz_m=3.4e-6, gamma_per_w_m=0.01,
                           p1_power_w=1e4, p2_power_w=1e4, signal_seed_w=1.0)
    cfg = cfg.with_kappa_p2(peak_kappa_analytic(cfg))
    cfg = replace(cfg, launch="mixed")
    out = {}
    for backend in ("python", "cython"):
        if backend == "cython" and _kernels_c is None:
            continue
        t = _best(lambda: propagate(cfg, record_every=0, backend=backend), repeat, 1)
        out[backend] = (t, propagate(cfg, record_every=0, backend=backend).final.a)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n-t", type=int, nargs="+", default=[256, 1024])
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'n_t':>6} {'backend':>8} {'rk4 [us]':>10} {'linear [us]':>12}")
    for n_t in args.n_t:
        rows = bench_steps(n_t, args.repeat)
        for name, t_rk4, t_lin in rows:
            print(f"{n_t:>6} {name:>8} {t_rk4 * 1e6:>10.1f} {t_lin * 1e6:>12.1f}")
        if len(rows) == 2:
            print(f"{'':>6} {'speedup':>8} {rows[0][1] / rows[1][1]:>10.2f} {rows[0][2] / rows[1][2]:>12.2f}")
    prop = bench_propagation(max(1, args.repeat // 2))
    print("\nFig. 2 mixed launch, 1677 steps, n_t = 256")
    for name, (t, _) in prop.items():
        print(f"  {name:>8}: {t:.3f} s")
    if len(prop) == 2:
        (tp, ap_), (tc, ac) = prop["python"], prop["cython"]
        diff = float(np.max(np.abs(ap_ - ac)) / np.max(np.abs(ap_)))
        print(f"  speedup {tp / tc:.2f}x, max relative field difference {diff:.1e}")


if __name__ == "__main__":
    main()
