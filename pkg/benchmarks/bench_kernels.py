"""Time the RK4 density-matrix kernel: numba build vs plain numpy.

    python benchmarks/bench_kernels.py [cutoff] [steps]
"""
import sys
import time

import numpy as np

from cavityleak import _kernels
from cavityleak.master import build_composite_generator
from cavityleak.operators import FockSpace
from cavityleak.params import CompositeParams


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(cutoff=5, steps=2000):
    space = FockSpace(cutoff)
    gen = build_composite_generator(CompositeParams(100.0, 100.0, 0.1, 1e-3, 100, 0.1), space, space)
    h, lefts, rights, rates = gen.kernel_arrays()
    rho0 = np.zeros((gen.dim, gen.dim), dtype=complex)
    rho0[0, 0] = 1.0
    args = (rho0, h, lefts, rights, rates, 1e-4, steps, 1)

    _kernels.rk4_samples_jit(*args)  # compile or load from cache
    t_jit = best_of(lambda: _kernels.rk4_samples_jit(*args))
    t_py = best_of(lambda: _kernels.rk4_samples_py(*args))
    diff = np.abs(_kernels.rk4_samples_jit(*args)[0] - _kernels.rk4_samples_py(*args)[0]).max()
    print(f"dim {gen.dim}, {steps} RK4 steps")
    print(f"numba  {t_jit * 1e3:9.2f} ms")
    print(f"numpy  {t_py * 1e3:9.2f} ms")
    print(f"speedup {t_py / t_jit:.2f}x, max difference {diff:.1e}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
