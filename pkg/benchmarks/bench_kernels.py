"""Compare the compiled and pure-Python propagation kernels.

Times the raw tridiagonal matrix-exponential apply and one full assisted
annealing trajectory per available backend, then prints a small table.

Usage: python3 benchmarks/bench_kernels.py [--n-spins N] [--steps K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spincd import ModelParams, Schedule, evolve
from spincd.dynamics import _tridiag_parts
from spincd.kernels import available_backends, get_expm


def time_kernel(backend: str, n_spins: int, n_calls: int) -> float:
    params = ModelParams(n_spins=n_spins)
    _, c, d0 = _tridiag_parts(params)
    u = np.ascontiguousarray(-1.2 * c + 0.0j)
    rng = np.random.default_rng(1)
    psi = rng.normal(size=d0.size) + 1j * rng.normal(size=d0.size)
    psi = np.ascontiguousarray(psi / np.linalg.norm(psi))
    expm = get_expm(backend)
    expm(d0, u, 1e-4, psi)  # warm up
    start = time.perf_counter()
    for _ in range(n_calls):
        psi = expm(d0, u, 1e-4, psi)
    return (time.perf_counter() - start) / n_calls


def time_trajectory(backend: str, n_spins: int, steps: int) -> float:
    params = ModelParams(n_spins=n_spins)
    schedule = Schedule(t_f=1.0)
    start = time.perf_counter()
    evolve(params, schedule, assist="mean-field", steps=steps,
           n_outputs=21, backend=backend)
    return time.perf_counter() - start


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-spins", type=int, default=1000)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--kernel-calls", type=int, default=2000)
    args = parser.parse_args()

    backends = available_backends()
    print(f"N = {args.n_spins}, backends: {', '.join(backends)}")
    print(f"{'backend':10s} {'expm apply':>14s} {'trajectory':>14s}")
    baseline = None
    for backend in backends:
        per_call = time_kernel(backend, args.n_spins, args.kernel_calls)
        traj = time_trajectory(backend, args.n_spins, args.steps)
        note = ""
        if baseline is None:
            baseline = per_call
        else:
            note = f"  ({baseline / per_call:.2f}x vs {backends[0]})"
        print(f"{backend:10s} {per_call * 1e6:11.1f} us {traj:12.2f} s{note}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
