"""Time the compiled and numpy kernels on a cosine-sized training step.

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from weightcaster import _kernels_py

try:
    from weightcaster import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def make_problem(S=6, horizon=300, n=2000, theta_dim=2, seed=0):
    rng = np.random.default_rng(seed)
    phi = np.eye(S) + 0.01 * rng.standard_normal((S, S))
    z1 = 0.1 * rng.standard_normal(S)
    X = rng.uniform(-1.5, 1.5, (n, 1))
    Y = np.cos(10 * X) + 0.5 * X
    ring = np.minimum((np.abs(X[:, 0]) / 1.5 * horizon).astype(np.int64), horizon - 1)
    counts = np.bincount(ring, minlength=horizon)
    weight = 1.0 / counts[ring]
    return phi, z1, X, Y, ring, weight, theta_dim, horizon


def step(k, prob, stochastic):
    phi, z1, X, Y, ring, weight, D, H = prob
    states = k.rollout(phi, z1, H)
    _, _, g = k.ring_objective(states, X, Y, ring, weight, D, stochastic, 1e-2, 0.05, 1e-4)
    return k.rollout_adjoint(phi, states, g)


def bench(k, prob, stochastic, repeats):
    step(k, prob, stochastic)
    t0 = time.perf_counter()
    for _ in range(repeats):
        step(k, prob, stochastic)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()
    prob = make_problem()
    print(f"{'mode':<14}{'backend':<10}{'ms/step':>10}{'speedup':>10}")
    for stochastic in (False, True):
        mode = "stochastic" if stochastic else "deterministic"
        t_py = bench(_kernels_py, prob, stochastic, args.repeats)
        print(f"{mode:<14}{'python':<10}{t_py * 1e3:>10.3f}{1.0:>10.1f}")
        if _kernels_c is None:
            print(f"{mode:<14}{'cython':<10}{'(not built)':>10}")
            continue
        t_c = bench(_kernels_c, prob, stochastic, args.repeats)
        print(f"{mode:<14}{'cython':<10}{t_c * 1e3:>10.3f}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
