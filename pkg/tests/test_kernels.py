import importlib

import numpy as np
import pytest

from weightcaster import _kernels_py, kernels

try:
    from weightcaster import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="compiled extension not built")


def problem(seed, stochastic, dx=1):
    rng = np.random.default_rng(seed)
    D = dx + 1
    S = (2 if stochastic else 1) * D + int(rng.integers(0, 3))
    H = int(rng.integers(1, 40))
    phi = np.eye(S) + 0.1 * rng.standard_normal((S, S))
    z1 = rng.standard_normal(S)
    n = int(rng.integers(1, 200))
    X = rng.standard_normal((n, dx))
    Y = rng.standard_normal((n, 1))
    ring = rng.integers(0, H, n)
    counts = np.bincount(ring, minlength=H)
    w = 1.0 / counts[ring]
    return phi, z1, H, X, Y, ring, w, D


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_env_var(monkeypatch):
    monkeypatch.setenv("WEIGHTCASTER_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("WEIGHTCASTER_PURE_PYTHON")
        importlib.reload(kernels)


@needs_ext
@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("stochastic", [False, True])
def test_parity(seed, stochastic):
    phi, z1, H, X, Y, ring, w, D = problem(seed, stochastic, dx=1 + seed % 2)
    sc = _kernels_c.rollout(phi, z1, H)
    sp = _kernels_py.rollout(phi, z1, H)
    np.testing.assert_allclose(sc, sp, rtol=1e-13, atol=1e-13)
    args = (X, Y, ring, w, D, stochastic, 0.03, 0.1, 1e-4)
    oc, op = _kernels_c.ring_objective(sp, *args), _kernels_py.ring_objective(sp, *args)
    for a, b in zip(oc, op):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)
    gc, gp = _kernels_c.rollout_adjoint(phi, sp, op[2]), _kernels_py.rollout_adjoint(phi, sp, op[2])
    for a, b in zip(gc, gp):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)
