"""Small dense linear algebra and reproducible random streams.

Vectors and matrices are plain float64 numpy arrays; the helpers here
validate shape and finiteness at module boundaries.
"""

import numpy as np
from scipy.linalg import lapack

from .errors import DecompositionError, DimensionError, NumericalError, UnsupportedSizeError

MAX_EIG_DIM = 16


def as_vec(x, name="vector"):
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericalError(f"{name} contains non-finite entries")
    return v


def as_mat(a, name="matrix"):
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"{name} contains non-finite entries")
    return m


def cholesky(a):
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Raises DecompositionError carrying the 0-based index of the first
    non-positive pivot.
    """
    a = as_mat(a)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"cholesky needs a square matrix, got {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > 1e-10 * scale:
        raise DimensionError("cholesky needs a symmetric matrix")
    L, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise DecompositionError(info - 1)
    if info < 0:
        raise NumericalError(f"dpotrf rejected argument {-info}")
    return L


def cho_solve(L, b):
    """Solve ``(L L^T) x = b`` given the Cholesky factor."""
    x, info = lapack.dpotrs(L, b, lower=1)
    if info != 0:
        raise NumericalError(f"dpotrs failed with info={info}")
    return x


def eigvals_small(a):
    """All eigenvalues of a small square matrix, by descending modulus."""
    a = as_mat(a)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"eigvals_small needs a square matrix, got {a.shape}")
    if n > MAX_EIG_DIM:
        raise UnsupportedSizeError(f"eigvals_small supports dimension <= {MAX_EIG_DIM}, got {n}")
    if n == 1:
        lam = np.array([complex(a[0, 0])])
    elif n == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        root = np.sqrt(complex(tr * tr / 4.0 - det))
        lam = np.array([tr / 2.0 + root, tr / 2.0 - root])
    else:
        # LAPACK dhseqr: Hessenberg reduction + shifted QR
        lam = np.linalg.eigvals(a).astype(complex)
    # descending modulus; ties broken by real part then imaginary part
    order = sorted(range(n), key=lambda i: (-abs(lam[i]), -lam[i].real, -lam[i].imag))
    return [complex(lam[i]) for i in order]


class Rng:
    """Counter-based normal/uniform stream (Philox) keyed by a 64-bit seed.

    ``child(*ids)`` derives an independent stream from ``(seed, *ids)``
    without touching this stream's state, so per-ring draws do not depend
    on evaluation order.
    """

    def __init__(self, seed, _path=()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(int(i) for i in _path)
        key = np.random.SeedSequence([self.seed, *self.path]).generate_state(2, np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, *ids):
        return Rng(self.seed, self.path + tuple(ids))

    def uniform(self, n):
        return self._gen.random(n)

    def normal(self, n):
        """Box-Muller over the uniform stream."""
        if n < 1:
            raise ValueError("n must be >= 1")
        m = (n + 1) // 2
        u1 = 1.0 - self._gen.random(m)  # (0, 1]
        u2 = self._gen.random(m)
        rad = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * m)
        z[0::2] = rad * np.cos(2.0 * np.pi * u2)
        z[1::2] = rad * np.sin(2.0 * np.pi * u2)
        return z[:n]

    def subsample(self, n, k):
        """``k`` distinct indices from ``range(n)`` in sorted order."""
        if k >= n:
            return np.arange(n)
        return np.sort(self._gen.choice(n, size=k, replace=False))

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)


def sample_std_normal(rng, n):
    return rng.normal(n)
