"""Pure NumPy implementations of the compiled kernels.

Same signatures and algorithms as ``_kernels.pyx``. Basis values come from
direct ``np.cos``/``np.sin`` calls instead of the angle-addition recurrence, so
the two backends agree to rounding error, not bit for bit.
"""

import math

import numpy as np

SQRT2 = math.sqrt(2.0)
_MASK = (1 << 64) - 1


def basis_matrix(s, m):
    s = np.asarray(s, dtype=np.float64)
    out = np.empty((s.shape[0], m), dtype=np.float64)
    out[:, 0] = 1.0
    for k in range(1, m // 2 + 1):
        arg = 2.0 * np.pi * k * s
        out[:, 2 * k - 1] = SQRT2 * np.cos(arg)
        if 2 * k < m:
            out[:, 2 * k] = SQRT2 * np.sin(arg)
    return out


def joint_density(z, w, lambdas):
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    big_j = len(lambdas)
    total = np.ones_like(z)
    for k in range(1, big_j // 2 + 1):
        az = 2.0 * np.pi * k * z
        aw = 2.0 * np.pi * k * w
        total += 2.0 * lambdas[2 * k - 1] * np.cos(az) * np.cos(aw)
        if 2 * k < big_j:
            total += 2.0 * lambdas[2 * k] * np.sin(az) * np.sin(aw)
    return total


def galerkin_matrix(z, w, m):
    """Entry (l, j) is the sample mean of f_l(w_i) e_j(z_i)."""
    ez = basis_matrix(z, m)
    fw = basis_matrix(w, m)
    # einsum without BLAS keeps the reduction order fixed
    return np.einsum("il,ij->lj", fw, ez, optimize=False) / ez.shape[0]


def invert(a, tol):
    """Gauss-Jordan with partial pivoting; ``None`` when a pivot falls below tol."""
    work = np.array(a, dtype=np.float64, copy=True)
    m = work.shape[0]
    inv = np.eye(m)
    for col in range(m):
        piv = col + int(np.argmax(np.abs(work[col:, col])))
        if not abs(work[piv, col]) >= tol:
            return None
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
            inv[[col, piv]] = inv[[piv, col]]
        p = work[col, col]
        work[col] /= p
        inv[col] /= p
        for r in range(m):
            if r == col:
                continue
            f = work[r, col]
            if f != 0.0:
                work[r] -= f * work[col]
                inv[r] -= f * inv[col]
    return inv


class _SplitMix:
    def __init__(self, seed):
        self.state = seed & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def unit_vector(self, m):
        while True:
            x = np.array([(self.next() >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0
                          for _ in range(m)])
            nrm = math.sqrt(float(x @ x))
            if nrm > 0.0:
                return x / nrm


def _power_run(b, tol, max_iter, gen):
    m = b.shape[0]
    x = gen.unit_vector(m)
    mu_prev = -1.0
    mu = 0.0
    restarts = 0
    it = 0
    while it < max_iter:
        y = b @ x
        nrm = math.sqrt(float(y @ y))
        mu = float(x @ y)
        if nrm == 0.0:
            restarts += 1
            if restarts > 50:
                return 0.0
            x = gen.unit_vector(m)
            mu_prev = -1.0
            it += 1
            continue
        x = y / nrm
        if abs(mu - mu_prev) <= tol * abs(mu):
            break
        mu_prev = mu
        it += 1
    return mu


def spectral_norm(a, tol, max_iter, seed):
    """Largest singular value by power iteration on A^T A, two independent starts."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0 or not np.any(a):
        return 0.0
    b = a.T @ a
    gen = _SplitMix(seed)
    mu1 = _power_run(b, tol, max_iter, gen)
    mu2 = _power_run(b, tol, max_iter, gen)
    return math.sqrt(max(mu1, mu2))
