"""Cyclic Jacobi eigensolver for real symmetric matrices."""
from __future__ import annotations

import math
import warnings

import numba
import numpy as np


class JacobiConvergenceWarning(RuntimeWarning):
    pass


@numba.njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j] * a[i, j]
    return math.sqrt(acc)


@numba.njit(cache=True)
def _rotate(a, vt, p, q):
    """Zero ``a[p, q]`` with one Givens rotation, in place."""
    n = a.shape[0]
    apq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    app = a[p, p] - t * apq
    aqq = a[q, q] + t * apq
    for k in range(n):
        if k == p or k == q:
            continue
        akp = a[p, k]
        akq = a[q, k]
        a[p, k] = c * akp - s * akq
        a[q, k] = s * akp + c * akq
        a[k, p] = a[p, k]
        a[k, q] = a[q, k]
    a[p, p] = app
    a[q, q] = aqq
    a[p, q] = 0.0
    a[q, p] = 0.0
    for k in range(n):
        vp = vt[p, k]
        vq = vt[q, k]
        vt[p, k] = c * vp - s * vq
        vt[q, k] = s * vp + c * vq


@numba.njit(cache=True)
def _cyclic_jacobi(a, vt, target, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        if _off_norm(a) <= target:
            return sweep, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, vt, p, q)
    return max_sweeps, _off_norm(a) <= target


def off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(a, rtol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of symmetric ``a`` by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    non-increasing order and eigenvectors as columns. Iteration stops once
    the off-diagonal Frobenius norm drops below ``rtol * ||a||_F``.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a = np.ascontiguousarray(0.5 * (a + a.T))
    n = a.shape[0]
    vt = np.eye(n)  # eigenvectors stored as rows
    target = rtol * float(np.linalg.norm(a))
    _, converged = _cyclic_jacobi(a, vt, target, max_sweeps)
    if not converged:
        warnings.warn(f"Jacobi did not converge in {max_sweeps} sweeps "
                      f"(off-norm {off_norm(a):.3e})", JacobiConvergenceWarning)
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], vt[order].T
