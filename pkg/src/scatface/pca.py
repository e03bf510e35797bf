"""Principal component analysis on the unnormalized scatter matrix."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PcaError, ShapeMismatchError, ZeroRankError
from .linalg import jacobi_eigh

COVARIANCE_CONVENTION = "unnormalized-scatter"  # sum_i (x_i - mu)(x_i - mu)^T
RANK_RTOL = 1e-10
FORMAT_VERSION = 1


class RankClampWarning(UserWarning):
    """Requested component count exceeded the numerical rank."""


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray        # (d,)
    basis: np.ndarray       # (d, m), orthonormal columns
    eigenvalues: np.ndarray  # (m,), non-increasing
    requested_m: int

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def m(self) -> int:
        return self.basis.shape[1]

    def truncate(self, k: int) -> "PcaModel":
        """Model restricted to the leading ``min(k, m)`` components."""
        k = min(k, self.m)
        return PcaModel(self.mean, self.basis[:, :k], self.eigenvalues[:k], k)

    def to_json(self) -> str:
        doc = {
            "format": "scatface-pca",
            "version": FORMAT_VERSION,
            "covariance": COVARIANCE_CONVENTION,
            "d": self.d,
            "m": self.m,
            "requested_m": self.requested_m,
            "mean": self.mean.tolist(),
            "basis": self.basis.ravel(order="C").tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "PcaModel":
        doc = json.loads(text)
        if doc.get("format") != "scatface-pca" or doc.get("version") != FORMAT_VERSION:
            raise PcaError("not a scatface PCA model (or unsupported version)")
        d, m = doc["d"], doc["m"]
        basis = np.asarray(doc["basis"], dtype=np.float64).reshape(d, m)
        return cls(np.asarray(doc["mean"], dtype=np.float64), basis,
                   np.asarray(doc["eigenvalues"], dtype=np.float64), doc["requested_m"])


def _canonical_signs(w: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(w), axis=0)
    signs = np.where(w[idx, np.arange(w.shape[1])] < 0, -1.0, 1.0)
    return w * signs


def fit_pca(X, m: int) -> PcaModel:
    """Fit the top-``m`` principal directions of the rows of ``X``.

    When there are fewer samples than dimensions the eigenproblem is solved
    on the n x n Gram matrix and mapped back (snapshot method). ``m`` is
    clamped to the numerical rank with a :class:`RankClampWarning`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError(f"expected an (n, d) matrix, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise PcaError(f"need at least 2 samples, got {n}")
    if m < 1:
        raise PcaError(f"target dimension must be >= 1, got {m}")
    if not np.all(np.isfinite(X)):
        raise PcaError("features contain non-finite values")

    mean = X.mean(axis=0)
    xc = X - mean
    if n - 1 < d:
        lam, u = jacobi_eigh(xc @ xc.T)
    else:
        lam, w = jacobi_eigh(xc.T @ xc)

    if lam[0] <= 0.0:
        raise ZeroRankError("zero-rank data: all samples are identical")
    rank = int(np.sum(lam > RANK_RTOL * lam[0]))
    keep = min(m, rank)
    if keep < m:
        warnings.warn(f"requested {m} components but data rank is {rank}; using {keep}",
                      RankClampWarning, stacklevel=2)
    lam = lam[:keep]
    if n - 1 < d:
        w = xc.T @ u[:, :keep] / np.sqrt(lam)
    else:
        w = w[:, :keep]
    w = _canonical_signs(w)
    for arr in (mean, w, lam):
        arr.setflags(write=False)
    return PcaModel(mean, w, lam, m)


def project(model: PcaModel, X) -> np.ndarray:
    """``(X - mean) @ basis``; rows of ``X`` are samples (1-D input allowed)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.d:
        raise ShapeMismatchError(f"expected {model.d} features, got {X.shape[-1]}")
    return (X - model.mean) @ model.basis
