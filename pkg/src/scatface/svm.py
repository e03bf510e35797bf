"""Soft-margin SVMs trained in the dual by sequential minimal optimization.

The dual is written as a minimization,

    min_a  1/2 a^T Q a - sum(a)   s.t.  0 <= a_i <= C,  y^T a = 0,

with ``Q_ij = y_i y_j K(x_i, x_j)``. Each step updates the maximal
violating pair, so the equality constraint holds throughout.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError, SvmError

TAU = 1e-12
REFINE_TOL = 1e-9
FORMAT_VERSION = 1
SCHEMES = ("ovo", "ovr")


@dataclass(frozen=True)
class Kernel:
    kind: str = "linear"
    gamma: float | None = None
    degree: int | None = None
    coef: float = 0.0

    def __post_init__(self):
        if self.kind == "rbf":
            if self.gamma is None or not self.gamma > 0:
                raise SvmError("rbf kernel needs gamma > 0")
        elif self.kind == "polynomial":
            if self.degree is None or self.degree < 1:
                raise SvmError("polynomial kernel needs degree >= 1")
        elif self.kind != "linear":
            raise SvmError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def rbf(cls, gamma: float) -> "Kernel":
        return cls("rbf", gamma=gamma)

    @classmethod
    def polynomial(cls, degree: int, coef: float = 0.0) -> "Kernel":
        return cls("polynomial", degree=degree, coef=coef)

    def __call__(self, A, B) -> np.ndarray:
        """Kernel matrix between the rows of ``A`` and ``B``."""
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        dot = A @ B.T
        if self.kind == "linear":
            return dot
        if self.kind == "polynomial":
            return (dot + self.coef) ** self.degree
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2 * dot
        return np.exp(-self.gamma * np.maximum(sq, 0.0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "degree": self.degree,
                "coef": self.coef}


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    bias: float
    n_iter: int
    kkt_violation: float


def kkt_violation(alpha, grad, y, C) -> float:
    """``max(0, m - M)``: the maximal-violating-pair gap of the dual."""
    v = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return 0.0
    return max(0.0, float(v[up].max() - v[low].min()))


def _bias(alpha, grad, y, C) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return -float(yg[free].mean())
    at_upper = alpha >= C
    ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    lb_mask = ~ub_mask
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return -float((ub + lb) / 2)


def _smo(Q, y, C, alpha, grad, tol, max_iter):
    """Maximal-violating-pair SMO, updating ``alpha``/``grad`` in place."""
    qd = np.diag(Q)
    it = 0
    while it < max_iter:
        v = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        if vu[i] - vl[j] < tol:
            break
        it += 1
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = qd[i] + qd[j] + 2 * Q[i, j]
            delta = (-grad[i] - grad[j]) / max(quad, TAU)
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = qd[i] + qd[j] - 2 * Q[i, j]
            delta = (grad[i] - grad[j]) / max(quad, TAU)
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        grad += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    return it


def _polish(Q, y, C, alpha):
    """Exact stationary point on the current free face, or None if infeasible.

    Bounded variables stay fixed; the free ones solve the equality-constrained
    KKT system (least squares when the face is degenerate).
    """
    free = (alpha > 0) & (alpha < C)
    F, B = np.flatnonzero(free), np.flatnonzero(~free)
    if F.size == 0:
        return None
    k = F.size
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = Q[np.ix_(F, F)]
    A[:k, k] = y[F]
    A[k, :k] = y[F]
    rhs = np.empty(k + 1)
    rhs[:k] = 1.0 - Q[np.ix_(F, B)] @ alpha[B]
    rhs[k] = -y[B] @ alpha[B]
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    if sol[:k].min() < -1e-12 or sol[:k].max() > C + 1e-12:
        return None
    out = alpha.copy()
    out[F] = np.clip(sol[:k], 0.0, C)
    return out


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
               max_iter: int = 10_000_000) -> DualSolution:
    """SMO on a precomputed kernel matrix ``K`` with labels in {-1, +1}.

    After the ``tol`` stopping rule fires, the free set is polished to the
    exact face optimum; if that fails, SMO resumes at a tighter tolerance
    (down to ``REFINE_TOL``) and polishing is retried.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = _smo(Q, y, C, alpha, grad, tol, max_iter)
    stage_tol = tol
    while kkt_violation(alpha, grad, y, C) > REFINE_TOL and it < max_iter:
        polished = _polish(Q, y, C, alpha)
        if polished is not None:
            g = Q @ polished - 1.0
            if kkt_violation(polished, g, y, C) <= REFINE_TOL:
                alpha, grad = polished, g
                break
        if stage_tol <= REFINE_TOL:
            break
        stage_tol = max(stage_tol * 0.1, REFINE_TOL)
        it += _smo(Q, y, C, alpha, grad, stage_tol, max_iter - it)
    return DualSolution(alpha, _bias(alpha, grad, y, C), it,
                        kkt_violation(alpha, grad, y, C))


@dataclass(frozen=True)
class BinarySvm:
    """Decision function ``sum_i coef_i K(x, sv_i) + bias`` with ``coef_i = alpha_i y_i``."""

    support_vectors: np.ndarray
    dual_coeffs: np.ndarray
    bias: float
    kernel: Kernel = field(default_factory=Kernel)
    C: float = 1.0
    n_iter: int = 0
    kkt_violation: float = 0.0

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise ShapeMismatchError(f"expected {self.dim} features, got {X.shape[-1]}")
        out = self.kernel(X, self.support_vectors) @ self.dual_coeffs + self.bias
        return out[0] if X.ndim == 1 else out

    def dual_objective(self) -> float:
        """``sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`` (to be maximized)."""
        K = self.kernel(self.support_vectors, self.support_vectors)
        c = self.dual_coeffs
        return float(np.abs(c).sum() - 0.5 * c @ K @ c)

    def to_dict(self) -> dict:
        return {"kernel": self.kernel.to_dict(), "C": self.C, "bias": self.bias,
                "dual_coeffs": self.dual_coeffs.tolist(),
                "support_vectors": self.support_vectors.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "BinarySvm":
        sv = np.asarray(doc["support_vectors"], dtype=np.float64)
        return cls(sv.reshape(len(doc["dual_coeffs"]), -1),
                   np.asarray(doc["dual_coeffs"], dtype=np.float64),
                   float(doc["bias"]), Kernel(**doc["kernel"]), float(doc["C"]))


def decision(svm: BinarySvm, x) -> float:
    return float(svm.decision(np.asarray(x, dtype=np.float64).reshape(-1)))


def train_binary(X, y, kernel: Kernel | None = None, C: float = 1.0,
                 tol: float = 1e-3, max_iter: int = 10_000_000) -> BinarySvm:
    """Train a soft-margin binary SVM; ``y`` holds -1/+1 labels."""
    kernel = kernel or Kernel()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ShapeMismatchError("X must be (n, d) with one label per row")
    if not np.all(np.isfinite(X)):
        raise SvmError("features contain non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise SvmError("binary labels must be -1 or +1")
    if len(y) < 2 or not ((y > 0).any() and (y < 0).any()):
        raise SvmError("training data must contain both classes")
    if not C > 0:
        raise SvmError("C must be positive")
    sol = solve_dual(kernel(X, X), y, C, tol, max_iter)
    sv = sol.alpha > 0
    return BinarySvm(X[sv].copy(), (sol.alpha * y)[sv], sol.bias, kernel, float(C),
                     sol.n_iter, sol.kkt_violation)


@dataclass(frozen=True)
class SvmModel:
    scheme: str
    classes: tuple
    binaries: tuple  # ((tag, BinarySvm), ...)

    def decision_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.column_stack([b.decision(X) for _, b in self.binaries])

    def predict(self, X) -> list:
        """Predicted labels for the rows of ``X``."""
        D = self.decision_matrix(X)
        M = len(self.classes)
        if self.scheme == "ovr":
            # argmax returns the lowest index on ties
            return [self.classes[k] for k in np.argmax(D, axis=1)]
        votes = np.zeros((len(D), M), dtype=np.int64)
        summed = np.zeros((len(D), M))
        for col, ((a, b), _) in enumerate(self._pair_indices()):
            d = D[:, col]
            win_a = d >= 0
            votes[win_a, a] += 1
            votes[~win_a, b] += 1
            summed[:, a] += d
            summed[:, b] -= d
        out = []
        for v, s in zip(votes, summed):
            tied = np.flatnonzero(v == v.max())
            best = tied[np.argmax(s[tied])]  # first max keeps the lowest index
            out.append(self.classes[best])
        return out

    def _pair_indices(self):
        pos = {c: i for i, c in enumerate(self.classes)}
        return [((pos[t[0]], pos[t[1]]), b) for t, b in self.binaries]

    def to_json(self) -> str:
        doc = {
            "format": "scatface-svm",
            "version": FORMAT_VERSION,
            "scheme": self.scheme,
            "classes": [_plain(c) for c in self.classes],
            "binaries": [{"tag": [_plain(t) for t in tag], **b.to_dict()}
                         for tag, b in self.binaries],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        doc = json.loads(text)
        if doc.get("format") != "scatface-svm" or doc.get("version") != FORMAT_VERSION:
            raise SvmError("not a scatface SVM model (or unsupported version)")
        binaries = tuple((tuple(b["tag"]), BinarySvm.from_dict(b)) for b in doc["binaries"])
        return cls(doc["scheme"], tuple(doc["classes"]), binaries)


def _plain(v):
    return v.item() if isinstance(v, np.generic) else v


def train_multiclass(X, labels, kernel: Kernel | None = None, C: float = 1.0,
                     scheme: str = "ovo", tol: float = 1e-3) -> SvmModel:
    """One-vs-one (``M(M-1)/2`` binaries, majority vote) or one-vs-rest (``M``
    binaries, largest decision value) multi-class SVM."""
    if scheme not in SCHEMES:
        raise SvmError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if len(X) != len(labels):
        raise ShapeMismatchError("one label per row required")
    classes = tuple(_plain(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise SvmError("need at least two classes")
    binaries = []
    if scheme == "ovo":
        for a, b in itertools.combinations(classes, 2):
            mask = (labels == a) | (labels == b)
            y = np.where(labels[mask] == a, 1.0, -1.0)
            binaries.append(((a, b), train_binary(X[mask], y, kernel, C, tol)))
    else:
        for c in classes:
            y = np.where(labels == c, 1.0, -1.0)
            binaries.append(((c,), train_binary(X, y, kernel, C, tol)))
    return SvmModel(scheme, classes, tuple(binaries))


def predict(model: SvmModel, x):
    """Label of a single feature vector."""
    return model.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
