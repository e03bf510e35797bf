import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import qp_bruteforce
from scatface.errors import ShapeMismatchError, SvmError
from scatface.svm import (BinarySvm, Kernel, SvmModel, decision, predict, train_binary,
                          train_multiclass)

LIN = Kernel()


def _alpha_full(svm, X):
    """Recover alpha_i for every training row from the stored support vectors."""
    alpha = np.zeros(len(X))
    for sv, c in zip(svm.support_vectors, svm.dual_coeffs):
        alpha[np.flatnonzero(np.all(X == sv, axis=1))] = abs(c)
    return alpha


@pytest.fixture(scope="module")
def two_point():
    X = np.array([[-1.0, 0.0], [1.0, 0.0]])
    return train_binary(X, np.array([-1.0, 1.0]), LIN, C=10.0)


def test_two_point_solution(two_point):
    np.testing.assert_allclose(np.abs(two_point.dual_coeffs), [0.5, 0.5], atol=1e-9)
    w = two_point.dual_coeffs @ two_point.support_vectors
    np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-9)
    assert abs(two_point.bias) <= 1e-9
    assert decision(two_point, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-9)
    assert decision(two_point, [2.0, 0.0]) == pytest.approx(2.0, abs=1e-9)


def test_decision_dimension_mismatch(two_point):
    with pytest.raises(ShapeMismatchError):
        decision(two_point, [1.0, 2.0, 3.0])


def test_xor_not_separable():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    svm = train_binary(X, y, LIN, C=1.0)
    acc = np.mean(np.sign(svm.decision(X)) == y)
    assert acc <= 0.75
    assert svm.kkt_violation <= 1e-3


def test_xor_rbf_separates():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    svm = train_binary(X, y, Kernel.rbf(2.0), C=100.0)
    assert np.all(np.sign(svm.decision(X)) == y)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2 ** 32 - 1),
       C=st.sampled_from([0.5, 1.0, 10.0]))
def test_matches_bruteforce_and_kkt(n, seed, C):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    y = rng.choice([-1.0, 1.0], size=n)
    y[:2] = [1.0, -1.0]
    svm = train_binary(X, y, LIN, C)
    best, _ = qp_bruteforce(LIN(X, X), y, C)
    assert abs(svm.dual_objective() - best) <= 1e-6
    alpha = _alpha_full(svm, X)
    assert np.all(alpha >= 0) and np.all(alpha <= C + 1e-12)
    assert np.all(np.abs(svm.dual_coeffs) > 0)
    assert abs(np.sum(alpha * y)) <= 1e-8
    interior = (alpha > 1e-8) & (alpha < C - 1e-8)
    f = svm.decision(X)
    np.testing.assert_allclose(f[interior], y[interior], atol=1e-6)


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((30, 4))
    y = np.where(X[:, 0] + 0.5 * rng.standard_normal(30) > 0, 1.0, -1.0)
    probe = rng.standard_normal((50, 4))
    base = train_binary(X, y, LIN, 1.0).decision(probe)
    for s in range(3):
        p = np.random.default_rng(s).permutation(30)
        other = train_binary(X[p], y[p], LIN, 1.0).decision(probe)
        assert np.max(np.abs(other - base)) <= 1e-6


def test_separable_margin():
    rng = np.random.default_rng(12)
    X = np.vstack([rng.normal(-3, 0.5, (15, 2)), rng.normal(3, 0.5, (15, 2))])
    y = np.repeat([-1.0, 1.0], 15)
    svm = train_binary(X, y, LIN, C=1e4)
    assert np.all(y * svm.decision(X) >= 1 - 1e-6)


@pytest.mark.parametrize("X, y", [
    (np.zeros((3, 2)), np.ones(3)),
    (np.array([[np.inf, 0.0], [0.0, 0.0]]), np.array([1.0, -1.0])),
    (np.zeros((2, 2)), np.array([1.0, 2.0])),
])
def test_binary_errors(X, y):
    with pytest.raises(SvmError):
        train_binary(X, y)


@pytest.mark.parametrize("kwargs", [{"kind": "rbf"}, {"kind": "rbf", "gamma": -1.0},
                                    {"kind": "polynomial", "degree": 0}, {"kind": "sigmoid"}])
def test_kernel_validation(kwargs):
    with pytest.raises(SvmError):
        Kernel(**kwargs)


def test_kernels_values():
    a, b = np.array([[1.0, 2.0]]), np.array([[0.0, 1.0]])
    assert LIN(a, b)[0, 0] == 2.0
    assert Kernel.polynomial(2, 1.0)(a, b)[0, 0] == 9.0
    assert Kernel.rbf(0.5)(a, b)[0, 0] == pytest.approx(np.exp(-1.0))


@pytest.fixture(scope="module")
def clusters():
    rng = np.random.default_rng(13)
    centers = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    X = np.vstack([c + 0.1 * rng.standard_normal((10, 2)) for c in centers])
    return centers, X, np.repeat([0, 1, 2], 10)


@pytest.mark.parametrize("scheme, n_binaries", [("ovo", 3), ("ovr", 3)])
def test_three_clusters(clusters, scheme, n_binaries):
    centers, X, labels = clusters
    model = train_multiclass(X, labels, LIN, 1.0, scheme)
    assert len(model.binaries) == n_binaries
    assert model.predict(X) == list(labels)
    assert [predict(model, c) for c in centers] == [0, 1, 2]


def test_two_classes_schemes_agree():
    rng = np.random.default_rng(14)
    X = rng.standard_normal((20, 3))
    labels = np.where(X[:, 1] > 0, "b", "a")
    ovo = train_multiclass(X, labels, LIN, 1.0, "ovo")
    ovr = train_multiclass(X, labels, LIN, 1.0, "ovr")
    probe = rng.standard_normal((200, 3))
    assert ovo.predict(probe) == ovr.predict(probe)
    (_, binary), = ovo.binaries
    assert ovo.predict(probe) == ["a" if d >= 0 else "b" for d in binary.decision(probe)]


def _const(bias):
    return BinarySvm(np.zeros((1, 2)), np.zeros(1), bias, LIN, 1.0)


@pytest.mark.parametrize("d01, d02, d12, expected", [
    (1.0, -2.0, 1.0, 2),  # one vote each; class 2 has the largest summed decision
    (1.0, -1.0, 1.0, 0),  # summed decisions tie too; lowest index wins
])
def test_ovo_circular_tie(d01, d02, d12, expected):
    model = SvmModel("ovo", (0, 1, 2), (((0, 1), _const(d01)), ((0, 2), _const(d02)),
                                       ((1, 2), _const(d12))))
    assert predict(model, [0.0, 0.0]) == expected


def test_single_class_rejected():
    with pytest.raises(SvmError):
        train_multiclass(np.zeros((4, 2)), [1, 1, 1, 1])


def test_multiclass_deterministic_and_json(clusters):
    _, X, labels = clusters
    a = train_multiclass(X, labels)
    b = train_multiclass(X, labels)
    assert a.to_json() == b.to_json()
    back = SvmModel.from_json(a.to_json())
    np.testing.assert_allclose(back.decision_matrix(X), a.decision_matrix(X), atol=1e-12)
    assert back.predict(X) == a.predict(X)
    with pytest.raises(SvmError):
        SvmModel.from_json('{"format": "x"}')
