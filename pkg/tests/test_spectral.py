import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from garding.spectral import (
    eigen_decompose,
    eigenvalues,
    matrix_cone_membership,
    symmetric_matrix,
    trace_and_extremes,
)
from garding.sym_poly import Membership, elementary_symmetric


def _orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def _with_condition(rng, n, cond):
    lam = np.exp(rng.uniform(0, np.log(cond), size=n)) * rng.choice([-1, 1], size=n)
    q = _orthogonal(rng, n)
    return (q * lam) @ q.T


seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 8)


@given(seeds, dims)
def test_matches_lapack(seed, n):
    a = _with_condition(np.random.default_rng(seed), n, 1e3)
    assert np.allclose(eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-12 * np.abs(a).max())


@given(seeds, dims)
def test_decomposition_reconstructs(seed, n):
    a = _with_condition(np.random.default_rng(seed), n, 1e4)
    d = eigen_decompose(a)
    assert np.allclose(d.reconstruct(), a, atol=1e-12 * np.abs(a).max())
    assert np.allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(n), atol=1e-12)
    assert np.all(np.diff(d.eigenvalues) >= 0)


@given(seeds, st.integers(2, 6))
def test_det_and_trace_identities(seed, n):
    a = _with_condition(np.random.default_rng(seed), n, 1e6)
    lam = eigenvalues(a)
    det = np.linalg.det(a)
    assert abs(elementary_symmetric(lam, n) - det) <= 1e-9 * abs(det)
    tr = np.trace(a)
    assert abs(elementary_symmetric(lam, 1) - tr) <= 1e-10 * max(abs(tr), np.abs(lam).sum())


@given(seeds, dims)
def test_conjugation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    a = _with_condition(rng, n, 1e3)
    q = _orthogonal(rng, n)
    assert np.allclose(eigenvalues(q @ a @ q.T), eigenvalues(a), atol=1e-9 * np.abs(a).max())


def test_batched():
    rng = np.random.default_rng(3)
    a = np.stack([_with_condition(rng, 3, 10) for _ in range(12)]).reshape(3, 4, 3, 3)
    lam = eigenvalues(a)
    assert lam.shape == (3, 4, 3)
    assert np.allclose(lam, np.linalg.eigvalsh(a), atol=1e-12 * np.abs(a).max())


def test_diagonal_and_degenerate():
    assert eigenvalues(np.diag([3.0, 1.0, 2.0])).tolist() == [1.0, 2.0, 3.0]
    assert np.allclose(eigenvalues(np.ones((4, 4))), [0, 0, 0, 4], atol=1e-14)


def test_upper_triangle_is_used():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.allclose(symmetric_matrix(a), [[1, 2], [2, 1]])


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigenvalues(np.eye(9))
    with pytest.raises(ValueError):
        eigenvalues(np.array([[np.nan, 0], [0, 1]]))


def test_cone_membership_and_extremes():
    assert matrix_cone_membership(np.eye(3), 3).membership is Membership.INTERIOR
    assert matrix_cone_membership(np.diag([-0.5, 2, 2]), 2).membership is Membership.INTERIOR
    assert matrix_cone_membership(np.diag([-1.0, 2, 2]), 3).membership is Membership.OUTSIDE
    assert trace_and_extremes(np.diag([2.0, 5.0, 1.0])) == (8.0, 1.0, 5.0)
