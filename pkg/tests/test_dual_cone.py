from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from garding.dual_cone import (
    Status,
    certificate_is_valid,
    comparison_mu,
    dual_membership,
    esp_derivatives,
    is_dual_interior,
    rho_star,
    rho_star_values,
    upper_bound_1_7,
)
from garding.oracles import brute_force_rho_star
from garding.sym_poly import Membership, elementary_symmetric, in_closed_cone

positive = st.integers(2, 5).flatmap(
    lambda n: st.lists(st.floats(0.2, 5.0), min_size=n, max_size=n)
).map(np.array)


# -- closed forms -----------------------------------------------------------------


def test_determinant_identity_example():
    r = rho_star([1, 2, 3], 3)
    assert r.status is Status.OPTIMAL
    assert r.value == pytest.approx(6 ** (1 / 3), abs=1e-10)


def test_k1_on_and_off_the_ray():
    r = rho_star([2.0, 2.0, 2.0], 1)
    assert r.status is Status.OPTIMAL and r.value == 2.0
    r = rho_star([1.0, 2.0, 3.0], 1)
    assert r.status is Status.UNBOUNDED_BELOW
    assert certificate_is_valid([1, 2, 3], 1, r.certificate)


def test_two_by_two_closed_form():
    # n = k = 2 gives sqrt(det); the identity is an optimum with mu = 1
    assert rho_star([1.0, 1.0], 2).value == pytest.approx(1.0, abs=1e-12)
    assert rho_star([1.0, 4.0], 2).value == pytest.approx(2.0, abs=1e-10)


def test_known_intermediate_value():
    # the minimiser is mu = (2, 1, 1) / sqrt(... ) scaled onto S_2 = 3
    assert rho_star([1, 1, 2], 2).value == pytest.approx(2 / np.sqrt(3), abs=1e-9)


@given(positive)
def test_value_matches_determinant_root(lam):
    n = lam.size
    r = rho_star(lam, n)
    assert abs(r.value - np.exp(np.mean(np.log(lam)))) <= 1e-6 * np.linalg.norm(lam)


# -- result invariants --------------------------------------------------------------


@given(positive, st.data())
def test_optimal_mu_is_feasible_and_attains(lam, data):
    n = lam.size
    k = data.draw(st.integers(2, n))
    r = rho_star(lam, k)
    if r.status is not Status.OPTIMAL:
        return
    mu = r.optimal_mu
    assert in_closed_cone(mu, k)
    assert elementary_symmetric(mu, k) >= comb(n, k) * (1 - 1e-8)
    assert lam @ mu / n == pytest.approx(r.value, rel=1e-8)
    assert r.kkt_residual < 1e-4


@given(st.integers(2, 5).flatmap(
    lambda n: st.lists(st.floats(-3, 3), min_size=n, max_size=n)).map(np.array), st.data())
def test_unbounded_carries_certificate(lam, data):
    k = data.draw(st.integers(1, lam.size))
    r = rho_star(lam, k)
    if r.status is Status.UNBOUNDED_BELOW:
        assert r.value == -np.inf
        assert certificate_is_valid(lam, k, r.certificate)


def test_negative_entry_is_unbounded_for_every_k():
    for k in range(2, 5):
        r = rho_star([-0.01, 1, 1, 1], k)
        assert r.status is Status.UNBOUNDED_BELOW


def test_boundary_point():
    r = rho_star([0.0, 1.0, 1.0], 3)
    assert r.status is Status.BOUNDARY_OPTIMAL and abs(r.value) <= 1e-12


def test_zero_and_nonfinite_inputs():
    assert rho_star([0.0, 0.0], 2).status is Status.BOUNDARY_OPTIMAL
    assert rho_star([np.nan, 1.0], 2).status is Status.INFEASIBLE_INPUT
    with pytest.raises(ValueError):
        rho_star([1.0, 2.0], 3)


def test_results_in_caller_order():
    r = rho_star([3.0, 1.0, 2.0], 3)
    mu = r.optimal_mu
    # mu_i is proportional to 1/lam_i at the determinant optimum
    assert mu[1] > mu[2] > mu[0]


# -- structure ----------------------------------------------------------------------


@given(positive, st.sampled_from([0.1, 3.0, 10.0]))
def test_positive_homogeneity(lam, t):
    k = lam.size
    a, b = rho_star(lam, k), rho_star(t * lam, k)
    assert b.value == pytest.approx(t * a.value, rel=1e-7)


@given(positive, st.randoms(use_true_random=False))
def test_permutation_invariance(lam, rnd):
    k = max(2, lam.size - 1)
    perm = list(range(lam.size))
    rnd.shuffle(perm)
    a, b = rho_star(lam, k).as_float(), rho_star(lam[perm], k).as_float()
    assert a == b or abs(a - b) <= 1e-9 * np.linalg.norm(lam)


@given(positive)
def test_monotone_in_k(lam):
    vals = [rho_star(lam, k).as_float() for k in range(1, lam.size + 1)]
    for a, b in zip(vals, vals[1:]):
        assert b >= a - 1e-7 * np.linalg.norm(lam)


@given(positive)
def test_upper_bound(lam):
    for k in range(2, lam.size + 1):
        r = rho_star(lam, k)
        if r.bounded:
            assert r.value <= upper_bound_1_7(lam, k) + 1e-6 * np.linalg.norm(lam)


def test_upper_bound_is_attained_on_extremal_ray():
    for n in range(2, 6):
        for k in range(1, n + 1):
            lam = np.array([1.0] * k + [float(k)] * (n - k))
            ub = upper_bound_1_7(lam, k)
            assert rho_star(lam, k).value == pytest.approx(ub, rel=1e-5)


def test_comparison_mu_is_feasible_and_attains_bound():
    lam = np.array([2.0, 0.5, 3.0, 1.0])
    for k in range(1, 5):
        mu = comparison_mu(lam, k)
        assert in_closed_cone(mu, k)
        assert elementary_symmetric(mu, k) == pytest.approx(comb(4, k))
        assert lam @ mu / 4 == pytest.approx(upper_bound_1_7(lam, k))


@given(positive, positive)
def test_concavity(a, b):
    if a.size != b.size:
        return
    k = a.size
    va, vb = rho_star(a, k).value, rho_star(b, k).value
    mid = rho_star(0.5 * (a + b), k).value
    assert mid >= 0.5 * (va + vb) - 1e-6 * max(np.linalg.norm(a), np.linalg.norm(b))


# -- membership ---------------------------------------------------------------------


def test_membership_examples():
    assert dual_membership([1, 2, 3], 1).membership is Membership.OUTSIDE
    assert dual_membership([1, 1, 1], 1).membership is Membership.INTERIOR
    assert dual_membership([1, 2, 3], 3).membership is Membership.INTERIOR
    assert dual_membership([0, 1, 1], 3).membership is Membership.BOUNDARY
    assert dual_membership([-1, 1, 1], 3).membership is Membership.OUTSIDE


def test_dual_cones_grow_with_k():
    rng = np.random.default_rng(4)
    for _ in range(40):
        lam = np.exp(rng.normal(scale=0.6, size=4))
        inside = [is_dual_interior(lam, k) for k in range(1, 5)]
        first = inside.index(True) if True in inside else 4
        assert all(inside[first:])


def test_openness_probe():
    lam = np.array([1.0, 1.3, 1.6])
    for k in (2, 3):
        for i in range(3):
            for s in (1e-4, -1e-4):
                e = np.zeros(3)
                e[i] = s * np.linalg.norm(lam)
                assert is_dual_interior(lam + e, k)


# -- helpers --------------------------------------------------------------------------


def test_esp_derivatives_by_finite_differences():
    mu = np.array([1.3, 0.7, 2.1, 0.4])
    vals, grads, hess = esp_derivatives(mu, 3)
    eps = 1e-6
    for j in range(1, 4):
        for i in range(4):
            d = np.zeros(4)
            d[i] = eps
            fd = (elementary_symmetric(mu + d, j) - elementary_symmetric(mu - d, j)) / (2 * eps)
            assert grads[j][i] == pytest.approx(fd, rel=1e-6, abs=1e-8)
        assert np.allclose(np.diag(hess[j]), 0)
    assert vals[3] == pytest.approx(elementary_symmetric(mu, 3))


def test_rho_star_values_batch_matches_scalar():
    rng = np.random.default_rng(5)
    eigs = np.exp(rng.normal(scale=0.4, size=(6, 3)))
    eigs[0] = [-1.0, 1.0, 2.0]
    eigs[1] = eigs[2]
    for k in (1, 2, 3):
        batch = rho_star_values(eigs, k)
        single = [rho_star(e, k).as_float() for e in eigs]
        assert np.allclose(batch, single, rtol=1e-7)


def test_brute_force_oracle_agrees():
    rng = np.random.default_rng(6)
    for n, k in [(2, 2), (3, 2), (3, 3)]:
        lam = np.exp(rng.normal(scale=0.3, size=n))
        r = rho_star(lam, k)
        if r.bounded:
            assert abs(r.value - brute_force_rho_star(lam, k)) <= 5e-3
    assert brute_force_rho_star([-0.5, 1, 1], 2) == -np.inf
