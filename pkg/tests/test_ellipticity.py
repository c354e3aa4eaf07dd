import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from garding.abp import sample_operator_field
from garding.dual_cone import is_dual_interior, rho_star
from garding.ellipticity import (
    chi,
    chi_threshold,
    ellipticity_profile,
    rho_star_lower_bound,
    side_condition,
)
from garding.grid import SymmetricMatrixField, ball_domain, unit_square


def test_chi_values():
    assert chi(3, 2, 3.0) == pytest.approx(2 - 3 * (1 - 2 / 3))
    assert chi(3, 3, 100.0) > 0
    assert chi_threshold(3, 2) == 6.0
    assert chi_threshold(4, 4) == np.inf
    with pytest.raises(ValueError):
        chi(3, 2, 0.0)


def test_side_condition_window():
    # for n = 3, k = 2 the condition chi a0 <= 1/2 holds on [5.5, 6)
    assert not side_condition(3, 2, 5.4)
    assert side_condition(3, 2, 5.6)
    assert chi(3, 2, 5.99) > 0


def test_lower_bound_validity_flag():
    b, valid = rho_star_lower_bound([1.0, 1.0, 3.6], 2)
    assert valid and b == pytest.approx(chi(3, 2, 5.6) * 5.6 / 3)
    _, valid = rho_star_lower_bound([1.0, 1.0, 1.0], 2)
    assert not valid
    with pytest.raises(ValueError):
        rho_star_lower_bound([1.0, 2.0], 1)
    with pytest.raises(ValueError):
        rho_star_lower_bound([-1.0, 2.0, 3.0], 2)


def _spectrum_with_ratio(rng, n, a0):
    rest = rng.dirichlet(np.ones(n - 1)) * (a0 - n)
    return np.concatenate([[1.0], 1.0 + rest])


@given(st.integers(0, 2**32 - 1), st.integers(3, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, n - 1))))
def test_positive_chi_implies_dual_interior(seed, nk):
    n, k = nk
    rng = np.random.default_rng(seed)
    a0 = rng.uniform(n, chi_threshold(n, k))
    lam = _spectrum_with_ratio(rng, n, a0)
    if chi(n, k, lam.sum() / lam[0]) > 0:
        assert is_dual_interior(lam, k)


@given(st.integers(0, 2**32 - 1), st.integers(3, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, n - 1))))
def test_lower_bound_holds_in_window(seed, nk):
    n, k = nk
    rng = np.random.default_rng(seed)
    lo = (n * (n - 1) - (k - 1) / (n - 1)) / (n - k)
    lam = _spectrum_with_ratio(rng, n, rng.uniform(max(lo, n), chi_threshold(n, k)))
    bound, valid = rho_star_lower_bound(lam, k)
    if valid:
        assert rho_star(lam, k).value >= bound - 1e-6 * np.linalg.norm(lam)


def test_profile_identity_field():
    d = unit_square(0.25)
    A = np.broadcast_to(np.eye(3), d.shape + (3, 3))
    prof = ellipticity_profile(SymmetricMatrixField(d, A, np.zeros(d.shape + (3,))), 2)
    assert prof.a0 == pytest.approx(3.0)
    assert prof.a_k == pytest.approx(1.0, rel=1e-6)
    assert prof.max_condition == pytest.approx(1.0)
    # the printed refined ratio fails at the identity, the derived one holds
    assert not prof.printed_holds
    assert prof.corrected_holds and prof.crude_holds
    assert prof.outside_nodes == 0 and prof.nodes == 9


def test_profile_corrected_ratio_on_random_fields():
    d = ball_domain(1.0, 0.25)
    for seed in range(4):
        fld = sample_operator_field(seed, 3, 2, "dual_interior", domain=d)
        prof = ellipticity_profile(fld, 2)
        assert prof.outside_nodes == 0
        assert prof.corrected_holds


def test_profile_counts_outside_nodes():
    d = unit_square(0.25)
    A = np.broadcast_to(np.diag([1.0, 1.0, 50.0]), d.shape + (3, 3))
    prof = ellipticity_profile(SymmetricMatrixField(d, A, np.zeros(d.shape + (3,))), 2)
    assert prof.outside_nodes == 9 and prof.a_k == np.inf
    with pytest.raises(ValueError):
        ellipticity_profile(SymmetricMatrixField(d, -A, np.zeros(d.shape + (3,))), 2)
