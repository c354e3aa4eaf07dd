import numpy as np
import pytest

from garding.envelope import (
    central_gradient,
    contact_set,
    discrete_hessian,
    distance_to_boundary,
    gradient_estimate_check,
    hessian_eigenvalues,
    k_convexity_test,
    upper_k_envelope,
)
from garding.grid import GridFunction, ball_domain, box_domain, unit_square
from garding.oracles import hull_concave_envelope
from garding.sym_poly import closed_cone_mask


def _bumps(seed, d):
    rng = np.random.default_rng(seed)
    x, y = d.coords()
    v = sum(rng.normal() * np.exp(-((x - rng.random()) ** 2 + (y - rng.random()) ** 2) / 0.05)
            for _ in range(3))
    return GridFunction(d, v * 16 * x * (1 - x) * y * (1 - y))


# -- discrete Hessian and convexity ---------------------------------------------------


def test_hessian_of_quadratic_is_exact():
    d = unit_square(1 / 8)
    x, y = d.coords()
    H = discrete_hessian(1.5 * x * x + 0.5 * x * y - y * y, d.h)
    inner = H[1:-1, 1:-1]
    assert np.allclose(inner, [[3.0, 0.5], [0.5, -2.0]])


def test_convexity_examples():
    d = unit_square(1 / 8)
    inside = d.interior_mask
    for k in (1, 2):
        assert k_convexity_test(GridFunction.from_callable(d, lambda x, y: (x * x + y * y) / 2), k)[inside].all()
        assert not k_convexity_test(GridFunction.from_callable(d, lambda x, y: -(x * x + y * y) / 2), k)[inside].any()
    saddle = GridFunction.from_callable(d, lambda x, y: x * x - y * y)
    assert k_convexity_test(saddle, 1)[inside].all()
    assert not k_convexity_test(saddle, 2)[inside].any()
    with pytest.raises(ValueError):
        k_convexity_test(saddle, 3)


def test_hessian_eigenvalues_sorted():
    d = unit_square(1 / 8)
    x, y = d.coords()
    eig = hessian_eigenvalues(x * x - 3 * y * y, d.h)
    assert np.allclose(eig[1:-1, 1:-1], [-6.0, 2.0])


# -- envelopes ----------------------------------------------------------------------------


def test_concave_input_is_its_own_envelope():
    d = ball_domain(1.0, 1 / 16)
    u = GridFunction.from_callable(d, lambda x, y: 1 - x * x - y * y)
    res = upper_k_envelope(u, 2)
    assert res.converged
    assert np.allclose(res.envelope.values, u.values, atol=1e-9)
    assert res.contact_mask[d.interior_mask].all()


def test_one_dimensional_spike_gives_tent():
    d = box_domain(0.0, 1.0, 1 / 16)
    u = np.zeros(17)
    u[5] = 1.0
    res = upper_k_envelope(GridFunction(d, u), 1)
    x = d.coords()[0]
    tent = hull_concave_envelope([x], u)
    assert np.allclose(res.envelope.values, tent, atol=1e-8)
    assert res.contact_mask.tolist() == (u == 1.0).tolist() or res.contact_mask[5]


@pytest.mark.parametrize("k", [1, 2])
def test_majorant_and_admissibility(k):
    d = unit_square(1 / 16)
    u = _bumps(1, d)
    res = upper_k_envelope(u, k)
    w = res.envelope
    assert np.all(w.values >= u.values - 1e-12)
    eig = hessian_eigenvalues(-w.values, d.h)
    assert closed_cone_mask(eig, k, tol=1e-6)[d.interior_mask].all()
    contact = res.contact_mask
    assert np.all(np.abs(w.values - u.values)[contact] <= res.tol_used * max(1.0, u.osc()))


def test_idempotent_and_translation_invariant():
    d = unit_square(1 / 16)
    u = _bumps(2, d)
    w = upper_k_envelope(u, 2).envelope
    again = upper_k_envelope(w, 2).envelope
    assert np.abs(again.values - w.values).max() <= 1e-7 * u.osc()
    shifted = upper_k_envelope(GridFunction(d, u.values + 3.0), 2).envelope
    assert np.allclose(shifted.values, w.values + 3.0, atol=1e-8)


def test_monotone_in_data():
    d = unit_square(1 / 16)
    u = _bumps(3, d)
    bigger = GridFunction(d, u.values + np.abs(_bumps(4, d).values))
    w = upper_k_envelope(u, 1).envelope.values
    W = upper_k_envelope(bigger, 1).envelope.values
    assert np.all(w <= W + 1e-8)


def test_smaller_k_gives_lower_envelope():
    # concave functions are superharmonic, so the 1-envelope sits below the 2-envelope
    d = unit_square(1 / 16)
    u = _bumps(5, d)
    w1 = upper_k_envelope(u, 1).envelope.values
    w2 = upper_k_envelope(u, 2).envelope.values
    assert np.all(w1 <= w2 + 1e-8)


def test_multilevel_start_reaches_same_fixed_point():
    d = unit_square(1 / 32)
    u = _bumps(6, d)
    a = upper_k_envelope(u, 2, multilevel=True).envelope.values
    b = upper_k_envelope(u, 2, multilevel=False).envelope.values
    assert np.abs(a - b).max() <= 1e-7 * u.osc()


def test_close_to_hull_oracle_on_coarse_grid():
    # the discrete scheme converges slowly; at h = 1/32 a few per cent is expected
    d = unit_square(1 / 32)
    u = _bumps(7, d)
    w = upper_k_envelope(u, 2).envelope.values
    hull = hull_concave_envelope(d.coords(), u.values)
    assert np.abs(w - hull).max() <= 0.05 * u.osc()


def test_non_convergence_is_flagged():
    d = unit_square(1 / 16)
    res = upper_k_envelope(_bumps(1, d), 2, max_iter=3, multilevel=False)
    assert not res.converged and res.iterations == 3


def test_contact_set_shortcut():
    d = unit_square(1 / 8)
    u = GridFunction.from_callable(d, lambda x, y: -(x - 0.5) ** 2 - (y - 0.5) ** 2)
    assert contact_set(u, 2)[d.interior_mask].all()


# -- gradient estimate ---------------------------------------------------------------------


def test_distance_to_boundary():
    d = unit_square(1 / 8)
    dist = distance_to_boundary(d)
    assert dist[4, 4] == pytest.approx(0.5)
    assert dist[1, 4] == pytest.approx(1 / 8)


def test_central_gradient_of_linear():
    d = unit_square(1 / 8)
    x, y = d.coords()
    g = central_gradient(2 * x - y, d.h)
    assert np.allclose(g[1:-1, 1:-1], [2.0, -1.0])


def test_gradient_check_constant_and_linear():
    d = unit_square(1 / 16)
    est = gradient_estimate_check(GridFunction.from_callable(d, lambda x, y: 1.0), 2, 1.0)
    assert est.lhs == 0 and est.required_C == 0
    lin = GridFunction.from_callable(d, lambda x, y: x)
    est = gradient_estimate_check(lin, 2, 1.0, kappa=0.25)
    inner = d.interior_mask & (distance_to_boundary(d) >= 0.25 * d.diam)
    assert est.lhs == pytest.approx(inner.sum() * d.cell_volume)
    assert est.rhs_factor == pytest.approx(d.diam ** 1.0 * 1.0)
    assert est.k_convex and est.exponent_ok


def test_gradient_check_flags():
    d = unit_square(1 / 16)
    v = GridFunction.from_callable(d, lambda x, y: x * x - y * y)
    est = gradient_estimate_check(v, 1, 3.0)
    assert not est.exponent_ok and est.k_convex
    with pytest.raises(ValueError):
        gradient_estimate_check(v, 1, 1.0, kappa=0.6)
    with pytest.raises(ValueError):
        gradient_estimate_check(v, 1, 1.0, kappa=0.49)


def test_gradient_check_mesh_stable():
    cs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        d = unit_square(h)
        v = GridFunction.from_callable(d, lambda x, y: np.exp(x + 0.5 * y) + x * x)
        cs.append(gradient_estimate_check(v, 2, 2.0).required_C)
    assert max(cs) / min(cs) - 1 < 0.2
