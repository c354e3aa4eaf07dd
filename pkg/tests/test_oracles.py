import numpy as np
import pytest

from garding.grid import box_domain, unit_square
from garding.oracles import brute_force_rho_star, hull_concave_envelope, subset_esp


def test_subset_esp():
    assert subset_esp([1, 2, 3, 4], 2) == 35
    assert subset_esp([1, 2, 3], 0) == 1


def test_brute_force_closed_forms():
    assert brute_force_rho_star([1.0, 1.0, 1.0], 3) == pytest.approx(1.0, abs=1e-6)
    assert brute_force_rho_star([1.0, 4.0], 2) == pytest.approx(2.0, abs=1e-5)
    assert brute_force_rho_star([1.0, 2.0, 3.0], 3) == pytest.approx(6 ** (1 / 3), abs=1e-5)


def test_brute_force_limits():
    with pytest.raises(ValueError):
        brute_force_rho_star([1, 1, 1, 1], 2)
    with pytest.raises(ValueError):
        brute_force_rho_star([1, 1], 1)


def test_hull_1d_tent():
    d = box_domain(0.0, 1.0, 0.125)
    x = d.coords()[0]
    u = np.zeros(9)
    u[2] = 1.0
    hull = hull_concave_envelope([x], u)
    expected = np.where(x <= 0.25, x / 0.25, (1 - x) / 0.75)
    assert np.allclose(hull, expected)


def test_hull_2d_reproduces_concave_data():
    d = unit_square(1 / 8)
    x, y = d.coords()
    u = -(x - 0.3) ** 2 - 2 * (y - 0.6) ** 2 + x * y
    assert np.allclose(hull_concave_envelope([x, y], u), u, atol=1e-12)


def test_hull_2d_majorises_and_is_concave_along_lines():
    rng = np.random.default_rng(0)
    d = unit_square(1 / 8)
    x, y = d.coords()
    u = rng.normal(size=d.shape)
    w = hull_concave_envelope([x, y], u)
    assert np.all(w >= u - 1e-12)
    assert np.all(w[2:, :] + w[:-2, :] - 2 * w[1:-1, :] <= 1e-12)
    assert np.all(w[:, 2:] + w[:, :-2] - 2 * w[:, 1:-1] <= 1e-12)
