import json

import numpy as np
import pytest

from garding.grid import (
    GridDomain,
    GridFunction,
    SymmetricMatrixField,
    ball_domain,
    box_domain,
    unit_square,
)


def test_unit_square_layout():
    d = unit_square(0.25)
    assert d.shape == (5, 5)
    assert d.interior_mask.sum() == 9
    assert d.boundary_mask.sum() == 16
    assert d.diam == pytest.approx(np.sqrt(2))
    assert d.cell_volume == 0.0625


def test_ball_domain_padding_and_diameter():
    d = ball_domain(1.0, 0.125)
    assert not d.interior_mask[0].any() and not d.interior_mask[:, -1].any()
    assert d.diam == 2.0
    x, y = d.coords()
    assert np.all(x[d.interior_mask] ** 2 + y[d.interior_mask] ** 2 < 1)
    # padding nodes exist beyond the boundary ring
    assert (~d.active_mask).any()


def test_one_dimensional():
    d = box_domain(0.0, 1.0, 0.1)
    assert d.dim == 1 and d.shape == (11,)
    assert d.boundary_mask.tolist() == [True] + [False] * 9 + [True]


def test_validation():
    with pytest.raises(ValueError):
        GridDomain((2, 5), 0.1, np.zeros((2, 5), bool))
    with pytest.raises(ValueError):
        GridDomain((5, 5), 0.0, np.zeros((5, 5), bool))
    with pytest.raises(ValueError):
        GridDomain((5, 5), 0.1, np.ones((5, 5), bool))
    with pytest.raises(ValueError):
        GridFunction(unit_square(0.25), np.full((5, 5), np.inf))


def test_grid_function_round_trip():
    d = ball_domain(1.0, 0.25)
    u = GridFunction.from_callable(d, lambda x, y: x * y + 1)
    v = GridFunction.from_json(u.to_json())
    assert np.array_equal(u.values, v.values)
    assert v.domain.shape == d.shape and np.array_equal(v.domain.interior_mask, d.interior_mask)
    assert json.loads(u.to_json())["shape"] == list(d.shape)


def test_constant_callable_broadcasts():
    d = unit_square(0.25)
    u = GridFunction.from_callable(d, lambda x, y: 3.0)
    assert u.values.shape == d.shape and u.osc() == 0.0


def test_matrix_field_symmetrises_and_round_trips():
    d = unit_square(0.5)
    rng = np.random.default_rng(0)
    A = rng.normal(size=d.shape + (2, 2))
    fld = SymmetricMatrixField(d, A)
    assert np.allclose(fld.A, np.swapaxes(fld.A, -1, -2))
    assert fld.b.shape == d.shape + (2,) and np.all(fld.c == 0)
    back = SymmetricMatrixField.from_dict(json.loads(json.dumps(fld.to_dict())))
    assert np.array_equal(back.A, fld.A)


def test_matrix_field_shape_checks():
    d = unit_square(0.5)
    with pytest.raises(ValueError):
        SymmetricMatrixField(d, np.zeros((3, 3, 2, 3)))
    with pytest.raises(ValueError):
        SymmetricMatrixField(d, np.zeros((3, 3, 2, 2)), b=np.zeros((3, 3, 3)))
