from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from compactqed.basis import (
    CouplingParams, GroupParams, MatterBasis, RotatorBasis, index_of, vector_of,
)
from compactqed.exceptions import DomainError


def test_group_params_validation():
    g = GroupParams(2, 5)
    assert g.local_dim == 5 and g.group_order == 11
    with pytest.raises(DomainError):
        GroupParams(4, 3)
    with pytest.raises(DomainError):
        GroupParams(-1, 3)
    with pytest.raises(DomainError):
        GroupParams(1, 0)


def test_coupling_params():
    c = CouplingParams.from_inverse_g2(10.0, m=1.0)
    assert c.g2 == pytest.approx(0.1) and c.beta == pytest.approx(10.0) and c.a == 1.0
    with pytest.raises(DomainError):
        CouplingParams(0.0)
    with pytest.raises(DomainError):
        CouplingParams(1.0, a=-1.0)


def test_index_order_is_mixed_radix_first_most_significant():
    b = RotatorBasis(3, 1)
    assert index_of((-1, -1, -1), b) == 0
    assert index_of((-1, -1, 0), b) == 1
    assert index_of((0, -1, -1), b) == 9
    assert index_of((0, 0, 0), b) == 13
    assert b.dim == 27


def test_index_out_of_range():
    b = RotatorBasis(3, 1)
    with pytest.raises(DomainError):
        index_of((2, 0, 0), b)
    with pytest.raises(DomainError):
        index_of((0, 0), b)
    with pytest.raises(DomainError):
        vector_of(27, b)


@given(st.integers(1, 4), st.integers(0, 3), st.data())
def test_index_round_trip(n, l, data):
    b = RotatorBasis(n, l)
    i = data.draw(st.integers(0, b.dim - 1))
    assert index_of(vector_of(i, b), b) == i


def test_grid_matches_vector_of():
    b = RotatorBasis(3, 2)
    grid = b.grid()
    for i in (0, 7, 62, 124):
        assert tuple(grid[i]) == vector_of(i, b)


def test_matter_basis_dimension():
    mb = MatterBasis(2)
    assert mb.dim == 2**4 * 5**5 == 50_000
    assert mb.dims == [2, 2, 2, 2, 5, 5, 5, 5, 5]
