import numpy as np
import pytest
from hypothesis import given, strategies as st

from ranes.actions import index_to_mask, mask_to_index, n_actions


def test_action_space_size():
    assert n_actions(7) == 128


def test_index_127_is_all_on():
    assert index_to_mask(127, 7).all()


def test_index_0_is_all_off():
    assert not index_to_mask(0, 7).any()


def test_bijection_over_all_128_indices():
    seen = set()
    for i in range(128):
        mask = index_to_mask(i, 7)
        assert mask_to_index(mask) == i
        seen.add(tuple(mask))
    assert len(seen) == 128


@given(st.integers(min_value=1, max_value=10), st.data())
def test_bijection_other_cell_counts(n_cells, data):
    i = data.draw(st.integers(min_value=0, max_value=(1 << n_cells) - 1))
    assert mask_to_index(index_to_mask(i, n_cells)) == i


def test_single_bits_map_to_single_cells():
    for j in range(7):
        mask = index_to_mask(1 << j, 7)
        assert mask[j] and mask.sum() == 1


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        index_to_mask(128, 7)
    with pytest.raises(ValueError):
        index_to_mask(-1, 7)


def test_mask_accepts_int_arrays():
    assert mask_to_index(np.array([1, 0, 1, 0, 0, 0, 0])) == 5
