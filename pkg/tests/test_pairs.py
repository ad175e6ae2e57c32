import numpy as np
import pytest

from hetclust.pairs import n_pairs, pair_arrays, pair_index


def test_pair_index_matches_row_major_upper_triangular():
    for n in (3, 4, 7, 12):
        iu, ju = pair_arrays(n)
        assert len(iu) == n_pairs(n)
        for k, (i, j) in enumerate(zip(iu.tolist(), ju.tolist())):
            assert pair_index(i, j, n) == k
            assert pair_index(j, i, n) == k


def test_pair_index_rejects_bad_input():
    with pytest.raises(ValueError):
        pair_index(2, 2, 5)
    with pytest.raises(IndexError):
        pair_index(0, 5, 5)


def test_pair_arrays_cover_all_pairs():
    n = 9
    iu, ju = pair_arrays(n)
    seen = set(zip(iu.tolist(), ju.tolist()))
    assert len(seen) == n_pairs(n)
    assert all(i < j for i, j in seen)
