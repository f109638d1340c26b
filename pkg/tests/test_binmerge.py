import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elfd.binmerge import MergeMap, apply_merge, learn_merge_map, load_merge_map, save_merge_map


def brute_force_merge(counts, V):
    """Re-sort every step; merge the two groups with least (count, smallest bin)."""
    groups = [[int(c), [i]] for i, c in enumerate(counts)]
    while len(groups) > V:
        groups.sort(key=lambda g: (g[0], min(g[1])))
        a, b = groups[0], groups[1]
        groups = groups[2:] + [[a[0] + b[0], a[1] + b[1]]]
    groups.sort(key=lambda g: min(g[1]))
    return [sorted(g[1]) for g in groups]


def test_no_merges_is_identity():
    m = learn_merge_map([4, 3, 2, 1], 4)
    assert m.groups() == [[0], [1], [2], [3]]


def test_hand_worked_example():
    m = learn_merge_map([4, 3, 2, 1], 2)
    assert m.groups() == [[0], [1, 2, 3]]
    assert brute_force_merge([4, 3, 2, 1], 2) == [[0], [1, 2, 3]]


@given(st.lists(st.integers(0, 20), min_size=1, max_size=30).filter(lambda c: sum(c) > 0))
def test_single_group(counts):
    assert learn_merge_map(counts, 1).groups() == [list(range(len(counts)))]


@settings(max_examples=200)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=64).filter(lambda c: sum(c) > 0), st.data())
def test_matches_brute_force(counts, data):
    V = data.draw(st.integers(1, len(counts)))
    assert learn_merge_map(counts, V).groups() == brute_force_merge(counts, V)


def test_zero_bins_merge_first():
    m = learn_merge_map([5, 0, 7, 0, 3], 4)
    assert m.groups() == [[0], [1, 3], [2], [4]]


def test_parameter_errors():
    with pytest.raises(ValueError):
        learn_merge_map([1, 2], 3)
    with pytest.raises(ValueError):
        learn_merge_map([1, 2], 0)
    with pytest.raises(ValueError):
        learn_merge_map([0, 0], 1)


def test_learned_map_independent_of_training_order():
    rng = np.random.default_rng(0)
    per_image = rng.integers(0, 40, (7, 256))
    a = learn_merge_map(per_image.sum(axis=0), 48)
    b = learn_merge_map(per_image[rng.permutation(7)].sum(axis=0), 48)
    assert a == b


def test_apply_identity():
    h = np.array([3, 1, 4, 1, 5])
    np.testing.assert_array_equal(apply_merge(h, MergeMap(np.arange(5))), h)


def test_apply_conserves_all_ones():
    rng = np.random.default_rng(1)
    m = learn_merge_map(rng.integers(0, 100, 4096), 16)
    out = apply_merge(np.ones(4096, dtype=np.int64), m)
    assert out.shape == (16,) and out.sum() == 4096


@given(st.lists(st.integers(0, 10**6), min_size=8, max_size=8), st.lists(st.integers(0, 2), min_size=8, max_size=8))
def test_apply_matches_group_sums(hist, raw_assignment):
    # relabel so ids are dense
    _, assignment = np.unique(raw_assignment, return_inverse=True)
    m = MergeMap(assignment)
    out = apply_merge(np.array(hist), m)
    for g in range(m.valid_bins):
        assert out[g] == sum(h for h, a in zip(hist, assignment) if a == g)
    assert out.sum() == sum(hist)


def test_apply_over_leading_axes():
    rng = np.random.default_rng(2)
    m = learn_merge_map(rng.integers(1, 9, 256), 48)
    h = rng.integers(0, 30, (12, 16, 256))
    out = apply_merge(h, m)
    assert out.shape == (12, 16, 48)
    np.testing.assert_array_equal(out.sum(axis=-1), h.sum(axis=-1))


def test_apply_length_mismatch():
    with pytest.raises(ValueError):
        apply_merge(np.ones(5), MergeMap(np.arange(4)))


def test_merge_map_invariants():
    with pytest.raises(ValueError):
        MergeMap([0, 2, 2])  # group 1 unused
    m = MergeMap([0, 1, 1, 0])
    assert (m.source_bins, m.valid_bins) == (4, 2)


def test_merge_map_file_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    m = learn_merge_map(rng.integers(0, 50, 4096), 16)
    p = tmp_path / "map.txt"
    save_merge_map(m, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "4096 16" and len(lines) == 4097
    assert load_merge_map(p) == m
