import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elfd.harness.synthetic import make_texture_images
from elfd.imaging import GaussianBlur, degrade
from elfd.recognition import (
    DEGENERATE_CONFIDENCE,
    Dictionary,
    RidgeCoder,
    ScaleBank,
    ScaleResult,
    class_distances,
    compete,
    first_candidate_confidence,
    generalized_confidence,
    multiscale_recognize,
    recognize_single_scale,
    solve_coding,
    train_banks,
)


def normal_equation_solve(D, y, lam):
    return np.linalg.solve(D.T @ D + lam * np.eye(D.shape[1]), D.T @ y)


def objective(D, y, lam, a):
    return np.sum((y - D @ a) ** 2) + lam * np.sum(a**2)


def unit(v):
    return v / np.linalg.norm(v)


# --- coding -------------------------------------------------------------------


def test_identity_dictionary_closed_form():
    y = unit(np.arange(1.0, 6.0))
    np.testing.assert_allclose(solve_coding(np.eye(5), y, 0.01).alpha, y / 1.01, rtol=1e-14)


def test_zero_probe():
    rng = np.random.default_rng(0)
    assert not solve_coding(rng.standard_normal((6, 4)), np.zeros(6)).alpha.any()


def test_matches_normal_equations():
    rng = np.random.default_rng(1)
    D = rng.standard_normal((20, 30))
    y = unit(rng.standard_normal(20))
    sol = solve_coding(D, y, 0.01)
    np.testing.assert_allclose(sol.alpha, normal_equation_solve(D, y, 0.01), atol=1e-8)
    # augmented least squares is a second, independent route
    aug = np.vstack([D, np.sqrt(0.01) * np.eye(30)])
    ls = np.linalg.lstsq(aug, np.concatenate([y, np.zeros(30)]), rcond=None)[0]
    np.testing.assert_allclose(sol.alpha, ls, atol=1e-8)
    assert sol.lam == 0.01


def test_normal_equation_residual():
    rng = np.random.default_rng(2)
    D = rng.standard_normal((64, 80))
    y = unit(rng.standard_normal(64))
    a = solve_coding(D, y, 0.01).alpha
    lhs = (D.T @ D + 0.01 * np.eye(80)) @ a
    assert np.linalg.norm(lhs - D.T @ y) / np.linalg.norm(D.T @ y) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_convexity_witness(seed):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((int(rng.integers(1, 30)), int(rng.integers(1, 30))))
    y = unit(rng.standard_normal(D.shape[0]))
    a = solve_coding(D, y, 0.01).alpha
    base = objective(D, y, 0.01, a)
    for _ in range(5):
        delta = 1e-4 * unit(rng.standard_normal(a.size))
        assert objective(D, y, 0.01, a + delta) > base


def test_coding_rejects_bad_inputs():
    with pytest.raises(ValueError):
        solve_coding(np.eye(3), np.array([np.nan, 0, 0]))
    with pytest.raises(ValueError):
        solve_coding(np.eye(3), np.ones(3), lam=0.0)
    with pytest.raises(ValueError):
        RidgeCoder(np.array([[np.inf]]))


def test_coder_reuse_matches_fresh_solves():
    rng = np.random.default_rng(3)
    D = rng.standard_normal((15, 10))
    coder = RidgeCoder(D, 0.05)
    for _ in range(3):
        y = unit(rng.standard_normal(15))
        np.testing.assert_allclose(coder.solve(y).alpha, normal_equation_solve(D, y, 0.05), atol=1e-10)


# --- class distances ----------------------------------------------------------


def test_single_class_is_global_residual():
    rng = np.random.default_rng(4)
    D = rng.standard_normal((8, 5))
    y = unit(rng.standard_normal(8))
    a = solve_coding(D, y).alpha
    d = class_distances(D, np.zeros(5, dtype=int), a, y)
    assert d[0] == pytest.approx(np.linalg.norm(y - D @ a))


def test_probe_equal_to_column_wins():
    rng = np.random.default_rng(5)
    D = np.column_stack([unit(v) for v in rng.standard_normal((12, 40))])
    ids = np.repeat(np.arange(4), 3)
    y = D[:, 7].copy()
    a = solve_coding(D, y, 1e-9).alpha
    d = class_distances(D, ids, a, y)
    assert np.argmin(d) == ids[7]
    assert all(d[ids[7]] < d[i] for i in range(4) if i != ids[7])


def test_orthonormal_class_spans():
    Q = np.linalg.qr(np.random.default_rng(6).standard_normal((10, 6)))[0]
    ids = np.array([0, 0, 1, 1, 2, 2])
    y = unit(0.6 * Q[:, 2] + 0.8 * Q[:, 3])  # inside class 1's span
    lam = 0.01
    a = solve_coding(Q, y, lam).alpha
    d = class_distances(Q, ids, a, y)
    # orthonormal columns: alpha = Q^T y / (1 + lam), so d_1 = lam / (1 + lam)
    assert d[1] == pytest.approx(lam / (1 + lam), rel=1e-10)
    assert d[0] == pytest.approx(1.0, rel=1e-10) and d[2] == pytest.approx(1.0, rel=1e-10)


def test_triangle_bound():
    rng = np.random.default_rng(7)
    D = np.column_stack([unit(v) for v in rng.standard_normal((9, 20))])
    ids = np.arange(9) % 3
    y = unit(rng.standard_normal(20))
    a = solve_coding(D, y).alpha
    d = class_distances(D, ids, a, y)
    for i in range(3):
        assert d[i] <= np.linalg.norm(y) + np.linalg.norm(D[:, ids == i] @ a[ids == i]) + 1e-12


def test_dictionary_invariants():
    with pytest.raises(ValueError):
        Dictionary(np.ones((2, 2)), [0, 1])  # not unit norm
    with pytest.raises(ValueError):
        Dictionary(np.eye(3), [0, 0, 2])  # class 1 empty
    d = Dictionary(np.eye(3), [0, 1, 1])
    assert d.class_count == 2 and d.dimension == 3 and d.size == 3


# --- confidence ---------------------------------------------------------------


@pytest.mark.parametrize(
    "dist, expected",
    [((2.0, 4.0), (0, 0.5)), ((3.0, 3.0), (0, 0.0)), ((1.0, 5.0, 2.0), (0, 0.5)), ((4.0, 1.0), (1, 0.75))],
)
def test_first_candidate_examples(dist, expected):
    cls, conf = first_candidate_confidence(dist)
    assert cls == expected[0] and conf == pytest.approx(expected[1], abs=1e-15)


def test_confidence_needs_two_classes():
    with pytest.raises(ValueError):
        first_candidate_confidence([1.0])


def test_zero_runner_up():
    assert first_candidate_confidence([0.0, 0.0, 1.0]) == (0, 0.0)
    conf = generalized_confidence([0.0, 2.0, 3.0])
    assert conf[0] == 1.0 and conf[1] == DEGENERATE_CONFIDENCE


@given(st.lists(st.floats(1e-6, 1e6), min_size=2, max_size=20), st.floats(1e-3, 1e3))
def test_confidence_sign_structure_and_scaling(dist, c):
    conf = generalized_confidence(dist)
    best, e = first_candidate_confidence(dist)
    assert 0.0 <= e <= 1.0
    assert all(conf[i] <= 0 for i in range(len(dist)) if i != best)
    assert sum(v > 0 for v in conf) <= 1
    best2, e2 = first_candidate_confidence([c * v for v in dist])
    assert best2 == best and e2 == pytest.approx(e, abs=1e-12)


# --- competition ----------------------------------------------------------------


def _result(scale, cls, conf):
    return ScaleResult(cls, conf, np.zeros(3), scale)


def test_competition_picks_most_confident_scale():
    r = compete([_result(11, 0, 0.1), _result(13, 2, 0.9), _result(15, 1, 0.05)])
    assert (r.identity, r.winning_scale, r.confidence) == (2, 13, 0.9)
    assert [p.scale for p in r.per_scale] == [11, 13, 15]


def test_competition_tie_prefers_smaller_scale():
    r = compete([_result(15, 1, 0.4), _result(11, 0, 0.4)])
    assert r.winning_scale == 11 and r.identity == 0


@pytest.fixture(scope="module")
def small_bank():
    data = make_texture_images(n_classes=4, per_class=4, size=48, seed=3)
    images = [img for c in data for img in c[:2]]
    ids = [k for k in range(4) for _ in range(2)]
    banks = train_banks(images, ids, ["elmd", "lmd"], scales=(11, 13), class_names=list("abcd"))
    return banks, data


def test_training_image_recognized(small_bank):
    banks, data = small_bank
    for kind in ("elmd", "lmd"):
        for k in range(4):
            res = recognize_single_scale(banks[kind], 11, data[k][0])
            assert res.class_id == k and res.confidence > 0


def test_single_scale_bank_equals_single_result(small_bank):
    banks, data = small_bank
    full = banks["elmd"]
    one = ScaleBank("elmd", {11: full.models[11]}, full.class_names)
    probe = data[1][3]
    single = recognize_single_scale(full, 11, probe)
    multi = multiscale_recognize(one, probe)
    assert (multi.identity, multi.winning_scale, multi.confidence) == (single.class_id, 11, single.confidence)


def test_multiscale_is_deterministic(small_bank):
    banks, data = small_bank
    probe = degrade(data[2][3], GaussianBlur(3, 7))
    a = multiscale_recognize(banks["elmd"], probe)
    b = multiscale_recognize(banks["elmd"], probe)
    assert (a.identity, a.winning_scale, a.confidence) == (b.identity, b.winning_scale, b.confidence)
    assert a.confidence == max(r.confidence for r in a.per_scale)
    assert a.identity == next(r.class_id for r in a.per_scale if r.scale == a.winning_scale)


def test_bank_shapes(small_bank):
    banks, _ = small_bank
    bank = banks["elmd"]
    assert bank.scales == (11, 13) and bank.valid_bins == 16
    model = bank.models[11]
    assert len(model.merge_maps) == 12 and model.dictionary.columns.shape == (3072, 8)
    assert len(banks["lmd"].models[13].merge_maps) == 4
    assert banks["lmd"].models[13].dictionary.dimension == 3072


def test_unknown_scale(small_bank):
    banks, data = small_bank
    with pytest.raises(ValueError):
        recognize_single_scale(banks["elmd"], 15, data[0][0])
