"""Raw and parity challenge encodings."""

import numpy as np
import pytest

from puflab.features import FeatureKind, feature_matrix, phi, raw


def test_kind_accepts_strings():
    assert FeatureKind("parity") is FeatureKind.PARITY
    assert FeatureKind("raw") is FeatureKind.RAW
    assert str(FeatureKind.PARITY) == "parity"
    with pytest.raises(ValueError):
        FeatureKind("bogus")


def test_phi_hand_values():
    assert phi([0, 0, 0, 0]).tolist() == [1, 1, 1, 1, 1]
    # signs (-1, 1): suffix products are -1*1 and 1
    assert phi([1, 0]).tolist() == [-1, 1, 1]
    assert phi([1, 1]).tolist() == [1, -1, 1]
    assert phi([0, 1]).tolist() == [-1, -1, 1]


def test_raw_hand_values():
    assert raw([1, 1, 1, 1]).tolist() == [-1, -1, -1, -1, 1]
    assert raw([1, 0]).tolist() == [-1, 1, 1]
    assert raw([0]).tolist() == [1, 1]


def test_shapes_and_dtype():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, size=(7, 12))
    for kind in FeatureKind:
        feats = feature_matrix(bits, kind)
        assert feats.shape == (7, 13)
        assert feats.dtype == np.float64
        assert np.all(np.isin(feats, (-1.0, 1.0)))
        assert np.all(feats[:, -1] == 1.0)


def test_batch_matches_single_rows():
    rng = np.random.default_rng(6)
    bits = rng.integers(0, 2, size=(20, 9))
    par = feature_matrix(bits, "parity")
    rw = feature_matrix(bits, "raw")
    for i in range(20):
        assert np.array_equal(par[i], phi(bits[i]))
        assert np.array_equal(rw[i], raw(bits[i]))


def test_flipping_one_bit():
    """Bit j touches raw entry j only, but parity entries 0..j."""
    rng = np.random.default_rng(7)
    c = rng.integers(0, 2, size=10)
    for j in range(10):
        flipped = c.copy()
        flipped[j] ^= 1
        dr = raw(flipped) / raw(c)
        dp = phi(flipped) / phi(c)
        assert dr[j] == -1 and np.sum(dr == -1) == 1
        assert np.all(dp[:j + 1] == -1) and np.all(dp[j + 1:] == 1)


def test_parity_is_injective():
    from puflab.core import all_challenges
    feats = feature_matrix(all_challenges(6), "parity")
    assert len({tuple(row) for row in feats}) == 64


def test_input_validation():
    with pytest.raises(ValueError):
        feature_matrix([[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        feature_matrix([[0, -1]])
    with pytest.raises(ValueError):
        feature_matrix(np.zeros((2, 0), dtype=np.uint8))
    with pytest.raises(ValueError):
        feature_matrix(np.zeros((2, 2, 2), dtype=np.uint8))
