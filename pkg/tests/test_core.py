"""Race simulation, linear reduction, seeding and challenge enumeration."""

import numpy as np
import pytest

from puflab.core import (ArbiterChain, DelayParams, LinearModel, MultiBitPuf,
                         all_challenges, derive_seed, eval_brute, eval_linear,
                         eval_multibit, linear_disagreements, random_challenges,
                         sample_chain, sample_multibit, to_linear)


# ---------------------------------------------------------------------------
# seeds


def test_derive_seed_is_deterministic_and_keyed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert derive_seed(1, 0) != derive_seed(1, 1)
    assert derive_seed(1, 0) != derive_seed(2, 0)
    assert derive_seed(1, 0) != derive_seed(1, 0, 0)
    assert derive_seed(7, np.int64(4)) == derive_seed(7, 4)
    assert 0 <= derive_seed(0) < 2 ** 64


# ---------------------------------------------------------------------------
# construction


def test_delay_params_validation():
    p = DelayParams()
    assert p.mean == 10.0 and p.sigma == 0.5
    with pytest.raises(ValueError):
        DelayParams(10.0, 0.0)
    with pytest.raises(ValueError):
        DelayParams(10.0, -1.0)


def test_sample_chain_shape_and_determinism():
    chain = sample_chain(8, seed=42)
    assert chain.n_stages == 8
    assert chain.delays.shape == (8, 4)
    assert chain.seed == 42
    assert chain.params == DelayParams()
    assert np.array_equal(chain.delays, sample_chain(8, seed=42).delays)
    assert not np.array_equal(chain.delays, sample_chain(8, seed=43).delays)
    custom = sample_chain(4, params=DelayParams(3.0, 0.1), seed=1)
    assert 2.0 < custom.delays.mean() < 4.0


def test_sample_chain_validation():
    with pytest.raises(ValueError):
        sample_chain(0, seed=1)
    with pytest.raises(ValueError):
        sample_chain(4, seed=1, noise_sigma=-0.5)


def test_chain_delay_array_checked_and_frozen():
    with pytest.raises(ValueError):
        ArbiterChain(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ArbiterChain(np.zeros((0, 4)))
    chain = ArbiterChain(np.ones((2, 4)))
    with pytest.raises(ValueError):
        chain.delays[0, 0] = 5.0


# ---------------------------------------------------------------------------
# race semantics


def test_single_stage_straight_race():
    # challenge 0 keeps the signals on their own rails
    assert ArbiterChain([[1.0, 2.0, 0.0, 0.0]]).respond([0]) == 1
    assert ArbiterChain([[5.0, 1.0, 0.0, 0.0]]).respond([0]) == 0


def test_single_stage_crossed_race():
    # challenge 1 swaps the rails: top picks up d_bt, bottom picks up d_tb
    assert ArbiterChain([[0.0, 0.0, 2.0, 1.0]]).respond([1]) == 1
    assert ArbiterChain([[0.0, 0.0, 1.0, 2.0]]).respond([1]) == 0


def test_dead_heat_is_zero():
    chain = ArbiterChain([[1.0, 1.0, 1.0, 1.0]])
    assert chain.respond([0]) == 0
    assert chain.respond([1]) == 0
    assert chain.delta([0]) == 0.0


def test_two_stage_race_traced_by_hand():
    chain = ArbiterChain([[1.0, 2.0, 3.0, 4.0],
                          [5.0, 6.0, 7.0, 9.0]])
    got = chain.delta(all_challenges(2))
    assert got.tolist() == [2.0, -3.0, 0.0, -1.0]
    assert chain.respond(all_challenges(2)).tolist() == [1, 0, 0, 0]


def test_respond_shapes():
    chain = sample_chain(6, seed=9)
    single = chain.respond([0, 1, 0, 1, 1, 0])
    assert isinstance(single, int)
    batch = chain.respond(all_challenges(6))
    assert batch.shape == (64,) and batch.dtype == np.uint8
    assert batch[0b010110] == single


def test_challenge_validation():
    chain = sample_chain(4, seed=2)
    with pytest.raises(ValueError):
        chain.respond([0, 1])
    with pytest.raises(ValueError):
        chain.respond([0, 1, 2, 0])


# ---------------------------------------------------------------------------
# linear reduction


def test_to_linear_frozen_single_stage():
    chain = ArbiterChain([[1.0, 2.0, 2.0, 1.0]])
    assert to_linear(chain).weights.tolist() == [0.0, 1.0]
    flat = ArbiterChain(np.zeros((3, 4)))
    assert to_linear(flat).weights.tolist() == [0.0, 0.0, 0.0, 0.0]


def test_linear_delta_matches_race_delta():
    chain = sample_chain(10, seed=77)
    chal = all_challenges(10)
    np.testing.assert_allclose(to_linear(chain).delta(chal), chain.delta(chal),
                               rtol=1e-9, atol=1e-9)


def test_linear_equivalence_exhaustive_small_n():
    for n in range(1, 9):
        for idx in range(5):
            chain = sample_chain(n, seed=derive_seed(300, n, idx))
            assert linear_disagreements(chain, all_challenges(n)) == 0


def test_linear_equivalence_random_wide():
    chain = sample_chain(64, seed=64)
    chal = random_challenges(2000, 64, seed=65)
    assert linear_disagreements(chain, chal) == 0
    model = to_linear(chain)
    assert np.array_equal(eval_linear(model, chal), eval_brute(chain, chal))
    assert np.array_equal(eval_linear(model.weights, chal), eval_brute(chain, chal))


def test_stage_local_shifts_cancel():
    """Adding one constant to both straight delays and another to both crossed
    delays of a stage changes neither the weights nor any response."""
    chain = sample_chain(12, seed=13)
    chal = random_challenges(400, 12, seed=14)
    shifted = chain.delays.copy()
    shifted[5, 0] += 3.7   # d_tt
    shifted[5, 1] += 3.7   # d_bb
    shifted[5, 2] += -1.2  # d_tb
    shifted[5, 3] += -1.2  # d_bt
    other = ArbiterChain(shifted)
    np.testing.assert_allclose(to_linear(other).weights, to_linear(chain).weights)
    assert np.array_equal(other.respond(chal), chain.respond(chal))


def test_linear_model_validation():
    with pytest.raises(ValueError):
        LinearModel([1.0])
    model = LinearModel([0.5, -0.5, 1.0])
    assert model.n_stages == 2
    with pytest.raises(ValueError):
        model.weights[0] = 2.0


# ---------------------------------------------------------------------------
# multi-bit bank


def test_multibit_width_and_chain_reconstruction():
    puf = sample_multibit(16, seed=500)
    assert puf.width == 16 and puf.n_stages == 16   # width defaults to n
    narrow = sample_multibit(16, width=4, seed=500)
    assert narrow.width == 4
    for k in range(4):
        rebuilt = sample_chain(16, seed=derive_seed(500, k))
        assert np.array_equal(narrow.chains[k].delays, rebuilt.delays)


def test_multibit_word_is_per_chain_bits():
    puf = sample_multibit(8, width=5, seed=31)
    chal = random_challenges(50, 8, seed=32)
    words = puf.respond(chal)
    assert words.shape == (50, 5)
    for k, chain in enumerate(puf.chains):
        assert np.array_equal(words[:, k], chain.respond(chal))
    single = puf.respond(chal[0])
    assert single.shape == (5,)
    assert np.array_equal(single, words[0])
    assert np.array_equal(eval_multibit(puf, chal), words)


def test_multibit_hand_built_word():
    up = ArbiterChain([[1.0, 2.0, 0.0, 0.0]])     # challenge 0 -> 1
    down = ArbiterChain([[5.0, 1.0, 0.0, 0.0]])   # challenge 0 -> 0
    puf = MultiBitPuf([up, down, up])
    assert puf.respond([0]).tolist() == [1, 0, 1]


def test_multibit_validation():
    with pytest.raises(ValueError):
        MultiBitPuf([])
    with pytest.raises(ValueError):
        MultiBitPuf([sample_chain(4, seed=1), sample_chain(5, seed=2)])
    with pytest.raises(ValueError):
        sample_multibit(4, width=0, seed=1)


# ---------------------------------------------------------------------------
# noise


def test_noise_only_with_seed_and_level():
    chain = sample_chain(16, seed=5, noise_sigma=5.0)
    chal = random_challenges(200, 16, seed=6)
    clean = ArbiterChain(chain.delays).respond(chal)
    # without a noise seed the noisy instance is its own reference
    assert np.array_equal(chain.respond(chal), clean)
    noisy = chain.respond(chal, noise_seed=77)
    assert np.array_equal(noisy, chain.respond(chal, noise_seed=77))
    assert np.sum(noisy != clean) > 0
    # zero level ignores the seed
    quiet = ArbiterChain(chain.delays, noise_sigma=0.0)
    assert np.array_equal(quiet.respond(chal, noise_seed=77), clean)


def test_noise_flips_grow_with_sigma():
    """With a shared noise seed the flip set of a smaller sigma is contained
    in the flip set of a larger one."""
    base = sample_chain(16, seed=5)
    chal = random_challenges(200, 16, seed=6)
    clean = base.respond(chal)
    flips = []
    for sigma in (0.5, 5.0, 50.0):
        noisy = ArbiterChain(base.delays, noise_sigma=sigma)
        flips.append(noisy.respond(chal, noise_seed=77) != clean)
    assert 0 < np.sum(flips[0]) < np.sum(flips[1]) < np.sum(flips[2])
    assert not np.any(flips[0] & ~flips[1])
    assert not np.any(flips[1] & ~flips[2])


def test_multibit_noise_reproducible():
    puf = sample_multibit(12, width=3, seed=8, noise_sigma=10.0)
    chal = random_challenges(100, 12, seed=9)
    a = puf.respond(chal, noise_seed=123)
    assert np.array_equal(a, puf.respond(chal, noise_seed=123))
    assert np.sum(a != puf.respond(chal)) > 0


# ---------------------------------------------------------------------------
# challenge enumeration


def test_all_challenges_is_binary_count():
    got = all_challenges(3)
    assert got.shape == (8, 3)
    assert got.tolist() == [[0, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 1],
                            [1, 0, 0], [1, 0, 1], [1, 1, 0], [1, 1, 1]]
    with pytest.raises(ValueError):
        all_challenges(0)
    with pytest.raises(ValueError):
        all_challenges(25)


def test_random_challenges_shape_and_determinism():
    a = random_challenges(100, 7, seed=1)
    assert a.shape == (100, 7) and a.dtype == np.uint8
    assert set(np.unique(a)) <= {0, 1}
    assert np.array_equal(a, random_challenges(100, 7, seed=1))
    assert not np.array_equal(a, random_challenges(100, 7, seed=2))
    with pytest.raises(ValueError):
        random_challenges(0, 7)
    with pytest.raises(ValueError):
        random_challenges(5, 0)
