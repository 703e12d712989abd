"""Delay-race simulation of arbiter chains.

An arbiter chain switches a rising edge through ``n`` two-input stages.  Each
stage holds four path delays (d_tt, d_bb, d_tb, d_bt).  With challenge bit 0
the stage passes both signals straight through (top += d_tt, bottom += d_bb);
with bit 1 it crosses them (new top = old bottom + d_bt, new bottom =
old top + d_tb).  The arbiter at the end compares arrival times and outputs 1
exactly when the bottom signal arrives later (bottom - top > 0); a dead heat
counts as 0.

The race is equivalent to a linear threshold function over the parity
transform of the challenge: ``to_linear`` folds the 4n stage delays into n+1
weights ``w`` with ``eval_linear(w, c) == eval_brute(chain, c)`` for every
challenge.  Measurement noise is modelled as a single Gaussian disturbance
added to the final delay difference.

A multi-bit instance is a bank of independent chains evaluated in parallel on
one shared challenge, one response bit per chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import feature_matrix

__all__ = [
    "DelayParams",
    "ArbiterChain",
    "MultiBitPuf",
    "LinearModel",
    "derive_seed",
    "sample_chain",
    "sample_multibit",
    "eval_brute",
    "eval_linear",
    "eval_multibit",
    "to_linear",
    "all_challenges",
    "random_challenges",
    "linear_disagreements",
]

# Column order of the per-stage delay array.
DELAY_COLUMNS = ("d_tt", "d_bb", "d_tb", "d_bt")


@dataclass(frozen=True)
class DelayParams:
    """Normal distribution the individual path delays are drawn from."""

    mean: float = 10.0
    sigma: float = 0.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


def derive_seed(master, *key) -> int:
    """Derive an independent child seed from a master seed and an index path.

    Children for distinct key paths are statistically independent and do not
    depend on the order they are derived in, so any part of a seeded
    experiment can be reproduced in isolation.
    """
    spawn = tuple(int(k) for k in key)
    ss = np.random.SeedSequence(master, spawn_key=spawn)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_batch(challenges, n: int):
    """Validate challenges against an n-stage device; return ((m, n) array, single?)."""
    bits = np.asarray(challenges)
    single = bits.ndim == 1
    bits = np.atleast_2d(bits)
    if bits.ndim != 2:
        raise ValueError("challenges must be a 1-D or 2-D bit array")
    if bits.shape[1] != n:
        raise ValueError(f"challenge has {bits.shape[1]} bits, device expects {n}")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("challenge bits must be 0 or 1")
    return bits.astype(np.uint8), single


class ArbiterChain:
    """A single arbiter chain: (n, 4) path delays plus an optional noise level.

    ``noise_sigma`` is the standard deviation of the Gaussian disturbance on
    the final delay difference; it is only applied when an evaluation is given
    an explicit ``noise_seed``, so the same instance serves as its own
    noise-free reference.
    """

    __slots__ = ("_delays", "_noise_sigma", "_seed", "_params")

    def __init__(self, delays, noise_sigma: float = 0.0, seed=None, params=None):
        delays = np.array(delays, dtype=np.float64)
        if delays.ndim != 2 or delays.shape[1] != 4 or delays.shape[0] < 1:
            raise ValueError("delays must have shape (n, 4) with n >= 1")
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        delays.setflags(write=False)
        self._delays = delays
        self._noise_sigma = float(noise_sigma)
        self._seed = seed
        self._params = params

    @property
    def n_stages(self) -> int:
        return self._delays.shape[0]

    @property
    def delays(self) -> np.ndarray:
        """Read-only (n, 4) array, columns (d_tt, d_bb, d_tb, d_bt)."""
        return self._delays

    @property
    def noise_sigma(self) -> float:
        return self._noise_sigma

    @property
    def seed(self):
        return self._seed

    @property
    def params(self):
        return self._params

    def delta(self, challenges, noise_seed=None) -> np.ndarray:
        """Final arrival-time difference (bottom - top) for each challenge."""
        bits, single = _as_batch(challenges, self.n_stages)
        m = bits.shape[0]
        top = np.zeros(m)
        bottom = np.zeros(m)
        d_tt, d_bb, d_tb, d_bt = self._delays.T
        for i in range(self.n_stages):
            crossed = bits[:, i] == 1
            new_top = np.where(crossed, bottom + d_bt[i], top + d_tt[i])
            new_bottom = np.where(crossed, top + d_tb[i], bottom + d_bb[i])
            top, bottom = new_top, new_bottom
        diff = bottom - top
        if noise_seed is not None and self._noise_sigma > 0.0:
            rng = np.random.default_rng(noise_seed)
            diff = diff + self._noise_sigma * rng.standard_normal(m)
        return diff[0] if single else diff

    def respond(self, challenges, noise_seed=None):
        """Response bit(s): 1 where the final difference is positive."""
        diff = self.delta(challenges, noise_seed=noise_seed)
        if np.ndim(diff) == 0:
            return int(diff > 0)
        return (diff > 0).astype(np.uint8)

    def __repr__(self):
        return (f"ArbiterChain(n_stages={self.n_stages}, "
                f"noise_sigma={self._noise_sigma}, seed={self._seed!r})")


class MultiBitPuf:
    """A bank of independent arbiter chains sharing one challenge.

    Chain k produces response bit k, so an instance with ``width`` chains of
    n stages maps an n-bit challenge to a ``width``-bit response word.
    """

    __slots__ = ("_chains", "_seed")

    def __init__(self, chains, seed=None):
        chains = tuple(chains)
        if not chains:
            raise ValueError("need at least one chain")
        n = chains[0].n_stages
        if any(c.n_stages != n for c in chains):
            raise ValueError("all chains must have the same number of stages")
        self._chains = chains
        self._seed = seed

    @property
    def chains(self):
        return self._chains

    @property
    def width(self) -> int:
        return len(self._chains)

    @property
    def n_stages(self) -> int:
        return self._chains[0].n_stages

    @property
    def seed(self):
        return self._seed

    def respond(self, challenges, noise_seed=None) -> np.ndarray:
        """Response words, shape (m, width); a single challenge gives (width,).

        Under noise every chain draws its own disturbance from a seed derived
        per chain index, so a word is reproducible from ``noise_seed`` alone.
        """
        bits, single = _as_batch(challenges, self.n_stages)
        out = np.empty((bits.shape[0], self.width), dtype=np.uint8)
        for k, chain in enumerate(self._chains):
            child = None if noise_seed is None else derive_seed(noise_seed, k)
            out[:, k] = chain.respond(bits, noise_seed=child)
        return out[0] if single else out

    def __repr__(self):
        return (f"MultiBitPuf(width={self.width}, n_stages={self.n_stages}, "
                f"seed={self._seed!r})")


class LinearModel:
    """Threshold model: response is 1 iff weights . parity_features > 0."""

    __slots__ = ("_weights",)

    def __init__(self, weights):
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 1 or weights.shape[0] < 2:
            raise ValueError("weights must be a 1-D array of length n + 1")
        weights.setflags(write=False)
        self._weights = weights

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def n_stages(self) -> int:
        return self._weights.shape[0] - 1

    def delta(self, challenges) -> np.ndarray:
        bits, single = _as_batch(challenges, self.n_stages)
        diff = feature_matrix(bits, "parity") @ self._weights
        return diff[0] if single else diff

    def respond(self, challenges):
        diff = self.delta(challenges)
        if np.ndim(diff) == 0:
            return int(diff > 0)
        return (diff > 0).astype(np.uint8)

    def __repr__(self):
        return f"LinearModel(n_stages={self.n_stages})"


def sample_chain(n: int, params: DelayParams = None, seed=None,
                 noise_sigma: float = 0.0) -> ArbiterChain:
    """Draw a fresh n-stage chain, all 4n path delays i.i.d. normal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if params is None:
        params = DelayParams()
    rng = np.random.default_rng(seed)
    delays = rng.normal(params.mean, params.sigma, size=(n, 4))
    return ArbiterChain(delays, noise_sigma=noise_sigma, seed=seed, params=params)


def sample_multibit(n: int, width: int = None, params: DelayParams = None,
                    seed=None, noise_sigma: float = 0.0) -> MultiBitPuf:
    """Draw a multi-bit instance of ``width`` chains (default: width = n).

    Chain k is sampled from the child seed ``derive_seed(seed, k)``, so any
    single chain can be rebuilt without instantiating the whole bank.
    """
    if width is None:
        width = n
    if width < 1:
        raise ValueError("width must be >= 1")
    chains = [sample_chain(n, params=params, seed=derive_seed(seed, k),
                           noise_sigma=noise_sigma)
              for k in range(width)]
    return MultiBitPuf(chains, seed=seed)


def eval_brute(chain: ArbiterChain, challenges, noise_seed=None):
    """Stage-by-stage race evaluation; the reference oracle for everything else."""
    return chain.respond(challenges, noise_seed=noise_seed)


def to_linear(chain: ArbiterChain) -> LinearModel:
    """Fold a chain's 4n path delays into the n+1 weights of its threshold form.

    With a_i = d_bb,i - d_tt,i and b_i = d_tb,i - d_bt,i the final difference
    equals the inner product of these weights with the parity features:

        w_1     = (a_1 - b_1) / 2
        w_k     = (a_{k-1} + b_{k-1}) / 2 + (a_k - b_k) / 2    (2 <= k <= n)
        w_{n+1} = (a_n + b_n) / 2
    """
    d = chain.delays
    a = d[:, 1] - d[:, 0]
    b = d[:, 2] - d[:, 3]
    half_sum = (a + b) / 2.0
    half_diff = (a - b) / 2.0
    w = np.empty(chain.n_stages + 1)
    w[0] = half_diff[0]
    w[1:-1] = half_sum[:-1] + half_diff[1:]
    w[-1] = half_sum[-1]
    return LinearModel(w)


def eval_linear(model, challenges):
    """Threshold evaluation; accepts a LinearModel or a bare weight vector."""
    if not isinstance(model, LinearModel):
        model = LinearModel(model)
    return model.respond(challenges)


def eval_multibit(puf: MultiBitPuf, challenges, noise_seed=None):
    """Response words of a multi-bit instance (delegates to the chain bank)."""
    return puf.respond(challenges, noise_seed=noise_seed)


def all_challenges(n: int) -> np.ndarray:
    """Every n-bit challenge as a (2**n, n) bit array, first bit most significant."""
    if not 1 <= n <= 24:
        raise ValueError("exhaustive enumeration supported for 1 <= n <= 24")
    idx = np.arange(2 ** n, dtype=np.uint32)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def random_challenges(m: int, n: int, seed=None) -> np.ndarray:
    """m uniform n-bit challenges as an (m, n) bit array."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(m, n), dtype=np.uint8)


def linear_disagreements(chain: ArbiterChain, challenges, model=None) -> int:
    """Count challenges where the race and its linear form disagree (expect 0)."""
    if model is None:
        model = to_linear(chain)
    bits, _ = _as_batch(challenges, chain.n_stages)
    brute = chain.respond(bits)
    lin = model.respond(bits)
    return int(np.count_nonzero(brute != lin))
