"""Statistical quality figures for populations of simulated instances.

All figures live on [0, 1] and compare raw response bits:

* uniformity   -- fraction of 1s an instance produces (ideal 0.5),
* uniqueness   -- average normalised Hamming distance between the responses
                  of distinct instances to the same challenges (ideal 0.5),
* bit_aliasing -- per response-bit-position fraction of 1s across instances
                  and challenges (ideal 0.5 everywhere),
* reliability  -- 1 minus the average flip rate of repeated noisy read-outs
                  against the noise-free reference (ideal 1.0).

``evaluate_quality`` runs the whole study from a single master seed; repeated
noisy measurements reuse derived noise seeds, so studies that differ only in
the noise level see scaled versions of the same disturbances and their
reliabilities are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DelayParams, derive_seed, random_challenges, sample_multibit

__all__ = [
    "uniformity",
    "uniqueness",
    "bit_aliasing",
    "reliability",
    "QualityReport",
    "evaluate_quality",
]


def _bits(values, name, min_dim, max_dim):
    arr = np.asarray(values)
    if not min_dim <= arr.ndim <= max_dim or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty {min_dim}-D to {max_dim}-D "
                         "bit array")
    if arr.min() < 0 or arr.max() > 1:
        raise ValueError(f"{name} bits must be 0 or 1")
    return arr.astype(np.uint8)


def uniformity(responses) -> float:
    """Fraction of 1s over all response bits of one instance."""
    return float(np.mean(_bits(responses, "responses", 1, 2)))


def uniqueness(stack) -> float:
    """Mean pairwise normalised Hamming distance across instances.

    ``stack`` holds one instance per leading index: (k, m) response bits or
    (k, m, w) response words, all to the same challenges.
    """
    arr = _bits(stack, "stack", 2, 3)
    k = arr.shape[0]
    if k < 2:
        raise ValueError("uniqueness needs at least two instances")
    flat = arr.reshape(k, -1)
    total = 0.0
    for i in range(k - 1):
        total += np.sum(np.mean(flat[i + 1:] != flat[i], axis=1))
    return float(2.0 * total / (k * (k - 1)))


def bit_aliasing(stack) -> np.ndarray:
    """Fraction of 1s per response bit position, pooled over instances/challenges."""
    arr = _bits(stack, "stack", 2, 3)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr.mean(axis=(0, 1))


def reliability(reference, repeats) -> float:
    """1 - mean flip rate of repeated read-outs against a reference read-out."""
    ref = _bits(reference, "reference", 1, 2)
    reps = _bits(repeats, "repeats", ref.ndim + 1, ref.ndim + 1)
    if reps.shape[1:] != ref.shape:
        raise ValueError("repeats must stack measurements shaped like the reference")
    return float(1.0 - np.mean(reps != ref))


@dataclass(frozen=True)
class QualityReport:
    """Quality study over a population of same-shaped instances."""

    n_stages: int
    width: int
    instances: int
    challenges: int
    repeats: int
    noise_sigma: float
    seed: object
    uniformity: float
    uniqueness: float
    reliability: float
    bit_aliasing: tuple

    def lines(self):
        alias = self.bit_aliasing
        alias_txt = (f"{alias[0]:.4f}" if len(alias) == 1 else
                     f"min {min(alias):.4f} / max {max(alias):.4f}")
        return [
            f"instances    {self.instances}",
            f"stages       {self.n_stages}",
            f"width        {self.width}",
            f"challenges   {self.challenges}",
            f"repeats      {self.repeats}",
            f"noise_sigma  {self.noise_sigma:g}",
            f"seed         {'-' if self.seed is None else self.seed}",
            f"uniformity   {self.uniformity:.4f}",
            f"uniqueness   {self.uniqueness:.4f}",
            f"reliability  {self.reliability:.4f}",
            f"bit_aliasing {alias_txt}",
        ]


def evaluate_quality(n: int, instances: int, challenges: int, width: int = 1,
                     repeats: int = 5, noise_sigma: float = 0.0, seed=None,
                     params: DelayParams = None) -> QualityReport:
    """Sample a population and compute all four quality figures.

    Instance i is sampled from ``derive_seed(seed, 0, i)`` and its repeated
    noisy read-outs use ``derive_seed(seed, 2, i, t)``; the challenge set
    comes from ``derive_seed(seed, 1)``.  None of these depend on
    ``noise_sigma``, which is what makes reliabilities comparable across
    noise levels.
    """
    if instances < 2:
        raise ValueError("need at least two instances")
    if challenges < 1 or repeats < 1:
        raise ValueError("challenges and repeats must be >= 1")
    if noise_sigma > 0 and repeats < 2:
        raise ValueError("a noisy reliability study needs at least two repeats")
    chal = random_challenges(challenges, n, seed=derive_seed(seed, 1))
    stack = np.empty((instances, challenges, width), dtype=np.uint8)
    flips = 0.0
    for i in range(instances):
        puf = sample_multibit(n, width, params=params,
                              seed=derive_seed(seed, 0, i),
                              noise_sigma=noise_sigma)
        ref = puf.respond(chal)
        stack[i] = ref
        for t in range(repeats):
            noisy = puf.respond(chal, noise_seed=derive_seed(seed, 2, i, t))
            flips += np.mean(noisy != ref)
    rel = 1.0 - flips / (instances * repeats)
    return QualityReport(
        n_stages=n,
        width=width,
        instances=instances,
        challenges=challenges,
        repeats=repeats,
        noise_sigma=noise_sigma,
        seed=seed,
        uniformity=uniformity(stack.reshape(instances, -1)),
        uniqueness=uniqueness(stack),
        reliability=float(rel),
        bit_aliasing=tuple(float(v) for v in bit_aliasing(stack)),
    )
