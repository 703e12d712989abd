"""Challenge-response datasets: generation, persistence, splitting, import.

On-disk format (``puf-crp v1``) is a plain text file::

    # puf-crp v1
    # challenge_bits=64 response_bits=64
    # meta seed=1234
    challenge_hex,response_hex
    09283C630815977C,FF00FF0000FF00FF
    ...

Hex words are uppercase, zero padded to ceil(bits / 4) digits, most
significant bit first.  ``load_crps`` is strict and reports the first offending
line; ``import_hex_rows`` is the lenient path for pulling in externally logged
tables (tab- or comma-separated, Verilog-style width prefixes allowed) and
rejects malformed rows one by one instead of giving up.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .bits import HexFormatError, format_hex_word, parse_hex_word
from .core import DelayParams, derive_seed, random_challenges, sample_multibit

__all__ = [
    "DatasetError",
    "CrpSet",
    "generate_crps",
    "load_crps",
    "save_crps",
    "split_crps",
    "import_hex_rows",
]

MAGIC = "# puf-crp v1"
COLUMNS = "challenge_hex,response_hex"

_SHAPE_RE = re.compile(r"^# challenge_bits=(\d+) response_bits=(\d+)$")
_META_RE = re.compile(r"^# meta ([A-Za-z0-9_.-]+)=(.*)$")
_META_KEY_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class DatasetError(ValueError):
    """Raised for files or rows that do not follow the dataset format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _as_bit_matrix(values, name):
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D bit array")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{name} bits must be 0 or 1")
    arr = arr.astype(np.uint8)
    arr.setflags(write=False)
    return arr


class CrpSet:
    """Paired (m, n) challenges and (m, w) responses plus free-form metadata."""

    __slots__ = ("_challenges", "_responses", "_meta")

    def __init__(self, challenges, responses, meta=None):
        challenges = _as_bit_matrix(challenges, "challenges")
        responses = _as_bit_matrix(responses, "responses")
        if challenges.shape[0] != responses.shape[0]:
            raise ValueError("challenges and responses must have the same row count")
        if challenges.shape[1] < 1 or responses.shape[1] < 1:
            raise ValueError("challenge and response words need at least one bit")
        meta = {} if meta is None else {str(k): str(v) for k, v in dict(meta).items()}
        for key in meta:
            if not _META_KEY_RE.match(key):
                raise ValueError(f"bad meta key {key!r}")
            if "\n" in meta[key]:
                raise ValueError(f"meta value for {key!r} must be a single line")
        self._challenges = challenges
        self._responses = responses
        self._meta = meta

    @property
    def challenges(self) -> np.ndarray:
        return self._challenges

    @property
    def responses(self) -> np.ndarray:
        return self._responses

    @property
    def meta(self) -> dict:
        return dict(self._meta)

    @property
    def challenge_bits(self) -> int:
        return self._challenges.shape[1]

    @property
    def response_bits(self) -> int:
        return self._responses.shape[1]

    def __len__(self) -> int:
        return self._challenges.shape[0]

    def __repr__(self):
        return (f"CrpSet(rows={len(self)}, challenge_bits={self.challenge_bits}, "
                f"response_bits={self.response_bits})")

    def subset(self, indices) -> "CrpSet":
        """New set holding the given rows (metadata carried over)."""
        idx = np.asarray(indices, dtype=np.int64)
        return CrpSet(self._challenges[idx], self._responses[idx], self._meta)

    def save(self, path):
        save_crps(path, self)


def collect_crps(puf, count: int, challenge_seed=None, noise_seed=None,
                 meta=None) -> CrpSet:
    """Draw ``count`` uniform challenges and record the instance's responses.

    ``puf`` is a single chain or a multi-bit bank; duplicates among the
    challenges are permitted (sampling with replacement).  Noise is applied
    only when ``noise_seed`` is given and the instance carries a nonzero
    noise level.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    challenges = random_challenges(count, puf.n_stages, seed=challenge_seed)
    responses = puf.respond(challenges, noise_seed=noise_seed)
    if responses.ndim == 1:
        responses = responses[:, None]
    return CrpSet(challenges, responses, meta)


def generate_crps(n: int, count: int, width: int = 1, seed=None,
                  params: DelayParams = None, noise_sigma: float = 0.0) -> CrpSet:
    """Sample a fresh instance and collect ``count`` uniformly random CRPs.

    All randomness branches off the one master seed -- instance delays, the
    challenge stream and (when ``noise_sigma`` > 0) the measurement noise use
    independent derived child seeds -- so the same arguments always rebuild a
    byte-identical dataset, and the recorded metadata is enough to regenerate
    it.
    """
    if params is None:
        params = DelayParams()
    puf = sample_multibit(n, width, params=params, seed=derive_seed(seed, 0),
                          noise_sigma=noise_sigma)
    meta = {
        "generator": "arbiter-bank",
        "delay_mean": params.mean,
        "delay_sigma": params.sigma,
        "noise_sigma": noise_sigma,
    }
    if seed is not None:
        meta["seed"] = seed
    return collect_crps(puf, count, challenge_seed=derive_seed(seed, 1),
                        noise_seed=derive_seed(seed, 2) if noise_sigma > 0 else None,
                        meta=meta)


def save_crps(path, crps: CrpSet):
    """Write a set in the puf-crp v1 text format (canonical, reproducible)."""
    lines = [MAGIC,
             f"# challenge_bits={crps.challenge_bits} "
             f"response_bits={crps.response_bits}"]
    meta = crps.meta
    for key in sorted(meta):
        lines.append(f"# meta {key}={meta[key]}")
    lines.append(COLUMNS)
    for chal, resp in zip(crps.challenges, crps.responses):
        lines.append(f"{format_hex_word(chal)},{format_hex_word(resp)}")
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_crps(path) -> CrpSet:
    """Read a puf-crp v1 file; any malformed line raises with its line number."""
    with open(os.fspath(path), "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise DatasetError(f"expected header {MAGIC!r}", line=1)
    if len(lines) < 2 or not (shape := _SHAPE_RE.match(lines[1])):
        raise DatasetError("expected '# challenge_bits=<n> response_bits=<m>'",
                           line=2)
    n_bits, r_bits = int(shape.group(1)), int(shape.group(2))
    if n_bits < 1 or r_bits < 1:
        raise DatasetError("challenge_bits and response_bits must be >= 1", line=2)

    meta = {}
    pos = 2
    while pos < len(lines) and lines[pos].startswith("#"):
        m = _META_RE.match(lines[pos])
        if not m:
            raise DatasetError("bad meta line, expected '# meta key=value'",
                               line=pos + 1)
        meta[m.group(1)] = m.group(2)
        pos += 1
    if pos >= len(lines) or lines[pos] != COLUMNS:
        raise DatasetError(f"expected column header {COLUMNS!r}", line=pos + 1)
    pos += 1

    challenges, responses = [], []
    for lineno in range(pos, len(lines)):
        row = lines[lineno].strip()
        if not row:
            continue
        parts = row.split(",")
        if len(parts) != 2:
            raise DatasetError("expected 'challenge_hex,response_hex'",
                               line=lineno + 1)
        try:
            challenges.append(parse_hex_word(parts[0], n_bits))
            responses.append(parse_hex_word(parts[1], r_bits))
        except HexFormatError as exc:
            raise DatasetError(str(exc), line=lineno + 1) from exc

    if not challenges:
        return CrpSet(np.zeros((0, n_bits), np.uint8),
                      np.zeros((0, r_bits), np.uint8), meta)
    return CrpSet(np.array(challenges), np.array(responses), meta)


def split_crps(crps: CrpSet, test_fraction: float, seed=None):
    """Random train/test split; returns (train, test).

    The held-out size is max(1, floor(test_fraction * rows)); e.g. 750 rows at
    fraction 0.15 leave 638 for training and 112 for testing.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be strictly between 0 and 1")
    m = len(crps)
    n_test = max(1, int(np.floor(test_fraction * m)))
    if n_test >= m:
        raise ValueError("split leaves no training rows")
    perm = np.random.default_rng(seed).permutation(m)
    return crps.subset(perm[n_test:]), crps.subset(perm[:n_test])


def import_hex_rows(source, challenge_bits: int, response_bits: int):
    """Lenient import of externally logged CRP tables.

    ``source`` is a path or an iterable of text lines.  Each data row holds a
    challenge word and a response word separated by whitespace or a comma;
    challenge words may carry a Verilog-style width prefix (``64h9283c...``).
    Blank lines and ``#`` comments are skipped.  Malformed rows do not abort
    the import: they are collected as ``(line_number, reason)`` pairs.

    Returns ``(crps, rejected)`` where ``crps`` covers the well-formed rows.
    """
    if hasattr(source, "__fspath__") or isinstance(source, str):
        with open(os.fspath(source), "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    else:
        lines = [str(line).rstrip("\n") for line in source]

    challenges, responses, rejected = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        row = raw.strip()
        if not row or row.startswith("#"):
            continue
        parts = [p for p in re.split(r"[,\s]+", row) if p]
        if len(parts) != 2:
            rejected.append((lineno, "expected a challenge word and a response word"))
            continue
        try:
            chal = parse_hex_word(parts[0], challenge_bits)
            resp = parse_hex_word(parts[1], response_bits)
        except HexFormatError as exc:
            rejected.append((lineno, str(exc)))
            continue
        challenges.append(chal)
        responses.append(resp)

    if challenges:
        crps = CrpSet(np.array(challenges), np.array(responses))
    else:
        crps = CrpSet(np.zeros((0, challenge_bits), np.uint8),
                      np.zeros((0, response_bits), np.uint8))
    return crps, rejected
