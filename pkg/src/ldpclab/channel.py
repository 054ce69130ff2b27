"""Binary-input AWGN channel under the all-zero-codeword assumption.

All-zero transmission maps to the +1 BPSK point, so the received word is
y = 1 + z with z ~ N(0, sigma^2).  Channel LLRs use the standard rule
L = 2*y/sigma^2.  Class-conditioned sampling draws z from one-sided
truncated Gaussians so that the error set {n : y_n <= 0} equals a
prescribed variable-node set exactly, on every draw.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri, ndtri_exp

_BELOW_MINUS_1 = np.nextafter(-1.0, -np.inf)
_ABOVE_MINUS_1 = np.nextafter(-1.0, np.inf)
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float
    sigma: float
    sigma2: float


@dataclass
class ReceivedWord:
    """Channel output and its LLRs; arrays of shape (N,) or (words, N)."""
    y: np.ndarray
    llr: np.ndarray


def snr_to_sigma(snr_db: float) -> ChannelParams:
    """SNR = -10*log10(sigma^2) dB."""
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    sigma2 = 10.0 ** (-snr_db / 10.0)
    return ChannelParams(snr_db=snr_db, sigma=math.sqrt(sigma2), sigma2=sigma2)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def worker_rng(seed: int, worker_id: int) -> np.random.Generator:
    """Independent substream derived from (master seed, worker id)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(worker_id,))
    return np.random.Generator(np.random.PCG64(ss))


def _finish(params: ChannelParams, z: np.ndarray) -> ReceivedWord:
    y = 1.0 + z
    return ReceivedWord(y=y, llr=2.0 * y / params.sigma2)


def sample_awgn(params: ChannelParams, n_bits: int,
                rng: np.random.Generator, size: int | None = None
                ) -> ReceivedWord:
    """i.i.d. Gaussian noise; `size` words at once when given."""
    shape = (n_bits,) if size is None else (size, n_bits)
    z = rng.normal(0.0, params.sigma, size=shape)
    return _finish(params, z)


def sample_error_class(params: ChannelParams, error_set: np.ndarray | set,
                       n_bits: int, rng: np.random.Generator,
                       size: int | None = None) -> ReceivedWord:
    """Truncated-Gaussian noise forcing errors exactly on `error_set`.

    z ~ N(0, s^2) restricted to (-inf, -1) on the set, to (-1, inf) off it.
    """
    members = np.asarray(sorted(error_set), dtype=np.int64)
    shape = (n_bits,) if size is None else (size, n_bits)
    mask = np.zeros(shape, dtype=bool)
    mask[..., members] = True
    return _sample_masked(params, mask, rng)


def _sample_masked(params: ChannelParams, error_mask: np.ndarray,
                   rng: np.random.Generator) -> ReceivedWord:
    """Truncated sampling with a per-position error mask (vectorized)."""
    s = params.sigma
    u = rng.random(error_mask.shape)
    u = np.clip(u, _TINY, 1.0 - np.finfo(np.float64).epsneg)
    z = np.empty(error_mask.shape, dtype=np.float64)

    # lower tail (-inf, -1): inverse CDF in log space, robust deep in the tail
    lo = error_mask
    if lo.any():
        z_lo = s * ndtri_exp(log_ndtr(-1.0 / s) + np.log(u[lo]))
        z[lo] = np.minimum(z_lo, _BELOW_MINUS_1)

    # upper part (-1, inf): mass is ~1, direct inverse CDF is stable
    hi = ~error_mask
    if hi.any():
        base = ndtr(-1.0 / s)
        z_hi = s * ndtri(base + u[hi] * (1.0 - base))
        z[hi] = np.maximum(z_hi, _ABOVE_MINUS_1)

    return _finish(params, z)


def error_set(word: ReceivedWord) -> frozenset[int]:
    """E(y) = {n : y_n <= 0} for a single word."""
    y = np.asarray(word.y)
    if y.ndim != 1:
        raise ValueError("error_set expects a single word")
    return frozenset(np.flatnonzero(y <= 0.0).tolist())


def dump_words(path: str | Path, words: ReceivedWord, params: ChannelParams,
               label: str) -> None:
    """Binary dump: N little-endian float32 per word, plus a JSON sidecar."""
    path = Path(path)
    y = np.atleast_2d(words.y)
    path.write_bytes(y.astype("<f4").tobytes())
    sidecar = {"sigma": params.sigma, "class": label, "count": int(y.shape[0]),
               "n_bits": int(y.shape[1])}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar))
