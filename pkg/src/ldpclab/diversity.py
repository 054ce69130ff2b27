"""Decoder-diversity selection and parallel/serial decoding architectures.

Selection greedily orders a pool of trained decoders by complementarity of
their failure sets on a common test set; the parallel architecture runs all
of them and keeps the maximum-likelihood codeword among the syndrome-zero
outputs, the serial one stops at the first syndrome-zero output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bp
from .bp import WeightSet
from .tanner import TannerGraph


@dataclass
class PoolEntry:
    decoder_id: int
    label: str
    weights: WeightSet


@dataclass
class DecoderPool:
    """Ordered list of decoders sharing one graph and iteration cap."""
    entries: list[PoolEntry]
    i_test: int = 25

    def __post_init__(self):
        ids = [e.decoder_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate decoder ids in pool")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class DecoderRun:
    iterations: int
    converged: bool
    llr_final: np.ndarray | None


@dataclass
class DiversityOutcome:
    chosen: np.ndarray | None
    per_decoder: list[DecoderRun]
    success: bool


def failure_sets(g: TannerGraph, pool: DecoderPool, llrs: np.ndarray
                 ) -> list[np.ndarray]:
    """Per-decoder boolean failure masks over a test set of channel LLRs
    (shape (T, N)); failure = the transmitted (all-zero) codeword is not
    recovered within i_test iterations."""
    masks = []
    for entry in pool.entries:
        hard, _, _, conv = bp.decode_many(g, entry.weights, llrs, pool.i_test)
        ok = conv & ~hard.any(axis=-1)
        masks.append(~ok)
    return masks


def select_order(failure_masks: list[np.ndarray]) -> list[int]:
    """Greedy complementarity ordering; returns pool positions.

    The first pick minimizes |F_j|; every next pick minimizes the residual
    intersection |F_selected & F_j|.  Ties go to the smallest position.
    """
    n_dec = len(failure_masks)
    masks = [np.asarray(m, dtype=bool) for m in failure_masks]
    residual = np.ones_like(masks[0], dtype=bool)
    order: list[int] = []
    remaining = list(range(n_dec))
    while remaining:
        counts = [int((residual & masks[j]).sum()) for j in remaining]
        j = remaining[int(np.argmin(counts))]
        order.append(j)
        remaining.remove(j)
        residual &= masks[j]
    return order


def take_diversity(pool: DecoderPool, order: list[int], z: int
                   ) -> DecoderPool:
    if z > len(pool) or z > len(order):
        raise ValueError("Z exceeds pool size")
    return DecoderPool(entries=[pool.entries[j] for j in order[:z]],
                       i_test=pool.i_test)


def ml_select(candidates: list[np.ndarray], y: np.ndarray) -> np.ndarray:
    """ML codeword under BPSK: argmin over candidates of sum_n y_n * c_n.
    Ties break toward the earliest candidate."""
    if not candidates:
        raise ValueError("no candidates")
    scores = [float(np.dot(y, c)) for c in candidates]
    return candidates[int(np.argmin(scores))]


def decode_parallel(g: TannerGraph, pool: DecoderPool, llr_ch: np.ndarray,
                    y: np.ndarray) -> DiversityOutcome:
    """Run every decoder to its own stopping point, then ML-select among
    the syndrome-zero outputs (absent if there are none)."""
    runs = []
    cands = []
    for entry in pool.entries:
        res = bp.decode(g, entry.weights, llr_ch, pool.i_test)
        runs.append(DecoderRun(res.iterations, res.converged, res.llr_final))
        if res.converged:
            cands.append(res.hard)
    chosen = ml_select(cands, y) if cands else None
    success = chosen is not None and not chosen.any()
    return DiversityOutcome(chosen=chosen, per_decoder=runs, success=success)


def decode_serial(g: TannerGraph, pool: DecoderPool, llr_ch: np.ndarray,
                  y: np.ndarray) -> DiversityOutcome:
    """Run decoders in pool order, stopping at the first syndrome-zero
    output; decoders after the stop record zero iterations."""
    runs: list[DecoderRun] = []
    chosen = None
    for k, entry in enumerate(pool.entries):
        if chosen is not None:
            runs.append(DecoderRun(0, False, None))
            continue
        res = bp.decode(g, entry.weights, llr_ch, pool.i_test)
        runs.append(DecoderRun(res.iterations, res.converged, res.llr_final))
        if res.converged:
            chosen = res.hard
    success = chosen is not None and not chosen.any()
    return DiversityOutcome(chosen=chosen, per_decoder=runs, success=success)


@dataclass
class PoolRunArrays:
    """Batched architecture run: per-word outputs and accounting."""
    found: np.ndarray          # (B,) codeword found at all
    chosen: np.ndarray         # (B, N) output bits where found
    iterations: np.ndarray     # (B, Z) per-decoder iterations (0 = not run)
    llr_finals: np.ndarray     # (Z, B, N) final LLRs (NaN where not run)


def run_pool_many(g: TannerGraph, pool: DecoderPool, llrs: np.ndarray,
                  ys: np.ndarray, mode: str) -> PoolRunArrays:
    """Vectorized parallel/serial run over a batch of words."""
    if mode not in ("parallel", "serial"):
        raise ValueError(f"unknown mode {mode!r}")
    n_words = llrs.shape[0]
    z = len(pool)
    iters = np.zeros((n_words, z), dtype=np.int64)
    llr_fin = np.full((z, n_words, g.n_vars), np.nan)
    found = np.zeros(n_words, dtype=bool)
    chosen = np.zeros((n_words, g.n_vars), dtype=np.uint8)

    if mode == "parallel":
        scores = np.full((n_words, z), np.inf)
        hards = np.zeros((z, n_words, g.n_vars), dtype=np.uint8)
        for k, entry in enumerate(pool.entries):
            hard, llr_out, it, conv = bp.decode_many(
                g, entry.weights, llrs, pool.i_test)
            iters[:, k] = it
            llr_fin[k] = llr_out
            hards[k] = hard
            scores[conv, k] = (ys[conv] * hard[conv]).sum(axis=-1)
            found |= conv
        best = np.argmin(scores, axis=1)
        chosen[found] = hards[best[found], np.flatnonzero(found)]
    else:
        active = np.arange(n_words)
        for k, entry in enumerate(pool.entries):
            if len(active) == 0:
                break
            hard, llr_out, it, conv = bp.decode_many(
                g, entry.weights, llrs[active], pool.i_test)
            iters[active, k] = it
            llr_fin[k, active] = llr_out
            done = active[conv]
            chosen[done] = hard[conv]
            found[done] = True
            active = active[~conv]
    return PoolRunArrays(found=found, chosen=chosen, iterations=iters,
                         llr_finals=llr_fin)


@dataclass
class Metrics:
    avg_iterations: float
    avg_latency: float
    avg_cn_updates: float


def metrics(iterations: np.ndarray, n_edges: int, mode: str) -> Metrics:
    """Average-iteration and latency accounting over a run.

    iterations: (words, Z).  The complexity measure sums per-decoder
    iterations; parallel latency is the per-word maximum, serial latency
    the per-word sum.
    """
    total = iterations.sum(axis=1)
    avg_iter = float(total.mean())
    if mode == "parallel":
        lat = float(iterations.max(axis=1).mean())
    else:
        lat = float(total.mean())
    return Metrics(avg_iterations=avg_iter, avg_latency=lat,
                   avg_cn_updates=float(n_edges * avg_iter))
