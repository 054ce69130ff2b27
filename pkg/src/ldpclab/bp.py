"""Flooding BP / BP-RNN forward decoding with syndrome-based early stop.

Messages live in flat per-edge arrays in canonical edge order; all kernels
accept a leading batch dimension, i.e. shapes (E,)/(N,) or (B, E)/(B, N).

Weighted updates:
  check pass    beta[m->n] = 2*atanh( prod_{n' != n} tanh(alpha[n'->m]/2) )
  data pass     alpha[n->m] = L_ch[n] + w[n->m] * sum_{m' != m} beta[m'->n]
  a posteriori  L[n] = L_ch[n] + sum_m w~[m->n] * beta[m->n]

Numerical guards: the tanh product is clamped to |p| <= 1 - 1e-12 before
atanh, and every message (beta, alpha, a-posteriori LLR) is clamped to
[-30, 30].  A hard decision ties L = 0 to bit 1, matching the channel's
error-set convention y <= 0.

Fixed arithmetic forms (the reference-BP oracle mirrors them exactly):
extrinsic products are prefix*suffix with the prefix accumulated in
ascending neighbor order and the suffix in descending order; extrinsic sums
are (full sum) - (own term), with the full sum accumulated in ascending
neighbor order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tanner
from .tanner import TannerGraph

MSG_CLAMP = 30.0
PROD_CLAMP = 1.0 - 1e-12


@dataclass
class WeightSet:
    """One data-pass and one a-posteriori weight per directed edge."""
    w_data: np.ndarray
    w_apost: np.ndarray

    @classmethod
    def ones(cls, g: TannerGraph) -> "WeightSet":
        return cls(np.ones(g.n_edges), np.ones(g.n_edges))

    def copy(self) -> "WeightSet":
        return WeightSet(self.w_data.copy(), self.w_apost.copy())

    def check_bound(self, g: TannerGraph) -> None:
        if len(self.w_data) != g.n_edges or len(self.w_apost) != g.n_edges:
            raise ValueError("weight vectors not bound to this graph")
        if not (np.isfinite(self.w_data).all()
                and np.isfinite(self.w_apost).all()):
            raise ValueError("non-finite weight")


@dataclass
class DecodeResult:
    hard: np.ndarray
    llr_final: np.ndarray
    iterations: int
    converged: bool
    cn_updates: int


def init_alpha(g: TannerGraph, llr_ch: np.ndarray) -> np.ndarray:
    """First-iteration variable-to-check messages: the channel LLRs."""
    return np.asarray(llr_ch, dtype=np.float64)[..., g.edge_var]


def check_pass(g: TannerGraph, alpha: np.ndarray) -> np.ndarray:
    idx, mask = g.check_edge_table
    t = np.tanh(alpha / 2.0)
    tg = np.where(mask, t[..., idx], 1.0)

    pre = np.ones_like(tg)
    pre[..., 1:] = np.cumprod(tg, axis=-1)[..., :-1]
    suf = np.ones_like(tg)
    suf[..., :-1] = np.cumprod(tg[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    ext = pre * suf

    p = np.clip(ext, -PROD_CLAMP, PROD_CLAMP)
    b = np.clip(2.0 * np.arctanh(p), -MSG_CLAMP, MSG_CLAMP)

    beta = np.empty_like(alpha)
    beta[..., idx[mask]] = b[..., mask]
    return beta


def data_pass(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray,
              beta: np.ndarray) -> np.ndarray:
    idx, mask = g.var_edge_table
    bg = np.where(mask, beta[..., idx], 0.0)
    total = bg.sum(axis=-1)
    ext = total[..., :, None] - bg
    a = llr_ch[..., :, None] + weights.w_data[idx] * ext
    a = np.clip(a, -MSG_CLAMP, MSG_CLAMP)

    alpha = np.empty_like(beta)
    alpha[..., idx[mask]] = a[..., mask]
    return alpha


def aposteriori(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray,
                beta: np.ndarray) -> np.ndarray:
    idx, mask = g.var_edge_table
    bg = np.where(mask, beta[..., idx], 0.0)
    acc = (weights.w_apost[idx] * bg).sum(axis=-1)
    return np.clip(llr_ch + acc, -MSG_CLAMP, MSG_CLAMP)


def hard_decision(llr: np.ndarray) -> np.ndarray:
    """Bit 0 iff LLR > 0; the tie L = 0 decodes as bit 1."""
    return (llr <= 0.0).astype(np.uint8)


def decode_many(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray,
                i_max: int, early_stop: bool = True,
                snapshot_every: int | None = None):
    """Decode a batch of words; returns (hard, llr_final, iterations,
    converged[, snapshots]).

    iterations[b] is the number of iterations actually run for word b
    (always >= 1); snapshots, when requested, holds the a-posteriori LLRs
    at every multiple of `snapshot_every` while the word was still active.
    """
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    weights.check_bound(g)
    llr_ch = np.atleast_2d(np.asarray(llr_ch, dtype=np.float64))
    n_words = llr_ch.shape[0]

    hard = np.zeros((n_words, g.n_vars), dtype=np.uint8)
    llr_out = np.zeros((n_words, g.n_vars))
    iters = np.zeros(n_words, dtype=np.int64)
    conv = np.zeros(n_words, dtype=bool)
    snaps = None
    if snapshot_every is not None:
        snaps = np.full((n_words, i_max // snapshot_every, g.n_vars), np.nan)

    active = np.arange(n_words)
    alpha = init_alpha(g, llr_ch)
    llr_act = llr_ch
    for i in range(1, i_max + 1):
        beta = check_pass(g, alpha)
        post = aposteriori(g, weights, llr_act, beta)
        bits = hard_decision(post)
        if snaps is not None and i % snapshot_every == 0:
            snaps[active, i // snapshot_every - 1] = post

        if early_stop:
            done = ~tanner.syndrome(g, bits).any(axis=-1)
        else:
            done = np.zeros(len(active), dtype=bool)
        if i == i_max:
            done = np.ones(len(active), dtype=bool)
            fin_conv = ~tanner.syndrome(g, bits).any(axis=-1)
        else:
            fin_conv = done

        fin = active[done]
        hard[fin] = bits[done]
        llr_out[fin] = post[done]
        iters[fin] = i
        conv[fin] = fin_conv[done]
        if done.all():
            break

        keep = ~done
        active = active[keep]
        llr_act = llr_act[keep]
        alpha = data_pass(g, weights, llr_act, beta[keep])

    if snaps is not None:
        return hard, llr_out, iters, conv, snaps
    return hard, llr_out, iters, conv


def decode(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray,
           i_max: int, early_stop: bool = True) -> DecodeResult:
    """Decode one word; cn_updates counts E check-node updates per
    iteration actually run."""
    hard, llr_out, iters, conv = decode_many(
        g, weights, llr_ch[None, :], i_max, early_stop=early_stop)
    it = int(iters[0])
    return DecodeResult(hard=hard[0], llr_final=llr_out[0], iterations=it,
                        converged=bool(conv[0]), cn_updates=g.n_edges * it)


# ---- weight file I/O ---------------------------------------------------


def save_weights(path: str | Path, g: TannerGraph, weights: WeightSet) -> None:
    """Text format: header 'N M E', then one line 'n m w_data w_apost' per
    edge in canonical order (1-based node indices, 17 significant digits)."""
    weights.check_bound(g)
    lines = [f"{g.n_vars} {g.n_checks} {g.n_edges}"]
    for e in range(g.n_edges):
        n = int(g.edge_var[e]) + 1
        m = int(g.edge_check[e]) + 1
        lines.append(f"{n} {m} {weights.w_data[e]:.17g} "
                     f"{weights.w_apost[e]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_weights(path: str | Path, g: TannerGraph) -> WeightSet:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if [int(x) for x in head] != [g.n_vars, g.n_checks, g.n_edges]:
        raise ValueError(f"weight file header {head!r} does not match graph {g!r}")
    w_data = np.empty(g.n_edges)
    w_apost = np.empty(g.n_edges)
    for e, line in enumerate(lines[1:1 + g.n_edges]):
        n_s, m_s, wd, wa = line.split()
        n, m = int(n_s) - 1, int(m_s) - 1
        if g.edge_var[e] != n or g.edge_check[e] != m:
            raise ValueError(f"edge {e}: file has ({n_s},{m_s}), expected "
                             f"({g.edge_var[e] + 1},{g.edge_check[e] + 1})")
        w_data[e] = float(wd)
        w_apost[e] = float(wa)
    return WeightSet(w_data=w_data, w_apost=w_apost)
