"""Per-error-class training of BP-RNN weights.

The decoder is unrolled for a fixed number of iterations (no early stop),
the binary cross-entropy loss is read off the final a-posteriori LLRs, and
exact reverse-mode gradients are accumulated into the iteration-tied weights.
Forward arithmetic is shared with the bp module, so there is no train/test
skew; clamped regions contribute zero gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from . import bp, channel
from .bp import MSG_CLAMP, PROD_CLAMP, WeightSet
from .tanner import TannerGraph


@dataclass
class TrainConfig:
    snr_db: float
    i_train: int = 10
    batch_size: int = 8192
    n_batches: int = 64
    epochs: int = 10
    learning_rate: float = 1e-3
    rms_decay: float = 0.9
    rms_epsilon: float = 1e-7
    error_class: str = "unspecialized"

    def __post_init__(self):
        if self.i_train < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("invalid training configuration")


@dataclass
class LossReport:
    per_epoch: list[float]
    final: float
    history: list[tuple[int, int, float]] = field(default_factory=list)


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"non-finite loss {value} at epoch {epoch}, "
                         f"batch {batch}")


def loss(llr_final: np.ndarray) -> np.ndarray:
    """Average binary cross-entropy against the all-zero codeword:
    -(1/N) sum_n log sigmoid(L_n), via the stable softplus form."""
    return np.logaddexp(0.0, -np.asarray(llr_final)).mean(axis=-1)


@dataclass
class ForwardTrace:
    """Everything backward() needs: per-iteration messages, Theta(E*I)."""
    llr_ch: np.ndarray
    alphas: list[np.ndarray]
    betas: list[np.ndarray]
    llr_final: np.ndarray
    i_train: int


def forward_unrolled(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray,
                     i_train: int) -> ForwardTrace:
    """Same arithmetic as bp.decode without early stopping; the a-posteriori
    layer is evaluated at the final unrolled iteration only."""
    if i_train < 1:
        raise ValueError("i_train must be >= 1")
    llr_ch = np.atleast_2d(np.asarray(llr_ch, dtype=np.float64))
    alpha = bp.init_alpha(g, llr_ch)
    alphas = [alpha]
    betas = []
    for i in range(1, i_train + 1):
        beta = bp.check_pass(g, alpha)
        betas.append(beta)
        if i < i_train:
            alpha = bp.data_pass(g, weights, llr_ch, beta)
            alphas.append(alpha)
    llr_final = bp.aposteriori(g, weights, llr_ch, betas[-1])
    return ForwardTrace(llr_ch=llr_ch, alphas=alphas, betas=betas,
                        llr_final=llr_final, i_train=i_train)


def _check_pass_backward(g: TannerGraph, alpha_in: np.ndarray,
                         dbeta: np.ndarray) -> np.ndarray:
    """Gradient through beta = clip(2*atanh(clip(extrinsic tanh product)))."""
    idx, mask = g.check_edge_table
    t = np.tanh(alpha_in / 2.0)
    tg = np.where(mask, t[..., idx], 1.0)

    pre = np.ones_like(tg)
    pre[..., 1:] = np.cumprod(tg, axis=-1)[..., :-1]
    suf = np.ones_like(tg)
    suf[..., :-1] = np.cumprod(tg[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    ext = pre * suf
    p = np.clip(ext, -PROD_CLAMP, PROD_CLAMP)
    b_pre = 2.0 * np.arctanh(p)

    dg = np.where(mask, dbeta[..., idx], 0.0)
    dp = dg * (np.abs(b_pre) < MSG_CLAMP) * 2.0 / (1.0 - p * p)
    dext = dp * (np.abs(ext) < PROD_CLAMP)

    # d ext_k / d t_j = prod_{l != j,k} t_l.  Fast path divides the shared
    # accumulator by t_k; rows containing a (rare) zero tanh fall back to a
    # division-free per-position pass.
    dt = np.zeros_like(tg)
    d_max = tg.shape[-1]
    near_zero = np.abs(tg) < 1e-8
    safe = ~near_zero.any(axis=-1)
    if safe.any():
        acc = (dext * ext).sum(axis=-1)[..., None]
        dt_safe = (acc - dext * ext) / np.where(safe[..., None], tg, 1.0)
        dt = np.where(safe[..., None], dt_safe, 0.0)
    rows = np.nonzero(~safe)
    if rows[0].size:
        tg_z = tg[rows]
        dext_z = dext[rows]
        dt_z = np.zeros_like(tg_z)
        for j in range(d_max):
            tj = tg_z.copy()
            tj[..., j] = 1.0
            pre_j = np.ones_like(tj)
            pre_j[..., 1:] = np.cumprod(tj, axis=-1)[..., :-1]
            suf_j = np.ones_like(tj)
            suf_j[..., :-1] = np.cumprod(tj[..., ::-1],
                                         axis=-1)[..., ::-1][..., 1:]
            contrib = dext_z[..., j:j + 1] * (pre_j * suf_j)
            contrib[..., j] = 0.0
            dt_z += contrib
        dt[rows] = dt_z

    da = dt * (1.0 - tg * tg) / 2.0
    dalpha = np.zeros_like(dbeta)
    dalpha[..., idx[mask]] = da[..., mask]
    return dalpha


def _data_pass_backward(g: TannerGraph, weights: WeightSet,
                        llr_ch: np.ndarray, beta_in: np.ndarray,
                        dalpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient through alpha = clip(L_ch + w * extrinsic beta sum).

    Returns (dbeta_in, per-edge data-pass weight gradient summed over the
    batch)."""
    idx, mask = g.var_edge_table
    wd = weights.w_data[idx]
    bg = np.where(mask, beta_in[..., idx], 0.0)
    total = bg.sum(axis=-1)
    ext = total[..., :, None] - bg
    a_pre = llr_ch[..., :, None] + wd * ext

    da = np.where(mask, dalpha[..., idx], 0.0) * (np.abs(a_pre) < MSG_CLAMP)

    gw = (da * ext).sum(axis=0)
    grad_wd = np.zeros(g.n_edges)
    grad_wd[idx[mask]] = gw[mask]

    t_var = (da * wd).sum(axis=-1)
    dbg = t_var[..., :, None] - da * wd
    dbeta = np.zeros_like(beta_in)
    dbeta[..., idx[mask]] = np.where(mask, dbg, 0.0)[..., mask]
    return dbeta, grad_wd


def backward(trace: ForwardTrace, g: TannerGraph, weights: WeightSet
             ) -> tuple[np.ndarray, np.ndarray]:
    """Exact reverse-mode gradients of the batch-mean loss with respect to
    every (iteration-tied) weight."""
    idx, mask = g.var_edge_table
    n_words = trace.llr_ch.shape[0]
    scale = 1.0 / (g.n_vars * n_words)

    beta_last = trace.betas[-1]
    bg = np.where(mask, beta_last[..., idx], 0.0)
    pre_l = trace.llr_ch + (weights.w_apost[idx] * bg).sum(axis=-1)
    gate = np.abs(pre_l) < MSG_CLAMP
    dl = -expit(-trace.llr_final) * gate * scale

    dl_edge = dl[..., g.edge_var]
    grad_wa = (dl_edge * beta_last).sum(axis=0)
    dbeta = dl_edge * weights.w_apost

    grad_wd = np.zeros(g.n_edges)
    for i in range(trace.i_train, 0, -1):
        dalpha = _check_pass_backward(g, trace.alphas[i - 1], dbeta)
        if i > 1:
            dbeta, gwd = _data_pass_backward(
                g, weights, trace.llr_ch, trace.betas[i - 2], dalpha)
            grad_wd += gwd
        # i == 1: alpha^0 is the channel LLR; input gradient is dropped
    return grad_wd, grad_wa


@dataclass
class RmsState:
    v_data: np.ndarray
    v_apost: np.ndarray

    @classmethod
    def zeros(cls, g: TannerGraph) -> "RmsState":
        return cls(np.zeros(g.n_edges), np.zeros(g.n_edges))


def rmsprop_step(weights: WeightSet, grad: tuple[np.ndarray, np.ndarray],
                 state: RmsState, learning_rate: float = 1e-3,
                 rms_decay: float = 0.9, rms_epsilon: float = 1e-7
                 ) -> WeightSet:
    """v <- rho*v + (1-rho)*g^2 ; w <- w - lr*g/(sqrt(v) + eps)."""
    gd, ga = grad
    rho = rms_decay
    state.v_data = rho * state.v_data + (1.0 - rho) * gd * gd
    state.v_apost = rho * state.v_apost + (1.0 - rho) * ga * ga
    return WeightSet(
        w_data=weights.w_data - learning_rate * gd
        / (np.sqrt(state.v_data) + rms_epsilon),
        w_apost=weights.w_apost - learning_rate * ga
        / (np.sqrt(state.v_apost) + rms_epsilon),
    )


def _class_mask(class_sets: Sequence, picks: np.ndarray, n_bits: int
                ) -> np.ndarray:
    sizes = [len(tuple(s)) for s in class_sets]
    width = max(sizes)
    table = np.full((len(class_sets), width), -1, dtype=np.int64)
    for k, s in enumerate(class_sets):
        mem = sorted(s)
        table[k, :len(mem)] = mem
    sel = table[picks]
    mask = np.zeros((len(picks), n_bits), dtype=bool)
    rows = np.repeat(np.arange(len(picks)), width)
    cols = sel.ravel()
    ok = cols >= 0
    mask[rows[ok], cols[ok]] = True
    return mask


def train(g: TannerGraph, cfg: TrainConfig, class_sets: Sequence,
          rng: np.random.Generator) -> tuple[WeightSet, LossReport]:
    """Train one specialized decoder (error sets drawn uniformly from
    `class_sets`) or, with error_class='unspecialized', a benchmark decoder
    on plain channel noise.

    Weights start at 1.0 (plain BP); each batch applies one RMSprop step on
    the batch-mean gradient.
    """
    specialized = cfg.error_class != "unspecialized"
    if specialized and not class_sets:
        raise ValueError("empty class set for specialized training")
    params = channel.snr_to_sigma(cfg.snr_db)
    weights = WeightSet.ones(g)
    state = RmsState.zeros(g)
    history: list[tuple[int, int, float]] = []

    for epoch in range(cfg.epochs):
        for batch in range(cfg.n_batches):
            if specialized:
                picks = rng.integers(len(class_sets), size=cfg.batch_size)
                mask = _class_mask(class_sets, picks, g.n_vars)
                words = channel._sample_masked(params, mask, rng)
            else:
                words = channel.sample_awgn(params, g.n_vars, rng,
                                            size=cfg.batch_size)
            trace = forward_unrolled(g, weights, words.llr, cfg.i_train)
            batch_loss = float(loss(trace.llr_final).mean())
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(epoch, batch, batch_loss)
            grad = backward(trace, g, weights)
            weights = rmsprop_step(weights, grad, state, cfg.learning_rate,
                                   cfg.rms_decay, cfg.rms_epsilon)
            history.append((epoch, batch, batch_loss))

    per_epoch = [float(np.mean([l for e, _, l in history if e == epoch]))
                 for epoch in range(cfg.epochs)]
    return weights, LossReport(per_epoch=per_epoch, final=history[-1][2],
                               history=history)
