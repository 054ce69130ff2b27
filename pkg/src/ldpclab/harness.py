"""Monte Carlo FER simulation driver and experiment plumbing.

A frame is an error when the final pipeline output differs from the
transmitted (all-zero) codeword.  Each point runs until the target number
of frame errors has accumulated or the frame cap is hit; FER uncertainty
is reported as a Wilson 95% interval.  Worker substreams are derived from
(master seed, point index, worker id), so a run is reproducible for a
fixed (seed, worker count).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import bp, channel, diversity, osd
from .bp import WeightSet
from .diversity import DecoderPool, PoolEntry
from .tanner import TannerGraph

CSV_HEADER = ("snr_db,decoder,osd_mode,osd_order,frames,frame_errors,fer,"
              "fer_lo,fer_hi,avg_iters,avg_latency,avg_cn_updates,"
              "osd_invocations,seed")

DECODER_SPECS = ("bp", "bprnn-single", "diversity-parallel",
                 "diversity-serial")
OSD_MODES = ("off", "postprocess", "periodic-25")


@dataclass
class ExperimentConfig:
    alist: str
    snr_db: list[float]
    decoder: str = "bp"
    i_test: int = 25
    osd_mode: str = "off"
    osd_order: int = 1
    min_frame_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    workers: int = 1
    batch_size: int = 2048
    weights: str | None = None        # bprnn-single
    pool: str | None = None           # diversity-* manifest

    def __post_init__(self):
        if not self.snr_db:
            raise ValueError("snr list must be nonempty")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.decoder not in DECODER_SPECS:
            raise ValueError(f"unknown decoder spec {self.decoder!r}")
        if self.osd_mode not in OSD_MODES:
            raise ValueError(f"unknown osd mode {self.osd_mode!r}")
        if self.osd_mode == "periodic-25" and self.decoder not in (
                "bp", "bprnn-single"):
            raise ValueError("periodic-25 applies to single-decoder runs")


@dataclass
class ResultRow:
    snr_db: float
    decoder: str
    osd_mode: str
    osd_order: int
    frames: int
    frame_errors: int
    fer: float
    fer_ci95: tuple[float, float]
    avg_iterations: float
    avg_latency: float
    avg_cn_updates: float
    osd_invocations: int
    seed: int
    capped: bool = False

    def csv(self) -> str:
        lo, hi = self.fer_ci95
        return (f"{self.snr_db},{self.decoder},{self.osd_mode},"
                f"{self.osd_order},{self.frames},{self.frame_errors},"
                f"{self.fer:.8g},{lo:.8g},{hi:.8g},"
                f"{self.avg_iterations:.6g},{self.avg_latency:.6g},"
                f"{self.avg_cn_updates:.6g},{self.osd_invocations},"
                f"{self.seed}")


_Z95 = float(ndtri(0.975))


def wilson_interval(k: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = p + z2 / (2 * n)
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n))
    lo = 0.0 if k == 0 else max(0.0, (center - half) / denom)
    hi = 1.0 if k == n else min(1.0, (center + half) / denom)
    return lo, hi


def point_rng(seed: int, point: int, worker: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(point, worker))
    return np.random.Generator(np.random.PCG64(ss))


def single_pool(g: TannerGraph, weights: WeightSet | None, i_test: int,
                label: str = "bp") -> DecoderPool:
    w = weights if weights is not None else WeightSet.ones(g)
    return DecoderPool(entries=[PoolEntry(0, label, w)], i_test=i_test)


def load_pool_manifest(path: str | Path, g: TannerGraph, i_test: int
                       ) -> DecoderPool:
    """JSON list of {id, class, weights, snr_db}; weight paths are
    resolved relative to the manifest file."""
    path = Path(path)
    entries = []
    for item in json.loads(path.read_text()):
        wpath = Path(item["weights"])
        if not wpath.is_absolute():
            wpath = path.parent / wpath
        entries.append(PoolEntry(int(item["id"]), str(item["class"]),
                                 bp.load_weights(wpath, g)))
    return DecoderPool(entries=entries, i_test=i_test)


def save_pool_manifest(path: str | Path, items: list[dict]) -> None:
    Path(path).write_text(json.dumps(items, indent=1) + "\n")


@dataclass
class _Tally:
    frames: int = 0
    errors: int = 0
    sum_iters: float = 0.0
    sum_latency: float = 0.0
    osd_invocations: int = 0


def _pool_mode(decoder: str) -> str:
    return "serial" if decoder == "diversity-serial" else "parallel"


def _run_batch(g: TannerGraph, pool: DecoderPool, cfg: ExperimentConfig,
               params: channel.ChannelParams, rng: np.random.Generator,
               n_words: int, tally: _Tally) -> None:
    words = channel.sample_awgn(params, g.n_vars, rng, size=n_words)

    if cfg.osd_mode == "periodic-25":
        entry = pool.entries[0]
        hard, llr_out, iters, conv, snaps = bp.decode_many(
            g, entry.weights, words.llr, pool.i_test, snapshot_every=25)
        err = ~(conv & ~hard.any(axis=-1))
        for b in np.flatnonzero(~conv):
            shots = snaps[b][~np.isnan(snaps[b]).any(axis=-1)]
            if len(shots) == 0:
                continue
            out = osd.postprocess(g, list(shots), words.y[b], cfg.osd_order)
            tally.osd_invocations += len(shots)
            err[b] = out.any()
        tally.sum_iters += float(iters.sum())
        tally.sum_latency += float(iters.sum())
    else:
        mode = _pool_mode(cfg.decoder)
        run = diversity.run_pool_many(g, pool, words.llr, words.y, mode)
        err = ~(run.found & ~run.chosen.any(axis=-1))
        if cfg.osd_mode == "postprocess":
            for b in np.flatnonzero(~run.found):
                out = osd.postprocess(g, list(run.llr_finals[:, b]),
                                      words.y[b], cfg.osd_order)
                tally.osd_invocations += len(pool)
                err[b] = out.any()
        total = run.iterations.sum(axis=1)
        tally.sum_iters += float(total.sum())
        if mode == "parallel":
            tally.sum_latency += float(run.iterations.max(axis=1).sum())
        else:
            tally.sum_latency += float(total.sum())

    tally.frames += n_words
    tally.errors += int(err.sum())


def run_point(g: TannerGraph, pool: DecoderPool, cfg: ExperimentConfig,
              snr_db: float, point_index: int = 0) -> ResultRow:
    params = channel.snr_to_sigma(snr_db)
    rngs = [point_rng(cfg.seed, point_index, w) for w in range(cfg.workers)]
    tally = _Tally()
    capped = False
    while tally.errors < cfg.min_frame_errors:
        if tally.frames >= cfg.max_frames:
            capped = True
            break
        for rng in rngs:
            n_words = min(cfg.batch_size, cfg.max_frames - tally.frames)
            if n_words <= 0:
                break
            _run_batch(g, pool, cfg, params, rng, n_words, tally)
    fer = tally.errors / tally.frames if tally.frames else 0.0
    return ResultRow(
        snr_db=snr_db, decoder=cfg.decoder, osd_mode=cfg.osd_mode,
        osd_order=cfg.osd_order, frames=tally.frames,
        frame_errors=tally.errors, fer=fer,
        fer_ci95=wilson_interval(tally.errors, tally.frames),
        avg_iterations=tally.sum_iters / max(tally.frames, 1),
        avg_latency=tally.sum_latency / max(tally.frames, 1),
        avg_cn_updates=g.n_edges * tally.sum_iters / max(tally.frames, 1),
        osd_invocations=tally.osd_invocations, seed=cfg.seed, capped=capped)


def run_sweep(g: TannerGraph, pool: DecoderPool, cfg: ExperimentConfig,
              csv_path: str | Path | None = None,
              log_path: str | Path | None = None) -> list[ResultRow]:
    rows = [run_point(g, pool, cfg, snr, idx)
            for idx, snr in enumerate(cfg.snr_db)]
    if csv_path is not None:
        text = CSV_HEADER + "\n" + "\n".join(r.csv() for r in rows) + "\n"
        Path(csv_path).write_text(text)
    if log_path is not None:
        lines = [f"config: {cfg}"]
        for r in rows:
            flag = " (frame cap hit)" if r.capped else ""
            lines.append(f"snr={r.snr_db} fer={r.fer:.4g} "
                         f"[{r.fer_ci95[0]:.4g},{r.fer_ci95[1]:.4g}] "
                         f"frames={r.frames} errors={r.frame_errors}{flag}")
        Path(log_path).write_text("\n".join(lines) + "\n")
    return rows


# ---- end-to-end pipeline -----------------------------------------------


def train_pool(g: TannerGraph, class_list: list[tuple[str, list]],
               train_cfg, seed: int, i_test: int) -> DecoderPool:
    """Train one decoder per (label, error sets) entry; ids follow list
    order."""
    from . import training as _training

    entries = []
    for k, (label, sets) in enumerate(class_list):
        cfg = _training.TrainConfig(
            snr_db=train_cfg.snr_db, i_train=train_cfg.i_train,
            batch_size=train_cfg.batch_size, n_batches=train_cfg.n_batches,
            epochs=train_cfg.epochs, learning_rate=train_cfg.learning_rate,
            rms_decay=train_cfg.rms_decay, rms_epsilon=train_cfg.rms_epsilon,
            error_class=label)
        w, _ = _training.train(g, cfg, sets, channel.worker_rng(seed, k))
        entries.append(PoolEntry(k, label, w))
    return DecoderPool(entries=entries, i_test=i_test)


def pipeline(g: TannerGraph, nu_values: list[int], train_cfg,
             z: int, cfg: ExperimentConfig, select_words: int = 100_000,
             select_snr_db: float = 5.0, retrain_per_snr: bool = True
             ) -> list[ResultRow]:
    """Desk-scale end-to-end run: enumerate error classes, train one
    decoder per class, order by failure-set complementarity at the anchor
    SNR, keep the top `z`, and sweep.

    With retrain_per_snr (the default) the selected classes are retrained
    at every sweep point; otherwise the anchor-SNR weights are reused.
    """
    from . import absorbing as _absorbing
    from . import training as _training

    class_list = []
    for nu in nu_values:
        cls = _absorbing.enumerate_all(g, nu)
        for info in cls.trainable():
            class_list.append((str(info.et),
                               [a.members for a in info.sets]))
    anchor_cfg = _replace_snr(train_cfg, select_snr_db)
    pool = train_pool(g, class_list, anchor_cfg, cfg.seed, cfg.i_test)

    params = channel.snr_to_sigma(select_snr_db)
    rng = channel.worker_rng(cfg.seed, 10_000)
    masks = [np.zeros(0, dtype=bool) for _ in pool.entries]
    done = 0
    while done < select_words:
        n = min(cfg.batch_size, select_words - done)
        words = channel.sample_awgn(params, g.n_vars, rng, size=n)
        part = diversity.failure_sets(g, pool, words.llr)
        masks = [np.concatenate([m, p]) for m, p in zip(masks, part)]
        done += n
    order = diversity.select_order(masks)
    selected = diversity.take_diversity(pool, order, z)
    chosen_classes = [(e.label, dict(class_list)[e.label])
                      for e in selected.entries]

    rows = []
    for idx, snr in enumerate(cfg.snr_db):
        if retrain_per_snr and snr != select_snr_db:
            point_pool = train_pool(g, chosen_classes,
                                    _replace_snr(train_cfg, snr),
                                    cfg.seed, cfg.i_test)
        else:
            point_pool = selected
        rows.append(run_point(g, point_pool, cfg, snr, idx))
    return rows


def _replace_snr(train_cfg, snr_db: float):
    from . import training as _training
    return _training.TrainConfig(
        snr_db=snr_db, i_train=train_cfg.i_train,
        batch_size=train_cfg.batch_size, n_batches=train_cfg.n_batches,
        epochs=train_cfg.epochs, learning_rate=train_cfg.learning_rate,
        rms_decay=train_cfg.rms_decay, rms_epsilon=train_cfg.rms_epsilon,
        error_class=train_cfg.error_class)


# ---- diagnostics dumps -------------------------------------------------


def dump_weight_profile(weights: WeightSet) -> tuple[np.ndarray, np.ndarray]:
    """Sorted weight vectors (data-pass, a-posteriori)."""
    return np.sort(weights.w_data), np.sort(weights.w_apost)


def weight_profile_csv(weights: WeightSet) -> str:
    wd, wa = dump_weight_profile(weights)
    lines = ["w_data,w_apost"]
    lines += [f"{a:.17g},{b:.17g}" for a, b in zip(wd, wa)]
    return "\n".join(lines) + "\n"


def dump_failure_cdf(g: TannerGraph, weights: WeightSet, snr_db: float,
                     n_failures: int, rng: np.random.Generator,
                     i_test: int = 25, batch_size: int = 2048,
                     max_frames: int = 1_000_000
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF of a-posteriori LLRs over failed frames.

    Returns (values, cdf); both empty if no failure was seen within the
    frame budget.
    """
    params = channel.snr_to_sigma(snr_db)
    collected: list[np.ndarray] = []
    failures = 0
    frames = 0
    while failures < n_failures and frames < max_frames:
        words = channel.sample_awgn(params, g.n_vars, rng, size=batch_size)
        hard, llr_out, _, conv = bp.decode_many(g, weights, words.llr, i_test)
        bad = ~(conv & ~hard.any(axis=-1))
        collected.append(llr_out[bad].ravel())
        failures += int(bad.sum())
        frames += batch_size
    values = np.sort(np.concatenate(collected)) if collected else np.array([])
    if values.size == 0:
        return values, np.array([])
    cdf = np.arange(1, values.size + 1) / values.size
    return values, cdf


def cdf_csv(values: np.ndarray, cdf: np.ndarray) -> str:
    lines = ["llr,cdf"]
    lines += [f"{v:.10g},{c:.10g}" for v, c in zip(values, cdf)]
    return "\n".join(lines) + "\n"
