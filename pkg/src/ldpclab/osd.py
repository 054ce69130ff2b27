"""Ordered statistics decoding of small order, and the diversity
post-processing step built on it.

Positions are sorted by reliability (|LLR|, descending), the parity-check
matrix is put in systematic form [A | I] with the identity over the least
reliable independent columns, and candidates are generated by flipping up
to `w` of the hard decisions on the most-reliable basis, re-encoding, and
scoring with the BPSK ML metric sum_n y_n c_n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .diversity import ml_select
from .tanner import TannerGraph


def sort_reliability(llr: np.ndarray) -> np.ndarray:
    """Permutation ordering |llr| descending; ties keep the lower index
    first."""
    llr = np.asarray(llr)
    if not np.isfinite(llr).all():
        raise ValueError("non-finite LLR")
    return np.argsort(-np.abs(llr), kind="stable")


@dataclass
class SystematizedMatrix:
    """[A | I] over permuted columns: perm[i] is the original column at
    permuted position i; the first k positions are the most-reliable basis,
    the last `rank` positions carry the identity."""
    a: np.ndarray              # (rank, k) uint8
    perm: np.ndarray           # (N,) original column indices
    rank: int
    k: int

    @property
    def h_sys(self) -> np.ndarray:
        return np.hstack([self.a, np.eye(self.rank, dtype=np.uint8)])


def systematize(g: TannerGraph, perm: np.ndarray) -> SystematizedMatrix:
    """Gaussian elimination over GF(2) targeting the identity on the least
    reliable positions; a dependent pivot column falls back to the
    most-reliable side and the next more-reliable unused column is taken
    instead.  Dependent rows are dropped (K = N - rank)."""
    h = g.matrix
    n = g.n_vars
    perm = list(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("perm is not a permutation of the columns")
    if not h.any():
        raise ValueError("all-zero parity-check matrix")

    # row bitmasks in permuted coordinates: bit j = H[r, perm[j]]
    rows = []
    for r in range(g.n_checks):
        mask = 0
        for j in range(n):
            if h[r, perm[j]]:
                mask |= 1 << j
        rows.append(mask)

    pivot_of: dict[int, int] = {}       # permuted column -> row index
    assigned = [False] * g.n_checks
    for j in range(n - 1, -1, -1):      # least reliable columns first
        bit = 1 << j
        pivot = next((r for r in range(g.n_checks)
                      if not assigned[r] and rows[r] & bit), None)
        if pivot is None:
            continue
        assigned[pivot] = True
        pivot_of[j] = pivot
        for r in range(g.n_checks):
            if r != pivot and rows[r] & bit:
                rows[r] ^= rows[pivot]
        if len(pivot_of) == g.n_checks:
            break

    basis_js = sorted(pivot_of)
    mrb_js = [j for j in range(n) if j not in pivot_of]
    rank = len(basis_js)
    k = n - rank
    a = np.zeros((rank, k), dtype=np.uint8)
    for i, j in enumerate(basis_js):
        mask = rows[pivot_of[j]]
        for col, jj in enumerate(mrb_js):
            a[i, col] = (mask >> jj) & 1
    new_perm = np.array([perm[j] for j in mrb_js]
                        + [perm[j] for j in basis_js], dtype=np.int64)
    return SystematizedMatrix(a=a, perm=new_perm, rank=rank, k=k)


def osd_reencode(sysm: SystematizedMatrix, mrb_bits: np.ndarray) -> np.ndarray:
    """Complete the most-reliable bits to a codeword of the original code."""
    u = np.asarray(mrb_bits, dtype=np.uint8)
    if u.shape[-1] != sysm.k:
        raise ValueError(f"expected {sysm.k} basis bits")
    parity = (u @ sysm.a.T) & 1
    word = np.zeros(u.shape[:-1] + (len(sysm.perm),), dtype=np.uint8)
    word[..., sysm.perm[:sysm.k]] = u
    word[..., sysm.perm[sysm.k:]] = parity
    return word


@dataclass
class OsdCandidate:
    codeword: np.ndarray
    flips: tuple[int, ...]     # flipped positions, as original var indices
    score: float
    n_candidates: int


def osd_w(g: TannerGraph, llr: np.ndarray, y: np.ndarray, w: int
          ) -> OsdCandidate:
    """Best candidate over all flips of at most w most-reliable bits.

    Ties break toward fewer flips, then lexicographically smaller flip
    sets (candidates are generated in exactly that order).
    """
    if w < 0:
        raise ValueError("order must be >= 0")
    sysm = systematize(g, sort_reliability(llr))
    k = sysm.k
    mrb_vars = sysm.perm[:k]
    base = (np.asarray(llr)[mrb_vars] <= 0.0).astype(np.uint8)

    flip_sets = [c for i in range(min(w, k) + 1)
                 for c in itertools.combinations(range(k), i)]
    flips = np.zeros((len(flip_sets), k), dtype=np.uint8)
    for row, c in enumerate(flip_sets):
        flips[row, list(c)] = 1
    u = base[None, :] ^ flips
    parity = (u @ sysm.a.T) & 1

    y = np.asarray(y, dtype=np.float64)
    scores = u @ y[mrb_vars] + parity @ y[sysm.perm[k:]]
    best = int(np.argmin(scores))

    word = np.zeros(g.n_vars, dtype=np.uint8)
    word[mrb_vars] = u[best]
    word[sysm.perm[k:]] = parity[best]
    return OsdCandidate(
        codeword=word,
        flips=tuple(sorted(int(mrb_vars[i]) for i in flip_sets[best])),
        score=float(scores[best]),
        n_candidates=len(flip_sets),
    )


def postprocess(g: TannerGraph, llr_finals: list[np.ndarray] | np.ndarray,
                y: np.ndarray, w: int) -> np.ndarray:
    """OSD over each failed decoder's soft output, then ML selection among
    the per-decoder winners (ties toward the earliest decoder)."""
    winners = [osd_w(g, llr, y, w).codeword for llr in llr_finals]
    return ml_select(winners, y)
