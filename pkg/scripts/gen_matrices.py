#!/usr/bin/env python3
"""Regenerate the alist files shipped in src/ldpclab/data/.

Two matrices are produced:

* ccsds_128_64.alist -- the CCSDS (128,64) short LDPC code, built from its
  block-circulant definition (4x8 grid of 16x16 circulants).  The result is
  checked against known structural invariants before writing.
* reg64_3_6.alist -- a (3,6)-regular length-64 code with girth 6, generated
  by a seeded configuration-model search.  This is a structural stand-in used
  by the test suite where *some* regular rate-1/2 length-64 code is needed;
  it is NOT the PEG code used elsewhere with these parameters.

Run from the repository root:  python3 scripts/gen_matrices.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ldpclab import tanner

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "ldpclab" / "data"

CIRCULANT_SIZE = 16

# Exponent grid for the CCSDS (128,64) parity-check matrix.  Entry (i, j)
# lists the circulant powers summed into block (i, j); None is the zero block.
CCSDS_GRID = [
    [(0, 7), (2,), (14,), (6,), None, (0,), (13,), (0,)],
    [(6,), (0, 15), (0,), (1,), (0,), None, (0,), (7,)],
    [(4,), (1,), (0, 15), (14,), (11,), (0,), None, (3,)],
    [(0,), (1,), (9,), (0, 13), (14,), (1,), (0,), None],
]


def circulant(power: int) -> np.ndarray:
    p = np.zeros((CIRCULANT_SIZE, CIRCULANT_SIZE), dtype=np.uint8)
    for i in range(CIRCULANT_SIZE):
        p[i, (i + power) % CIRCULANT_SIZE] = 1
    return p


def ccsds_matrix() -> np.ndarray:
    def block(spec):
        b = np.zeros((CIRCULANT_SIZE, CIRCULANT_SIZE), dtype=np.uint8)
        if spec is not None:
            for k in spec:
                b ^= circulant(k)
        return b

    return np.block([[block(s) for s in row] for row in CCSDS_GRID])


def count_4_cycles(h: np.ndarray) -> int:
    gram = (h.astype(np.int64) @ h.T.astype(np.int64))
    np.fill_diagonal(gram, 0)
    return int((gram * (gram - 1) // 2).sum()) // 2


def regular_3_6_matrix(n: int = 64, seed: int = 20240917) -> np.ndarray:
    """Random (3,6)-regular bipartite graph with girth >= 6.

    Configuration model with rejection of parallel edges, then local edge
    swaps until no 4-cycles remain.
    """
    m = n // 2
    rng = np.random.default_rng(seed)
    while True:
        var_stubs = np.repeat(np.arange(n), 3)
        chk_stubs = np.repeat(np.arange(m), 6)
        rng.shuffle(chk_stubs)
        edges = set(zip(var_stubs.tolist(), chk_stubs.tolist()))
        if len(edges) != 3 * n:
            continue  # parallel edge, redraw
        h = np.zeros((m, n), dtype=np.uint8)
        for v, c in edges:
            h[c, v] = 1
        for _ in range(200000):
            bad = _find_4_cycle(h, rng)
            if bad is None:
                break
            _swap_edge(h, bad, rng)
        else:
            continue
        if count_4_cycles(h) == 0:
            return h


def _find_4_cycle(h, rng):
    gram = h.astype(np.int64) @ h.T.astype(np.int64)
    np.fill_diagonal(gram, 0)
    rows, cols = np.nonzero(gram >= 2)
    if len(rows) == 0:
        return None
    i = rng.integers(len(rows))
    c1, c2 = int(rows[i]), int(cols[i])
    shared = np.flatnonzero(h[c1] & h[c2])
    return c1, int(shared[rng.integers(len(shared))])


def _swap_edge(h, edge, rng):
    """Swap (c1, v1) with a random other edge (c2, v2), keeping degrees."""
    c1, v1 = edge
    for _ in range(1000):
        c2 = int(rng.integers(h.shape[0]))
        cand = np.flatnonzero(h[c2])
        v2 = int(cand[rng.integers(len(cand))])
        if c2 == c1 or v2 == v1:
            continue
        if h[c1, v2] or h[c2, v1]:
            continue
        h[c1, v1] = 0
        h[c2, v2] = 0
        h[c1, v2] = 1
        h[c2, v1] = 1
        return


def write(name: str, h: np.ndarray) -> None:
    g = tanner.from_matrix(h)
    path = DATA_DIR / name
    path.write_text(tanner.to_alist(g))
    print(f"wrote {path}  N={g.n_vars} M={g.n_checks} E={g.n_edges} "
          f"girth/mult={tanner.girth_and_multiplicity(g)}")


def main() -> None:
    h = ccsds_matrix()
    assert h.shape == (64, 128)
    assert count_4_cycles(h) == 0
    col = h.sum(axis=0)
    assert sorted(set(col.tolist())) == [3, 5]
    assert (h.sum(axis=1) == 8).all()
    write("ccsds_128_64.alist", h)

    h2 = regular_3_6_matrix()
    assert (h2.sum(axis=0) == 3).all() and (h2.sum(axis=1) == 6).all()
    write("reg64_3_6.alist", h2)


if __name__ == "__main__":
    main()
