"""Parity-check matrix / Tanner graph representation and diagnostics.

The graph is immutable after construction.  Edges carry a canonical index
(sorted by variable index, then check index) used everywhere weights or
per-edge message buffers are addressed.
"""

from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np


class AlistError(ValueError):
    """Malformed alist input; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TannerGraph:
    """Bipartite code graph: adjacency, degrees and canonical edge indexing."""

    def __init__(self, var_neighbors: list[list[int]], n_checks: int):
        self.n_vars = len(var_neighbors)
        self.n_checks = n_checks
        self.var_neighbors = [tuple(sorted(ns)) for ns in var_neighbors]
        check_nb: list[list[int]] = [[] for _ in range(n_checks)]
        for n, ms in enumerate(self.var_neighbors):
            if len(set(ms)) != len(ms):
                raise ValueError(f"parallel edge at variable {n}")
            for m in ms:
                if not 0 <= m < n_checks:
                    raise ValueError(f"check index {m} out of range")
                check_nb[m].append(n)
        self.check_neighbors = [tuple(vs) for vs in check_nb]

        edges = [(n, m) for n in range(self.n_vars)
                 for m in self.var_neighbors[n]]
        self.n_edges = len(edges)
        self.edge_index = {e: i for i, e in enumerate(edges)}
        self.edge_var = np.array([n for n, _ in edges], dtype=np.int32)
        self.edge_check = np.array([m for _, m in edges], dtype=np.int32)

    # ---- derived views -------------------------------------------------

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense parity-check matrix, shape (n_checks, n_vars), uint8."""
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        h[self.edge_check, self.edge_var] = 1
        return h

    @cached_property
    def max_var_degree(self) -> int:
        return max((len(ns) for ns in self.var_neighbors), default=0)

    @cached_property
    def max_check_degree(self) -> int:
        return max((len(vs) for vs in self.check_neighbors), default=0)

    @cached_property
    def var_edge_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(idx, mask): per-variable edge ids padded to max_var_degree."""
        d = max(self.max_var_degree, 1)
        idx = np.zeros((self.n_vars, d), dtype=np.int64)
        mask = np.zeros((self.n_vars, d), dtype=bool)
        for n in range(self.n_vars):
            for j, m in enumerate(self.var_neighbors[n]):
                idx[n, j] = self.edge_index[(n, m)]
                mask[n, j] = True
        return idx, mask

    @cached_property
    def check_edge_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(idx, mask): per-check edge ids padded to max_check_degree."""
        d = max(self.max_check_degree, 1)
        idx = np.zeros((self.n_checks, d), dtype=np.int64)
        mask = np.zeros((self.n_checks, d), dtype=bool)
        for m in range(self.n_checks):
            for j, n in enumerate(self.check_neighbors[m]):
                idx[m, j] = self.edge_index[(n, m)]
                mask[m, j] = True
        return idx, mask

    def __repr__(self) -> str:
        return (f"TannerGraph(N={self.n_vars}, M={self.n_checks}, "
                f"E={self.n_edges})")


def from_matrix(h: np.ndarray) -> TannerGraph:
    """Build a graph from a dense 0/1 parity-check matrix (checks x vars)."""
    h = np.asarray(h)
    var_nb = [np.flatnonzero(h[:, n]).tolist() for n in range(h.shape[1])]
    return TannerGraph(var_nb, h.shape[0])


# ---- alist I/O ---------------------------------------------------------


def _ints(tokens: list[str], line_no: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise AlistError(line_no, f"non-integer token: {exc}") from None


def parse_alist(text: str) -> TannerGraph:
    """Parse alist interchange format (1-based indices, 0-padding allowed)."""
    raw = text.splitlines()
    lines = [(i + 1, ln.split()) for i, ln in enumerate(raw) if ln.strip()]
    if len(lines) < 4:
        raise AlistError(len(raw), "truncated alist: fewer than 4 lines")

    ln, head = lines[0]
    if len(head) != 2:
        raise AlistError(ln, f"header must be 'N M', got {len(head)} tokens")
    n_vars, n_checks = _ints(head, ln)
    if n_vars <= 0 or n_checks <= 0:
        raise AlistError(ln, "N and M must be positive")

    ln, maxdeg = lines[1]
    if len(maxdeg) != 2:
        raise AlistError(ln, "expected 'max_var_deg max_check_deg'")
    max_vd, max_cd = _ints(maxdeg, ln)

    ln, vdeg_tok = lines[2]
    var_deg = _ints(vdeg_tok, ln)
    if len(var_deg) != n_vars:
        raise AlistError(ln, f"expected {n_vars} variable degrees, "
                             f"got {len(var_deg)}")
    ln, cdeg_tok = lines[3]
    chk_deg = _ints(cdeg_tok, ln)
    if len(chk_deg) != n_checks:
        raise AlistError(ln, f"expected {n_checks} check degrees, "
                             f"got {len(chk_deg)}")
    if max(var_deg) > max_vd or max(chk_deg) > max_cd:
        raise AlistError(lines[1][0], "declared max degree exceeded")

    if len(lines) < 4 + n_vars + n_checks:
        raise AlistError(len(raw), "truncated alist: missing adjacency lines")

    var_nb: list[list[int]] = []
    for n in range(n_vars):
        ln, toks = lines[4 + n]
        entries = [v for v in _ints(toks, ln) if v != 0]
        if len(entries) != var_deg[n]:
            raise AlistError(ln, f"variable {n + 1}: degree {var_deg[n]} "
                                 f"declared, {len(entries)} entries")
        for v in entries:
            if not 1 <= v <= n_checks:
                raise AlistError(ln, f"check index {v} out of range 1..{n_checks}")
        if len(set(entries)) != len(entries):
            raise AlistError(ln, f"variable {n + 1}: duplicate edge")
        var_nb.append([v - 1 for v in entries])

    # verify the check-side view agrees with the variable-side one
    expect = [set() for _ in range(n_checks)]
    for n, ms in enumerate(var_nb):
        for m in ms:
            expect[m].add(n + 1)
    for m in range(n_checks):
        ln, toks = lines[4 + n_vars + m]
        entries = [v for v in _ints(toks, ln) if v != 0]
        if len(entries) != chk_deg[m]:
            raise AlistError(ln, f"check {m + 1}: degree {chk_deg[m]} "
                                 f"declared, {len(entries)} entries")
        for v in entries:
            if not 1 <= v <= n_vars:
                raise AlistError(ln, f"variable index {v} out of range 1..{n_vars}")
        if len(set(entries)) != len(entries):
            raise AlistError(ln, f"check {m + 1}: duplicate edge")
        if set(entries) != expect[m]:
            raise AlistError(ln, f"check {m + 1}: adjacency disagrees with "
                                 f"variable-side lines")

    return TannerGraph(var_nb, n_checks)


def load_alist(path: str | Path) -> TannerGraph:
    return parse_alist(Path(path).read_text())


def to_alist(g: TannerGraph) -> str:
    """Serialize to alist text (unpadded rows)."""
    out = [f"{g.n_vars} {g.n_checks}",
           f"{g.max_var_degree} {g.max_check_degree}",
           " ".join(str(len(ns)) for ns in g.var_neighbors),
           " ".join(str(len(vs)) for vs in g.check_neighbors)]
    for ns in g.var_neighbors:
        out.append(" ".join(str(m + 1) for m in ns))
    for vs in g.check_neighbors:
        out.append(" ".join(str(n + 1) for n in vs))
    return "\n".join(out) + "\n"


# ---- operations --------------------------------------------------------


def syndrome(g: TannerGraph, bits: np.ndarray) -> np.ndarray:
    """Parity of the hard decisions over each check's neighborhood.

    Accepts shape (N,) or batched (..., N); returns matching (..., M).
    """
    bits = np.asarray(bits)
    if bits.shape[-1] != g.n_vars:
        raise ValueError(f"expected length {g.n_vars}, got {bits.shape[-1]}")
    return (bits.astype(np.uint8) @ g.matrix.T) & 1


def count_weights(g: TannerGraph) -> int:
    """Trainable weights per decoder: one data-pass plus one a-posteriori
    weight per edge."""
    return 2 * g.n_edges


def _adjacency(g: TannerGraph) -> list[list[int]]:
    """Unified adjacency: variables are 0..N-1, checks are N..N+M-1."""
    adj: list[list[int]] = [[] for _ in range(g.n_vars + g.n_checks)]
    for n in range(g.n_vars):
        for m in g.var_neighbors[n]:
            adj[n].append(g.n_vars + m)
            adj[g.n_vars + m].append(n)
    return adj


def girth_and_multiplicity(g: TannerGraph) -> tuple[int, int] | None:
    """Length of the shortest cycle and the number of distinct cycles of
    that length.  Returns None for an acyclic graph."""
    adj = _adjacency(g)
    girth = _girth(adj)
    if girth is None:
        return None
    return girth, _count_cycles(adj, girth)


def _girth(adj: list[list[int]]) -> int | None:
    best = None
    n_nodes = len(adj)
    for root in range(n_nodes):
        dist = [-1] * n_nodes
        parent = [-1] * n_nodes
        dist[root] = 0
        queue = [root]
        while queue:
            nxt = []
            for u in queue:
                for w in adj[u]:
                    if dist[w] == -1:
                        dist[w] = dist[u] + 1
                        parent[w] = u
                        nxt.append(w)
                    elif parent[u] != w and parent[w] != u:
                        cand = dist[u] + dist[w] + 1
                        if best is None or cand < best:
                            best = cand
            queue = nxt
    return best


def _count_cycles(adj: list[list[int]], length: int) -> int:
    """Count simple cycles of exactly `length` edges, each counted once.

    Rooted DFS: the root is the smallest node on the cycle, and the first
    step is taken toward the smaller of the two root neighbors to fix the
    traversal direction.
    """
    n_nodes = len(adj)
    count = 0
    for root in range(n_nodes):
        # distances from root using only nodes >= root, for pruning
        dist = {root: 0}
        queue = [root]
        while queue:
            nxt = []
            for u in queue:
                for w in adj[u]:
                    if w >= root and w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            queue = nxt

        on_path = {root}
        path: list[int] = [root]

        def dfs(u: int) -> None:
            nonlocal count
            depth = len(path) - 1
            remaining = length - depth
            for w in adj[u]:
                if w == root:
                    if remaining == 1 and depth >= 2 and path[1] < u:
                        count += 1
                    continue
                if w <= root or w in on_path:
                    continue
                if remaining <= 1 or dist.get(w, length + 1) > remaining - 1:
                    continue
                on_path.add(w)
                path.append(w)
                dfs(w)
                path.pop()
                on_path.remove(w)

        dfs(root)
    return count


def summary_row(g: TannerGraph) -> str:
    """One CSV row: N, M, E, girth, multiplicity."""
    gm = girth_and_multiplicity(g)
    girth, mult = gm if gm is not None else ("", "")
    return f"{g.n_vars},{g.n_checks},{g.n_edges},{girth},{mult}"
