"""Absorbing-set checking, exhaustive enumeration and classification.

A variable-node set A is absorbing when every member has strictly more
neighbors among the even-degree checks of the induced subgraph than among
the odd-degree ones.  Enumeration is a rooted, layer-by-layer backtracking
search: the root is the smallest member, candidate sets are built by
choosing a subset of each successive BFS layer, and the absorbing condition
for a layer is checked as soon as the next layer's subset is fixed (at that
point the degrees of all its neighboring checks are final).

Candidate pools per layer come in two flavors:

* "all" (default): the full next layer, restricted to indices >= root, with
  empty layer subsets allowed while deeper layers can still absorb the
  remaining budget.  This is exhaustive: together with the min-root
  convention it visits every subset of every size exactly once, including
  absorbing sets whose induced subgraph is disconnected.
* "descendants": only descendants of the previously chosen layer subset,
  never empty.  Cheaper, but it can miss sets that are connected through
  same-layer checks only, and all disconnected sets.

Exhaustiveness of the default is what the brute-force oracle checks.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .tanner import TannerGraph


@dataclass(frozen=True, order=True)
class AbsorbingSet:
    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, order=True)
class ExtendedType:
    """Signature nu-(omega, epsilon, P_c) of the induced subgraph."""
    nu: int
    omega: int
    epsilon: int
    pc: tuple[int, ...]

    def __str__(self) -> str:
        pc = ",".join(str(m) for m in self.pc)
        return f"{self.nu}-({self.omega},{self.epsilon},({pc}))"

    @classmethod
    def parse(cls, text: str) -> "ExtendedType":
        m = re.fullmatch(r"(\d+)-\((\d+),(\d+),\(([\d,]*)\)\)", text.strip())
        if not m:
            raise ValueError(f"bad extended-type string: {text!r}")
        pc = tuple(int(x) for x in m.group(4).split(",") if x)
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)), pc)

    @property
    def is_codeword_support(self) -> bool:
        return self.omega == 0


def _induced_check_degrees(g: TannerGraph, members: Iterable[int]
                           ) -> dict[int, int]:
    deg: dict[int, int] = {}
    for n in members:
        for m in g.var_neighbors[n]:
            deg[m] = deg.get(m, 0) + 1
    return deg


def as_check(g: TannerGraph, members: Iterable[int]) -> bool:
    """True iff every member has strictly more even- than odd-degree
    neighboring checks in the subgraph induced by the set."""
    members = list(members)
    if not members:
        raise ValueError("empty variable set")
    deg = _induced_check_degrees(g, members)
    for n in members:
        even = sum(1 for m in g.var_neighbors[n] if deg[m] % 2 == 0)
        if 2 * even <= len(g.var_neighbors[n]):
            return False
    return True


def extended_type(g: TannerGraph, aset: AbsorbingSet | Iterable[int]
                  ) -> ExtendedType:
    members = aset.members if isinstance(aset, AbsorbingSet) else tuple(aset)
    deg = _induced_check_degrees(g, members)
    degs = list(deg.values())
    omega = sum(1 for d in degs if d % 2 == 1)
    epsilon = len(degs) - omega
    max_d = max(degs)
    pc = tuple(sum(1 for d in degs if d == k) for k in range(1, max_d + 1))
    return ExtendedType(nu=len(members), omega=omega, epsilon=epsilon, pc=pc)


@dataclass
class RootedExpansion:
    """BFS layering from a root variable: var_layers[l] is at distance 2l,
    check_layers[l] at distance 2l+1."""
    root: int
    var_layers: list[list[int]]
    check_layers: list[list[int]]


def rooted_expansion(g: TannerGraph, root: int) -> RootedExpansion:
    seen_v = {root}
    seen_c: set[int] = set()
    var_layers = [[root]]
    check_layers = []
    frontier = [root]
    while frontier:
        checks = []
        for n in frontier:
            for m in g.var_neighbors[n]:
                if m not in seen_c:
                    seen_c.add(m)
                    checks.append(m)
        next_vars = []
        for m in checks:
            for n in g.check_neighbors[m]:
                if n not in seen_v:
                    seen_v.add(n)
                    next_vars.append(n)
        if checks:
            check_layers.append(sorted(checks))
        if next_vars:
            var_layers.append(sorted(next_vars))
        frontier = next_vars
    return RootedExpansion(root=root, var_layers=var_layers,
                           check_layers=check_layers)


def completions(g: TannerGraph, expansion: RootedExpansion,
                levels: list[list[int]], nu: int) -> list[tuple[int, ...]]:
    """Candidate next-layer subsets per the descendant rule: nonempty
    subsets of the >= root descendants of the last chosen layer, of size at
    most the remaining budget, ordered by size then lexicographically.

    An empty completion can never reach a valid terminal state (the layers
    below an empty one are unreachable), so it is not produced.
    """
    used = sum(len(lv) for lv in levels)
    if used > nu:
        raise ValueError("levels exceed target size")
    if used == nu:
        return []
    depth = len(levels)
    if depth >= len(expansion.var_layers):
        return []
    nxt = set(expansion.var_layers[depth])
    root = expansion.root
    desc = set()
    for n in levels[-1]:
        for m in g.var_neighbors[n]:
            for v in g.check_neighbors[m]:
                if v >= root and v in nxt:
                    desc.add(v)
    pool = sorted(desc)
    out: list[tuple[int, ...]] = []
    for size in range(1, min(nu - used, len(pool)) + 1):
        out.extend(itertools.combinations(pool, size))
    return out


def iter_as_dfs(g: TannerGraph, root: int, nu: int,
                candidates: str = "all") -> Iterator[AbsorbingSet]:
    """All absorbing sets of size nu whose smallest member is `root`."""
    if not 1 <= nu <= g.n_vars:
        raise ValueError("nu out of range")
    if candidates not in ("all", "descendants"):
        raise ValueError(f"unknown candidate mode {candidates!r}")

    exp = rooted_expansion(g, root)
    layers = [sorted(v for v in layer if v >= root)
              for layer in exp.var_layers]
    if candidates == "all":
        # variables in other graph components get one final pseudo-layer;
        # they share no checks with the reachable layers, so the layerwise
        # finalization argument still holds
        reached = {v for layer in exp.var_layers for v in layer}
        rest = sorted(v for v in range(root + 1, g.n_vars)
                      if v not in reached)
        if rest:
            layers.append(rest)
    n_layers = len(layers)
    # capacity[l] = how many >= root variables live at layer l or deeper
    capacity = [0] * (n_layers + 1)
    for l in range(n_layers - 1, -1, -1):
        capacity[l] = capacity[l + 1] + len(layers[l])

    h_cols = g.matrix.T.astype(np.int64)          # (N, M)
    max_vd = max(g.max_var_degree, 1)
    vc_idx = np.zeros((g.n_vars, max_vd), dtype=np.int64)
    vc_mask = np.zeros((g.n_vars, max_vd), dtype=bool)
    for n in range(g.n_vars):
        for j, m in enumerate(g.var_neighbors[n]):
            vc_idx[n, j] = m
            vc_mask[n, j] = True
    vdeg = np.array([len(ns) for ns in g.var_neighbors])

    chk_deg = np.zeros(g.n_checks, dtype=np.int64)
    levels: list[list[int]] = []

    def add(vs):
        for v in vs:
            for m in g.var_neighbors[v]:
                chk_deg[m] += 1

    def remove(vs):
        for v in vs:
            for m in g.var_neighbors[v]:
                chk_deg[m] -= 1

    def level_ok(vs) -> bool:
        for v in vs:
            even = 0
            for m in g.var_neighbors[v]:
                if chk_deg[m] % 2 == 0:
                    even += 1
            if 2 * even <= len(g.var_neighbors[v]):
                return False
        return True

    def terminal_batch(pool: list[int], prev: list[int],
                       chunk: int = 32768) -> Iterator[tuple[int, ...]]:
        """Vectorized screening of all budget-exhausting subsets."""
        budget = nu - sum(len(lv) for lv in levels)
        pool_arr = np.array(pool, dtype=np.int64)
        combo_iter = itertools.combinations(range(len(pool)), budget)
        while True:
            block = list(itertools.islice(combo_iter, chunk))
            if not block:
                return
            combos = np.array(block, dtype=np.int64)
            deg = chk_deg[None, :] + h_cols[pool_arr][combos].sum(axis=1)
            ok = np.ones(len(combos), dtype=bool)
            for u in prev:
                du = deg[:, vc_idx[u][vc_mask[u]]]
                ok &= 2 * (du % 2 == 0).sum(axis=1) > vdeg[u]
            members = pool_arr[combos]                   # (C, budget)
            dm = deg[np.arange(len(combos))[:, None, None],
                     vc_idx[members]]                    # (C, budget, Dv)
            even = ((dm % 2 == 0) & vc_mask[members]).sum(axis=2)
            ok &= (2 * even > vdeg[members]).all(axis=1)
            for row in members[ok]:
                yield tuple(int(x) for x in row)

    def rec(depth: int) -> Iterator[AbsorbingSet]:
        # levels[depth - 1] became final when levels[depth] was chosen
        if depth >= 1 and not level_ok(levels[depth - 1]):
            return
        used = sum(len(lv) for lv in levels)
        if used == nu:
            if level_ok(levels[depth]):
                yield AbsorbingSet(tuple(itertools.chain(*levels)))
            return
        nxt = depth + 1
        if nxt >= n_layers or capacity[nxt] < nu - used:
            return
        budget = nu - used
        if candidates == "descendants":
            pool = sorted({v for u in levels[depth]
                           for m in g.var_neighbors[u]
                           for v in g.check_neighbors[m]
                           if v >= root and v in layer_sets[nxt]})
            allow_empty = False
        else:
            pool = layers[nxt]
            allow_empty = capacity[nxt + 1] >= budget
        if allow_empty:
            levels.append([])
            yield from rec(nxt)
            levels.pop()
        for size in range(1, min(budget, len(pool)) + 1):
            if size == budget:
                prev = levels[depth]
                for combo in terminal_batch(pool, prev):
                    add(combo)
                    levels.append(list(combo))
                    yield AbsorbingSet(tuple(itertools.chain(*levels)))
                    levels.pop()
                    remove(combo)
            else:
                for combo in itertools.combinations(pool, size):
                    add(combo)
                    levels.append(list(combo))
                    yield from rec(nxt)
                    levels.pop()
                    remove(combo)

    layer_sets = [set(l) for l in layers]
    levels.append([root])
    add([root])
    try:
        if nu == 1:
            if level_ok(levels[0]):
                yield AbsorbingSet((root,))
        else:
            yield from rec(0)
    finally:
        remove([root])
        levels.pop()


def as_dfs(g: TannerGraph, root: int, nu: int,
           candidates: str = "all") -> list[AbsorbingSet]:
    return list(iter_as_dfs(g, root, nu, candidates=candidates))


@dataclass
class ClassInfo:
    et: ExtendedType
    count: int = 0
    sets: list[AbsorbingSet] = field(default_factory=list)

    @property
    def is_codeword_support(self) -> bool:
        return self.et.is_codeword_support


@dataclass
class Classification:
    nu: int
    classes: dict[ExtendedType, ClassInfo]

    @property
    def total(self) -> int:
        return sum(c.count for c in self.classes.values())

    def trainable(self) -> list[ClassInfo]:
        """Classes usable as error classes: codeword supports excluded."""
        return [c for c in self.classes.values()
                if not c.is_codeword_support]

    def summary_csv(self) -> str:
        lines = ["nu,et,count,is_codeword_support"]
        for et in sorted(self.classes):
            c = self.classes[et]
            lines.append(f"{self.nu},{et},{c.count},"
                         f"{int(c.is_codeword_support)}")
        return "\n".join(lines) + "\n"


def enumerate_all(g: TannerGraph, nu: int, store: str = "all",
                  sample_size: int = 64,
                  rng: np.random.Generator | None = None,
                  candidates: str = "all",
                  visitor: Callable[[AbsorbingSet], None] | None = None
                  ) -> Classification:
    """Enumerate from every root and classify by extended type.

    store="all" keeps every set per class; store="sample" keeps a uniform
    reservoir of `sample_size` sets per class (counts stay exact).
    """
    if store not in ("all", "sample"):
        raise ValueError(f"unknown store mode {store!r}")
    if store == "sample" and rng is None:
        rng = np.random.default_rng(0)
    classes: dict[ExtendedType, ClassInfo] = {}
    for root in range(g.n_vars):
        for aset in iter_as_dfs(g, root, nu, candidates=candidates):
            if visitor is not None:
                visitor(aset)
            et = extended_type(g, aset)
            info = classes.setdefault(et, ClassInfo(et=et))
            info.count += 1
            if store == "all":
                info.sets.append(aset)
            elif len(info.sets) < sample_size:
                info.sets.append(aset)
            else:
                j = int(rng.integers(info.count))
                if j < sample_size:
                    info.sets[j] = aset
    return Classification(nu=nu, classes=classes)


def brute_force_enum(g: TannerGraph, nu: int,
                     chunk: int = 100_000) -> set[tuple[int, ...]]:
    """Oracle: test every size-nu subset directly (vectorized in chunks)."""
    h = g.matrix.astype(np.int64)                     # (M, N)
    max_vd = max(g.max_var_degree, 1)
    vc_idx = np.zeros((g.n_vars, max_vd), dtype=np.int64)
    vc_mask = np.zeros((g.n_vars, max_vd), dtype=bool)
    for n in range(g.n_vars):
        for j, m in enumerate(g.var_neighbors[n]):
            vc_idx[n, j] = m
            vc_mask[n, j] = True
    vdeg = np.array([len(ns) for ns in g.var_neighbors])

    found: set[tuple[int, ...]] = set()
    combo_iter = itertools.combinations(range(g.n_vars), nu)
    while True:
        block = list(itertools.islice(combo_iter, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.int64)         # (C, nu)
        deg = h.T[idx].sum(axis=1)                    # (C, M)
        dm = deg[np.arange(len(idx))[:, None, None], vc_idx[idx]]
        even = ((dm % 2 == 0) & vc_mask[idx]).sum(axis=2)
        ok = (2 * even > vdeg[idx]).all(axis=1)
        for row in idx[ok]:
            found.add(tuple(int(x) for x in row))
    return found
