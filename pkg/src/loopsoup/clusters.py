"""Coalescent cluster process driven by loop arrivals.

Each arriving loop merges every component it touches into one.  The state
keeps a union-find forest (union by size, path compression), an incremental
size histogram, the two largest component sizes, and the component count.
Analytic companions: the probability that the partition at time t refines a
given partition, and the rate at which a given set of blocks merges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .measure import Loop, LoopSoup, ModelParams

MERGE_RATE_RTOL = 1e-12


@dataclass(frozen=True)
class MergeEvent:
    time: float
    loop_length: int
    roots_merged: int


class ClusterState:
    """Union-find over vertices 1..n with size bookkeeping.

    ``hist`` maps component size to the number of components of that size.
    The largest size is tracked incrementally; the second largest is
    recomputed from the histogram only when its bucket empties.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.parent = np.arange(n + 1, dtype=np.int64)  # slot 0 unused
        self.size = np.ones(n + 1, dtype=np.int64)
        self.hist: dict[int, int] = {1: n}
        self.n_components = n
        self._c1 = 1

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return int(root)

    def component_size(self, x: int) -> int:
        return int(self.size[self.find(x)])

    def _hist_remove(self, s: int) -> None:
        c = self.hist[s] - 1
        if c:
            self.hist[s] = c
        else:
            del self.hist[s]

    def apply_loop(self, loop: Loop, time: float = 0.0) -> MergeEvent:
        """Merge all components touched by the loop; returns the merge record."""
        roots = set()
        for v in loop.vertices:
            if not 1 <= v <= self.n:
                raise ValueError(f"vertex {v} outside [1..{self.n}]")
            roots.add(self.find(v))
        k = len(roots)
        if k > 1:
            it = iter(roots)
            base = next(it)
            for r in it:
                if self.size[r] > self.size[base]:
                    base, r = r, base
                self._hist_remove(int(self.size[base]))
                self._hist_remove(int(self.size[r]))
                self.parent[r] = base
                self.size[base] += self.size[r]
                self.hist[int(self.size[base])] = self.hist.get(int(self.size[base]), 0) + 1
            self.n_components -= k - 1
            if self.size[base] > self._c1:
                self._c1 = int(self.size[base])
        return MergeEvent(time=time, loop_length=len(loop), roots_merged=k)

    @property
    def top2(self) -> tuple[int, int]:
        c1 = self._c1
        if self.n_components < 2:
            return c1, 0
        if self.hist.get(c1, 0) >= 2:
            return c1, c1
        c2 = max(s for s in self.hist if s < c1)
        return c1, c2

    def mass_check(self) -> int:
        return sum(s * c for s, c in self.hist.items())


def new_state(n: int) -> ClusterState:
    """Fresh all-singleton state on n vertices."""
    return ClusterState(n)


def rho_hat(state: ClusterState, k: int) -> float:
    """Fraction of vertices in size-k components, divided by k:
    (count of size-k components) / n."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return state.hist.get(k, 0) / state.n


def z_count(state: ClusterState, k: int) -> int:
    """Number of vertices in components of size >= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(s * c for s, c in state.hist.items() if s >= k)


def evolve(
    soup: LoopSoup, checkpoints: list[float]
) -> list[tuple[float, dict[int, int], tuple[int, int], int]]:
    """Replay the soup and snapshot (time, hist, top2, n_components) at each
    checkpoint.  Snapshot at c covers exactly the loops with time <= c."""
    for c in checkpoints:
        if not 0.0 <= c <= soup.horizon:
            raise ValueError(f"checkpoint {c} outside [0, horizon]")
    if any(b < a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be sorted")
    state = new_state(soup.params.n)
    out = []
    i = 0
    loops = soup.loops
    for c in checkpoints:
        while i < len(loops) and loops[i][0] <= c:
            state.apply_loop(loops[i][1], loops[i][0])
            i += 1
        out.append((c, dict(state.hist), state.top2, state.n_components))
    return out


def state_from_soup(soup: LoopSoup, t: float | None = None) -> ClusterState:
    """Cluster state after applying every loop with time <= t (default: all)."""
    cutoff = soup.horizon if t is None else t
    state = new_state(soup.params.n)
    for time, loop in soup.loops:
        if time > cutoff:
            break
        state.apply_loop(loop, time)
    return state


# ============================================================
# Analytic companions
# ============================================================

def semigroup_prob(params: ModelParams, t: float, blocks: list[int]) -> float:
    """Probability that the partition at soup time t refines the partition
    with the given block sizes: (eps/(eps+1))^t prod_i (1 - b_i/(n(eps+1)))^-t.
    """
    if any(b < 1 for b in blocks):
        raise ValueError("block sizes must be positive")
    if sum(blocks) != params.n:
        raise ValueError("block sizes must sum to n")
    if t < 0:
        raise ValueError("t must be nonnegative")
    eps = params.epsilon
    log_p = t * math.log(eps / (eps + 1.0))
    for b in blocks:
        log_p -= t * math.log1p(-b / params.step_denom)
    return math.exp(log_p)


def merge_rate(params: ModelParams, block_sizes: list[int], J: list[int]) -> float:
    """Rate at which one loop arrives that touches every block indexed by J.

    Series over loop length k of the weighted count of vertex tuples hitting
    all |J| blocks, truncated at relative tail 1e-12 (the terms decay
    geometrically with ratio at most sum(B_J)/(n(eps+1)) < 1).
    """
    L = len(J)
    if L < 2:
        raise ValueError("need at least two blocks to merge")
    if len(set(J)) != L:
        raise ValueError("block indices must be distinct")
    sizes = [block_sizes[i] for i in J]
    d = params.step_denom
    # Inclusion-exclusion over sub-collections: the surjective tuple count for
    # length k is sum_S (-1)^(L-|S|) (sum of sizes in S)^k.
    signed = [
        ((-1.0) ** (L - m), sum(c))
        for m in range(L + 1)
        for c in combinations(sizes, m)
    ]
    total = 0.0
    k = L
    while True:
        inner = sum(sign * (s / d) ** k for sign, s in signed)
        total += inner / k
        r = sum(sizes) / d
        # Rigorous geometric tail bound: surjective count <= (sum sizes)^k.
        tail = (sum(sizes) / d) ** (k + 1) / ((k + 1) * (1.0 - r))
        if tail < MERGE_RATE_RTOL * total:
            break
        k += 1
    return total
