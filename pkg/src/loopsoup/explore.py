"""Component exploration and its dominating branching walk.

The exploration keeps three vertex classes: explored, active, neutral.  Each
step removes the smallest active vertex, scans the loops through it that
avoid everything explored so far, and activates the newly discovered
vertices.  The walk stops when no active vertex remains; the explored set is
then exactly the component of the start vertex.

The dominating walk replaces each step's discovery count by the total loop
length seen at that step (which can only be larger) and tops it up with an
auxiliary draw standing in for loops that were censored because they touch
explored vertices.  Its increments are iid compound Poisson, so its
absorption time is the total progeny of a branching process that bounds the
component size from above.
"""
from __future__ import annotations

import csv
import heapq
import json
from dataclasses import dataclass
from pathlib import Path

from .measure import (
    LoopSoup,
    beta_vertex,
    mu_hit_set_and_vertex,
    sample_hit_lengths,
    sample_nu_jumps,
)
from .rng import stream


@dataclass(frozen=True)
class ExplorationTrace:
    """Record of one exploration run.

    ``order`` lists explored vertices x_1..x_T; ``xi`` the per-step counts of
    newly activated vertices; ``active_sizes`` the active-set size after each
    step.  ``component`` is the explored set, of size T.
    """

    order: tuple[int, ...]
    xi: tuple[int, ...]
    active_sizes: tuple[int, ...]
    T: int
    component: frozenset[int]


@dataclass(frozen=True)
class CoupledGWTrace:
    """The dominating walk run alongside one exploration.

    ``zeta1`` and ``zeta2`` are the real per-step totals of (loop length - 1)
    over loops through the current vertex that avoid, respectively hit, the
    explored set.  ``zeta2_bar`` are the auxiliary stand-ins for the hitting
    part; ``zeta_bar = zeta1 + zeta2_bar`` has iid compound-Poisson marginals.
    Entries past the real stopping step T are purely auxiliary.  ``T_bar`` is
    the walk's absorption step; if the step cap was reached, ``censored`` is
    set and T_bar is a lower bound.
    """

    zeta1: tuple[int, ...]
    zeta2: tuple[int, ...]
    zeta2_bar: tuple[int, ...]
    zeta_bar: tuple[int, ...]
    T_bar: int
    censored: bool
    exploration: ExplorationTrace


def _eligible_loops(soup: LoopSoup, t: float):
    """Vertex index and vertex tuples of the loops with time <= t."""
    verts: dict[int, tuple[int, ...]] = {}
    index: dict[int, list[int]] = {}
    for i, (time, loop) in enumerate(soup.loops):
        if time > t:
            continue
        verts[i] = loop.vertices
        for v in set(loop.vertices):
            index.setdefault(v, []).append(i)
    return index, verts


def neighbors(soup: LoopSoup, t: float, x: int, forbidden: frozenset[int] | set[int]) -> set[int]:
    """Vertices y != x joined to x by a loop (time <= t) avoiding ``forbidden``."""
    if x in forbidden:
        raise ValueError("x must not be forbidden")
    index, verts = _eligible_loops(soup, t)
    out: set[int] = set()
    for i in index.get(x, []):
        vs = verts[i]
        if any(v in forbidden for v in vs):
            continue
        out.update(vs)
    out.discard(x)
    return out


def _explore(soup: LoopSoup, t: float, x: int):
    n = soup.params.n
    if not 1 <= x <= n:
        raise ValueError(f"vertex {x} outside [1..{n}]")
    index, verts = _eligible_loops(soup, t)

    explored = [False] * (n + 1)
    active = [False] * (n + 1)
    heap = [x]
    active[x] = True
    active_count = 1

    order: list[int] = []
    xi: list[int] = []
    active_sizes: list[int] = []
    zeta1: list[int] = []
    zeta2: list[int] = []

    while active_count:
        while True:
            xk = heapq.heappop(heap)
            if active[xk]:
                break
        active[xk] = False
        active_count -= 1

        z1 = z2 = 0
        fresh: list[int] = []
        for i in index.get(xk, []):
            vs = verts[i]
            if any(explored[v] for v in vs):
                z2 += len(vs) - 1
                continue
            z1 += len(vs) - 1
            for v in vs:
                if v != xk and not active[v] and not explored[v]:
                    active[v] = True
                    heapq.heappush(heap, v)
                    fresh.append(v)
        explored[xk] = True
        active_count += len(fresh)

        order.append(xk)
        xi.append(len(fresh))
        active_sizes.append(active_count)
        zeta1.append(z1)
        zeta2.append(z2)

    trace = ExplorationTrace(
        order=tuple(order),
        xi=tuple(xi),
        active_sizes=tuple(active_sizes),
        T=len(order),
        component=frozenset(order),
    )
    return trace, zeta1, zeta2


def explore(soup: LoopSoup, t: float, x: int) -> ExplorationTrace:
    """Explore the component of x among loops with time <= t.

    The smallest active vertex is processed first, so the run is
    deterministic given the soup.
    """
    trace, _, _ = _explore(soup, t, x)
    return trace


def couple_gw(
    soup: LoopSoup,
    t: float,
    x: int,
    aux_seed: int,
    step_cap: int | None = None,
) -> CoupledGWTrace:
    """Run the dominating walk for the component of x.

    Steps up to the exploration's stopping time T combine the real avoiding
    part zeta1 with an auxiliary draw whose law matches the hitting part
    given the number of explored vertices.  Later steps are entirely
    auxiliary with the full compound-Poisson marginal, so the whole increment
    sequence is iid and T_bar >= |component| by construction.
    """
    params = soup.params
    if step_cap is None:
        step_cap = 10 * params.n
    trace, zeta1, _zeta2 = _explore(soup, t, x)
    rng = stream(aux_seed)
    beta = beta_vertex(params)

    zeta1_out: list[int] = []
    zeta2_bar: list[int] = []
    zeta_bar: list[int] = []
    cum = 0
    T_bar = None
    k = 0
    while k < step_cap:
        k += 1
        if k <= trace.T:
            z1 = zeta1[k - 1]
            v = k - 1
            zb2 = 0
            if v >= 1:
                count = rng.poisson(t * mu_hit_set_and_vertex(params, v))
                if count:
                    zb2 = int(sample_hit_lengths(params, v, count, rng).sum()) - count
        else:
            z1 = 0
            count = rng.poisson(t * beta)
            zb2 = int(sample_nu_jumps(params, count, rng).sum()) if count else 0
        zeta1_out.append(z1)
        zeta2_bar.append(zb2)
        zeta_bar.append(z1 + zb2)
        cum += z1 + zb2
        if cum == k - 1:
            T_bar = k
            break

    censored = T_bar is None
    if censored:
        T_bar = step_cap
    return CoupledGWTrace(
        zeta1=tuple(zeta1_out),
        zeta2=tuple(_zeta2),
        zeta2_bar=tuple(zeta2_bar),
        zeta_bar=tuple(zeta_bar),
        T_bar=T_bar,
        censored=censored,
        exploration=trace,
    )


def write_trace(
    trace: ExplorationTrace,
    csv_path: str | Path,
    json_path: str | Path | None = None,
    censored: bool = False,
) -> None:
    """Export a trace as CSV rows step,x_k,xi_k,active_size plus a JSON summary."""
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "x_k", "xi_k", "active_size"])
        for k, (xk, xik, a) in enumerate(zip(trace.order, trace.xi, trace.active_sizes), start=1):
            w.writerow([k, xk, xik, a])
    if json_path is not None:
        summary = {"T": trace.T, "component_size": len(trace.component), "censored": censored}
        Path(json_path).write_text(json.dumps(summary, indent=2) + "\n")
