"""Replica-batched component kernels over flattened loop buffers.

A batch of independent replicas is packed as one vertex array plus two
index arrays: ``loop_start`` delimits loops inside ``verts`` and
``rep_start`` delimits replicas inside the loop list.  Vertices are
1-based; scratch arrays are sized n+1 and reused across replicas through
a stamping scheme, so per-replica cost is proportional to data touched,
not to n.

Kernels are numba-compiled when numba is importable and fall back to the
same code as pure Python otherwise; results are identical either way.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def pack_replicas(lengths_list, verts_list):
    """Flatten per-replica (loop-length array, vertex array) pairs into
    (verts, loop_start, rep_start) kernel buffers."""
    if len(lengths_list) != len(verts_list):
        raise ValueError("one lengths array per vertex array required")
    loop_counts = np.array([len(ls) for ls in lengths_list], dtype=np.int64)
    rep_start = np.zeros(len(loop_counts) + 1, dtype=np.int64)
    np.cumsum(loop_counts, out=rep_start[1:])
    all_lengths = (
        np.concatenate(lengths_list).astype(np.int64)
        if lengths_list
        else np.zeros(0, np.int64)
    )
    loop_start = np.zeros(len(all_lengths) + 1, dtype=np.int64)
    np.cumsum(all_lengths, out=loop_start[1:])
    verts = (
        np.concatenate(verts_list).astype(np.int64)
        if verts_list
        else np.zeros(0, np.int64)
    )
    if len(verts) != loop_start[-1]:
        raise ValueError("vertex buffer length does not match loop lengths")
    return verts, loop_start, rep_start


@njit(cache=True)
def _find(parent, stamp, size, cur, v):
    if stamp[v] != cur:
        stamp[v] = cur
        parent[v] = v
        size[v] = 1
        return v
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        nxt = parent[v]
        parent[v] = root
        v = nxt
    return root


@njit(cache=True)
def component_stats(n, verts, loop_start, rep_start, targets):
    """Component size and root id of each target vertex, per replica.

    Returns (sizes, roots), each shaped (replicas, len(targets)); root ids
    are comparable within a replica only.
    """
    R = len(rep_start) - 1
    T = len(targets)
    parent = np.zeros(n + 1, np.int64)
    stamp = np.zeros(n + 1, np.int64)
    size = np.zeros(n + 1, np.int64)
    sizes = np.zeros((R, T), np.int64)
    roots = np.zeros((R, T), np.int64)
    for r in range(R):
        cur = r + 1
        for li in range(rep_start[r], rep_start[r + 1]):
            s = loop_start[li]
            e = loop_start[li + 1]
            r0 = _find(parent, stamp, size, cur, verts[s])
            for i in range(s + 1, e):
                r1 = _find(parent, stamp, size, cur, verts[i])
                if r1 != r0:
                    if size[r0] < size[r1]:
                        r0, r1 = r1, r0
                    parent[r1] = r0
                    size[r0] += size[r1]
        for ti in range(T):
            rt = _find(parent, stamp, size, cur, targets[ti])
            sizes[r, ti] = size[rt]
            roots[r, ti] = rt
    return sizes, roots


@njit(cache=True)
def partition_stats(n, verts, loop_start, rep_start, kmax, lattice_j):
    """Whole-partition summaries per replica.

    Returns (c1, c2, ncomp, hist, lat, mass): the two largest component
    sizes, component count, counts of components of size s for s <= kmax
    (column s of hist), the number of components whose size is off the
    lattice 1 + (lattice_j - 1) N (0 when lattice_j < 2), and the total
    size mass (always n; emitted so callers can assert the identity).
    """
    R = len(rep_start) - 1
    parent = np.zeros(n + 1, np.int64)
    stamp = np.zeros(n + 1, np.int64)
    size = np.zeros(n + 1, np.int64)
    c1 = np.zeros(R, np.int64)
    c2 = np.zeros(R, np.int64)
    ncomp = np.zeros(R, np.int64)
    hist = np.zeros((R, kmax + 1), np.int64)
    lat = np.zeros(R, np.int64)
    mass = np.zeros(R, np.int64)
    for r in range(R):
        cur = r + 1
        unions = 0
        for li in range(rep_start[r], rep_start[r + 1]):
            s = loop_start[li]
            e = loop_start[li + 1]
            r0 = _find(parent, stamp, size, cur, verts[s])
            for i in range(s + 1, e):
                r1 = _find(parent, stamp, size, cur, verts[i])
                if r1 != r0:
                    if size[r0] < size[r1]:
                        r0, r1 = r1, r0
                    parent[r1] = r0
                    size[r0] += size[r1]
                    unions += 1
        ncomp[r] = n - unions
        best1 = 0
        best2 = 0
        for v in range(1, n + 1):
            if stamp[v] != cur:
                sz = 1
            elif parent[v] == v:
                sz = size[v]
            else:
                continue
            mass[r] += sz
            if sz <= kmax:
                hist[r, sz] += 1
            if lattice_j >= 2 and (sz - 1) % (lattice_j - 1) != 0:
                lat[r] += 1
            if sz > best1:
                best2 = best1
                best1 = sz
            elif sz > best2:
                best2 = sz
        c1[r] = best1
        c2[r] = best2
    return c1, c2, ncomp, hist, lat, mass


@njit(cache=True)
def vertex_loop_stats(verts, loop_start, rep_start, x):
    """Per replica, over loops visiting vertex x: loop count, total length,
    and total length minus visits to x (the excess-length statistic)."""
    R = len(rep_start) - 1
    count = np.zeros(R, np.int64)
    sum_len = np.zeros(R, np.int64)
    excess = np.zeros(R, np.int64)
    for r in range(R):
        for li in range(rep_start[r], rep_start[r + 1]):
            s = loop_start[li]
            e = loop_start[li + 1]
            mult = 0
            for i in range(s, e):
                if verts[i] == x:
                    mult += 1
            if mult > 0:
                count[r] += 1
                sum_len[r] += e - s
                excess[r] += (e - s) - mult
    return count, sum_len, excess
