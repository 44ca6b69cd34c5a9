"""Flat-buffer union-find kernels against the reference cluster state."""
import numpy as np
import pytest

from loopsoup import _kernels, clusters, measure
from loopsoup.rng import stream


def make_replicas(n, eps, horizon, replicas, seed):
    params = measure.ModelParams(n, eps)
    lengths_list, verts_list, soups = [], [], []
    for r in range(replicas):
        g = stream(seed, r)
        times, lens, vs = measure.sample_arrays(params, horizon, g)
        lengths_list.append(lens)
        verts_list.append(vs)
        soups.append(measure.soup_from_arrays(params, horizon, times, lens, vs))
    packed = _kernels.pack_replicas(lengths_list, verts_list)
    return params, packed, soups


def test_pack_replicas_layout():
    lengths = [np.array([2, 3]), np.array([], dtype=np.int64), np.array([2])]
    verts = [np.array([1, 2, 3, 4, 5]), np.array([], dtype=np.int64), np.array([6, 7])]
    flat, loop_start, rep_start = _kernels.pack_replicas(lengths, verts)
    np.testing.assert_array_equal(flat, [1, 2, 3, 4, 5, 6, 7])
    np.testing.assert_array_equal(loop_start, [0, 2, 5, 7])
    np.testing.assert_array_equal(rep_start, [0, 2, 2, 3])
    # rep_start indexes into loop_start: replica r owns loops
    # rep_start[r]..rep_start[r+1].
    assert len(rep_start) == 4


def test_partition_stats_matches_reference():
    n = 60
    params, (flat, loop_start, rep_start), soups = make_replicas(
        n, 0.8, 40.0, 25, seed=21
    )
    kmax = 8
    c1, c2, ncomp, hist, lat, mass = _kernels.partition_stats(
        n, flat, loop_start, rep_start, kmax, 0
    )
    assert (mass == n).all()
    assert (lat == 0).all()
    for r, soup in enumerate(soups):
        state = clusters.state_from_soup(soup)
        assert (c1[r], c2[r]) == state.top2
        assert ncomp[r] == state.n_components
        for s in range(1, kmax + 1):
            assert hist[r, s] == state.hist.get(s, 0)
        assert hist[r, 0] == 0


def test_component_stats_matches_reference():
    n = 60
    params, (flat, loop_start, rep_start), soups = make_replicas(
        n, 0.8, 40.0, 25, seed=22
    )
    targets = np.array([1, 2, 7], dtype=np.int64)
    sizes, roots = _kernels.component_stats(n, flat, loop_start, rep_start, targets)
    for r, soup in enumerate(soups):
        state = clusters.state_from_soup(soup)
        for c, v in enumerate(targets):
            assert sizes[r, c] == state.component_size(int(v))
        # Equal roots exactly when the two vertices share a component.
        for a in range(len(targets)):
            for b in range(a + 1, len(targets)):
                same = state.find(int(targets[a])) == state.find(int(targets[b]))
                assert (roots[r, a] == roots[r, b]) == same


def test_vertex_loop_stats_counts_multiplicity():
    lengths = [np.array([3, 2, 4])]
    verts = [np.array([1, 2, 1, 2, 3, 4, 1, 1, 5])]
    flat, loop_start, rep_start = _kernels.pack_replicas(lengths, verts)
    count, total_len, excess = _kernels.vertex_loop_stats(
        flat, loop_start, rep_start, 1
    )
    # Loops through vertex 1: (1,2,1) and (4,1,1,5); the second loop holds
    # two visits.
    assert count[0] == 2
    assert total_len[0] == 3 + 4
    assert excess[0] == (3 - 2) + (4 - 2)


def test_vertex_loop_stats_matches_soup_scan():
    n = 40
    params, (flat, loop_start, rep_start), soups = make_replicas(
        n, 0.6, 30.0, 15, seed=23
    )
    count, total_len, excess = _kernels.vertex_loop_stats(
        flat, loop_start, rep_start, 5
    )
    for r, soup in enumerate(soups):
        c = s = e = 0
        for _, loop in soup.loops:
            visits = sum(1 for v in loop.vertices if v == 5)
            if visits:
                c += 1
                s += len(loop)
                e += len(loop) - visits
        assert (count[r], total_len[r], excess[r]) == (c, s, e)


def test_lattice_anomaly_counter():
    # Fixed-length soups put every component size on 1 mod (j-1) unless
    # loops share vertices; the kernel counts the off-lattice components.
    n, j = 30, 3
    params = measure.ModelParams(n, 1.0)
    lengths_list, verts_list, soups = [], [], []
    for r in range(40):
        g = stream(31, r)
        times, vs = measure.sample_fixed_length_arrays(params, j, 200.0, g)
        lens = np.full(len(times), j, dtype=np.int64)
        lengths_list.append(lens)
        verts_list.append(vs)
        soups.append(measure.soup_from_arrays(params, 200.0, times, lens, vs))
    flat, loop_start, rep_start = _kernels.pack_replicas(lengths_list, verts_list)
    _, _, _, _, lat, _ = _kernels.partition_stats(
        n, flat, loop_start, rep_start, 1, j
    )
    for r, soup in enumerate(soups):
        state = clusters.state_from_soup(soup)
        off = sum(
            c for s, c in state.hist.items() if (s - 1) % (j - 1) != 0
        )
        assert lat[r] == off
    assert lat.sum() > 0  # the ensemble is dense enough to collide


def test_empty_inputs():
    flat, loop_start, rep_start = _kernels.pack_replicas([], [])
    assert len(loop_start) == 1 and len(rep_start) == 1
    lengths = [np.array([], dtype=np.int64)]
    verts = [np.array([], dtype=np.int64)]
    flat, loop_start, rep_start = _kernels.pack_replicas(lengths, verts)
    c1, c2, ncomp, hist, lat, mass = _kernels.partition_stats(
        7, flat, loop_start, rep_start, 3, 0
    )
    assert c1[0] == 1 and c2[0] == 1
    assert ncomp[0] == 7
    assert hist[0, 1] == 7
    assert mass[0] == 7


def test_numba_flag_exposed():
    assert isinstance(_kernels.HAVE_NUMBA, bool)
