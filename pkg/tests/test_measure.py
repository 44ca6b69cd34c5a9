"""Loop measure: closed forms against series oracles, samplers, serialization."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from loopsoup import measure
from loopsoup.rng import stream

PARAMS_GRID = [(10, 1.0), (7, 0.5), (40, 2.0), (100, 0.25)]


# ============================================================
# Closed-form masses vs term-by-term series
# ============================================================

@pytest.mark.parametrize("n,eps", PARAMS_GRID)
def test_total_mass_matches_series(n, eps):
    p = measure.ModelParams(n, eps)
    assert measure.mu_restricted_total(p, 0) == pytest.approx(
        oracles.restricted_mass_series(n, eps, 0), rel=1e-12
    )
    # The total mass does not depend on n.
    expected = math.log1p(1.0 / eps) - 1.0 / (eps + 1.0)
    assert measure.mu_restricted_total(p, 0) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n,eps", PARAMS_GRID)
@pytest.mark.parametrize("v", [1, 3])
def test_restricted_mass_matches_series(n, eps, v):
    p = measure.ModelParams(n, eps)
    assert measure.mu_restricted_total(p, v) == pytest.approx(
        oracles.restricted_mass_series(n, eps, v), rel=1e-12
    )


@pytest.mark.parametrize("n,eps", PARAMS_GRID)
def test_vertex_mass_matches_series(n, eps):
    p = measure.ModelParams(n, eps)
    assert measure.beta_vertex(p) == pytest.approx(
        oracles.vertex_mass_series(n, eps), rel=1e-12
    )


@pytest.mark.parametrize("n,eps", PARAMS_GRID)
@pytest.mark.parametrize("v", [0, 1, 4])
def test_vertex_avoiding_mass_matches_series(n, eps, v):
    p = measure.ModelParams(n, eps)
    assert measure.beta_vertex_avoiding(p, v) == pytest.approx(
        oracles.vertex_avoiding_mass_series(n, eps, v), rel=1e-12
    )


@pytest.mark.parametrize("n,eps", PARAMS_GRID)
@pytest.mark.parametrize("a", [1, 5])
def test_hit_set_mass_matches_series(n, eps, a):
    p = measure.ModelParams(n, eps)
    assert measure.mu_hit_set_and_vertex(p, a) == pytest.approx(
        oracles.hit_set_and_vertex_series(n, eps, a), rel=1e-12
    )


def test_frozen_mass_values():
    p = measure.ModelParams(10, 1.0)
    assert measure.mu_restricted_total(p, 0) == pytest.approx(
        0.19314718055994531, rel=1e-14
    )
    assert measure.beta_vertex(p) == pytest.approx(0.04531017980432486, rel=1e-14)
    assert measure.beta_vertex_avoiding(p, 3) == pytest.approx(
        0.024107972153721888, rel=1e-14
    )
    big = measure.ModelParams(100, 1.0)
    assert measure.mu_hit_set_and_vertex(big, 1) == pytest.approx(
        9.803441015645267e-05, rel=1e-14
    )


@given(
    n=st.integers(3, 300),
    eps=st.floats(0.05, 8.0),
    v=st.integers(0, 40),
)
def test_vertex_mass_decomposition(n, eps, v):
    # Mass through a vertex splits into the part avoiding a disjoint v-set
    # plus the part hitting it.
    v = min(v, n - 2)
    p = measure.ModelParams(n, eps)
    total = measure.beta_vertex(p)
    split = measure.beta_vertex_avoiding(p, v) + measure.mu_hit_set_and_vertex(p, v)
    assert split == pytest.approx(total, rel=1e-10)


@given(n=st.integers(3, 200), eps=st.floats(0.05, 8.0), v=st.integers(0, 30))
def test_avoiding_mass_is_successive_difference(n, eps, v):
    # Loops through vertex v+1 avoiding {1..v} are exactly the loops avoiding
    # {1..v} minus those avoiding {1..v+1}.
    v = min(v, n - 2)
    p = measure.ModelParams(n, eps)
    diff = measure.mu_restricted_total(p, v) - measure.mu_restricted_total(p, v + 1)
    assert measure.beta_vertex_avoiding(p, v) == pytest.approx(diff, rel=1e-9)


def test_mass_monotone_in_avoided_set():
    p = measure.ModelParams(30, 0.7)
    vals = [measure.mu_restricted_total(p, v) for v in range(0, 29)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_param_validation():
    with pytest.raises(ValueError):
        measure.ModelParams(1, 1.0)
    with pytest.raises(ValueError):
        measure.ModelParams(10, 0.0)
    p = measure.ModelParams(10, 1.0)
    with pytest.raises(ValueError):
        measure.mu_restricted_total(p, 10)
    with pytest.raises(ValueError):
        measure.beta_vertex_avoiding(p, 9)
    with pytest.raises(ValueError):
        measure.mu_hit_set_and_vertex(p, 10)


def test_hit_set_empty_is_zero():
    p = measure.ModelParams(10, 1.0)
    assert measure.mu_hit_set_and_vertex(p, 0) == 0.0


# ============================================================
# Linking probability and moment formulas
# ============================================================

def test_no_linking_probability_frozen_and_bounded():
    p = measure.ModelParams(100, 1.0)
    val = measure.prob_no_loop_linking(p, 10, 10, 1.0)
    assert val == pytest.approx(0.4361014926262842, rel=1e-13)
    # Dominated by the displayed exponential bound.
    bound = math.exp(-1.0 * 10 * 10 / (100 * (1.0 + 1.0) ** 2))
    assert val <= bound
    assert measure.prob_no_loop_linking(p, 10, 10, 0.0) == 1.0


def test_no_linking_matches_crossing_mass():
    # No linking loop between the two sets by soup time n*t is the Poisson
    # void probability of the mass of loops hitting both sets.
    n, eps, f1, f2, t = 12, 0.8, 3, 4, 0.6
    p = measure.ModelParams(n, eps)
    both = oracles.linking_mass_series(n, eps, f1, f2)
    assert measure.prob_no_loop_linking(p, f1, f2, t) == pytest.approx(
        math.exp(-n * t * both), rel=1e-11
    )


def test_anomaly_bound_frozen():
    p = measure.ModelParams(100, 1.0)
    assert measure.anomaly_bound(p, 5.0) == pytest.approx(0.001025, rel=1e-12)


def test_excess_length_pgf_moments():
    p = measure.ModelParams(10, 1.0)
    t = 2.3
    f = lambda u: measure.excess_length_pgf(p, t, u)
    assert f(1.0) == pytest.approx(1.0, rel=1e-13)
    # E S(S-1) is the second derivative of the pgf at 1.
    d2 = oracles.second_central_diff(f, 1.0, 1e-4)
    assert measure.excess_length_second_factorial_moment(p, t) == pytest.approx(
        d2, rel=1e-6
    )
    assert measure.excess_length_second_factorial_moment(p, t) == pytest.approx(
        0.3587429752066116, rel=1e-13
    )


def test_excess_length_pgf_divergence_guard():
    p = measure.ModelParams(10, 1.0)
    with pytest.raises(ValueError):
        measure.excess_length_pgf(p, 1.0, 3.0)


# ============================================================
# Length laws
# ============================================================

@pytest.mark.parametrize("n,eps", [(10, 1.0), (50, 0.5)])
def test_length_pmf_normalized_and_proportional(n, eps):
    p = measure.ModelParams(n, eps)
    total = sum(measure.loop_length_pmf(p, k) for k in range(2, 400))
    assert total == pytest.approx(1.0, abs=1e-12)
    # Successive ratio (1/k) x^k structure.
    r = measure.loop_length_pmf(p, 3) / measure.loop_length_pmf(p, 2)
    assert r == pytest.approx((2.0 / 3.0) / (eps + 1.0), rel=1e-12)
    assert measure.loop_length_pmf(p, 1) == 0.0
    assert measure.loop_length_pmf(p, 0) == 0.0


def test_offspring_law_exact_normalized():
    p = measure.ModelParams(12, 0.9)
    for v in [0, 3]:
        rate, pmf = measure.offspring_law_exact(p, v)
        assert rate == pytest.approx(measure.beta_vertex_avoiding(p, v), rel=1e-14)
        # rate * pmf sums back to the rate.
        assert sum(pmf(j) for j in range(1, 500)) == pytest.approx(1.0, abs=1e-12)
        assert pmf(0) == 0.0


# ============================================================
# Loop and soup containers
# ============================================================

def test_loop_canonical_rotation():
    a = measure.Loop((3, 1, 2))
    b = measure.Loop((1, 2, 3))
    c = measure.Loop((2, 3, 1))
    assert a == b == c
    assert a.vertices == (1, 2, 3)
    assert len({a, b, c}) == 1
    assert measure.Loop((5, 5)).vertices == (5, 5)
    with pytest.raises(ValueError):
        measure.Loop((1,))


def test_loop_weight():
    p = measure.ModelParams(10, 1.0)
    loop = measure.Loop((1, 2, 3))
    assert loop.weight(p) == pytest.approx(1.0 / (3 * 20.0**3), rel=1e-15)


def test_soup_validation():
    p = measure.ModelParams(5, 1.0)
    ok = measure.LoopSoup(
        params=p,
        horizon=2.0,
        loops=((0.5, measure.Loop((1, 2))), (1.0, measure.Loop((3, 4)))),
        seed=0,
    )
    assert len(ok) == 2
    with pytest.raises(ValueError):
        measure.LoopSoup(
            params=p,
            horizon=2.0,
            loops=((1.0, measure.Loop((1, 2))), (0.5, measure.Loop((3, 4)))),
            seed=0,
        )
    with pytest.raises(ValueError):
        measure.LoopSoup(
            params=p, horizon=2.0, loops=((3.0, measure.Loop((1, 2))),), seed=0
        )
    with pytest.raises(ValueError):
        measure.LoopSoup(
            params=p, horizon=2.0, loops=((0.5, measure.Loop((1, 6))),), seed=0
        )


def test_vertex_index_lists_each_loop_once():
    p = measure.ModelParams(5, 1.0)
    soup = measure.LoopSoup(
        params=p,
        horizon=1.0,
        loops=((0.1, measure.Loop((2, 2, 3))),),
        seed=0,
    )
    idx = soup.vertex_index()
    assert idx == {2: [0], 3: [0]}


# ============================================================
# Samplers
# ============================================================

def test_sample_soup_deterministic_and_sorted():
    p = measure.ModelParams(20, 1.0)
    s1 = measure.sample_soup(p, 5.0, seed=42)
    s2 = measure.sample_soup(p, 5.0, seed=42)
    assert s1 == s2
    times = [t for t, _ in s1.loops]
    assert times == sorted(times)
    assert measure.sample_soup(p, 5.0, seed=43) != s1


def test_sample_soup_zero_horizon_empty():
    p = measure.ModelParams(20, 1.0)
    assert len(measure.sample_soup(p, 0.0, seed=1)) == 0


def test_sample_arrays_replay_matches_soup():
    # The documented draw order (count, times, lengths, vertices) replays.
    p = measure.ModelParams(15, 0.8)
    soup = measure.sample_soup(p, 4.0, seed=7)
    rng = stream(7)
    times, lengths, verts = measure.sample_arrays(p, 4.0, rng)
    rebuilt = measure.soup_from_arrays(p, 4.0, times, lengths, verts, seed=7)
    assert rebuilt == soup


def test_fixed_length_sampler_lengths():
    p = measure.ModelParams(15, 1.0)
    soup = measure.sample_fixed_length_soup(p, 3, 40.0, seed=3)
    assert len(soup) > 0
    assert all(len(loop) == 3 for _, loop in soup.loops)
    with pytest.raises(ValueError):
        measure.sample_fixed_length_soup(p, 1, 1.0, seed=0)


def test_sampler_mean_counts():
    # Loop count is Poisson(horizon * total mass); check the mean at 3 sigma.
    p = measure.ModelParams(10, 1.0)
    lam = 30.0 * measure.mu_restricted_total(p, 0)
    counts = [len(measure.sample_soup(p, 30.0, seed=s)) for s in range(400)]
    sd = math.sqrt(lam / len(counts))
    assert np.mean(counts) == pytest.approx(lam, abs=3 * sd)


# ============================================================
# Serialization
# ============================================================

def test_soup_round_trip_bit_exact(tmp_path):
    p = measure.ModelParams(25, 0.6)
    soup = measure.sample_soup(p, 6.0, seed=11)
    path = tmp_path / "soup.txt"
    measure.write_soup(soup, path)
    back = measure.read_soup(path)
    assert back == soup
    assert [t for t, _ in back.loops] == [t for t, _ in soup.loops]
    assert back.generator_id == soup.generator_id


def test_empty_soup_round_trip(tmp_path):
    p = measure.ModelParams(5, 2.0)
    soup = measure.sample_soup(p, 0.0, seed=1)
    path = tmp_path / "empty.txt"
    measure.write_soup(soup, path)
    assert measure.read_soup(path) == soup
