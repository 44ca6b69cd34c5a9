"""Loop measure on the complete graph with self-loops.

The model lives on the vertex set {1, ..., n}.  A discrete loop is an
equivalence class, under rotation, of vertex sequences of length >= 2;
repeated vertices are allowed, including immediate self-loop steps.  A loop
of length k carries weight 1 / (k (n(eps+1))^k), and the soup is a Poisson
point process on [0, horizon] x loops with intensity Lebesgue x that weight.

This module holds the closed-form masses of the measure, exact samplers for
the full soup and the fixed-length-j soup, and a newline-delimited
serialization with bit-exact round-trip.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .rng import GENERATOR_ID, stream

# Truncation rule for every infinite series in this module: stop once the
# current term drops below SERIES_RTOL times the accumulated sum.  All the
# series here have geometric tails, so this is rigorous.
SERIES_RTOL = 1e-15

# Cached sampling tables keep enough support that the neglected tail mass is
# below this fraction of the total.
TABLE_TAIL = 1e-15


# ============================================================
# Domain types
# ============================================================

@dataclass(frozen=True)
class ModelParams:
    """Vertex count n and killing parameter epsilon.

    The per-step transition weight is 1/(n(eps+1)) toward each of the n
    vertices (self-steps included), with killing mass n*eps.
    """

    n: int
    epsilon: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def step_denom(self) -> float:
        """n(eps+1), the common denominator of all transition weights."""
        return self.n * (self.epsilon + 1.0)


def _min_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    k = len(seq)
    return min(seq[i:] + seq[:i] for i in range(k))


class Loop:
    """A rotation-invariant loop, stored as its lexicographically minimal rotation."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Sequence[int]):
        verts = tuple(int(v) for v in vertices)
        if len(verts) < 2:
            raise ValueError("a loop has length >= 2")
        object.__setattr__(self, "vertices", _min_rotation(verts))

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Loop) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"Loop{self.vertices}"

    def weight(self, params: ModelParams) -> float:
        """Measure of this single loop: 1/(k (n(eps+1))^k)."""
        k = len(self.vertices)
        return 1.0 / (k * params.step_denom**k)


@dataclass(frozen=True)
class LoopSoup:
    """A realized Poisson soup: timestamped loops on [0, horizon].

    ``loops`` is sorted by time (ties, a probability-zero event, keep
    insertion order).  The (seed, generator_id) pair fully determines the
    realization.
    """

    params: ModelParams
    horizon: float
    loops: tuple[tuple[float, Loop], ...]
    seed: int
    generator_id: str = GENERATOR_ID

    def __post_init__(self) -> None:
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        last = -math.inf
        for t, loop in self.loops:
            if not 0.0 <= t <= self.horizon:
                raise ValueError(f"loop time {t} outside [0, {self.horizon}]")
            if t < last:
                raise ValueError("loop times must be nondecreasing")
            last = t
            for v in loop.vertices:
                if not 1 <= v <= self.params.n:
                    raise ValueError(f"vertex {v} outside [1..{self.params.n}]")

    def __len__(self) -> int:
        return len(self.loops)

    def vertex_index(self) -> dict[int, list[int]]:
        """Map vertex -> indices of loops through it (each loop listed once)."""
        index: dict[int, list[int]] = {}
        for i, (_, loop) in enumerate(self.loops):
            for v in set(loop.vertices):
                index.setdefault(v, []).append(i)
        return index


# ============================================================
# Closed-form masses
# ============================================================

def _g(params: ModelParams, m: int) -> float:
    # Mass of loops confined to a fixed set of m vertices:
    # sum_{k>=2} m^k / (k (n(eps+1))^k) = -log(1-x) - x with x = m/(n(eps+1)).
    x = m / params.step_denom
    return -math.log1p(-x) - x


def mu_restricted_total(params: ModelParams, v: int = 0) -> float:
    """Mass of loops avoiding a fixed set of v vertices.

    With v=0 this is the total mass log(1 + 1/eps) - 1/(eps+1).
    """
    if not 0 <= v <= params.n - 1:
        raise ValueError(f"v must lie in [0, n-1], got {v}")
    return _g(params, params.n - v)


def beta_vertex(params: ModelParams) -> float:
    """Mass of loops through a fixed vertex: log(1 + 1/(n eps)) - 1/(n(eps+1))."""
    return math.log1p(1.0 / (params.n * params.epsilon)) - 1.0 / params.step_denom


def beta_vertex_avoiding(params: ModelParams, v: int) -> float:
    """Mass of loops through a fixed vertex that avoid a disjoint set of v vertices.

    Equals ``beta_vertex`` at v=0 and decreases in v.
    """
    if not 0 <= v <= params.n - 2:
        raise ValueError(f"v must lie in [0, n-2], got {v}")
    a = params.n * params.epsilon
    return -math.log1p(v / a) + math.log1p((v + 1) / a) - 1.0 / params.step_denom


def offspring_law_exact(params: ModelParams, v: int = 0) -> tuple[float, Callable[[int], float]]:
    """Rate and jump law of the neighbour count discovered at an exploration step.

    Returns (rate, pmf) where rate is the mass of loops through the current
    vertex avoiding the v already-explored ones, and pmf(j) is the law of
    loop length minus one for such loops.
    """
    if not 0 <= v <= params.n - 2:
        raise ValueError(f"v must lie in [0, n-2], got {v}")
    n, eps = params.n, params.epsilon
    rate = beta_vertex_avoiding(params, v)

    def pmf(j: int) -> float:
        if j < 1:
            return 0.0
        top = (1.0 - v / n) ** (j + 1) - (1.0 - (v + 1) / n) ** (j + 1)
        return top / (rate * (j + 1) * (eps + 1.0) ** (j + 1))

    return rate, pmf


def mu_hit_set_and_vertex(params: ModelParams, a: int) -> float:
    """Mass of loops through a fixed vertex that also hit a disjoint set of size a.

    The probability that the soup holds such a loop by time t is
    1 - exp(-t * mass).
    """
    if not 0 <= a <= params.n - 1:
        raise ValueError(f"a must lie in [0, n-1], got {a}")
    if a == 0:
        return 0.0
    ne = params.n * params.epsilon
    return math.log1p(a / (ne * (ne + a + 1.0)))


def prob_no_loop_linking(params: ModelParams, f1: int, f2: int, t: float) -> float:
    """Probability that no loop at soup time n*t links two disjoint vertex sets.

    f1, f2 are the set sizes; t is in units where the soup horizon is n*t.
    Bounded above by exp(-t f1 f2 / (n (eps+1)^2)).
    """
    if f1 < 1 or f2 < 1:
        raise ValueError("set sizes must be >= 1")
    if f1 + f2 > params.n:
        raise ValueError("sets must fit disjointly: f1 + f2 <= n")
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = params.n * params.epsilon
    x = (f1 * f2) / ((a + f1) * (a + f2))
    return math.exp(params.n * t * math.log1p(-x))


def anomaly_bound(params: ModelParams, t: float) -> float:
    """Upper bound on the probability that loops through a fixed vertex at
    time t revisit a vertex or intersect each other away from it.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    n, eps = params.n, params.epsilon
    return t * (eps + 1.0) / (n**2 * eps**3) + t**2 / (n**3 * eps**4)


def excess_length_pgf(params: ModelParams, t: float, u: float) -> float:
    """Generating function E(u^S) of the total length of loops through a fixed
    vertex at time t, not counting their passes through that vertex.
    """
    n, eps = params.n, params.epsilon
    denom = n * (eps + 1.0) - u * (n - 1.0)
    if denom <= 1.0:
        raise ValueError("u too large: generating function diverges")
    return (1.0 + 1.0 / (n * eps)) ** (-t) * (1.0 - 1.0 / denom) ** (-t)


def excess_length_second_factorial_moment(params: ModelParams, t: float) -> float:
    """E(S(S-1)) for the statistic of ``excess_length_pgf``."""
    n, eps = params.n, params.epsilon
    ne = n * eps
    return t * (n - 1.0) ** 2 * (2.0 * ne + t + 1.0) / (ne**2 * (ne + 1.0) ** 2)


# ============================================================
# Length laws and sampling tables
# ============================================================

def loop_length_pmf(params: ModelParams, k: int) -> float:
    """Law of the length of a mu-distributed loop: (1/k)(eps+1)^-k, normalized."""
    if k < 2:
        return 0.0
    total = mu_restricted_total(params, 0)
    return (params.epsilon + 1.0) ** (-k) / (k * total)


@lru_cache(maxsize=None)
def _length_cdf(epsilon: float) -> np.ndarray:
    # Unnormalized masses (1/k) x^k, k >= 2, x = 1/(eps+1); cap where the
    # geometric tail bound drops below TABLE_TAIL of the total.
    x = 1.0 / (epsilon + 1.0)
    total = -math.log1p(-x) - x
    masses = []
    k = 2
    while True:
        masses.append(x**k / k)
        # Tail after k is bounded by x^(k+1)/((k+1)(1-x)).
        if x ** (k + 1) / ((k + 1) * (1.0 - x)) < TABLE_TAIL * total:
            break
        k += 1
    cdf = np.cumsum(masses)
    return cdf / cdf[-1]


def _sample_lengths(params: ModelParams, count: int, rng: np.random.Generator) -> np.ndarray:
    cdf = _length_cdf(float(params.epsilon))
    return np.searchsorted(cdf, rng.random(count), side="right") + 2


@lru_cache(maxsize=None)
def _nu_jump_cdf(n: int, epsilon: float) -> np.ndarray:
    # Jump law of loop length minus one for loops through a fixed vertex.
    # Unnormalized: (1 - (1-1/n)^(j+1)) / ((j+1)(eps+1)^(j+1)), j >= 1.
    x = 1.0 / (epsilon + 1.0)
    masses = []
    j = 1
    while True:
        masses.append((1.0 - (1.0 - 1.0 / n) ** (j + 1)) * x ** (j + 1) / (j + 1))
        if x ** (j + 2) / ((j + 2) * (1.0 - x)) < TABLE_TAIL * sum(masses):
            break
        j += 1
    cdf = np.cumsum(masses)
    return cdf / cdf[-1]


def sample_nu_jumps(params: ModelParams, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw jump sizes (length minus one) for loops through a fixed vertex."""
    cdf = _nu_jump_cdf(params.n, float(params.epsilon))
    return np.searchsorted(cdf, rng.random(count), side="right") + 1


@lru_cache(maxsize=None)
def _hit_length_cdf(n: int, epsilon: float, v: int) -> np.ndarray:
    # Length law of loops through a fixed vertex that hit a disjoint set of
    # size v >= 1.  Per length m >= 2 the unnormalized mass is
    # (1/m) (n^m - (n-1)^m - (n-v)^m + (n-v-1)^m) / (n(eps+1))^m.
    d = n * (epsilon + 1.0)
    masses = []
    m = 2
    while True:
        w = (n / d) ** m - ((n - 1) / d) ** m - ((n - v) / d) ** m + ((n - v - 1) / d) ** m
        masses.append(w / m)
        x = n / d
        if x ** (m + 1) / ((m + 1) * (1.0 - x)) < TABLE_TAIL * sum(masses):
            break
        m += 1
    cdf = np.cumsum(masses)
    return cdf / cdf[-1]


def sample_hit_lengths(params: ModelParams, v: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw lengths of loops through a fixed vertex hitting a size-v set."""
    if v < 1:
        raise ValueError("v must be >= 1")
    cdf = _hit_length_cdf(params.n, float(params.epsilon), v)
    return np.searchsorted(cdf, rng.random(count), side="right") + 2


# ============================================================
# Samplers
# ============================================================

def sample_arrays(
    params: ModelParams, horizon: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw soup draw: (times, lengths, flat vertices), times unsorted.

    Vertices are 1-based and concatenated loop by loop; loop i occupies the
    slice starting at lengths[:i].sum().  The draw order (count, times,
    lengths, vertices) is fixed so a stream replays identically everywhere.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    count = rng.poisson(horizon * mu_restricted_total(params, 0))
    times = rng.random(count) * horizon
    lengths = _sample_lengths(params, count, rng)
    verts = rng.integers(1, params.n + 1, size=int(lengths.sum()))
    return times, lengths, verts


def sample_fixed_length_arrays(
    params: ModelParams, j: int, horizon: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Raw fixed-length-j soup draw: (times, flat vertices), all loops length j."""
    if j < 2:
        raise ValueError("j must be >= 2")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    count = rng.poisson(horizon / (j * (params.epsilon + 1.0) ** j))
    times = rng.random(count) * horizon
    verts = rng.integers(1, params.n + 1, size=count * j)
    return times, verts


def _soup_from_arrays(
    params: ModelParams,
    horizon: float,
    seed: int,
    times: np.ndarray,
    lengths: np.ndarray,
    verts: np.ndarray,
) -> LoopSoup:
    offsets = np.concatenate(([0], np.cumsum(lengths)))
    order = np.argsort(times, kind="stable")
    loops = tuple(
        (float(times[i]), Loop(verts[offsets[i]:offsets[i + 1]])) for i in order
    )
    return LoopSoup(params=params, horizon=float(horizon), loops=loops, seed=seed)


def soup_from_arrays(
    params: ModelParams,
    horizon: float,
    times: np.ndarray,
    lengths: np.ndarray,
    verts: np.ndarray,
    seed: int = 0,
) -> LoopSoup:
    """Assemble a soup from raw sampled arrays (times per loop, loop
    lengths, concatenated vertices), sorting loops by arrival time."""
    return _soup_from_arrays(params, horizon, seed, times, lengths, verts)


def sample_soup(params: ModelParams, horizon: float, seed: int) -> LoopSoup:
    """Draw the loop soup on [0, horizon].

    Loop count is Poisson(horizon * total mass); times are iid uniform,
    lengths follow (1/k)(eps+1)^-k, and loop vertices are iid uniform on
    1..n, so repeated vertices and self-loop steps occur with their natural
    frequencies.
    """
    rng = stream(seed)
    times, lengths, verts = sample_arrays(params, horizon, rng)
    return _soup_from_arrays(params, horizon, seed, times, lengths, verts)


def sample_fixed_length_soup(params: ModelParams, j: int, horizon: float, seed: int) -> LoopSoup:
    """Draw the soup of length-j loops only, total mass 1/(j(eps+1)^j) per unit time."""
    rng = stream(seed)
    times, verts = sample_fixed_length_arrays(params, j, horizon, rng)
    lengths = np.full(len(times), j, dtype=np.int64)
    return _soup_from_arrays(params, horizon, seed, times, lengths, verts)


# ============================================================
# Serialization
# ============================================================

def write_soup(soup: LoopSoup, path: str | Path) -> None:
    """Write a soup: one JSON header line, then `time,v1;v2;...;vk` per loop."""
    lines = [
        json.dumps(
            {
                "n": soup.params.n,
                "epsilon": soup.params.epsilon,
                "horizon": soup.horizon,
                "seed": soup.seed,
                "generator_id": soup.generator_id,
            }
        )
    ]
    for t, loop in soup.loops:
        lines.append(f"{t!r}," + ";".join(str(v) for v in loop.vertices))
    Path(path).write_text("\n".join(lines) + "\n")


def read_soup(path: str | Path) -> LoopSoup:
    """Read a soup written by ``write_soup``; round-trip is bit-exact."""
    text = Path(path).read_text().splitlines()
    header = json.loads(text[0])
    params = ModelParams(n=header["n"], epsilon=header["epsilon"])
    loops = []
    for line in text[1:]:
        if not line:
            continue
        t_str, verts_str = line.split(",", 1)
        loops.append((float(t_str), Loop(int(v) for v in verts_str.split(";"))))
    return LoopSoup(
        params=params,
        horizon=header["horizon"],
        loops=tuple(loops),
        seed=header["seed"],
        generator_id=header["generator_id"],
    )
