"""Independent reference implementations used to pin expected values.

Everything here recomputes quantities from first principles by a different
route than the package (series instead of closed forms, recursions instead of
log-space sums, bitmask DP instead of inclusion-exclusion, brute-force
enumeration instead of convolution), so agreement is meaningful.
"""
from __future__ import annotations

import math
from itertools import product

import numpy as np

D_RTOL = 1e-14


def signed_power_mass(n: int, eps: float, terms, m_start: int = 2) -> float:
    """Sum over loop length m of (1/m) * sum_i c_i (a_i/(n(eps+1)))^m.

    ``terms`` is a list of (c_i, a_i) with a_i <= n, so every ratio power
    stays below (1/(eps+1))^m and the geometric tail bound is rigorous.
    """
    d = n * (eps + 1.0)
    ratios = [(c, a / d) for c, a in terms]
    r = n / d
    total = 0.0
    m = m_start
    while True:
        total += sum(c * x**m for c, x in ratios) / m
        tail = r ** (m + 1) / ((m + 1) * (1.0 - r))
        if total > 0 and tail < D_RTOL * total:
            return total
        m += 1


def restricted_mass_series(n: int, eps: float, v: int) -> float:
    """Mass of loops avoiding a fixed v-set, summed term by term."""
    return signed_power_mass(n, eps, [(1.0, n - v)])


def vertex_mass_series(n: int, eps: float) -> float:
    """Mass of loops through one fixed vertex, summed term by term."""
    return signed_power_mass(n, eps, [(1.0, n), (-1.0, n - 1)])


def vertex_avoiding_mass_series(n: int, eps: float, v: int) -> float:
    """Mass of loops through a fixed vertex avoiding a disjoint v-set."""
    return signed_power_mass(n, eps, [(1.0, n - v), (-1.0, n - v - 1)])


def hit_set_and_vertex_series(n: int, eps: float, a: int) -> float:
    """Mass of loops through a fixed vertex that also hit a disjoint a-set.

    Tuple counts come from inclusion-exclusion over missing the vertex or
    missing the set.
    """
    return signed_power_mass(
        n, eps, [(1.0, n), (-1.0, n - 1), (-1.0, n - a), (1.0, n - a - 1)]
    )


def linking_mass_series(n: int, eps: float, f1: int, f2: int) -> float:
    """Mass of loops hitting both of two disjoint sets of sizes f1, f2."""
    return signed_power_mass(
        n, eps, [(1.0, n), (-1.0, n - f1), (-1.0, n - f2), (1.0, n - f1 - f2)]
    )


def crossing_mass_series(n: int, eps: float, blocks) -> float:
    """Mass of loops not contained in any single block of the partition."""
    return signed_power_mass(
        n, eps, [(1.0, n)] + [(-1.0, b) for b in blocks]
    )


def cover_weights_by_length(sizes, m_max: int) -> list[float]:
    """Weighted counts of block-label sequences covering every block.

    Entry m-2 is the sum over sequences (b_1..b_m) with all blocks present of
    prod_i size(b_i), i.e. the number of vertex tuples inside the union that
    touch every block, computed by bitmask dynamic programming.
    """
    L = len(sizes)
    full = (1 << L) - 1
    dp = np.zeros(full + 1)
    dp[0] = 1.0
    out = []
    for m in range(1, m_max + 1):
        nxt = np.zeros(full + 1)
        for mask in range(full + 1):
            w = dp[mask]
            if w == 0.0:
                continue
            for b in range(L):
                nxt[mask | (1 << b)] += w * sizes[b]
        dp = nxt
        if m >= 2:
            out.append(float(dp[full]))
    return out


def merge_rate_series(n: int, eps: float, sizes) -> float:
    """Mass of loops inside the union of the given blocks touching them all."""
    d = n * (eps + 1.0)
    s = float(sum(sizes))
    r = s / d
    # Geometric tail: covering counts are at most s^m.
    m_max = len(sizes)
    scaled = [b / d for b in sizes]
    total = 0.0
    while True:
        # DP on sizes pre-divided by d yields count/d^m directly, so no
        # intermediate quantity can overflow.
        weights = cover_weights_by_length(scaled, m_max)
        total = sum(c / m for m, c in enumerate(weights, start=2))
        tail = r ** (m_max + 1) / ((m_max + 1) * (1.0 - r))
        if total > 0 and tail < 1e-13 * total:
            return total
        m_max += 8


def geometric_pmf(p: float, j: int) -> float:
    """Success-p geometric on {1, 2, ...}."""
    return p * (1.0 - p) ** (j - 1) if j >= 1 else 0.0


def panjer_compound_poisson(lam: float, severity, kmax: int) -> np.ndarray:
    """Compound-Poisson pmf on 0..kmax via the Panjer recursion.

    ``severity`` maps j >= 1 to the summand pmf; the recursion is
    f(k) = (lam/k) sum_{j<=k} j q(j) f(k-j) with f(0) = e^{-lam}.
    """
    f = np.zeros(kmax + 1)
    f[0] = math.exp(-lam)
    q = np.array([severity(j) for j in range(kmax + 1)])
    jq = np.arange(kmax + 1) * q
    for k in range(1, kmax + 1):
        f[k] = (lam / k) * float(jq[1 : k + 1] @ f[k - 1 :: -1][: k])
    return f


def pgf_fixed_point(pgf, iters: int = 100000, tol: float = 1e-15) -> float:
    """Smallest fixed point of a pgf on [0,1] by monotone iteration from 0."""
    s = 0.0
    for _ in range(iters):
        s_new = pgf(s)
        if abs(s_new - s) < tol:
            return s_new
        s = s_new
    return s


def progeny_direct(u: int, eps: float, t: float, k: int) -> float:
    """Total-progeny pmf in plain float arithmetic (small k only)."""
    lam = t / (eps * (eps + 1.0))
    if k < u:
        return 0.0
    if k == u:
        return math.exp(-u * lam)
    acc = 0.0
    for j in range(1, k - u + 1):
        acc += (
            math.comb(k - u - 1, j - 1)
            / math.factorial(j)
            * (k * t / (eps + 1.0)) ** j
        )
    return (u / k) * math.exp(-k * lam) * (eps + 1.0) ** (-(k - u)) * acc


def fixed_length_progeny_direct(u: int, j: int, t: float, k: int) -> float:
    """Lattice total-progeny pmf for length-j loops, plain float arithmetic."""
    if k < u or (k - u) % (j - 1):
        return 0.0
    m = (k - u) // (j - 1)
    return u * k ** (m - 1) * t**m * math.exp(-k * t) / math.factorial(m)


def gain_bruteforce(rho: np.ndarray, j: int, k: int) -> float:
    """Coagulation gain term by explicit enumeration of ordered size tuples."""
    K = len(rho) - 1
    acc = 0.0
    for tup in product(range(1, k), repeat=j - 1):
        s = sum(tup)
        last = k - s
        if not 1 <= last <= K:
            continue
        w = last * rho[last]
        for ki in tup:
            if ki > K:
                w = 0.0
                break
            w *= ki * rho[ki]
        acc += w
    return acc / j


def central_diff(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def second_central_diff(f, x: float, h: float) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / h**2
