"""Branching-process analytics for the component-size limit laws.

The limiting offspring law is compound Poisson with geometric jumps:
CPois(lambda, Geo(p)) with the model embedding lambda = t/(eps(eps+1)),
p = eps/(eps+1).  The fixed-length-j model has offspring (j-1) * Poisson(t).
This module evaluates their pmf/pgf/mgf, extinction probabilities, total
progeny laws, the Dwass identity, the subcritical dual, and the large
deviation rates used to calibrate experiments.  Everything is exact up to
series truncation; heavy pmfs are evaluated in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

DEFAULT_TAIL_TOL = 1e-10

# ============================================================
# Offspring laws
# ============================================================


@dataclass(frozen=True)
class CPGeo:
    """Compound Poisson with geometric jumps on {1, 2, ...}."""

    lam: float
    p: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0,1)")

    @classmethod
    def from_model(cls, eps: float, t: float) -> "CPGeo":
        return cls(lam=t / (eps * (eps + 1.0)), p=eps / (eps + 1.0))

    @property
    def mean(self) -> float:
        return self.lam / self.p

    @property
    def model_eps(self) -> float:
        return self.p / (1.0 - self.p)

    @property
    def model_t(self) -> float:
        return self.lam * self.p / (1.0 - self.p) ** 2


@dataclass(frozen=True)
class FixedLengthOffspring:
    """Offspring law (j-1) * Poisson(t), supported on (j-1) * N."""

    j: int
    t: float

    def __post_init__(self) -> None:
        if self.j < 2:
            raise ValueError("j must be >= 2")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @property
    def mean(self) -> float:
        return (self.j - 1) * self.t


# ============================================================
# Compound-Poisson-Geometric pmf / transforms
# ============================================================


def cp_pmf(law: CPGeo, m: int) -> float:
    """P(X = m) for X ~ CPois(lam, Geo(p)); log-space sum over the Poisson count."""
    if m < 0:
        return 0.0
    if m == 0:
        return math.exp(-law.lam)
    j = np.arange(1, m + 1)
    log_terms = (
        -law.lam
        + j * math.log(law.lam)
        - gammaln(j + 1)
        + gammaln(m)
        - gammaln(j)
        - gammaln(m - j + 1)
        + j * math.log(law.p)
        + (m - j) * math.log1p(-law.p)
    )
    return float(np.exp(logsumexp(log_terms)))


def cp_pmf_array(law: CPGeo, mmax: int) -> np.ndarray:
    """P(X = m) for m = 0..mmax as an array."""
    return np.array([cp_pmf(law, m) for m in range(mmax + 1)])


def pgf(law: CPGeo, s: float) -> float:
    """phi(s) = exp(-lam (1-s)/(1-s+sp)), for s < 1/(1-p)."""
    if s >= 1.0 / (1.0 - law.p):
        raise ValueError("s outside the domain of the generating function")
    return math.exp(-law.lam * (1.0 - s) / (1.0 - s + s * law.p))


def mgf_L(eps: float, t: float, theta: float) -> float:
    """Moment generating function of the model offspring law at theta < log(eps+1)."""
    if theta >= math.log(eps + 1.0):
        raise ValueError("theta must be below log(eps+1)")
    return math.exp(-t / eps + t / (eps + 1.0 - math.exp(theta)))


# ============================================================
# Extinction
# ============================================================


def _pgf_deriv(law: CPGeo, s: float) -> float:
    return pgf(law, s) * law.lam * law.p / (1.0 - s + s * law.p) ** 2


def extinction_prob(law: CPGeo) -> float:
    """Smallest fixed point of the offspring pgf in (0, 1]; 1 iff mean <= 1.

    Bisection (robust near criticality, where the fixed-point equation is
    flat) followed by Newton refinement.
    """
    if law.mean <= 1.0:
        return 1.0
    lo, hi = 0.0, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pgf(law, mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(8):
        f = pgf(law, s) - s
        fp = _pgf_deriv(law, s) - 1.0
        if fp == 0.0:
            break
        step = f / fp
        s_new = s - step
        if not 0.0 < s_new < 1.0:
            break
        s = s_new
    return s


def extinction_prob_fixed_j(j: int, t: float) -> float:
    """Extinction probability for offspring (j-1)*Poisson(t)."""
    mean = (j - 1) * t
    if mean <= 1.0:
        return 1.0

    def phi(s: float) -> float:
        return math.exp(-t * (1.0 - s ** (j - 1)))

    lo, hi = 0.0, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi(mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ============================================================
# Total progeny
# ============================================================


def progeny_pmf(u: int, eps: float, t: float, k: int) -> float:
    """P(total progeny = k) for u ancestors and the model offspring law.

    Zero below the support k >= u.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if k < u:
        return 0.0
    return float(progeny_pmf_array(u, eps, t, k)[k])


def progeny_pmf_array(u: int, eps: float, t: float, kmax: int) -> np.ndarray:
    """P(total progeny = k) for k = 0..kmax (zero below k = u).

    Evaluated in log space with tabulated log-factorials so k in the
    thousands stays exact to floating precision.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    if kmax < u:
        raise ValueError(f"kmax must be >= u, got kmax={kmax} < u={u}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam = t / (eps * (eps + 1.0))
    out = np.zeros(kmax + 1)
    out[u] = math.exp(-u * lam)
    if t == 0.0 or kmax == u:
        return out
    gl = gammaln(np.arange(1, kmax + 2))  # gl[i] = log(i!)
    log_z = math.log(t / (eps + 1.0))
    log_eps1 = math.log(eps + 1.0)
    for k in range(u + 1, kmax + 1):
        m = k - u
        j = np.arange(1, m + 1)
        log_terms = (
            math.log(u / k)
            - k * lam
            - m * log_eps1
            + gl[m - 1]
            - gl[j - 1]
            - gl[m - j]
            - gl[j]
            + j * (math.log(k) + log_z)
        )
        out[k] = math.exp(logsumexp(log_terms))
    return out


def fixed_length_progeny_pmf(u: int, j: int, t: float, k: int) -> float:
    """P(total progeny = k) for u ancestors with offspring (j-1)*Poisson(t).

    Supported on k = u + (j-1)m; zero off that lattice.
    """
    if j < 2 or u < 1:
        raise ValueError("need j >= 2 and u >= 1")
    if k < u or (k - u) % (j - 1) != 0:
        return 0.0
    m = (k - u) // (j - 1)
    if m == 0:
        return math.exp(-u * t)
    if t == 0.0:
        return 0.0
    log_p = (
        math.log(u)
        - float(gammaln(m + 1))
        + (m - 1) * math.log(k)
        + m * math.log(t)
        - k * t
    )
    return math.exp(log_p)


def fixed_length_progeny_pmf_array(u: int, j: int, t: float, kmax: int) -> np.ndarray:
    return np.array([fixed_length_progeny_pmf(u, j, t, k) for k in range(kmax + 1)])


def dwass_identity_check(u: int, law: CPGeo, k: int) -> tuple[float, float]:
    """Total progeny pmf vs (u/k) * P(X_1 + ... + X_k = k - u).

    The right side is an honest k-fold numeric convolution of the offspring
    pmf, so the two sides come from genuinely different computations.
    """
    if k < u:
        raise ValueError("k must be >= u")
    lhs = progeny_pmf(u, law.model_eps, law.model_t, k)
    m = k - u
    base = cp_pmf_array(law, m)
    conv = np.zeros(m + 1)
    conv[0] = 1.0
    for _ in range(k):
        conv = np.convolve(conv, base)[: m + 1]
    rhs = (u / k) * conv[m]
    return lhs, rhs


def dual_params(law: CPGeo) -> CPGeo:
    """Subcritical law of the supercritical process conditioned on extinction.

    With extinction probability q: 1 - p_dual = q(1-p) and
    lam_dual = lam * q * p / p_dual.
    """
    if law.mean <= 1.0:
        raise ValueError("dual is defined for supercritical laws only")
    q = extinction_prob(law)
    p_dual = 1.0 - q * (1.0 - law.p)
    lam_dual = law.lam * q * law.p / p_dual
    return CPGeo(lam=lam_dual, p=p_dual)


# ============================================================
# Large deviation rates
# ============================================================


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _cramer_h_argmax(eps: float, t: float) -> tuple[float, float]:
    hi = math.log(eps + 1.0)

    def f(theta: float) -> float:
        return theta + t / eps - t / (eps + 1.0 - math.exp(theta))

    theta, val = _golden_max(f, 1e-9, hi - 1e-9)
    if val <= 0.0:
        return 0.0, 0.0
    return theta, val


def cramer_h(eps: float, t: float) -> float:
    """Rate sup_theta (theta - log mgf) governing subcritical component tails.

    Positive for t < eps^2 and zero at and past criticality.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    return _cramer_h_argmax(eps, t)[1]


def _tail_rate_I_argmax(eps: float, t: float) -> tuple[float, float]:
    def g(theta: float) -> float:
        return t / eps - t / (eps + 1.0 - math.exp(-theta)) - theta

    hi = 1.0
    while g(hi) > g(0.5 * hi):
        hi *= 2.0
        if hi > 1e6:
            break
    return _golden_max(g, 0.0, hi)


def tail_rate_I(eps: float, t: float) -> float:
    """Rate sup_theta (-log E e^{-theta X} - theta) for the finite-progeny tail
    of a supercritical process: P(k <= T < inf) <= e^{-kI}/(1-e^{-I})."""
    if t <= eps**2:
        raise ValueError("I is defined in the supercritical phase t > eps^2")
    return _tail_rate_I_argmax(eps, t)[1]


def cramer_h_fixed_j(j: int, t: float) -> float:
    """Subcritical rate for offspring (j-1)*Poisson(t); closed form."""
    mean = (j - 1) * t
    if mean >= 1.0:
        return 0.0
    theta = -math.log(t * (j - 1)) / (j - 1)
    return theta + t - 1.0 / (j - 1)


def tail_rate_I_fixed_j(j: int, t: float) -> float:
    """Finite-progeny tail rate for supercritical (j-1)*Poisson(t); closed form."""
    mean = (j - 1) * t
    if mean <= 1.0:
        raise ValueError("supercritical regime requires (j-1)t > 1")
    theta = math.log(t * (j - 1)) / (j - 1)
    return t - 1.0 / (j - 1) - theta


# ============================================================
# Progeny law with adaptive truncation
# ============================================================


@dataclass(frozen=True)
class ProgenyLaw:
    """Total progeny pmf cache with certified truncation.

    ``defect`` is the mass escaping to infinity (survival probability when
    supercritical); ``tail_bound`` bounds the finite mass beyond the cache.
    """

    u: int
    base: CPGeo | FixedLengthOffspring
    pmf: np.ndarray
    defect: float
    tail_bound: float

    @classmethod
    def build(
        cls,
        u: int,
        base: CPGeo | FixedLengthOffspring,
        tol: float = DEFAULT_TAIL_TOL,
        kmax_cap: int = 200_000,
    ) -> "ProgenyLaw":
        if isinstance(base, CPGeo):
            eps, t = base.model_eps, base.model_t
            if base.mean < 1.0:
                theta, rate = _cramer_h_argmax(eps, t)
            elif base.mean > 1.0:
                theta, rate = 0.0, _tail_rate_I_argmax(eps, t)[1]
            else:
                theta, rate = 0.0, 0.0

            def pmf_array(kmax: int) -> np.ndarray:
                return progeny_pmf_array(u, eps, t, kmax)

        else:
            if base.mean < 1.0:
                rate = cramer_h_fixed_j(base.j, base.t)
                theta = -math.log(base.t * (base.j - 1)) / (base.j - 1)
            elif base.mean > 1.0:
                theta, rate = 0.0, tail_rate_I_fixed_j(base.j, base.t)
            else:
                theta, rate = 0.0, 0.0

            def pmf_array(kmax: int) -> np.ndarray:
                return fixed_length_progeny_pmf_array(u, base.j, base.t, kmax)

        if rate <= 0.0:
            raise ValueError("cannot certify truncation at criticality")
        # Chernoff bound P(T = k, finite) <= (u/k) e^{theta*u} e^{-k*rate}
        # summed past K; grow K until it clears tol.
        K = max(4 * u, 64)
        while True:
            tail = (
                u / (K + 1) * math.exp(theta * u) * math.exp(-(K + 1) * rate)
                / -math.expm1(-rate)
            )
            if tail < tol or K >= kmax_cap:
                break
            K *= 2
        arr = pmf_array(K)
        defect = max(0.0, 1.0 - float(arr.sum()))
        return cls(u=u, base=base, pmf=arr, defect=defect, tail_bound=tail)


# ============================================================
# Simulation and distances
# ============================================================


def _draw_offspring(base: CPGeo | FixedLengthOffspring, size: int, rng) -> np.ndarray:
    if isinstance(base, CPGeo):
        counts = rng.poisson(base.lam, size=size)
        out = np.zeros(size, dtype=np.int64)
        pos = counts > 0
        if pos.any():
            # Sum of N geometric(p) jumps = N + NegBin(N, p) failures.
            npos = counts[pos]
            out[pos] = npos + rng.negative_binomial(npos, base.p)
        return out
    return (base.j - 1) * rng.poisson(base.t, size=size)


def simulate_gw(
    base: CPGeo | FixedLengthOffspring, u: int, cap: int, seed: int
) -> tuple[int, bool]:
    """Total progeny of one branching walk; (progeny, censored-at-cap)."""
    from .rng import stream

    if cap < u:
        raise ValueError("cap must be >= u")
    rng = stream(seed)
    alive = u
    k = 0
    while alive > 0:
        if k >= cap:
            return k, True
        k += 1
        alive += int(_draw_offspring(base, 1, rng)[0]) - 1
    return k, False


def simulate_gw_many(
    base: CPGeo | FixedLengthOffspring, u: int, replicas: int, cap: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized batch of total-progeny walks; returns (progeny, censored)."""
    from .rng import stream

    rng = stream(seed)
    alive = np.full(replicas, u, dtype=np.int64)
    steps = np.zeros(replicas, dtype=np.int64)
    running = alive > 0
    while running.any():
        idx = np.flatnonzero(running)
        draws = _draw_offspring(base, len(idx), rng)
        alive[idx] += draws - 1
        steps[idx] += 1
        running[idx] = (alive[idx] > 0) & (steps[idx] < cap)
    censored = alive > 0
    return steps, censored


def tv_distance(pmf1, pmf2) -> tuple[float, float]:
    """Truncated total variation plus a bound on the unseen tail contribution.

    Inputs are pmf arrays on a shared 0-based support; the second element of
    the result bounds the error from mass beyond the arrays.
    """
    a = np.asarray(pmf1, dtype=float)
    b = np.asarray(pmf2, dtype=float)
    if (a < 0).any() or (b < 0).any():
        raise ValueError("pmfs must be nonnegative")
    m = max(len(a), len(b))
    a = np.pad(a, (0, m - len(a)))
    b = np.pad(b, (0, m - len(b)))
    tv = 0.5 * float(np.abs(a - b).sum())
    tail = 0.5 * (max(0.0, 1.0 - float(a.sum())) + max(0.0, 1.0 - float(b.sum())))
    return tv, tail
