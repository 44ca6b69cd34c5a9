"""Multi-collision coagulation solver and its analytic solution.

The cluster-density profile rho_t(k) evolves by

    d/dt rho_t(k) = sum_{j=2}^{inf} (eps+1)^{-j} G_j(rho_t, k)

where G_j has a j-fold composition gain term, a multiplicative loss term,
and a gel interaction term.  The fixed-length-j model drops the arity sum
and the (eps+1)^{-j} weight, keeping a single G_j.  The solver truncates
at size K and arity Jmax, integrates with fixed-step RK4, and never
renormalizes: mass leaking past K is attributed to the gel term, which is
exactly the bookkeeping that keeps the truncated system consistent below
the gelation time.  The analytic solution is the per-size total progeny
law of the associated branching process divided by k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gw import fixed_length_progeny_pmf_array, progeny_pmf_array

NEG_TOL = 1e-8


@dataclass(frozen=True)
class DensityVector:
    """Truncated cluster-density profile; rho[k] is the density of size-k
    clusters for k = 1..K (index 0 is structurally zero).

    m0 is the initial first moment; the live gel mass is m0 - m1.
    Treat instances as values: the stored array is read-only.
    """

    rho: np.ndarray
    m0: float
    t: float = 0.0

    def __post_init__(self) -> None:
        arr = np.array(self.rho, dtype=float)
        if arr.ndim != 1 or len(arr) < 2:
            raise ValueError("rho must be a 1-d array with K >= 1")
        if arr[0] != 0.0:
            raise ValueError("index 0 is not a cluster size; rho[0] must be 0")
        if (arr < 0).any():
            raise ValueError("densities must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "rho", arr)
        if float(np.arange(len(arr)) @ arr) > self.m0 + 1e-9:
            raise ValueError("first moment exceeds the conserved mass m0")

    @property
    def K(self) -> int:
        return len(self.rho) - 1

    @property
    def m1(self) -> float:
        return float(np.arange(len(self.rho)) @ self.rho)

    @property
    def gel(self) -> float:
        return self.m0 - self.m1


def monodisperse(K: int) -> DensityVector:
    """All-singletons initial profile, unit mass."""
    rho = np.zeros(K + 1)
    rho[1] = 1.0
    return DensityVector(rho=rho, m0=1.0, t=0.0)


@dataclass(frozen=True)
class SolverConfig:
    """Truncation sizes and step for the coagulation integrator.

    fixed_j selects the single-arity specialization; eps and Jmax are
    ignored in that mode.
    """

    K: int
    Jmax: int
    dt: float
    eps: float
    fixed_j: int | None = None

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.fixed_j is None:
            if not self.K >= self.Jmax >= 2:
                raise ValueError("need K >= Jmax >= 2")
            if self.eps <= 0:
                raise ValueError("eps must be positive")
        else:
            if self.fixed_j < 2:
                raise ValueError("fixed_j must be >= 2")
            if self.K < self.fixed_j:
                raise ValueError("need K >= fixed_j")


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[DensityVector, ...]
    clamp_events: int


# ============================================================
# Right-hand side
# ============================================================


def _weighted(rho: np.ndarray) -> np.ndarray:
    return np.arange(len(rho)) * rho


def _loss_gel_factor(j: int, m1: float, g: float) -> float:
    """m1^{j-1} plus the gel interaction sum; equals (m1+g)^{j-1} = m0^{j-1}."""
    total = m1 ** (j - 1)
    for h in range(1, j):
        total += math.comb(j - 1, h) * g**h * m1 ** (j - 1 - h)
    return total


def G_j(rho: DensityVector, j: int, k: int) -> float:
    """Arity-j collision term at size k: composition gain minus loss minus
    gel interaction."""
    if j < 2:
        raise ValueError("arity must be >= 2")
    if not 1 <= k <= rho.K:
        raise ValueError(f"size k={k} outside 1..{rho.K}")
    a = _weighted(rho.rho)
    conv = a
    for _ in range(j - 1):
        conv = np.convolve(conv, a)[: rho.K + 1]
    gain = conv[k] / j if j <= k else 0.0
    m1 = rho.m1
    g = rho.gel
    loss = k * rho.rho[k] * m1 ** (j - 1)
    gel_term = k * rho.rho[k] * (_loss_gel_factor(j, m1, g) - m1 ** (j - 1))
    return gain - loss - gel_term


def _rhs_weighted_sum(
    rho_arr: np.ndarray, m0: float, weights: dict[int, float]
) -> np.ndarray:
    """sum_j w_j G_j(rho, .) for all sizes at once, with arities and weights
    given by ``weights``; convolution powers of k*rho(k) built incrementally."""
    K = len(rho_arr) - 1
    a = _weighted(rho_arr)
    m1 = float(a.sum())
    g = m0 - m1
    k_rho = a  # k * rho(k), reused by the loss terms
    out = np.zeros(K + 1)
    jmax = max(weights)
    conv = a
    for j in range(2, jmax + 1):
        conv = np.convolve(conv, a)[: K + 1]
        w = weights.get(j)
        if w is None:
            continue
        out += w * (conv / j - k_rho * _loss_gel_factor(j, m1, g))
    return out


def rhs_full(rho: DensityVector, eps: float, Jmax: int) -> np.ndarray:
    """Arity-summed right-hand side sum_{j=2}^{Jmax} (eps+1)^{-j} G_j, as an
    array over sizes (index 0 is zero)."""
    if Jmax < 2:
        raise ValueError("Jmax must be >= 2")
    weights = {j: (eps + 1.0) ** (-j) for j in range(2, Jmax + 1)}
    return _rhs_weighted_sum(rho.rho, rho.m0, weights)


def rhs_fixed_j(rho: DensityVector, j: int) -> np.ndarray:
    """Right-hand side of the single-arity system: d/dt rho = G_j(rho, .)."""
    return _rhs_weighted_sum(rho.rho, rho.m0, {j: 1.0})


def rhs_tail_bound(rho: DensityVector, eps: float, Jmax: int) -> float:
    """Bound on the arity-truncation error sum_{j>Jmax} (eps+1)^{-j} |G_j|,
    uniform over sizes, from |G_j| <= m1^j / j + m0^j."""
    m1, m0 = rho.m1, rho.m0
    r1 = m1 / (eps + 1.0)
    r0 = m0 / (eps + 1.0)
    if r0 >= 1.0:
        return math.inf
    gain = r1 ** (Jmax + 1) / ((Jmax + 1) * (1.0 - r1)) if m1 > 0 else 0.0
    loss = r0 ** (Jmax + 1) / (1.0 - r0)
    return gain + loss


# ============================================================
# Integration
# ============================================================


def integrate(
    rho0: DensityVector,
    eps: float,
    t_end: float,
    config: SolverConfig,
    output_times=None,
) -> Trajectory:
    """Fixed-step RK4 on the truncated system from rho0.t to t_end.

    States are recorded at each output time (default: t_end only); output
    times are landed on exactly by shrinking the final step of a segment.
    Small negative densities (>= -1e-8) are clamped to zero and counted;
    larger ones abort with a step-size error.
    """
    if t_end < rho0.t:
        raise ValueError("t_end must be >= the initial time")
    if rho0.K != config.K:
        raise ValueError("profile truncation does not match config.K")
    if config.fixed_j is None:
        weights = {j: (eps + 1.0) ** (-j) for j in range(2, config.Jmax + 1)}
    else:
        weights = {config.fixed_j: 1.0}
    m0 = rho0.m0

    def f(y: np.ndarray) -> np.ndarray:
        return _rhs_weighted_sum(y, m0, weights)

    if output_times is None:
        output_times = [t_end]
    outs = sorted(set(float(s) for s in output_times))
    if outs and (outs[0] < rho0.t or outs[-1] > t_end + 1e-12):
        raise ValueError("output times must lie in [rho0.t, t_end]")
    if not outs or outs[-1] < t_end:
        outs.append(t_end)

    y = np.array(rho0.rho)
    t = rho0.t
    clamps = 0
    times: list[float] = []
    states: list[DensityVector] = []
    for target in outs:
        span = target - t
        if span > 0:
            nsteps = max(1, math.ceil(span / config.dt - 1e-12))
            h = span / nsteps
            for _ in range(nsteps):
                try:
                    k1 = f(y)
                    k2 = f(y + 0.5 * h * k1)
                    k3 = f(y + 0.5 * h * k2)
                    k4 = f(y + h * k3)
                except OverflowError as exc:
                    raise RuntimeError(
                        f"right-hand side overflowed; reduce dt "
                        f"(currently {config.dt})"
                    ) from exc
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not np.isfinite(y).all():
                    raise RuntimeError(
                        f"density became non-finite; reduce dt "
                        f"(currently {config.dt})"
                    )
                low = float(y.min())
                if low < -NEG_TOL:
                    raise RuntimeError(
                        f"density reached {low:.3e} < -{NEG_TOL}; reduce dt "
                        f"(currently {config.dt})"
                    )
                neg = y < 0.0
                if neg.any():
                    clamps += int(neg.sum())
                    y[neg] = 0.0
            t = target
        times.append(t)
        states.append(DensityVector(rho=y.copy(), m0=m0, t=t))
    return Trajectory(times=tuple(times), states=tuple(states), clamp_events=clamps)


# ============================================================
# Analytic solution and diagnostics
# ============================================================


def analytic_rho(eps: float, t: float, k: int) -> float:
    """Solution profile (1/k) * P(total progeny of one ancestor = k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(analytic_rho_array(eps, t, k)[k])


def analytic_rho_array(eps: float, t: float, K: int) -> np.ndarray:
    """Solution profile for sizes 0..K (index 0 zero)."""
    if t == 0.0:
        out = np.zeros(K + 1)
        out[1] = 1.0
        return out
    arr = progeny_pmf_array(1, eps, t, K)
    arr[1:] = arr[1:] / np.arange(1, K + 1)
    return arr


def analytic_profile(eps: float, t: float, K: int) -> DensityVector:
    return DensityVector(rho=analytic_rho_array(eps, t, K), m0=1.0, t=t)


def analytic_rho_fixed_j(j: int, t: float, k: int) -> float:
    """Single-arity solution (1/k) * P(fixed-length total progeny = k);
    zero off the lattice k = 1 mod (j-1)."""
    if j < 2:
        raise ValueError("j must be >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(analytic_rho_fixed_j_array(j, t, k)[k])


def analytic_rho_fixed_j_array(j: int, t: float, K: int) -> np.ndarray:
    if j < 2:
        raise ValueError("j must be >= 2")
    arr = fixed_length_progeny_pmf_array(1, j, t, K)
    arr[1:] = arr[1:] / np.arange(1, K + 1)
    return arr


def analytic_profile_fixed_j(j: int, t: float, K: int) -> DensityVector:
    return DensityVector(rho=analytic_rho_fixed_j_array(j, t, K), m0=1.0, t=t)


def moments(rho: DensityVector, r: int) -> float:
    """Sum_k k^r rho(k) over the truncation."""
    if r < 0:
        raise ValueError("moment order must be >= 0")
    k = np.arange(len(rho.rho), dtype=float)
    return float((k**r) @ rho.rho)


def gel_mass(rho: DensityVector) -> float:
    return rho.gel


def analytic_second_moment(eps: float, t: float) -> float:
    """Closed-form second moment (1 - t/eps^2)^{-1} below gelation."""
    if not 0 <= t < eps**2:
        raise ValueError("defined for 0 <= t < eps^2")
    return 1.0 / (1.0 - t / eps**2)


def residual(eps: float, t: float, config: SolverConfig, fd_step: float = 1e-5) -> float:
    """Sup over sizes k <= K of |d/dt analytic profile - truncated rhs|,
    the time derivative taken by central finite difference."""
    if not 0 < t < eps**2:
        raise ValueError("t must lie in (0, eps^2)")
    K = config.K
    hi = analytic_rho_array(eps, t + fd_step, K)
    lo = analytic_rho_array(eps, t - fd_step, K)
    deriv = (hi - lo) / (2.0 * fd_step)
    rhs = rhs_full(analytic_profile(eps, t, K), eps, config.Jmax)
    return float(np.abs(deriv - rhs).max())


def residual_fixed_j(
    j: int, t: float, config: SolverConfig, fd_step: float = 1e-5
) -> float:
    """Single-arity analogue of ``residual`` against d/dt rho = G_j."""
    if t <= fd_step:
        raise ValueError("t must exceed the finite-difference step")
    K = config.K
    hi = analytic_rho_fixed_j_array(j, t + fd_step, K)
    lo = analytic_rho_fixed_j_array(j, t - fd_step, K)
    deriv = (hi - lo) / (2.0 * fd_step)
    rhs = rhs_fixed_j(analytic_profile_fixed_j(j, t, K), j)
    return float(np.abs(deriv - rhs).max())
