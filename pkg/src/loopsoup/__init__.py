"""Poisson loop-soup simulator and branching-process analytics on the
complete graph.

Submodules:
  measure     loop measure closed forms, soup sampling, serialization
  clusters    union-find cluster dynamics, semigroup and merge-rate laws
  explore     component exploration and its coupled branching walk
  gw          offspring/progeny laws, extinction, large-deviation rates
  coag        multi-collision coagulation solver and analytic profiles
  experiments reproducible Monte Carlo experiment harness
  cli         console entry points (loopsoup, gw-table, coag-solve)
"""

__version__ = "0.1.0"

from .clusters import (
    ClusterState,
    MergeEvent,
    evolve,
    merge_rate,
    new_state,
    rho_hat,
    semigroup_prob,
    state_from_soup,
    z_count,
)
from .coag import (
    DensityVector,
    SolverConfig,
    analytic_rho,
    analytic_rho_fixed_j,
    integrate,
    monodisperse,
    residual,
)
from .explore import CoupledGWTrace, ExplorationTrace, couple_gw, explore, neighbors
from .gw import (
    CPGeo,
    FixedLengthOffspring,
    ProgenyLaw,
    cp_pmf,
    cramer_h,
    dwass_identity_check,
    extinction_prob,
    extinction_prob_fixed_j,
    fixed_length_progeny_pmf,
    progeny_pmf,
    simulate_gw,
    tail_rate_I,
)
from .measure import (
    Loop,
    LoopSoup,
    ModelParams,
    beta_vertex,
    beta_vertex_avoiding,
    loop_length_pmf,
    mu_hit_set_and_vertex,
    mu_restricted_total,
    offspring_law_exact,
    prob_no_loop_linking,
    read_soup,
    sample_fixed_length_soup,
    sample_soup,
    write_soup,
)
from .rng import GENERATOR_ID, stream

__all__ = [
    "__version__",
    "GENERATOR_ID",
    "stream",
    "ModelParams",
    "Loop",
    "LoopSoup",
    "mu_restricted_total",
    "beta_vertex",
    "beta_vertex_avoiding",
    "offspring_law_exact",
    "mu_hit_set_and_vertex",
    "prob_no_loop_linking",
    "loop_length_pmf",
    "sample_soup",
    "sample_fixed_length_soup",
    "write_soup",
    "read_soup",
    "ClusterState",
    "MergeEvent",
    "new_state",
    "state_from_soup",
    "evolve",
    "rho_hat",
    "z_count",
    "semigroup_prob",
    "merge_rate",
    "ExplorationTrace",
    "CoupledGWTrace",
    "explore",
    "neighbors",
    "couple_gw",
    "CPGeo",
    "FixedLengthOffspring",
    "ProgenyLaw",
    "cp_pmf",
    "progeny_pmf",
    "fixed_length_progeny_pmf",
    "dwass_identity_check",
    "extinction_prob",
    "extinction_prob_fixed_j",
    "cramer_h",
    "tail_rate_I",
    "simulate_gw",
    "DensityVector",
    "SolverConfig",
    "monodisperse",
    "integrate",
    "analytic_rho",
    "analytic_rho_fixed_j",
    "residual",
]
