"""Command-line entry points: the experiment harness, a branching-law
table generator, and the coagulation solver."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import coag, experiments, gw


def main(argv=None) -> int:
    """loopsoup <command>: run one reproducible experiment; exit 0 iff all
    its acceptance assertions pass."""
    parser = argparse.ArgumentParser(
        prog="loopsoup",
        description=(
            "Loop-soup random graph experiments: sample replica soups, "
            "reduce to component statistics, and check the closed-form "
            "limit laws."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in experiments.COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--replicas", type=int, help="replica count override")
        p.add_argument("--out", help="output directory for CSV tables + run record")
        p.add_argument("--jobs", type=int, help="parallel sampling workers")
        p.add_argument("--eps", type=float, help="model epsilon override")
        p.add_argument("--t", type=float, help="paper-units time override")
        p.add_argument("--n", type=int, help="vertex count override")
        p.add_argument("--j", type=int, help="fixed loop length override")
    args = parser.parse_args(argv)
    base: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            base = json.load(fh)
    base["command"] = args.command
    for key in ("seed", "replicas", "out", "jobs", "eps", "t", "n", "j"):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    config = experiments.ExperimentConfig.from_dict(base)
    record = experiments.run(config)
    for a in record.assertions:
        print(("PASS" if a["passed"] else "FAIL") + f"  {a['name']}: {a['detail']}")
    for w in record.warnings:
        print(f"WARN  {w}")
    verdict = "PASS" if record.passed else "FAIL"
    print(f"{config.command}: {verdict}  ({record.wall_time_s:.1f}s)")
    return 0 if record.passed else 1


def gw_table_main(argv=None) -> int:
    """gw-table: total-progeny pmf/cdf table plus extinction and rate
    summary for the model offspring law (or its fixed-length variant)."""
    parser = argparse.ArgumentParser(
        prog="gw-table",
        description=(
            "Tabulate the total-progeny law of the branching process with "
            "compound-Poisson-geometric offspring (or (j-1)*Poisson(t) when "
            "--j is given)."
        ),
    )
    parser.add_argument("--eps", type=float, default=1.0)
    parser.add_argument("--t", type=float, required=True)
    parser.add_argument("--u", type=int, default=1, help="number of ancestors")
    parser.add_argument("--kmax", type=int, default=60)
    parser.add_argument("--j", type=int, help="fixed loop length (lattice law)")
    parser.add_argument(
        "--out", help="output prefix; writes PREFIX.csv and PREFIX.json"
    )
    args = parser.parse_args(argv)
    if args.u < 1 or args.kmax < args.u:
        parser.error("need 1 <= u <= kmax")
    if args.j is None:
        pmf = gw.progeny_pmf_array(args.u, args.eps, args.t, args.kmax)
        law = gw.CPGeo.from_model(args.eps, args.t)
        mean = law.mean
        q = gw.extinction_prob(law)
        if mean < 1.0:
            rate_name, rate = "h", gw.cramer_h(args.eps, args.t)
        elif mean > 1.0:
            rate_name, rate = "I", gw.tail_rate_I(args.eps, args.t)
        else:
            rate_name, rate = "h", 0.0
    else:
        if args.j < 2:
            parser.error("--j must be >= 2")
        pmf = gw.fixed_length_progeny_pmf_array(args.u, args.j, args.t, args.kmax)
        mean = (args.j - 1) * args.t
        q = gw.extinction_prob_fixed_j(args.j, args.t)
        if mean < 1.0:
            rate_name, rate = "h", gw.cramer_h_fixed_j(args.j, args.t)
        elif mean > 1.0:
            rate_name, rate = "I", gw.tail_rate_I_fixed_j(args.j, args.t)
        else:
            rate_name, rate = "h", 0.0
    cdf = np.cumsum(pmf)
    lines = ["k,pmf,cdf"]
    for k in range(args.kmax + 1):
        lines.append(f"{k},{float(pmf[k])!r},{float(cdf[k])!r}")
    meta = {
        "eps": args.eps,
        "t": args.t,
        "u": args.u,
        "j": args.j,
        "extinction_prob": q,
        "offspring_mean": mean,
        "rate_name": rate_name,
        "rate": rate,
        "mass_within_kmax": float(cdf[-1]),
    }
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        print("\n".join(lines))
        print(json.dumps(meta, sort_keys=True))
    return 0


def coag_solve_main(argv=None) -> int:
    """coag-solve: integrate the coagulation system from all singletons and
    emit density and moment tables."""
    parser = argparse.ArgumentParser(
        prog="coag-solve",
        description=(
            "Fixed-step RK4 for the multi-collision coagulation equations "
            "(or the single-arity system with --fixed-j), from a "
            "monodisperse start."
        ),
    )
    parser.add_argument("--eps", type=float, default=1.0)
    parser.add_argument("--t-end", type=float, required=True, dest="t_end")
    parser.add_argument("--K", type=int, default=60)
    parser.add_argument("--Jmax", type=int, default=40)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--fixed-j", type=int, dest="fixed_j")
    parser.add_argument("--checkpoints", type=int, default=5)
    parser.add_argument(
        "--out", help="output prefix; writes PREFIX_rho.csv and PREFIX_moments.csv"
    )
    args = parser.parse_args(argv)
    if args.t_end <= 0:
        parser.error("--t-end must be positive")
    if args.checkpoints < 1:
        parser.error("--checkpoints must be >= 1")
    config = coag.SolverConfig(
        K=args.K, Jmax=args.Jmax, dt=args.dt, eps=args.eps, fixed_j=args.fixed_j
    )
    gel_time = math.inf if args.fixed_j else args.eps**2
    if args.t_end > gel_time:
        print(
            f"note: t_end {args.t_end} exceeds the gelation time "
            f"{gel_time}; later output is in an unvalidated regime",
            file=sys.stderr,
        )
    times = [args.t_end * (i + 1) / args.checkpoints for i in range(args.checkpoints)]
    try:
        traj = coag.integrate(
            coag.monodisperse(args.K), args.eps, args.t_end, config, output_times=times
        )
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rho_lines = ["t,k,rho"]
    mom_lines = ["t,m1,m2,gel"]
    for tm, st in zip(traj.times, traj.states):
        for k in range(1, args.K + 1):
            rho_lines.append(f"{tm!r},{k},{float(st.rho[k])!r}")
        mom_lines.append(
            f"{tm!r},{coag.moments(st, 1)!r},{coag.moments(st, 2)!r},{st.gel!r}"
        )
    if traj.clamp_events:
        print(f"note: {traj.clamp_events} negativity clamp(s)", file=sys.stderr)
    if args.out:
        with open(args.out + "_rho.csv", "w", encoding="utf-8") as fh:
            fh.write("\n".join(rho_lines) + "\n")
        with open(args.out + "_moments.csv", "w", encoding="utf-8") as fh:
            fh.write("\n".join(mom_lines) + "\n")
    else:
        print("\n".join(rho_lines))
        print("\n".join(mom_lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
