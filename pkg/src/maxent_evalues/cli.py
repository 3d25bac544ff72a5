"""Command-line interface.

Every subcommand prints a JSON report on stdout; errors are reported as
JSON on stderr with a nonzero exit code. Sweep-like subcommands can also
emit TSV rows for plotting.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .diagnostics import (
    WORST_CASE_BOUNDS,
    WORST_CASE_STEP,
    fit_log_slope,
    gap_r,
    gap_r_prime,
    regret,
    theorem1_diagnostic,
    worst_case_r_prime,
)
from .evariables import (
    POST_HOC_LEVEL,
    combine_evalues,
    decide,
    e_power,
    log_e_gro_can,
    log_e_gro_mic,
    log_e_gro_point,
    log_e_pseudo,
    ripr_solve,
)
from .models import Table
from .priors import (
    DEFAULT_SCALE,
    PriorSpec,
    induced_group_pmf,
    null_optimal_prior,
    pseudo_null_density,
)
from .table_io import network_to_table, parse_network, parse_table


def parse_prior(text: str) -> PriorSpec:
    """Prior syntax: 'uniform', 'nml', or 'beta:a,b'."""
    text = text.strip().lower()
    if text == "uniform":
        return PriorSpec.uniform()
    if text == "nml":
        return PriorSpec.nml()
    if text.startswith("beta:"):
        parts = text[len("beta:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"expected beta:a,b, got {text!r}")
        return PriorSpec.from_beta(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown prior {text!r}")


def _priors_for(args, k: int) -> list[PriorSpec]:
    if getattr(args, "gamma", None) is not None:
        return [PriorSpec.from_beta(args.gamma, args.gamma)] * k
    texts = args.prior
    if len(texts) == 1:
        return [parse_prior(texts[0])] * k
    if len(texts) != k:
        raise ValueError(f"expected 1 or {k} priors, got {len(texts)}")
    return [parse_prior(t) for t in texts]


def _emit(payload: dict, args=None) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _report_payload(report, alpha: float, inputs: dict) -> dict:
    payload = report.to_dict()
    payload["alpha"] = alpha
    payload["decision"] = decide(report.log_e, alpha)
    payload["post_hoc_level"] = POST_HOC_LEVEL
    payload["post_hoc_decision"] = "reject" if report.log_e >= 1.0 else "continue"
    payload["inputs"] = inputs
    if payload["achieved_kl"] is None:
        del payload["achieved_kl"]
    return payload


def _run_test(table: Table, args) -> dict:
    priors = _priors_for(args, table.k)
    inputs = {
        "groups": [{"n": n, "ones": o} for n, o in table.groups],
        "priors": [s.describe() for s in priors],
        "statistic": args.statistic,
    }
    if args.statistic == "mic":
        report = log_e_gro_mic(table, priors)
    elif args.statistic == "can":
        report = log_e_gro_can(
            table, priors, grid_size=args.ripr_grid, tol=args.ripr_tol,
            max_iter=args.ripr_max_iter,
        )
    elif args.statistic == "pseudo":
        density = pseudo_null_density(
            priors, table.sizes, scale=args.scale, grid_size=args.density_grid
        )
        report = log_e_pseudo(table, priors, density)
    else:
        if args.palt is None:
            raise ValueError("--statistic point requires --palt")
        palt = _parse_palt(args.palt, table.k)
        inputs["p_alt"] = list(palt)
        report = log_e_gro_point(
            table, palt, grid_size=args.ripr_grid, tol=args.ripr_tol,
            max_iter=args.ripr_max_iter,
        )
    return _report_payload(report, args.alpha, inputs)


def _parse_palt(text: str, k: int) -> tuple[float, ...]:
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 1:
        vals = vals * k
    if len(vals) != k:
        raise ValueError(f"expected 1 or {k} alternative parameters")
    return tuple(vals)


def cmd_test(args) -> dict:
    return _run_test(parse_table(args.table, args.format), args)


def cmd_net_test(args) -> dict:
    net = parse_network(args.network, args.mode, args.constrained_block)
    table = network_to_table(net)
    payload = _run_test(table, args)
    payload["inputs"]["mode"] = args.mode
    return payload


def cmd_epower(args) -> dict:
    sizes = tuple(args.m for _ in range(args.k)) if args.sizes is None else tuple(
        int(s) for s in args.sizes.split(",")
    )
    priors = _priors_for(args, len(sizes))
    group_pmfs = [induced_group_pmf(s, n) for s, n in zip(priors, sizes)]
    density = pseudo_null_density(
        priors, sizes, scale=args.scale, grid_size=args.density_grid
    )
    solution = ripr_solve(
        null_optimal_prior(group_pmfs), sum(sizes),
        grid_size=args.ripr_grid, tol=args.ripr_tol, max_iter=args.ripr_max_iter,
    )

    def as_fn(evaluate):
        return lambda ones: evaluate(Table(tuple(zip(sizes, ones)))).log_e

    mic = e_power(as_fn(lambda t: log_e_gro_mic(t, priors)), group_pmfs)
    can = e_power(as_fn(lambda t: log_e_gro_can(t, priors, solution=solution)), group_pmfs)
    pseudo = e_power(as_fn(lambda t: log_e_pseudo(t, priors, density)), group_pmfs)
    return {
        "sizes": list(sizes),
        "priors": [s.describe() for s in priors],
        "e_power": {"mic": mic, "can": can, "pseudo": pseudo},
        "sandwich_ok": bool(mic <= can + 1e-8 and can <= pseudo + 2e-8),
        "achieved_kl": solution.achieved_kl,
    }


def _gap_inputs(args):
    sizes = tuple(args.m for _ in range(args.k)) if args.sizes is None else tuple(
        int(s) for s in args.sizes.split(",")
    )
    priors = _priors_for(args, len(sizes))
    density = pseudo_null_density(
        priors, sizes, scale=args.scale, grid_size=args.density_grid
    )
    return sizes, priors, density


def cmd_gap(args) -> dict:
    sizes, priors, density = _gap_inputs(args)
    report = gap_r(priors, sizes, density)
    return {
        "sizes": list(sizes),
        "priors": [s.describe() for s in priors],
        "scale": args.scale,
        "r": report.r,
    }


def cmd_rprime(args) -> dict:
    sizes, priors, density = _gap_inputs(args)
    payload = {
        "sizes": list(sizes),
        "priors": [s.describe() for s in priors],
        "scale": args.scale,
    }
    if args.worst_case:
        value, argmax = worst_case_r_prime(
            priors, sizes, density,
            grid_step=args.grid_step, bounds=(args.lo, args.hi),
        )
        payload["worst_case_r_prime"] = value
        payload["argmax"] = list(argmax)
    else:
        if args.palt is None:
            raise ValueError("rprime needs --palt or --worst-case")
        palt = _parse_palt(args.palt, len(sizes))
        payload["p_alt"] = list(palt)
        payload["r_prime"] = gap_r_prime(palt, priors, sizes, density)
    return payload


def cmd_regret(args) -> dict:
    ms = [int(m) for m in args.m_list.split(",")]
    palts = [_parse_palt(p, args.k) for p in args.palt]
    prior = (
        PriorSpec.from_beta(args.gamma, args.gamma)
        if args.gamma is not None
        else parse_prior(args.prior[0])
    )
    rows = []
    curves = []
    for palt in palts:
        points = []
        for m in sorted(ms):
            value = regret(
                palt, [prior] * args.k, [m] * args.k, args.candidate,
                grid_size=args.ripr_grid, tol=args.ripr_tol,
                max_iter=args.ripr_max_iter,
            )
            points.append((m, value))
            rows.append({"p_alt": list(palt), "m": m, "regret": value})
        a, b, resid = fit_log_slope(points)
        curves.append(
            {"p_alt": list(palt), "fitted_a": a, "fitted_b": b, "residual": resid}
        )
    payload = {
        "prior": prior.describe(),
        "candidate": args.candidate,
        "points": rows,
        "curves": curves,
    }
    if args.tsv:
        with open(args.tsv, "w") as fh:
            fh.write("p_alt\tm\tregret\n")
            for row in rows:
                fh.write(
                    f"{','.join(str(v) for v in row['p_alt'])}\t{row['m']}\t{row['regret']!r}\n"
                )
        payload["tsv"] = args.tsv
    return payload


def cmd_theorem1(args) -> dict:
    spec = (
        PriorSpec.from_beta(args.gamma, args.gamma)
        if args.gamma is not None
        else parse_prior(args.prior[0])
    )
    tv = theorem1_diagnostic(spec, args.m, args.bins)
    return {"prior": spec.describe(), "m": args.m, "bins": args.bins, "tv": tv}


def cmd_continue(args) -> dict:
    log_es = []
    for item in args.evalue:
        try:
            value = float(item)
        except ValueError:
            payload = json.loads(open(item).read())
            log_es.append(float(payload["log_e"]))
            continue
        if value <= 0:
            raise ValueError(f"e-value must be positive: {item}")
        log_es.append(float(np.log(value)))
    log_e = combine_evalues(log_es)
    return {
        "log_e": log_e,
        "e": float(np.exp(log_e)),
        "alpha": args.alpha,
        "decision": decide(log_e, args.alpha),
        "post_hoc_level": POST_HOC_LEVEL,
        "post_hoc_decision": "reject" if log_e >= 1.0 else "continue",
        "components": len(log_es),
    }


def _add_prior_args(p):
    p.add_argument("--prior", nargs="+", default=["uniform"],
                   help="uniform | nml | beta:a,b (one shared or one per group)")
    p.add_argument("--gamma", type=float, default=None,
                   help="shorthand for symmetric beta:g,g priors")


def _add_solver_args(p):
    p.add_argument("--ripr-grid", type=int, default=2001)
    p.add_argument("--ripr-tol", type=float, default=1e-10)
    p.add_argument("--ripr-max-iter", type=int, default=50000)
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    p.add_argument("--density-grid", type=int, default=20001)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxent-evalues",
        description="E-value tests between maximum entropy models on 2xk binary tables",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="e-value test of an observed table")
    p.add_argument("--table", required=True)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--statistic", choices=("mic", "can", "pseudo", "point"),
                   default="mic")
    p.add_argument("--palt", default=None, help="comma-separated alternative means")
    p.add_argument("--alpha", type=float, default=0.05)
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("net-test", help="network test via table reduction")
    p.add_argument("--network", required=True)
    p.add_argument("--mode", required=True, choices=(
        "sbm_vs_er_undirected", "sbm_vs_er_directed", "pcm_vs_er_bipartite"))
    p.add_argument("--constrained-block", default=None)
    p.add_argument("--statistic", choices=("mic", "can", "pseudo", "point"),
                   default="mic")
    p.add_argument("--palt", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_net_test)

    p = sub.add_parser("epower", help="exact e-powers of mic/can/pseudo")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--sizes", default=None, help="comma-separated group sizes")
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_epower)

    p = sub.add_parser("gap", help="exact-vs-pseudo gap r")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--sizes", default=None)
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_gap)

    p = sub.add_parser("rprime", help="gap under a point alternative")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--sizes", default=None)
    p.add_argument("--palt", default=None)
    p.add_argument("--worst-case", action="store_true")
    p.add_argument("--grid-step", type=float, default=WORST_CASE_STEP)
    p.add_argument("--lo", type=float, default=WORST_CASE_BOUNDS[0])
    p.add_argument("--hi", type=float, default=WORST_CASE_BOUNDS[1])
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_rprime)

    p = sub.add_parser("regret", help="regret curve and fitted log-slope")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--palt", nargs="+", required=True)
    p.add_argument("--m-list", required=True, help="comma-separated m values")
    p.add_argument("--candidate", choices=("gro_mic", "gro_can", "pseudo"),
                   default="gro_mic")
    p.add_argument("--tsv", default=None)
    _add_prior_args(p)
    _add_solver_args(p)
    p.set_defaults(fn=cmd_regret)

    p = sub.add_parser("theorem1", help="prior-convergence TV diagnostic")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--bins", type=int, default=20)
    _add_prior_args(p)
    p.set_defaults(fn=cmd_theorem1)

    p = sub.add_parser("continue", help="combine independent e-values")
    p.add_argument("evalue", nargs="+",
                   help="e-values or report JSON files to multiply")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(fn=cmd_continue)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.fn(args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
