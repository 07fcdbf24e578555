"""Command-line entry point: error sweeps, published-table presets and certification."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .errors import TurnpointError
from .experiments import (
    ExperimentPlan,
    ProblemSpec,
    parse_floats,
    parse_ints,
    emit_certificates,
    emit_table,
    load_config,
    parse_eps_list,
    preset,
    run_certification,
    run_plan,
)
from .meshgen import LambdaMode, Nu

log = logging.getLogger("turnpoint")

DEFAULT_EPS = "2^-14,2^-18,2^-22"
DEFAULT_N = "64,128,256,512"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="turnpoint",
        description="Hybrid finite-difference solver for a singularly perturbed turning-point problem "
                    "on S(l) meshes. Prints convergence tables (csv or markdown) to stdout.",
    )
    ap.add_argument("--table", type=int, choices=(2, 3, 4, 5, 6), help="run a published table preset")
    ap.add_argument("--ell", help="number of transition points, comma list (default 3)")
    ap.add_argument("--lambda", dest="lambda_mode", choices=("inv-eps", "N"), help="lambda = 1/eps or N")
    ap.add_argument("--alpha", type=float, help="transition point scale (default 1)")
    ap.add_argument("--eps", help=f"comma list, e.g. 2^-14,2^-18 (default {DEFAULT_EPS})")
    ap.add_argument("--N", dest="n_list", help=f"steps on [0,1], comma list (default {DEFAULT_N})")
    ap.add_argument("--ratios", help="piece fractions q_1..q_(l+1), comma list; fractions like 1/8 allowed")
    ap.add_argument("--nu", type=int, choices=(0, -1), help="left endpoint (default -1)")
    ap.add_argument("--problem", default="tanh-mms", help="'tanh-mms' or path to an INI config file")
    ap.add_argument("--format", dest="fmt", choices=("csv", "md"), help="output format (default csv)")
    ap.add_argument("--no-transition-scheme", action="store_true",
                    help="use the central scheme at the switching node (ablation)")
    ap.add_argument("--no-orders", action="store_true", help="skip the N/2 runs and the Ord columns")
    ap.add_argument("--eps-orders", action="store_true", help="add the Ord_eps column (needs eps ratio 1/4)")
    ap.add_argument("--allow-nonmonotone", action="store_true",
                    help="build meshes whose steps shrink between pieces")
    ap.add_argument("--certify", action="store_true", help="run the certification suite instead of the sweep")
    ap.add_argument("--trials", type=int, default=1000, help="random draws per certification check")
    ap.add_argument("--seed", type=int, default=0, help="seed for certification draws")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    return ap


def _plans(args) -> list[ExperimentPlan]:
    if args.table is not None:
        plans = preset(args.table)
        over = {}
        if args.fmt:
            over["fmt"] = args.fmt
        if args.no_transition_scheme:
            over["transition"] = False
        return [replace(p, **over) for p in plans]

    base = {} if args.problem == "tanh-mms" else load_config(args.problem)
    kw = dict(base)
    if args.ell is not None:
        kw["ells"] = parse_ints(args.ell)
    kw.setdefault("ells", (3,))
    if args.lambda_mode is not None:
        kw["lambda_mode"] = LambdaMode.parse(args.lambda_mode)
    if args.alpha is not None:
        kw["alpha"] = args.alpha
    if args.eps is not None:
        kw["eps_list"] = parse_eps_list(args.eps)
    kw.setdefault("eps_list", parse_eps_list(DEFAULT_EPS))
    if args.n_list is not None:
        kw["n_list"] = parse_ints(args.n_list)
    kw.setdefault("n_list", parse_ints(DEFAULT_N))
    if args.ratios is not None:
        kw["ratios"] = parse_floats(args.ratios)
    if args.nu is not None:
        prob = kw.get("problem", ProblemSpec())
        if prob.kind == "tanh-mms" and args.nu != -1:
            raise TurnpointError("the tanh test problem lives on [-1, 1]; --nu 0 needs a config file")
        kw["problem"] = replace(prob, nu=Nu(args.nu))
    if args.fmt:
        kw["fmt"] = args.fmt
    if args.no_transition_scheme:
        kw["transition"] = False
    if args.no_orders:
        kw["orders"] = False
    if args.eps_orders:
        kw["eps_orders"] = True
    if args.allow_nonmonotone:
        kw["enforce_monotone"] = False
    return [ExperimentPlan(**kw)]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        plans = _plans(args)
        if args.allow_nonmonotone and args.table is not None:
            plans = [replace(p, enforce_monotone=False) for p in plans]
        ok = True
        for plan in plans:
            if args.certify:
                results = run_certification(plan, args.trials, args.seed)
                ok &= all(c.passed for _, certs in results for c in certs)
                for _, certs in results:
                    for c in certs:
                        if not c.passed:
                            log.warning("%s", c.line())
                sys.stdout.write(emit_certificates(results, plan.fmt))
            else:
                rows = run_plan(plan, on_cell=lambda r: log.info(
                    "eps=%g N=%d ell=%d -> %s", r.epsilon, r.N, r.ell,
                    "failed" if r.failed else f"E={r.E} iterations={r.iterations}"))
                ok &= not any(r.failed for r in rows)
                sys.stdout.write(emit_table(rows, plan.fmt, plan.eps_orders))
    except (TurnpointError, OSError) as exc:
        log.error("%s", exc)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
