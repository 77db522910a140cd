"""Command-line front end.

Every subcommand prints one JSON document (sorted keys) on stdout.  Exit
status is 0 on success, 1 when an audit fails, and 2 for unreadable or
invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from itertools import permutations

from minps.decompose import decompose, sample
from minps.eating import mps
from minps.market import (
    FosdResult,
    Market,
    MarketError,
    assignment_of,
    format_matrix,
    fosd_compare,
    load_market,
    validate_feasibility,
)
from minps.oracles import (
    anonymity_audit,
    enumerate_allowable,
    envy_free,
    exhaustive_sweep,
    rsd,
    sd_efficient,
    weak_sp_audit,
)
from minps.polytope import in_delta_d, lcs_system_general, lcs_system_unit

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

_VERDICTS = {
    FosdResult.DOMINATES: "MPS dominates RSD",
    FosdResult.DOMINATED: "RSD dominates MPS",
    FosdResult.EQUAL: "equal",
    FosdResult.INCOMPARABLE: "incomparable",
}


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _solve(market: Market, general: bool):
    return mps(market, general=general)


def cmd_solve(args, market):
    mu, trace = _solve(market, args.general_d)
    doc = {"agents": list(market.agents), "objects": [o.id for o in market.objects],
           "allocation": format_matrix(mu)}
    if args.trace:
        doc["trace"] = trace.to_dict()
    _emit(doc)
    return EXIT_OK


def cmd_decompose(args, market):
    mu, _ = _solve(market, args.general_d)
    _emit(decompose(market, mu).to_dict(market))
    return EXIT_OK


def cmd_sample(args, market):
    mu, _ = _solve(market, args.general_d)
    drawn = sample(decompose(market, mu), args.seed)
    _emit({"seed": args.seed, "assignment": assignment_of(market, drawn)})
    return EXIT_OK


def cmd_audit(args, market):
    if args.sweep:
        report = exhaustive_sweep(args.sweep_agents, args.sweep_objects, args.cap_max)
        _emit({"sweep": report.to_dict()})
        return EXIT_OK if report.passed else EXIT_FAIL
    mu, _ = _solve(market, args.general_d)
    engine = lambda m: _solve(m, args.general_d)[0]  # noqa: E731
    cert = sd_efficient(market, mu)
    reports = {
        "implementable": {"property": "implementable", "verdict": "pass" if in_delta_d(market, mu) else "fail"},
        "sd_efficient": {"property": "sd_efficient", "verdict": "pass" if cert.efficient else "fail",
                         "certificate": cert.to_dict()},
        "envy_free": envy_free(market, mu).to_dict(),
    }
    perms = list(permutations(range(market.n_agents)))[: args.max_permutations]
    anon = [anonymity_audit(market, p, engine, base=mu) for p in perms]
    failed = next((r for r in anon if not r.passed), None)
    reports["anonymous"] = (failed or anon[0]).to_dict() | {"checked": len(anon)}
    if market.demand == 1 and market.n_objects <= args.max_objects:
        reports["weak_strategyproof"] = weak_sp_audit(market, engine, max_objects=args.max_objects).to_dict()
    doc = {"reports": reports}
    if args.emit_system:
        system = lcs_system_unit(market) if market.demand == 1 else lcs_system_general(market)
        doc["system"] = system.to_dict(market)
    _emit(doc)
    ok = all(r["verdict"] == "pass" for r in reports.values())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args, market):
    feas = validate_feasibility(market)
    doc = {"feasible": feas.feasible,
           "capacity_inequality": feas.capacity_inequality,
           "minimum_inequality": feas.minimum_inequality}
    allocs = enumerate_allowable(market, max_agents=args.max_agents, max_objects=args.max_objects)
    doc["allowable_count"] = len(allocs)
    doc["column_profiles"] = sorted({tuple(sum(c) for c in zip(*a)) for a in allocs})
    if feas.feasible:
        mu, _ = _solve(market, args.general_d)
        doc["mps_certificate"] = sd_efficient(market, mu).to_dict()
        if market.demand == 1:
            doc["rsd_certificate"] = sd_efficient(market, rsd(market)).to_dict()
    _emit(doc)
    return EXIT_OK


def cmd_compare(args, market):
    mu, _ = _solve(market, False)
    nu = rsd(market)
    verdicts = {a: _VERDICTS[fosd_compare(o, mu[i], nu[i])]
                for i, (a, o) in enumerate(zip(market.agents, market.order))}
    _emit({"mps": format_matrix(mu), "rsd": format_matrix(nu), "verdicts": verdicts})
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "decompose": cmd_decompose, "sample": cmd_sample,
            "audit": cmd_audit, "oracle": cmd_oracle, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, market_optional=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("market", nargs="?" if market_optional else None, help="market JSON file")
        p.add_argument("--general-d", action="store_true",
                       help="use the general-demand engine even when d = 1")
        return p

    p = add("solve", "run the mechanism")
    p.add_argument("--trace", action="store_true", help="include the eating trace")
    add("decompose", "lottery over allowable allocations")
    p = add("sample", "draw one allocation from the lottery")
    p.add_argument("--seed", type=int, required=True, help="unsigned 64-bit seed")
    p = add("audit", "check efficiency, fairness and incentive properties", market_optional=True)
    p.add_argument("--emit-system", action="store_true", help="include the lower-contour system")
    p.add_argument("--max-permutations", type=int, default=720)
    p.add_argument("--max-objects", type=int, default=5, help="misreport enumeration cap")
    p.add_argument("--sweep", action="store_true", help="exhaustive sweep over small markets")
    p.add_argument("--sweep-agents", type=int, default=3)
    p.add_argument("--sweep-objects", type=int, default=3)
    p.add_argument("--cap-max", type=int, default=3)
    p = add("oracle", "enumerate allowable allocations and certify efficiency")
    p.add_argument("--max-agents", type=int, default=5)
    p.add_argument("--max-objects", type=int, default=5)
    add("compare", "MPS against random serial dictatorship")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    for name in ("seed", "max_permutations", "max_objects", "max_agents",
                 "sweep_agents", "sweep_objects", "cap_max"):
        value = getattr(args, name, None)
        if value is not None and (value < 0 or (name != "seed" and value == 0) or value >= 1 << 64):
            print(f"error: --{name.replace('_', '-')} out of range: {value}", file=sys.stderr)
            return EXIT_INPUT
    market = None
    try:
        if args.market is not None:
            market = load_market(args.market)
        elif not getattr(args, "sweep", False):
            raise MarketError("a market file is required")
        return COMMANDS[args.command](args, market)
    except (OSError, MarketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
