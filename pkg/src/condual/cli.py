"""Command-line front end.

One subcommand per capability: primal and dual solves, the duality
verifications, superhedging, the critical wealth, condition certificates,
endowment embedding, and the seeded randomized property suite.  Exit codes:
0 all-pass, 1 a verification failed, 2 input/usage errors.

Setting CONDUAL_EXACT=1 in the environment forces exact rational mode for
all market-file numbers (floats included).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .conditions import (
    check_convex_compactness,
    check_nonempty,
    check_projected_closedness,
    check_supermartingale_condition,
)
from .dual import solve_dual, superhedge_price
from .market import embed_endowment, market_to_json, parse_market_file
from .numbers import SchemaError, parse_number
from .primal import solve_primal
from .properties import run_property_suite
from .reporting import emit_report
from .utility import parse_utility
from .verify import verify_conjugacy, verify_primal_dual_link, verify_xbar

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2


@dataclass
class RunConfig:
    command: str
    market_path: str | None = None
    utility_doc: object = None
    x: float | None = None
    y: float | None = None
    x_grid: list = field(default_factory=list)
    y_grid: list = field(default_factory=list)
    payoff: dict | None = None
    measure: dict | None = None
    solver_tol: float = 1e-8
    verify_tol: float = 1e-5
    fmt: str = "text"
    seed: int = 0
    scale: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.solver_tol <= 0 or self.verify_tol <= 0:
            raise SchemaError("tolerances must be positive")
        for grid in (self.x_grid, self.y_grid):
            if grid and list(grid) != sorted(grid):
                raise SchemaError("grids must be sorted ascending")


def run(config: RunConfig):
    """Dispatch a config; returns (exit code, report dict)."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise SchemaError(f"unknown command {config.command!r}")
    return handler(config)


def _market(config):
    if not config.market_path:
        raise SchemaError("this command needs --market")
    return parse_market_file(config.market_path)


def _utility(config):
    if config.utility_doc is None:
        raise SchemaError("this command needs --utility")
    return parse_utility(config.utility_doc)


def _cmd_solve_primal(config):
    market = _market(config)
    utility = _utility(config)
    if config.x is None:
        raise SchemaError("solve-primal needs --x")
    sol = solve_primal(market, utility, config.x, tol=config.solver_tol)
    report = {
        "command": "solve-primal",
        "status": sol.status,
        "value": sol.value,
        "x": config.x,
    }
    if sol.portfolio is not None:
        ids = {i: market.tree.nodes[i].node_id for i in market.tree.nonleaf}
        report["portfolio"] = {ids[i]: list(v)
                               for i, v in sol.portfolio.as_dict().items()}
        report["terminal"] = {market.tree.nodes[i].node_id: w
                              for i, w in zip(market.tree.leaves, sol.terminal)}
        report["gradient_mapping"] = sol.gradient_mapping
    return EXIT_OK, report


def _cmd_solve_dual(config):
    market = _market(config)
    utility = _utility(config)
    if config.y is None:
        raise SchemaError("solve-dual needs --y")
    sol = solve_dual(market, utility, config.y, tol=config.solver_tol)
    report = {
        "command": "solve-dual",
        "y": config.y,
        "value": sol.value,
        "attained": sol.attained,
        "gap": sol.gap,
    }
    if sol.measure is not None:
        leaves = [market.tree.nodes[i].node_id for i in market.tree.leaves]
        report["weights"] = dict(zip(leaves, sol.measure.weights))
        report["densities"] = dict(zip(leaves, sol.measure.densities))
    return EXIT_OK, report


def _cmd_verify_duality(config):
    market = _market(config)
    utility = _utility(config)
    if not config.x_grid or not config.y_grid:
        raise SchemaError("verify-duality needs --x-grid and --y-grid")
    rep = verify_conjugacy(market, utility, config.x_grid, config.y_grid,
                           tol=config.verify_tol)
    report = {
        "command": "verify-duality",
        "residuals": [{
            "kind": r.kind, "point": r.point, "residual": r.residual,
            "bound": r.bound, "boundary": r.boundary, "ok": r.ok,
        } for r in rep.records],
        "worst_gap": rep.worst_gap,
        "xbar": rep.xbar,
        "verdict": "pass" if rep.ok else "fail",
    }
    return (EXIT_OK if rep.ok else EXIT_VERIFICATION_FAILED), report


def _cmd_verify_link(config):
    market = _market(config)
    utility = _utility(config)
    if config.x is None:
        raise SchemaError("verify-link needs --x")
    rep = verify_primal_dual_link(market, utility, config.x,
                                  tol=config.verify_tol)
    verdict = "abstain" if rep.ok is None else ("pass" if rep.ok else "fail")
    report = {
        "command": "verify-link",
        "y_hat": rep.y_hat,
        "residuals": list(rep.residuals),
        "max_residual": rep.max_residual,
        "attained": rep.attained,
        "verdict": verdict,
    }
    code = EXIT_OK if rep.ok else EXIT_VERIFICATION_FAILED
    return (EXIT_OK if verdict == "abstain" else code), report


def _cmd_superhedge(config):
    market = _market(config)
    if config.payoff is None:
        raise SchemaError("superhedge needs --payoff")
    payoff = _leaf_payoff(market, config.payoff)
    res = superhedge_price(market, payoff)
    leaves = [market.tree.nodes[i].node_id for i in market.tree.leaves]
    report = {
        "command": "superhedge",
        "price": res.price,
        "dual_value": res.dual_value,
        "bound": res.bound,
        "witness": dict(zip(leaves, res.witness.weights)) if res.witness else None,
    }
    return EXIT_OK, report


def _cmd_xbar(config):
    market = _market(config)
    rep = verify_xbar(market, tol=max(config.verify_tol, 1e-6))
    report = {
        "command": "xbar",
        "from_support": rep.from_support,
        "from_essinf": rep.from_essinf,
        "from_bisection": rep.from_bisection,
        "spread": rep.spread,
        "verdict": "pass" if rep.ok else "fail",
    }
    return (EXIT_OK if rep.ok else EXIT_VERIFICATION_FAILED), report


def _cmd_check_conditions(config):
    market = _market(config)
    nonempty = check_nonempty(market)
    closedness = check_projected_closedness(market)
    cert = check_supermartingale_condition(market)
    compactness = check_convex_compactness(market)
    report = {
        "command": "check-conditions",
        "nonempty": bool(nonempty),
        "projected_closedness": {nid: verdict
                                 for nid, (verdict, _) in closedness.verdicts.items()},
        "supermartingale": _certificate_payload(market, cert),
        "convex_compactness": compactness.verdict,
    }
    ok = bool(nonempty) and bool(closedness) and cert.certified \
        and compactness.verdict == "true"
    report["verdict"] = "pass" if ok else "fail"
    return (EXIT_OK if ok else EXIT_VERIFICATION_FAILED), report


def _certificate_payload(market, cert):
    payload = {"certified": cert.certified, "stage": cert.stage}
    if cert.certified:
        leaves = [market.tree.nodes[i].node_id for i in market.tree.leaves]
        ids = {i: market.tree.nodes[i].node_id for i in market.tree.nonleaf}
        payload["measure"] = dict(zip(leaves, cert.measure.weights))
        payload["reference"] = {ids[i]: list(v)
                                for i, v in cert.reference.as_dict().items()}
        payload["compensator"] = dict(cert.compensator)
        payload["total_compensator"] = cert.total_compensator
    else:
        payload["failure_node"] = cert.failure_node
        payload["failure_direction"] = cert.failure_direction
    if cert.notes:
        payload["notes"] = list(cert.notes)
    return payload


def _cmd_embed_endowment(config):
    market = _market(config)
    if config.measure is None:
        raise SchemaError("embed-endowment needs --measure")
    with open(config.market_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    endowment_doc = doc.get("endowment")
    if endowment_doc is None:
        raise SchemaError("the market file carries no endowment")
    endowment = {k: parse_number(v, f"endowment[{k}]")
                 for k, v in endowment_doc.items()}
    measure = {k: parse_number(v, f"measure[{k}]")
               for k, v in config.measure.items()}
    try:
        augmented, offset = embed_endowment(market, endowment, measure)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    augmented_doc = market_to_json(augmented)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            json.dump(augmented_doc, fh, indent=2)
    report = {
        "command": "embed-endowment",
        "offset": offset,
        "augmented_dimension": augmented.dim,
        "synthetic_prices": {n.node_id: augmented.prices[n.index][-1]
                             for n in augmented.tree.nodes},
        "written_to": config.output,
    }
    return EXIT_OK, report


def _cmd_properties(config):
    results = run_property_suite(config.seed, scale=config.scale)
    ok = all(r.passed for r in results)
    report = {
        "command": "properties",
        "seed": config.seed,
        "results": [{
            "name": r.name, "passed": r.passed, "cases": r.cases,
            "seconds": round(r.seconds, 3), "detail": r.detail,
        } for r in results],
        "verdict": "pass" if ok else "fail",
    }
    return (EXIT_OK if ok else EXIT_VERIFICATION_FAILED), report


def _leaf_payoff(market, doc):
    leaves = [market.tree.nodes[i].node_id for i in market.tree.leaves]
    missing = [nid for nid in leaves if nid not in doc]
    if missing:
        raise SchemaError(f"payoff missing leaves {missing}")
    return tuple(parse_number(doc[nid], f"payoff[{nid}]") for nid in leaves)


_HANDLERS = {
    "solve-primal": _cmd_solve_primal,
    "solve-dual": _cmd_solve_dual,
    "verify-duality": _cmd_verify_duality,
    "verify-link": _cmd_verify_link,
    "superhedge": _cmd_superhedge,
    "xbar": _cmd_xbar,
    "check-conditions": _cmd_check_conditions,
    "embed-endowment": _cmd_embed_endowment,
    "properties": _cmd_properties,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="condual",
        description="Constrained utility-maximization duality on event trees")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, *, market=True, utility=False, x=False, y=False,
            grids=False, payoff=False, measure=False, seed=False):
        p = sub.add_parser(name)
        if market:
            p.add_argument("--market", required=True, help="market JSON file")
        if utility:
            p.add_argument("--utility", required=True,
                           help='descriptor, e.g. \'{"family":"log"}\' or "log"')
        if x:
            p.add_argument("--x", type=float, help="initial wealth")
        if y:
            p.add_argument("--y", type=float, help="dual scale")
        if grids:
            p.add_argument("--x-grid", help="comma-separated wealths")
            p.add_argument("--y-grid", help="comma-separated dual scales")
        if payoff:
            p.add_argument("--payoff", required=True,
                           help='leaf payoff JSON, e.g. \'{"up":1,"down":0}\'')
        if measure:
            p.add_argument("--measure", required=True,
                           help="pricing measure JSON (leaf id -> weight)")
        if seed:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--scale", type=int, default=1,
                           help="multiplier on the per-property case counts")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="solver tolerance (default 1e-8)")
        p.add_argument("--verify-tol", type=float, default=1e-5,
                       help="verification tolerance (default 1e-5)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--output", help="write an output artifact here")
        return p

    add("solve-primal", utility=True, x=True)
    add("solve-dual", utility=True, y=True)
    add("verify-duality", utility=True, grids=True)
    add("verify-link", utility=True, x=True)
    add("superhedge", payoff=True)
    add("xbar")
    add("check-conditions")
    add("embed-endowment", measure=True)
    add("properties", market=False, seed=True)
    return parser


def _parse_grid(text):
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SchemaError(f"bad grid {text!r}") from exc


def _parse_json_flag(text, what):
    if text is None:
        return None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        if what == "utility":
            return text  # bare family name like "log"
        raise SchemaError(f"{what} flag is not valid JSON: {text!r}")
    return doc


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            market_path=getattr(args, "market", None),
            utility_doc=_parse_json_flag(getattr(args, "utility", None),
                                         "utility"),
            x=getattr(args, "x", None),
            y=getattr(args, "y", None),
            x_grid=_parse_grid(getattr(args, "x_grid", None)),
            y_grid=_parse_grid(getattr(args, "y_grid", None)),
            payoff=_parse_json_flag(getattr(args, "payoff", None), "payoff"),
            measure=_parse_json_flag(getattr(args, "measure", None), "measure"),
            solver_tol=args.tol,
            verify_tol=args.verify_tol,
            fmt=args.format,
            seed=getattr(args, "seed", 0),
            scale=getattr(args, "scale", 1),
            output=args.output,
        )
        code, report = run(config)
    except SchemaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    sys.stdout.write(emit_report(report, args.format).decode())
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
