"""Command-line entry point: solve, table1, table2, tightness, audit, simulate.

Exit codes: 0 ok, 1 audit violation, 2 bad input, 3 rejected instance.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..demand import Family
from ..dynamic_opt import MdpConfig, solution_from_policy, solve_dynamic
from ..errors import ConvergenceError, RejectedInstanceError
from ..guarantees.audits import run_all_audits
from ..loss_chain import Instance
from ..simulator import SimConfig, validate_against_analytic
from ..static_policy import ratio_report
from .testbed import (TABLE1_C, TABLE1_COLUMNS, TABLE2_C, TABLE2_COLUMNS, TIGHTNESS_MU, TestbedSpec,
                      gaps_decreasing, run_sweep, run_tightness, to_csv, to_json)

EXIT_OK, EXIT_VIOLATION, EXIT_BAD_INPUT, EXIT_REJECTED = 0, 1, 2, 3

log = logging.getLogger("reusable_pricing")


class BadInput(Exception):
    pass


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise BadInput(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadInput(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise BadInput(f"config {path} must hold a JSON object")
    return data


def _instance_config(path: str | None):
    """Instance, optional reference policy and solver settings from a config file."""
    if path is None:
        raise BadInput("--config is required")
    data = _load_json(path)
    body = data.get("instance", data)
    try:
        inst = Instance.from_dict(body)
        mdp = MdpConfig(**data.get("mdp", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RejectedInstanceError):
            raise
        raise BadInput(f"invalid instance config: {exc}") from exc
    return inst, data.get("policy"), mdp


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _reference(inst, policy, mdp):
    if policy is None:
        return solve_dynamic(inst, mdp)
    try:
        return solution_from_policy(inst, policy)
    except ValueError as exc:
        raise BadInput(f"invalid policy: {exc}") from exc


def _solve_text(rep: dict) -> str:
    lines = [f"{'C':<22}{rep['instance']['C']}",
             f"{'mu':<22}{rep['instance']['mu']:.6g}",
             f"{'policy':<22}" + " ".join(f"{r:.6g}" for r in rep["policy"]),
             f"{'lambda_tilde':<22}{rep['lambda_tilde']:.6g}",
             f"{'lambda_best':<22}{rep['lambda_best']:.6g}",
             "",
             f"{'':<14}{'optimal':>12}{'tilde':>12}{'best':>12}{'ratio~':>10}{'ratio*':>10}"]
    for key, rkey in (("profit", "profit"), ("market_share", "market"),
                      ("service_level", "service")):
        lines.append(f"{key:<14}{rep['optimal_value'][key]:>12.6g}{rep['value_tilde'][key]:>12.6g}"
                     f"{rep['value_best'][key]:>12.6g}{rep['ratios_tilde'][rkey]:>10.5f}"
                     f"{rep['ratios_best'][rkey]:>10.5f}")
    lines.append(f"{'weighted':<14}{'':>36}{rep['ratios_tilde']['weighted']:>10.5f}"
                 f"{rep['ratios_best']['weighted']:>10.5f}")
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    inst, policy, mdp = _instance_config(args.config)
    sol = _reference(inst, policy, mdp)
    rep = ratio_report(inst, sol).to_dict()
    rep = {"instance": inst.to_dict(), "policy": sol.policy.rates.tolist(), "eta": sol.eta,
           "iterations": sol.iterations, "reference": "given" if policy is not None else "optimal",
           **rep}
    _emit(json.dumps(rep, indent=2) + "\n" if args.format == "json" else _solve_text(rep), args.out)
    return EXIT_OK


def _spec(args, alpha_mode: str, default_C) -> list[TestbedSpec]:
    data = _load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.count is not None:
        data["count"] = args.count
    if args.C:
        data["C_list"] = args.C
    data.setdefault("C_list", default_C)
    data["alpha_mode"] = alpha_mode
    families = args.family or data.pop("families", None) or [data.pop("family", "linear")]
    data.pop("family", None)
    try:
        return [TestbedSpec.from_dict({**data, "family": f}) for f in families]
    except (TypeError, ValueError) as exc:
        raise BadInput(f"invalid testbed config: {exc}") from exc


def _table(args, alpha_mode, default_C, columns) -> int:
    rows = []
    for spec in _spec(args, alpha_mode, default_C):
        log.info("sweeping %s over C=%s with %d instances each", spec.family.value, spec.C_list, spec.count)
        rows += [r.flat() for r in run_sweep(spec, args.jobs)]
    text = to_csv(rows, columns) if args.format == "csv" else to_json(rows, columns)
    _emit(text, args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    if args.family is None and args.config is None:
        args.family = [f.value for f in (Family.LINEAR, Family.EXPONENTIAL, Family.LOGISTIC)]
    return _table(args, "fixed", TABLE1_C, TABLE1_COLUMNS)


def cmd_table2(args) -> int:
    return _table(args, "uniform", TABLE2_C, TABLE2_COLUMNS)


def cmd_tightness(args) -> int:
    rows = run_tightness(args.mu or TIGHTNESS_MU)
    if not gaps_decreasing(rows):
        log.warning("gap to 15/19 is not decreasing along the mu list")
    cols = ("mu", "R", "gap", "service_ratio", "market_ratio", "lambda_tilde")
    _emit(to_csv(rows, cols) if args.format == "csv" else to_json(rows, cols), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    seed = 0 if args.seed is None else args.seed
    count = 10_000 if args.count is None else args.count
    reports = run_all_audits(seed=seed, sample_count=count)
    payload = {"passed": all(r.passed for r in reports), "audits": [r.to_dict() for r in reports]}
    _emit(json.dumps(payload, indent=2, default=str) + "\n", args.out)
    return EXIT_OK if payload["passed"] else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    inst, policy, mdp = _instance_config(args.config)
    sol = _reference(inst, policy, mdp)
    cfg = SimConfig(args.horizon, None, 0 if args.seed is None else args.seed, args.replications)
    rep = validate_against_analytic(inst, sol.policy, cfg)
    payload = {"policy": sol.policy.rates.tolist(), **rep.to_dict(), "all_passed": rep.all_passed}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reusable-pricing",
                                description="Static versus dynamic pricing of reusable resources.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("csv", "json"), default_fmt="csv"):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--count", type=int)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=fmt, default=default_fmt)

    sp = sub.add_parser("solve", help="optimal policy, static rates and ratios for one instance")
    common(sp, ("json", "text"), "json")
    sp.set_defaults(func=cmd_solve)

    for name, func, hlp in (("table1", cmd_table1, "worst profit ratios per family and capacity"),
                            ("table2", cmd_table2, "worst multi-objective ratios per capacity")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.add_argument("--family", action="append", choices=[f.value for f in Family if f is not Family.RECIPROCAL])
        sp.add_argument("--C", type=int, nargs="+", help="capacities to sweep")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.set_defaults(func=func)

    sp = sub.add_parser("tightness", help="ratio along the near-tight three-unit family")
    common(sp)
    sp.add_argument("--mu", type=float, nargs="+")
    sp.set_defaults(func=cmd_tightness)

    sp = sub.add_parser("audit", help="numerical audits of the ratio bounds")
    common(sp, ("json",), "json")
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("simulate", help="simulate a policy and compare with the analytic values")
    common(sp, ("json",), "json")
    sp.add_argument("--horizon", type=float, default=1e5)
    sp.add_argument("--replications", type=int, default=20)
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RejectedInstanceError as exc:
        print(f"rejected instance: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (BadInput, ValueError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
