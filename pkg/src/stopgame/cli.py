"""Scenario ingestion, command dispatch, and machine-readable reporting.

Commands: ``validate`` (invariant checking only), ``solve`` (backward
induction), ``verify`` (solve plus the full brute-force verification), and
``values`` (the game-value table alone). Scenarios are JSON files; rationals
cross the JSON boundary as "num/den" strings so nothing is ever rounded.

Exit codes: 0 success, 1 validation or assertion failure, 2 parse or usage
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .oracle import (
    Caps,
    CheckResult,
    GameValueReport,
    SkipNote,
    VerificationResult,
    verify_theorem,
)
from .payoff import BiPayoff, PayoffSpec, UtilityFn, build_payoff, validate_payoff
from .space import FilteredSpace, Rational, validate_space
from .randgen import random_scenario_dict
from .solver import GameSolution, solve

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2

DEFAULT_EPS = "1e-9"


class ScenarioError(Exception):
    """Malformed scenario file or arguments; maps to exit code 2."""


def rational_str(x: Rational) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(value: Any, where: str = "") -> Fraction:
    try:
        if isinstance(value, str) or isinstance(value, int):
            return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"bad rational {value!r}{' at ' + where if where else ''}: {exc}") from None
    raise ScenarioError(f"rational must be a \"num/den\" string or integer, got {value!r}"
                        + (f" at {where}" if where else ""))


def _parse_process(raw: Any, where: str) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise ScenarioError(f"{where} must be a list of per-time lists")
    return tuple(
        tuple(parse_rational(v, f"{where}[{t}][{k}]") for k, v in enumerate(row))
        for t, row in enumerate(raw)
    )


def _parse_utility(raw: Any) -> UtilityFn:
    if not isinstance(raw, dict) or "name" not in raw:
        raise ScenarioError("utility must be an object with a 'name'")
    name = raw["name"]
    try:
        if name == "identity":
            return UtilityFn("identity")
        if name == "piecewise_linear":
            knots = tuple(
                (parse_rational(a, "utility.knots"), parse_rational(b, "utility.knots"))
                for a, b in raw.get("knots", [])
            )
            return UtilityFn(
                "piecewise_linear",
                knots=knots,
                slope_left=parse_rational(raw.get("slope_left", "1"), "utility.slope_left"),
                slope_right=parse_rational(raw.get("slope_right", "1"), "utility.slope_right"),
            )
        if name == "exponential":
            return UtilityFn("exponential", rate=parse_rational(raw.get("rate", "1"), "utility.rate"))
    except ValueError as exc:
        raise ScenarioError(f"bad utility: {exc}") from None
    raise ScenarioError(f"unknown utility '{name}'")


def _parse_payoff_spec(raw: Any) -> PayoffSpec:
    if not isinstance(raw, dict) or "generator" not in raw:
        raise ScenarioError("payoff must be an object with a 'generator'")
    gen = raw["generator"]
    if gen == "explicit":
        table_raw = raw.get("table")
        if not isinstance(table_raw, list):
            raise ScenarioError("explicit payoff needs a 'table' list")
        table = tuple(
            tuple(
                tuple(parse_rational(v, f"table[{s}][{t}][{k}]") for k, v in enumerate(slice_))
                for t, slice_ in enumerate(row)
            )
            for s, row in enumerate(table_raw)
        )
        return PayoffSpec(generator="explicit", table=table)
    if gen in ("distance", "mismatch"):
        return PayoffSpec(generator=gen)
    if gen == "dynkin":
        return PayoffSpec(
            generator="dynkin",
            f=_parse_process(raw.get("f"), "payoff.f"),
            g=_parse_process(raw.get("g"), "payoff.g"),
        )
    if gen == "utility_spread":
        return PayoffSpec(
            generator="utility_spread",
            f=_parse_process(raw.get("f"), "payoff.f"),
            g=_parse_process(raw.get("g"), "payoff.g"),
            utility=_parse_utility(raw.get("utility", {"name": "identity"})),
            pad_to_horizon=bool(raw.get("pad_to_horizon", False)),
        )
    if gen == "market_entry":
        return PayoffSpec(
            generator="market_entry",
            first_mover=_parse_process(raw.get("first_mover"), "payoff.first_mover"),
            second_mover_discount=_parse_process(
                raw.get("second_mover_discount"), "payoff.second_mover_discount"
            ),
        )
    raise ScenarioError(f"unknown payoff generator '{gen}'")


@dataclass(frozen=True)
class Scenario:
    name: str
    space: FilteredSpace
    payoff_spec: PayoffSpec
    mode: str = "exact"
    caps: Caps = Caps()


def scenario_from_dict(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        space_raw = raw["space"]
        horizon = int(space_raw["horizon"])
        outcomes = tuple(
            (str(o.get("label", f"w{i}")), parse_rational(o["probability"], f"outcomes[{i}]"))
            for i, o in enumerate(space_raw["outcomes"])
        )
        filtration = tuple(
            tuple(tuple(int(i) for i in atom) for atom in partition)
            for partition in space_raw["filtration"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad space description: {exc}") from None
    space = FilteredSpace(horizon, outcomes, filtration)
    payoff_spec = _parse_payoff_spec(raw.get("payoff"))
    mode = raw.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise ScenarioError(f"mode must be 'exact' or 'float', got {mode!r}")
    caps_raw = raw.get("caps", {})
    caps = Caps(
        stopping_times=int(caps_raw.get("stopping", Caps().stopping_times)),
        strategy_maps=int(caps_raw.get("strategies", Caps().strategy_maps)),
    )
    return Scenario(
        name=str(raw.get("name", "unnamed")),
        space=space,
        payoff_spec=payoff_spec,
        mode=mode,
        caps=caps,
    )


def bundled_scenario_path(name: str) -> Path | None:
    candidate = resources.files("stopgame").joinpath("scenarios", name)
    if candidate.is_file():
        with resources.as_file(candidate) as p:
            return Path(p)
    return None


def load_scenario(path: str) -> Scenario:
    """Read a scenario file; bare names fall back to the bundled corpus."""
    p = Path(path)
    if not p.exists():
        bundled = bundled_scenario_path(Path(path).name)
        if bundled is None:
            raise ScenarioError(f"no such file: {path}")
        p = bundled
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"JSON parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(raw)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class SolutionReport:
    """Everything one run produces, in a shape that round-trips through JSON."""

    scenario: str
    mode: str
    value: Rational
    v1: tuple[tuple[Rational, ...], ...]  # time -> per-atom values, canonical atom order
    v2: tuple[tuple[Rational, ...], ...]
    v: tuple[tuple[Rational, ...], ...]
    rho_d: tuple[int, ...]
    tau_d: tuple[int, ...]
    rho_u: tuple[tuple[int, ...], ...]
    tau_u: tuple[tuple[int, ...], ...]
    values: GameValueReport | None = None
    checks_passed: bool = True
    failures: tuple[str, ...] = ()
    timing_seconds: float | None = field(default=None, compare=False)


def _per_atom(values, space: FilteredSpace) -> tuple[tuple[Rational, ...], ...]:
    return tuple(
        tuple(values[t][atom[0]] for atom in space.atoms(t)) for t in range(space.horizon + 1)
    )


def solution_report(
    scenario: Scenario,
    sol: GameSolution,
    verification: VerificationResult | None = None,
    timing_seconds: float | None = None,
) -> SolutionReport:
    failures = tuple(c.name for c in verification.failures) if verification else ()
    return SolutionReport(
        scenario=scenario.name,
        mode=scenario.mode,
        value=sol.value,
        v1=_per_atom(sol.v1, sol.space),
        v2=_per_atom(sol.v2, sol.space),
        v=_per_atom(sol.v, sol.space),
        rho_d=sol.rho_d,
        tau_d=sol.tau_d,
        rho_u=sol.rho_u,
        tau_u=sol.tau_u,
        values=verification.report if verification else None,
        checks_passed=not failures,
        failures=failures,
        timing_seconds=timing_seconds,
    )


def game_value_report_to_dict(r: GameValueReport) -> dict:
    def opt(x: Rational | None) -> str | None:
        return None if x is None else rational_str(x)

    return {
        "solver_value": rational_str(r.solver_value),
        "a_bar": opt(r.a_bar),
        "a_under": opt(r.a_under),
        "b_bar": opt(r.b_bar),
        "b_under": opt(r.b_under),
        "c_bar": opt(r.c_bar),
        "c_under": opt(r.c_under),
        "v_bar": opt(r.v_bar),
        "v_under": opt(r.v_under),
        "enumeration_sizes": {
            "stopping_times": r.n_stopping_times,
            "type_i": r.n_type_i,
            "type_ii": r.n_type_ii,
        },
        "skipped": [{"value": s.value, "reason": s.reason} for s in r.skipped],
        "approximate": r.approximate,
        "observations": {
            "b_bar_equals_c_under": r.b_bar_equals_c_under,
            "b_under_equals_c_bar": r.b_under_equals_c_bar,
        },
    }


def game_value_report_from_dict(d: dict) -> GameValueReport:
    def opt(x: str | None) -> Fraction | None:
        return None if x is None else parse_rational(x)

    sizes = d.get("enumeration_sizes", {})
    obs = d.get("observations", {})
    return GameValueReport(
        solver_value=parse_rational(d["solver_value"]),
        a_bar=opt(d.get("a_bar")),
        a_under=opt(d.get("a_under")),
        b_bar=opt(d.get("b_bar")),
        b_under=opt(d.get("b_under")),
        c_bar=opt(d.get("c_bar")),
        c_under=opt(d.get("c_under")),
        v_bar=opt(d.get("v_bar")),
        v_under=opt(d.get("v_under")),
        n_stopping_times=sizes.get("stopping_times"),
        n_type_i=sizes.get("type_i"),
        n_type_ii=sizes.get("type_ii"),
        skipped=tuple(SkipNote(s["value"], s["reason"]) for s in d.get("skipped", [])),
        approximate=bool(d.get("approximate", False)),
        b_bar_equals_c_under=obs.get("b_bar_equals_c_under"),
        b_under_equals_c_bar=obs.get("b_under_equals_c_bar"),
    )


def solution_report_to_dict(r: SolutionReport) -> dict:
    out = {
        "scenario": r.scenario,
        "mode": r.mode,
        "value": rational_str(r.value),
        "v1": [[rational_str(x) for x in row] for row in r.v1],
        "v2": [[rational_str(x) for x in row] for row in r.v2],
        "v": [[rational_str(x) for x in row] for row in r.v],
        "rho_d": list(r.rho_d),
        "tau_d": list(r.tau_d),
        "rho_u": [list(row) for row in r.rho_u],
        "tau_u": [list(row) for row in r.tau_u],
        "values": game_value_report_to_dict(r.values) if r.values else None,
        "checks_passed": r.checks_passed,
        "failures": list(r.failures),
    }
    if r.timing_seconds is not None:
        out["timing_seconds"] = r.timing_seconds
    return out


def solution_report_from_dict(d: dict) -> SolutionReport:
    return SolutionReport(
        scenario=d["scenario"],
        mode=d["mode"],
        value=parse_rational(d["value"]),
        v1=tuple(tuple(parse_rational(x) for x in row) for row in d["v1"]),
        v2=tuple(tuple(parse_rational(x) for x in row) for row in d["v2"]),
        v=tuple(tuple(parse_rational(x) for x in row) for row in d["v"]),
        rho_d=tuple(d["rho_d"]),
        tau_d=tuple(d["tau_d"]),
        rho_u=tuple(tuple(row) for row in d["rho_u"]),
        tau_u=tuple(tuple(row) for row in d["tau_u"]),
        values=game_value_report_from_dict(d["values"]) if d.get("values") else None,
        checks_passed=d.get("checks_passed", True),
        failures=tuple(d.get("failures", ())),
        timing_seconds=d.get("timing_seconds"),
    )


def _emit_json(payload: dict, stream=None) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True), file=stream or sys.stdout)


def _emit_values_text(r: GameValueReport, out) -> None:
    rows = [
        ("a_bar", r.a_bar),
        ("a_under", r.a_under),
        ("b_bar", r.b_bar),
        ("b_under", r.b_under),
        ("c_bar", r.c_bar),
        ("c_under", r.c_under),
        ("v_bar", r.v_bar),
        ("v_under", r.v_under),
        ("solver_value", r.solver_value),
    ]
    for name, value in rows:
        print(f"{name:<14} {rational_str(value) if value is not None else 'skipped'}", file=out)
    sizes = []
    if r.n_stopping_times is not None:
        sizes.append(f"|T|={r.n_stopping_times}")
    if r.n_type_i is not None:
        sizes.append(f"|T^i|={r.n_type_i}")
    if r.n_type_ii is not None:
        sizes.append(f"|T^ii|={r.n_type_ii}")
    if sizes:
        print("  ".join(sizes), file=out)
    for s in r.skipped:
        print(f"skipped {s.value}: {s.reason}", file=out)
    if r.approximate:
        print("APPROXIMATE: float mode, comparisons used a tolerance", file=out)


def _emit_solution_text(r: SolutionReport, out) -> None:
    print(f"scenario: {r.scenario}", file=out)
    print(f"mode: {r.mode}", file=out)
    print(f"value: {rational_str(r.value)}", file=out)
    print(f"rho_d: {list(r.rho_d)}", file=out)
    print(f"tau_d: {list(r.tau_d)}", file=out)
    for t in range(len(r.v1)):
        v1 = " ".join(rational_str(x) for x in r.v1[t])
        v2 = " ".join(rational_str(x) for x in r.v2[t])
        v = " ".join(rational_str(x) for x in r.v[t])
        print(f"t={t}  v1=[{v1}]  v2=[{v2}]  v=[{v}]", file=out)
    print(f"rho_u: {[list(row) for row in r.rho_u]}", file=out)
    print(f"tau_u: {[list(row) for row in r.tau_u]}", file=out)
    if r.values is not None:
        _emit_values_text(r.values, out)
    status = "ok" if r.checks_passed else "FAILED: " + ", ".join(r.failures)
    print(f"checks: {status}", file=out)
    if r.timing_seconds is not None:
        print(f"timing_seconds: {r.timing_seconds:.3f}", file=out)


# ---------------------------------------------------------------------------
# commands


def _build_and_validate(scenario: Scenario) -> tuple[BiPayoff | None, list[str]]:
    lines = [str(v) for v in validate_space(scenario.space)]
    payoff = None
    try:
        payoff = build_payoff(scenario.payoff_spec, scenario.space, mode=scenario.mode)
    except Exception as exc:  # generator preconditions, mode errors
        lines.append(f"PAYOFF_CONSTRUCTION payoff {exc}")
    if payoff is not None:
        try:
            lines.extend(str(v) for v in validate_payoff(payoff, scenario.space))
        except ValueError as exc:
            lines.append(f"PAYOFF_DIMENSION payoff {exc}")
    return payoff, lines


def cmd_validate(scenario: Scenario, args: argparse.Namespace) -> int:
    _, lines = _build_and_validate(scenario)
    if args.output == "json":
        _emit_json({"scenario": scenario.name, "violations": lines, "valid": not lines})
    else:
        for line in lines:
            print(line)
        if not lines:
            print(f"{scenario.name}: valid")
    return EXIT_OK if not lines else EXIT_FAIL


def _eps_for(scenario: Scenario, args: argparse.Namespace) -> Fraction:
    if scenario.mode == "float":
        return Fraction(args.eps)
    return Fraction(0)


def cmd_solve(scenario: Scenario, args: argparse.Namespace) -> int:
    payoff, lines = _build_and_validate(scenario)
    if lines:
        for line in lines:
            print(line, file=sys.stderr)
        return EXIT_FAIL
    started = time.perf_counter()
    sol = solve(payoff, scenario.space)
    elapsed = time.perf_counter() - started
    report = solution_report(
        scenario, sol, timing_seconds=elapsed if args.timing else None
    )
    if args.output == "json":
        _emit_json(solution_report_to_dict(report))
    else:
        _emit_solution_text(report, sys.stdout)
    return EXIT_OK


def cmd_verify(scenario: Scenario, args: argparse.Namespace) -> int:
    payoff, lines = _build_and_validate(scenario)
    if lines:
        for line in lines:
            print(line, file=sys.stderr)
        return EXIT_FAIL
    started = time.perf_counter()
    result = verify_theorem(payoff, scenario.space, caps=scenario.caps, eps=_eps_for(scenario, args))
    elapsed = time.perf_counter() - started
    report = solution_report(
        scenario, result.solution, verification=result, timing_seconds=elapsed if args.timing else None
    )
    for note in result.report.skipped:
        print(f"warning: skipped {note.value}: {note.reason}", file=sys.stderr)
    if args.output == "json":
        _emit_json(solution_report_to_dict(report))
    else:
        _emit_solution_text(report, sys.stdout)
        for check in result.checks:
            mark = "PASS" if check.passed else "FAIL"
            detail = f" {check.detail}" if (check.detail and not check.passed) else ""
            print(f"{mark} {check.name}{detail}")
    if not result.passed:
        for check in result.failures:
            print(f"assertion failed: {check.name} {check.detail}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_values(scenario: Scenario, args: argparse.Namespace) -> int:
    payoff, lines = _build_and_validate(scenario)
    if lines:
        for line in lines:
            print(line, file=sys.stderr)
        return EXIT_FAIL
    result = verify_theorem(payoff, scenario.space, caps=scenario.caps, eps=_eps_for(scenario, args))
    if args.output == "json":
        _emit_json(game_value_report_to_dict(result.report))
    else:
        _emit_values_text(result.report, sys.stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling


def _parse_kv(text: str, what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in text.replace(" ", ",").split(","):
        if not part:
            continue
        if "=" not in part:
            raise ScenarioError(f"bad {what} entry {part!r}, expected key=value")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _caps_from(args: argparse.Namespace, scenario_caps: Caps) -> Caps:
    # precedence: defaults < STOPGAME_CAPS < scenario file < --caps flag
    stopping, strategies = Caps().stopping_times, Caps().strategy_maps
    env = os.environ.get("STOPGAME_CAPS")
    if env:
        kv = _parse_kv(env, "STOPGAME_CAPS")
        stopping = int(kv.get("stopping", stopping))
        strategies = int(kv.get("strategies", strategies))
    if scenario_caps != Caps():
        stopping, strategies = scenario_caps.stopping_times, scenario_caps.strategy_maps
    if args.caps:
        kv = _parse_kv(args.caps, "--caps")
        stopping = int(kv.get("stopping", stopping))
        strategies = int(kv.get("strategies", strategies))
    return Caps(stopping_times=stopping, strategy_maps=strategies)


def _scenario_from_args(args: argparse.Namespace) -> Scenario:
    if args.random:
        kv = _parse_kv(args.random, "--random")
        try:
            horizon = int(kv["T"])
            outcomes = int(kv.get("outcomes", "4"))
            seed = int(kv.get("seed", "0"))
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad --random spec: {exc}") from None
        scenario = scenario_from_dict(random_scenario_dict(horizon, outcomes, seed))
    elif args.file:
        scenario = load_scenario(args.file)
    else:
        raise ScenarioError("give a scenario file or --random T=..,outcomes=..,seed=..")
    mode = args.mode or scenario.mode
    caps = _caps_from(args, scenario.caps)
    return Scenario(
        name=scenario.name,
        space=scenario.space,
        payoff_spec=scenario.payoff_spec,
        mode=mode,
        caps=caps,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopgame",
        description="Exact solver and brute-force verifier for two-sided stopping games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "check space and payoff invariants"),
        ("solve", "compute the game value and optimal stopping rules"),
        ("verify", "solve and verify every claim by enumeration"),
        ("values", "print the eight-value table"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("file", nargs="?", help="scenario JSON file (bundled names work too)")
        cmd.add_argument("--output", choices=["json", "text"], default="text")
        cmd.add_argument("--caps", help="enumeration caps, e.g. stopping=64,strategies=10000000")
        cmd.add_argument("--random", help="generate a scenario: T=..,outcomes=..,seed=..")
        cmd.add_argument("--mode", choices=["exact", "float"], default=None)
        cmd.add_argument("--eps", default=DEFAULT_EPS, help="tolerance for float-mode comparisons")
        cmd.add_argument("--timing", action="store_true", help="include wall time in the report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    handlers = {
        "validate": cmd_validate,
        "solve": cmd_solve,
        "verify": cmd_verify,
        "values": cmd_values,
    }
    try:
        scenario = _scenario_from_args(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return handlers[args.command](scenario, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entrypoint() -> None:
    sys.exit(main())
