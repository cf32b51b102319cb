"""Command-line front end: scenario execution and builtin listing.

Exit status contract: 0 all checks passed, 1 a check failed, 2 the
scenario failed to parse or validate, 3 a numerical failure.  Reports
are line-delimited JSON records (schema header, one record per check,
summary) and are byte-deterministic across runs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .kernels import NumericsError
from .registry import DIFFEO_CONSTRUCTORS, FIELD_CONSTRUCTORS, SMOOTH_FUNCTIONS
from .scenarios import DEMOS, ScenarioParseError, load_scenario, run_scenario
from .suites import SUITES

SCHEMA_VERSION = 1


def _sanitize(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def render_report(scenario, records, passed) -> str:
    header = {"schema": SCHEMA_VERSION, "scenario": scenario.name,
              "kind": scenario.kind, "objects": _sanitize(scenario.objects)}
    checks = [r for r in records if "pass" in r]
    summary = {"summary": {"checks": len(checks),
                           "failed": sum(1 for r in checks if not r["pass"]),
                           "passed_all": bool(passed)}}
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(json.dumps(_sanitize(r), sort_keys=True) for r in records)
    lines.append(json.dumps(summary, sort_keys=True))
    return "\n".join(lines) + "\n"


def list_builtins() -> str:
    lines = ["smooth functions:"]
    lines.extend(f"  {name}" for name in sorted(SMOOTH_FUNCTIONS))
    lines.append("fields:")
    lines.extend(f"  {name}" for name in sorted(FIELD_CONSTRUCTORS))
    lines.append("diffeomorphisms:")
    lines.extend(f"  {name}" for name in sorted(DIFFEO_CONSTRUCTORS))
    lines.append("suites:")
    lines.extend(f"  {name}" for name in sorted(SUITES))
    lines.append("demo scenarios:")
    lines.extend(f"  {name}" for name in sorted(DEMOS))
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colombeau",
        description="Scenario-driven checks for the generalized-function laboratory.")
    parser.add_argument("--scenario", help="path to a JSON scenario file")
    parser.add_argument("--out", help="write the JSONL report to this path")
    parser.add_argument("--eps-min", type=float, help="smallest epsilon (dyadic, rounded)")
    parser.add_argument("--eps-max", type=float, help="largest epsilon (dyadic, rounded)")
    parser.add_argument("--depth", type=int, help="derivative depth for grading sweeps")
    parser.add_argument("--q", type=int, help="mollifier moment order")
    parser.add_argument("--tol", type=float, help="check tolerance override where applicable")
    parser.add_argument("--threads", type=int, default=1, help="workers for sweep interiors")
    parser.add_argument("--list", action="store_true", help="list builtin objects and demos")
    return parser


def _apply_overrides(scenario, args) -> None:
    obj = scenario.objects
    if args.eps_min is not None:
        obj["eps_fine"] = max(2, round(-math.log2(args.eps_min)))
    if args.eps_max is not None:
        obj["eps_coarse"] = max(0, round(-math.log2(args.eps_max)))
    if args.depth is not None:
        obj["depth"] = args.depth
    if args.q is not None:
        obj["q"] = args.q
        obj["q_list"] = [args.q]
    if args.tol is not None:
        obj["tolerance"] = args.tol
    if args.threads and args.threads > 1:
        obj["workers"] = args.threads


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.list:
        sys.stdout.write(list_builtins())
        return 0
    if not args.scenario:
        parser.print_usage(sys.stderr)
        sys.stderr.write("error: --scenario or --list is required\n")
        return 2
    try:
        scenario = load_scenario(args.scenario)
        _apply_overrides(scenario, args)
        records, passed = run_scenario(scenario)
    except ScenarioParseError as exc:
        sys.stderr.write(f"scenario error: {exc}\n")
        return 2
    except NumericsError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3
    report = render_report(scenario, records, passed)
    out_path = args.out or scenario.output_path
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(report)
    checks = [r for r in records if "pass" in r]
    failed = [r for r in checks if not r["pass"]]
    sys.stdout.write(f"scenario {scenario.name}: {len(checks) - len(failed)}/"
                     f"{len(checks)} checks passed\n")
    for r in failed:
        sys.stdout.write(f"  FAIL {r['check']}: observed {r['observed']} "
                         f"(criterion: {r['criterion']})\n")
    if not out_path:
        sys.stdout.write(report)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
