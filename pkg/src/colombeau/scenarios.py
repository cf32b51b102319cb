"""Scenario files: a small constructor grammar plus the execution engine.

Scenarios are JSON documents {name, kind, objects, output?} where the
objects block references distributions, representatives, fields and
diffeomorphisms through a textual grammar:

    distribution:    delta(0), ddelta(0.4, 1), heaviside(-0.3),
                     regular(sin), 2*delta(0) - 0.5*heaviside(1)
    representative:  iota(<dist>), sigma(<name>), mul(r, r), add(r, r),
                     scale(c, r)
    field:           ddx, euler, sinefield(0.3)
    diffeomorphism:  shift(0.6), scale(2), cubic, sine_perturb(0.3)

Parse errors carry line/column; execution produces check records shared
with the property suites.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dc_field
from typing import Any

from .kernels import EpsilonGrid, Interval, fit_slope
from .basic_space import (Distribution, Representative, delta,
                          delta_derivative, embed_distribution, embed_smooth,
                          heaviside, rep_add, rep_mul, rep_scale, zero_rep)
from .diffeo import Diffeomorphism
from .grading import (associate, grade_moderate, grade_negligible,
                      sweep_against_witness, weak_limit)
from .lie import VectorField
from .registry import (DIFFEO_CONSTRUCTORS, FIELD_CONSTRUCTORS,
                       SMOOTH_FUNCTIONS, get_smooth, make_diffeo, make_field,
                       named_regular)
from .suites import SUITES, check, commutation_checks, dual_route_checks, equivariance_checks
from .test_objects import make_moment_mollifier

SCHEMA_VERSION = 1
KINDS = ("verify", "grade", "associate", "lie-test", "diffeo-test", "demo")


class ScenarioParseError(Exception):
    """Malformed scenario input; carries a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<punct>[(),*+-]))")


class _Parser:
    """Recursive-descent parser over one expression string."""

    def __init__(self, text: str, line: int = 1):
        self.text = text
        self.line = line
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                col = pos + len(text[pos:]) - len(stripped) + 1
                raise ScenarioParseError(f"unexpected character {stripped[0]!r}",
                                         line, col)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def _fail(self, message: str):
        col = self.tokens[self.i][2] if self.i < len(self.tokens) \
            else len(self.text) + 1
        raise ScenarioParseError(message, self.line, col)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, None)

    def next(self):
        tok = self.peek()
        if tok[0] is None:
            self._fail("unexpected end of expression")
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, _ = self.next()
        if text != value:
            self.i -= 1
            self._fail(f"expected {value!r}, got {text!r}")

    def done(self):
        if self.i != len(self.tokens):
            self._fail(f"trailing input {self.tokens[self.i][1]!r}")

    # numbers ---------------------------------------------------------

    def number(self) -> float:
        sign = 1.0
        kind, text, _ = self.peek()
        if text in ("+", "-"):
            self.next()
            sign = -1.0 if text == "-" else 1.0
            kind, text, _ = self.peek()
        if kind != "num":
            self._fail(f"expected a number, got {text!r}")
        self.next()
        return sign * float(text)

    def integer(self) -> int:
        value = self.number()
        if value != int(value):
            self._fail(f"expected an integer, got {value}")
        return int(value)

    # distributions ---------------------------------------------------

    def distribution(self) -> Distribution:
        total = self._dist_term(allow_sign=True)
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.next()
            term = self._dist_term(allow_sign=False)
            total = total + term if op == "+" else total - term
        return total

    def _dist_term(self, allow_sign: bool) -> Distribution:
        sign = 1.0
        if allow_sign and self.peek()[1] in ("+", "-"):
            _, op, _ = self.next()
            sign = -1.0 if op == "-" else 1.0
        coeff = sign
        kind, text, _ = self.peek()
        if kind == "num":
            self.next()
            coeff *= float(text)
            self.expect("*")
        atom = self._dist_atom()
        return coeff * atom

    def _dist_atom(self) -> Distribution:
        kind, name, _ = self.next()
        if kind != "name":
            self.i -= 1
            self._fail(f"expected a distribution constructor, got {name!r}")
        if name == "delta":
            self.expect("(")
            p = self.number()
            self.expect(")")
            return delta(p)
        if name == "ddelta":
            self.expect("(")
            p = self.number()
            self.expect(",")
            m = self.integer()
            self.expect(")")
            if m < 1:
                self._fail("ddelta order must be >= 1")
            return delta_derivative(p, m)
        if name == "heaviside":
            self.expect("(")
            c = self.number()
            self.expect(")")
            return heaviside(c)
        if name == "regular":
            self.expect("(")
            kind, fname, _ = self.next()
            if kind != "name":
                self.i -= 1
                self._fail("regular() takes a named smooth function")
            if fname not in SMOOTH_FUNCTIONS:
                self.i -= 1
                self._fail(f"unknown smooth function {fname!r}")
            self.expect(")")
            return named_regular(fname)
        self.i -= 1
        self._fail(f"unknown distribution constructor {name!r}")

    # representatives -------------------------------------------------

    def representative(self) -> Representative:
        kind, name, _ = self.next()
        if kind != "name":
            self.i -= 1
            self._fail(f"expected a representative constructor, got {name!r}")
        if name == "iota":
            self.expect("(")
            u = self.distribution()
            self.expect(")")
            return embed_distribution(u)
        if name == "sigma":
            self.expect("(")
            kind, fname, _ = self.next()
            if kind != "name" or fname not in SMOOTH_FUNCTIONS:
                self.i -= 1
                self._fail(f"sigma() takes a named smooth function, got {fname!r}")
            self.expect(")")
            return embed_smooth(SMOOTH_FUNCTIONS[fname])
        if name in ("mul", "add"):
            self.expect("(")
            a = self.representative()
            self.expect(",")
            b = self.representative()
            self.expect(")")
            return rep_mul(a, b) if name == "mul" else rep_add(a, b)
        if name == "scale":
            self.expect("(")
            c = self.number()
            self.expect(",")
            a = self.representative()
            self.expect(")")
            return rep_scale(c, a)
        self.i -= 1
        self._fail(f"unknown representative constructor {name!r}")

    # fields and diffeos ----------------------------------------------

    def named_call(self, table: dict, what: str):
        kind, name, _ = self.next()
        if kind != "name" or name not in table:
            self.i -= 1
            self._fail(f"unknown {what} {name!r}")
        arity = table[name][0]
        args = []
        if self.peek()[1] == "(":
            self.next()
            if self.peek()[1] != ")":
                args.append(self.number())
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.number())
            self.expect(")")
        if len(args) != arity:
            self._fail(f"{what} {name!r} takes {arity} argument(s), got {len(args)}")
        return name, args


def parse_distribution(text: str, line: int = 1) -> Distribution:
    p = _Parser(text, line)
    u = p.distribution()
    p.done()
    return u


def parse_representative(text: str, line: int = 1) -> Representative:
    p = _Parser(text, line)
    r = p.representative()
    p.done()
    return r


def parse_field(text: str, line: int = 1) -> VectorField:
    p = _Parser(text, line)
    name, args = p.named_call(FIELD_CONSTRUCTORS, "field")
    p.done()
    return make_field(name, *args)


def parse_diffeo(text: str, line: int = 1) -> Diffeomorphism:
    p = _Parser(text, line)
    name, args = p.named_call(DIFFEO_CONSTRUCTORS, "diffeomorphism")
    p.done()
    return make_diffeo(name, *args)


@dataclass
class Scenario:
    name: str
    kind: str
    objects: dict = dc_field(default_factory=dict)
    output_path: str | None = None


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario: {exc}") from None
    return scenario_from_dict(raw)


def scenario_from_dict(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ScenarioParseError(f"unknown scenario kind {kind!r}; "
                                 f"expected one of {', '.join(KINDS)}")
    name = raw.get("name", kind)
    objects = raw.get("objects", {})
    if not isinstance(objects, dict):
        raise ScenarioParseError("objects must be a JSON object")
    scenario = Scenario(name=str(name), kind=str(kind), objects=dict(objects),
                        output_path=raw.get("output"))
    _validate(scenario)
    return scenario


def _validate(scenario: Scenario) -> None:
    """Pre-parse every constructor expression so malformed input fails
    before any numerics run."""
    obj = scenario.objects
    for key in ("representative", "a", "b"):
        if isinstance(obj.get(key), str):
            parse_representative(obj[key])
    for expr in obj.get("distributions", []) or []:
        parse_distribution(expr)
    for expr in obj.get("fields", []) or []:
        parse_field(expr)
    for expr in obj.get("diffeos", []) or []:
        parse_diffeo(expr)
    for comp in obj.get("comparisons", []) or []:
        parse_representative(comp["a"])
        if comp.get("b"):
            parse_representative(comp["b"])
    if "psi" in obj and obj["psi"] not in SMOOTH_FUNCTIONS:
        raise ScenarioParseError(f"unknown witness function {obj['psi']!r}")
    if scenario.kind == "verify":
        for s in obj.get("suites", []) or []:
            if s not in SUITES:
                raise ScenarioParseError(f"unknown suite {s!r}; "
                                         f"known: {', '.join(SUITES)}")
    if scenario.kind == "demo":
        demo = obj.get("demo")
        if demo not in DEMOS:
            raise ScenarioParseError(f"unknown demo {demo!r}; "
                                     f"known: {', '.join(sorted(DEMOS))}")


def _grid_from(obj: dict) -> EpsilonGrid:
    coarse = int(obj.get("eps_coarse", 2))
    fine = int(obj.get("eps_fine", 14))
    return EpsilonGrid.dyadic(coarse, fine)


def _compact_from(obj: dict) -> Interval:
    lo, hi = obj.get("compact", (-1.0, 1.0))
    return Interval(float(lo), float(hi))


def _run_verify(obj: dict) -> list[dict]:
    names = obj.get("suites") or list(SUITES)
    records = []
    for name in names:
        records.extend(SUITES[name]())
    return records


def _run_grade(obj: dict) -> list[dict]:
    rep = parse_representative(obj["representative"])
    mode = obj.get("mode", "moderate")
    depth = int(obj.get("depth", 1))
    grid = _grid_from(obj)
    compact = _compact_from(obj)
    workers = int(obj.get("workers", 1))
    if mode == "moderate":
        phi = make_moment_mollifier(int(obj.get("q", 0)), float(obj.get("radius", 1.0)))
        report = grade_moderate(rep, compact, phi, grid, depth, workers)
    elif mode == "negligible":
        q_list = tuple(obj.get("q_list", (2, 4)))
        report = grade_negligible(rep, compact, grid, depth, q_list,
                                  float(obj.get("radius", 1.0)), workers)
    else:
        raise ScenarioParseError(f"unknown grade mode {mode!r}")
    records = [{"report": report.to_record(),
                "representative": obj["representative"], "mode": mode}]
    expect = obj.get("expect", {})
    if "slope" in expect:
        want = float(expect["slope"])
        tol = float(expect.get("slope_tol", 0.1))
        ok = abs(report.fitted_slope - want) <= tol
        records.append(check(f"slope[{obj['representative']}]",
                             report.fitted_slope,
                             f"{want:g} +/- {tol:g}", ok))
    if "classification" in expect:
        want = str(expect["classification"])
        got = str(report.classification)
        records.append(check(f"classification[{obj['representative']}]",
                             got, f"== {want}", got == want))
    if "classification_kind" in expect:
        want = str(expect["classification_kind"])
        records.append(check(f"classification-kind[{obj['representative']}]",
                             report.classification.kind, f"== {want}",
                             report.classification.kind == want))
    return records


def _run_associate(obj: dict) -> list[dict]:
    psi = get_smooth(obj.get("psi", "witness_bump"))
    phi = make_moment_mollifier(int(obj.get("q", 2)), float(obj.get("radius", 1.0)))
    grid = _grid_from(obj)
    workers = int(obj.get("workers", 1))
    comparisons = obj.get("comparisons")
    if comparisons is None:
        comparisons = [{k: obj[k] for k in ("a", "b", "expect") if k in obj}]
    records: list[dict] = []
    for comp in comparisons:
        a = parse_representative(comp["a"])
        b = parse_representative(comp["b"]) if comp.get("b") else zero_rep()
        label = comp["a"] + (" ~ " + comp["b"] if comp.get("b") else "")
        report = associate(a, b, psi, phi, grid, workers)
        records.append({"report": report.to_record(), "comparison": label})
        expect = comp.get("expect", {})
        if expect.get("associated") is not None:
            want = bool(expect["associated"])
            records.append(check(f"associated[{label}]", report.associated,
                                 f"== {want}", report.associated == want))
        if expect.get("converged") is not None:
            want = bool(expect["converged"])
            records.append(check(f"converged[{label}]", report.converged,
                                 f"== {want}", report.converged == want))
        if "decay_min_slope" in expect:
            decay = fit_slope(list(zip(report.epsilon_grid.values,
                                       [abs(v) for v in report.integral_values])))
            want = float(expect["decay_min_slope"])
            ok = (not decay.machine_zero and decay.slope >= want) or decay.machine_zero
            observed = None if decay.machine_zero else decay.slope
            records.append(check(f"decay-slope[{label}]", observed,
                                 f">= {want:g}", ok))
        if "divergence_slope" in expect:
            want, tol = expect["divergence_slope"]
            decay = fit_slope(list(zip(report.epsilon_grid.values,
                                       [abs(v) for v in report.integral_values])))
            ok = not decay.machine_zero and abs(decay.slope - float(want)) <= float(tol)
            records.append(check(f"divergence-slope[{label}]", decay.slope,
                                 f"{want:g} +/- {tol:g}", ok))
        if "weak_limit_of_a" in expect:
            spec = expect["weak_limit_of_a"]
            point = float(spec.get("point", 0.0))
            coeff = float(spec.get("coefficient", 1.0))
            tol = float(spec.get("tol", 1e-3))
            value, converged = weak_limit(a, psi, phi, grid, workers)
            want = coeff * float(psi.value(point))
            ok = converged and abs(value - want) <= tol
            records.append(check(f"weak-limit[{comp['a']}]", value,
                                 f"= {want:.6g} +/- {tol:g}", ok))
    return records


def _run_lie_test(obj: dict) -> list[dict]:
    from .registry import distribution_battery, field_battery, probe_pairs

    fields = [parse_field(t) for t in obj.get("fields", [])] or field_battery()
    if obj.get("distributions"):
        dists = [(t, parse_distribution(t)) for t in obj["distributions"]]
    else:
        dists = distribution_battery()
    smooths = [get_smooth(n) for n in obj.get("smooth", ("sin", "x3"))]
    probes = probe_pairs(int(obj.get("probes", 20)))
    checks = obj.get("checks", ("commutation", "dual-route"))
    records: list[dict] = []
    if "commutation" in checks:
        records.extend(commutation_checks(fields, dists, smooths, probes))
    if "dual-route" in checks:
        records.extend(dual_route_checks(fields, None, probes[:8]))
    return records


def _run_diffeo_test(obj: dict) -> list[dict]:
    from .registry import distribution_battery, probe_pairs

    diffeos = [parse_diffeo(t) for t in obj.get("diffeos", [])] or None
    if obj.get("distributions"):
        dists = [(t, parse_distribution(t)) for t in obj["distributions"]]
    else:
        dists = distribution_battery()
    probes = probe_pairs(int(obj.get("probes", 20)))
    tol = float(obj.get("tolerance", 1e-8))
    return equivariance_checks(diffeos, dists, probes, tol)


DEMOS: dict[str, dict] = {
    "delta-grading": {
        "kind": "grade",
        "objects": {"representative": "iota(delta(0))", "mode": "moderate",
                    "q": 0, "depth": 0,
                    "expect": {"slope": -1.0, "slope_tol": 0.1,
                               "classification": "moderate(1)"}},
    },
    "delta-squared": {
        "kind": "grade",
        "objects": {"representative": "mul(iota(delta(0)), iota(delta(0)))",
                    "mode": "moderate", "q": 0, "depth": 0,
                    "expect": {"slope": -2.0, "slope_tol": 0.1,
                               "classification": "moderate(2)"}},
    },
    "heaviside-square": {
        "kind": "grade",
        "objects": {"representative":
                    "add(mul(iota(heaviside(0)), iota(heaviside(0))), scale(-1, iota(heaviside(0))))",
                    "mode": "negligible", "depth": 0, "q_list": [2],
                    "expect": {"classification_kind": "neither"}},
    },
    "heaviside-power": {
        "kind": "associate",
        "objects": {"psi": "witness_bump", "q": 2, "comparisons": [
            {"a": "mul(iota(heaviside(0)), iota(heaviside(0)))",
             "b": "iota(heaviside(0))",
             "expect": {"associated": True, "decay_min_slope": 0.8}},
            {"a": "mul(mul(iota(heaviside(0)), iota(heaviside(0))), iota(heaviside(0)))",
             "b": "iota(heaviside(0))",
             "expect": {"associated": True, "decay_min_slope": 0.8}},
        ]},
    },
    "h-times-delta": {
        "kind": "associate",
        "objects": {"psi": "witness_bump", "q": 2, "comparisons": [
            {"a": "mul(iota(heaviside(0)), iota(delta(0)))",
             "b": "scale(0.5, iota(delta(0)))",
             "expect": {"associated": True,
                        "weak_limit_of_a": {"point": 0.0, "coefficient": 0.5,
                                            "tol": 1e-3}}},
        ]},
    },
    "delta-squared-divergence": {
        "kind": "associate",
        "objects": {"psi": "witness_bump", "q": 2, "comparisons": [
            {"a": "mul(iota(delta(0)), iota(delta(0)))",
             "expect": {"converged": False, "divergence_slope": [-1.0, 0.2]}},
        ]},
    },
    "embedding-commutation": {
        "kind": "verify", "objects": {"suites": ["lie-commutation"]},
    },
    "lie-dual-route": {
        "kind": "verify", "objects": {"suites": ["lie-dual-route"]},
    },
    "diffeo-equivariance": {
        "kind": "verify", "objects": {"suites": ["diffeo-equivariance"]},
    },
    "linearity-unit": {
        "kind": "verify", "objects": {"suites": ["linearity-unit"]},
    },
    "smooth-product": {
        "kind": "verify", "objects": {"suites": ["smooth-product"]},
    },
    "smooth-negligibility": {
        "kind": "verify", "objects": {"suites": ["smooth-negligibility"]},
    },
    "flow-derivative": {
        "kind": "verify", "objects": {"suites": ["flow-derivative"]},
    },
    "kernel-invariants": {
        "kind": "verify", "objects": {"suites": ["kernels"]},
    },
}


def run_scenario(scenario: Scenario) -> tuple[list[dict], bool]:
    """Execute a scenario; returns (records, all_checks_passed)."""
    if scenario.kind == "demo":
        preset = DEMOS[scenario.objects["demo"]]
        merged = dict(preset["objects"])
        for key, value in scenario.objects.items():
            if key != "demo":
                merged[key] = value
        inner = Scenario(name=scenario.name, kind=preset["kind"], objects=merged,
                         output_path=scenario.output_path)
        return run_scenario(inner)
    handlers = {
        "verify": _run_verify,
        "grade": _run_grade,
        "associate": _run_associate,
        "lie-test": _run_lie_test,
        "diffeo-test": _run_diffeo_test,
    }
    records = handlers[scenario.kind](scenario.objects)
    passed = all(r.get("pass", True) for r in records)
    return records, passed
