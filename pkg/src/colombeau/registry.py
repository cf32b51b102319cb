"""Named built-in objects for scenarios and verification batteries.

Everything the textual constructor grammar can reference lives here:
smooth functions (including compactly supported witnesses), vector
fields, diffeomorphisms, and the standard batteries the property suites
sweep over.  Orderings are stable so listings and reports are
reproducible byte for byte.
"""

from __future__ import annotations

import numpy as np

from .basic_space import (Distribution, SmoothFunction, delta,
                          delta_derivative, heaviside, regular)
from .diffeo import Diffeomorphism, from_forward
from .kernels import Interval
from .lie import VectorField, linear_field, translation_field
from .test_objects import TestObject, _supported, make_bump, make_moment_mollifier, scaled_net


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    ts = np.atleast_1d(arr)
    out = np.zeros_like(ts)
    out[ts >= 1.0] = 1.0
    m = (ts > 0.0) & (ts < 1.0)
    if m.any():
        tm = ts[m]
        h = np.exp(-1.0 / tm)
        hb = np.exp(-1.0 / (1.0 - tm))
        out[m] = h / (h + hb)
    return float(out[0]) if scalar else out


def _smoothstep_derivative(t):
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    ts = np.atleast_1d(arr)
    out = np.zeros_like(ts)
    m = (ts > 0.0) & (ts < 1.0)
    if m.any():
        tm = ts[m]
        h = np.exp(-1.0 / tm)
        hp = h / (tm * tm)
        hb = np.exp(-1.0 / (1.0 - tm))
        hbp = hb / ((1.0 - tm) * (1.0 - tm))
        out[m] = (hp * hb + h * hbp) / (h + hb) ** 2
    return float(out[0]) if scalar else out


# Smooth cutoff: identically 1 on [-6, 6], vanishing outside [-8, 8].
_PLATEAU_FLAT = 6.0
_PLATEAU_EDGE = 8.0
_PLATEAU_RAMP = _PLATEAU_EDGE - _PLATEAU_FLAT


def _plateau(x):
    a = (np.asarray(x, dtype=float) + _PLATEAU_EDGE) / _PLATEAU_RAMP
    b = (_PLATEAU_EDGE - np.asarray(x, dtype=float)) / _PLATEAU_RAMP
    return _smoothstep(a) * _smoothstep(b)


def _plateau_derivative(x):
    xs = np.asarray(x, dtype=float)
    a = (xs + _PLATEAU_EDGE) / _PLATEAU_RAMP
    b = (_PLATEAU_EDGE - xs) / _PLATEAU_RAMP
    return (_smoothstep_derivative(a) * _smoothstep(b)
            - _smoothstep(a) * _smoothstep_derivative(b)) / _PLATEAU_RAMP


_WINDOW_SUPPORT = Interval(-_PLATEAU_EDGE, _PLATEAU_EDGE)


def _poly(name: str, degree: int) -> SmoothFunction:
    return SmoothFunction(
        value=lambda x: np.asarray(x, dtype=float) ** degree,
        derivative=lambda x: degree * np.asarray(x, dtype=float) ** (degree - 1)
        if degree >= 1 else np.zeros_like(np.asarray(x, dtype=float)),
        second_derivative=lambda x: degree * (degree - 1) * np.asarray(x, dtype=float) ** (degree - 2)
        if degree >= 2 else np.zeros_like(np.asarray(x, dtype=float)),
        label=name)


def _windowed(label: str, f, fp) -> SmoothFunction:
    """f times the plateau cutoff; equal to f on [-6, 6], compact support."""
    lo, hi = _WINDOW_SUPPORT.lo, _WINDOW_SUPPORT.hi
    value = _supported(lambda x: f(x) * _plateau(x), lo, hi)
    derivative = _supported(lambda x: fp(x) * _plateau(x) + f(x) * _plateau_derivative(x), lo, hi)
    return SmoothFunction(value=value, derivative=derivative,
                          support=_WINDOW_SUPPORT, label=label)


def _witness_bump(center: float, radius: float, label: str) -> SmoothFunction:
    """Normalized bump reused as a weak-limit witness."""
    b = make_bump(center, radius)
    return SmoothFunction(value=b.density, derivative=b.derivative,
                          support=b.support, label=label)


SMOOTH_FUNCTIONS: dict[str, SmoothFunction] = {
    "one": SmoothFunction(
        value=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label="one"),
    "x": _poly("x", 1),
    "x2": _poly("x2", 2),
    "x3": _poly("x3", 3),
    "x4": _poly("x4", 4),
    "x5": _poly("x5", 5),
    "sin": SmoothFunction(value=np.sin, derivative=np.cos,
                          second_derivative=lambda x: -np.sin(x), label="sin"),
    "cos": SmoothFunction(value=np.cos, derivative=lambda x: -np.sin(x),
                          second_derivative=lambda x: -np.cos(x), label="cos"),
    "exp_window": _windowed("exp_window", np.exp, np.exp),
    "x2_window": _windowed("x2_window",
                           lambda x: np.asarray(x, dtype=float) ** 2,
                           lambda x: 2.0 * np.asarray(x, dtype=float)),
    "witness_bump": _witness_bump(0.0, 2.0, "witness_bump"),
    "witness_offset": _witness_bump(0.5, 1.5, "witness_offset"),
}


def get_smooth(name: str) -> SmoothFunction:
    try:
        return SMOOTH_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown smooth function {name!r}; "
                         f"known: {', '.join(sorted(SMOOTH_FUNCTIONS))}") from None


def sinefield(b: float) -> VectorField:
    """X(x) = 1 + b sin x, |b| < 1: complete, no closed-form flow."""
    if not abs(b) < 1.0:
        raise ValueError("need |b| < 1 for completeness")
    return VectorField(
        coefficient=lambda x: 1.0 + b * np.sin(x),
        coefficient_derivative=lambda x: b * np.cos(x),
        coefficient_second_derivative=lambda x: -b * np.sin(x),
        label=f"sinefield({b:g})")


FIELD_CONSTRUCTORS = {
    "ddx": (0, lambda: translation_field()),
    "euler": (0, lambda: linear_field()),
    "sinefield": (1, sinefield),
}


def make_field(name: str, *args: float) -> VectorField:
    try:
        arity, ctor = FIELD_CONSTRUCTORS[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; "
                         f"known: {', '.join(sorted(FIELD_CONSTRUCTORS))}") from None
    if len(args) != arity:
        raise ValueError(f"field {name!r} takes {arity} argument(s), got {len(args)}")
    return ctor(*args)


def shift(a: float) -> Diffeomorphism:
    return Diffeomorphism(
        forward=lambda x: x + a,
        inverse=lambda y: y - a,
        forward_derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        forward_second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label=f"shift({a:g})")


def scaling(k: float) -> Diffeomorphism:
    if k <= 0:
        raise ValueError("scale factor must be positive (orientation-preserving)")
    return Diffeomorphism(
        forward=lambda x: k * x,
        inverse=lambda y: y / k,
        forward_derivative=lambda x: k * np.ones_like(np.asarray(x, dtype=float)),
        forward_second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label=f"scale({k:g})")


def cubic() -> Diffeomorphism:
    """x^3 + x; globally increasing, inverse Newton-backed."""
    return from_forward(
        forward=lambda x: np.asarray(x, dtype=float) ** 3 + np.asarray(x, dtype=float),
        derivative=lambda x: 3.0 * np.asarray(x, dtype=float) ** 2 + 1.0,
        second_derivative=lambda x: 6.0 * np.asarray(x, dtype=float),
        label="cubic")


def sine_perturb(b: float) -> Diffeomorphism:
    """x + b sin x with |b| < 1: non-affine, non-odd about generic points."""
    if not abs(b) < 1.0:
        raise ValueError("need |b| < 1 for invertibility")
    return from_forward(
        forward=lambda x: x + b * np.sin(x),
        derivative=lambda x: 1.0 + b * np.cos(x),
        second_derivative=lambda x: -b * np.sin(x),
        label=f"sine_perturb({b:g})")


DIFFEO_CONSTRUCTORS = {
    "shift": (1, shift),
    "scale": (1, scaling),
    "cubic": (0, cubic),
    "sine_perturb": (1, sine_perturb),
}


def make_diffeo(name: str, *args: float) -> Diffeomorphism:
    try:
        arity, ctor = DIFFEO_CONSTRUCTORS[name]
    except KeyError:
        raise ValueError(f"unknown diffeomorphism {name!r}; "
                         f"known: {', '.join(sorted(DIFFEO_CONSTRUCTORS))}") from None
    if len(args) != arity:
        raise ValueError(f"diffeo {name!r} takes {arity} argument(s), got {len(args)}")
    return ctor(*args)


def named_regular(name: str) -> Distribution:
    f = get_smooth(name)
    return regular(f.value, support_hint=f.support, label=name)


# Standard batteries for the property suites.

def diffeo_battery() -> list[Diffeomorphism]:
    return [shift(0.6), scaling(2.0), cubic(), sine_perturb(0.3)]


def distribution_battery() -> list[tuple[str, Distribution]]:
    return [
        ("delta(0.4)", delta(0.4)),
        ("ddelta(0.4,1)", delta_derivative(0.4, 1)),
        ("heaviside(-0.3)", heaviside(-0.3)),
        ("regular(sin)", named_regular("sin")),
    ]


def field_battery() -> list[VectorField]:
    return [translation_field(), linear_field(), sinefield(0.3)]


def smooth_battery() -> list[SmoothFunction]:
    names = ["sin", "cos", "x", "x2", "x3", "x5", "exp_window"]
    return [SMOOTH_FUNCTIONS[n] for n in names]


def product_battery() -> list[SmoothFunction]:
    return [SMOOTH_FUNCTIONS[n] for n in ("sin", "cos", "x2_window")]


def probe_pairs(count: int = 20) -> list[tuple[TestObject, float]]:
    """Deterministic (omega, p) probes: assorted bumps plus a few scaled
    mollifier profiles, with base points spread over the chart."""
    bumps = [
        (0.0, 1.0), (0.3, 0.8), (-0.5, 1.3), (0.8, 0.5),
        (-1.1, 0.9), (1.4, 0.6), (0.1, 1.6), (-0.2, 0.4),
        (0.5, 1.1), (2.0, 0.7), (-1.8, 1.2), (0.4, 0.9),
        (-0.3, 0.6), (1.0, 1.4), (-0.7, 0.5), (0.6, 1.0),
    ]
    points = [0.0, 0.5, -0.7, 1.2, -1.5, 0.3, 0.9, -0.1,
              1.7, -2.2, 0.2, -0.9, 1.1, 0.7, -0.4, 1.9]
    probes: list[tuple[TestObject, float]] = []
    for (c, r), p in zip(bumps, points):
        probes.append((make_bump(c, r), p))
    extras = [
        (scaled_net(make_moment_mollifier(2), 0.0, 0.5), 0.4),
        (scaled_net(make_moment_mollifier(2), 0.4, 0.25), -0.3),
        (scaled_net(make_moment_mollifier(4), -0.3, 0.5), 0.8),
        (scaled_net(make_moment_mollifier(4), 0.5, 1.0), 0.0),
    ]
    probes.extend(extras)
    return probes[:count]
