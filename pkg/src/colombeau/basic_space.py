"""The basic space of the construction: smooth maps R(omega, p).

Distributions are a small symbolic algebra (regular, Dirac, Dirac
derivative, Heaviside terms) with exact pairings against test objects,
which keeps the commutation checks sharp instead of quadrature-limited.
The two embeddings are

    iota(u)(omega, p) = <u, omega>        (independent of p)
    sigma(f)(omega, p) = f(p)             (independent of omega)

and representatives close under pointwise sum, product and scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .kernels import Interval, central_diff, grid_max_abs, integrate, nth_derivative
from .test_objects import FormVariation, MomentMollifier, TestObject, perturb

PAIRING_TOL = 1e-12
D1_BASE_STEP = 1e-4  # relative to the variation's sup norm
P_DIFF_STEP = 1e-4   # base-point derivative step


Point = float


@dataclass(frozen=True)
class Regular:
    """Locally integrable function acting by integration against the
    test density; `support_hint` confines the quadrature when given."""
    f: Callable
    support_hint: Interval | None = None
    label: str = ""


@dataclass(frozen=True)
class DeltaAt:
    point: float


@dataclass(frozen=True)
class DeltaDerivative:
    point: float
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("derivative order must be >= 1")


@dataclass(frozen=True)
class HeavisideAt:
    threshold: float


Atom = Union[Regular, DeltaAt, DeltaDerivative, HeavisideAt]


@dataclass(frozen=True)
class Distribution:
    """Finite linear combination of atoms; pairing is linear in the terms."""

    terms: tuple[tuple[float, Atom], ...]

    def __add__(self, other: "Distribution") -> "Distribution":
        return Distribution(self.terms + other.terms)

    def __sub__(self, other: "Distribution") -> "Distribution":
        return self + (-1.0) * other

    def __neg__(self) -> "Distribution":
        return (-1.0) * self

    def __rmul__(self, c: float) -> "Distribution":
        return Distribution(tuple((c * w, a) for w, a in self.terms))

    def singular_points(self) -> tuple[float, ...]:
        pts = []
        for _, atom in self.terms:
            if isinstance(atom, (DeltaAt, DeltaDerivative)):
                pts.append(atom.point)
            elif isinstance(atom, HeavisideAt):
                pts.append(atom.threshold)
        return tuple(dict.fromkeys(pts))

    def pair(self, omega: TestObject | FormVariation, tol: float = PAIRING_TOL) -> float:
        return sum(w * _atom_pairing(atom, omega, tol) for w, atom in self.terms)


def delta(p: float) -> Distribution:
    return Distribution(((1.0, DeltaAt(p)),))


def delta_derivative(p: float, order: int = 1) -> Distribution:
    return Distribution(((1.0, DeltaDerivative(p, order)),))


def heaviside(c: float) -> Distribution:
    return Distribution(((1.0, HeavisideAt(c)),))


def regular(f: Callable, support_hint: Interval | None = None, label: str = "") -> Distribution:
    return Distribution(((1.0, Regular(f, support_hint, label)),))


def _density_derivative(omega, p: float, order: int) -> float:
    if omega.derivative is not None:
        if order == 1:
            return float(omega.derivative(p))
        return nth_derivative(omega.derivative, p, order - 1, scale=omega.support.width)
    return nth_derivative(omega.density, p, order, scale=omega.support.width)


def _atom_pairing(atom: Atom, omega, tol: float) -> float:
    if isinstance(atom, DeltaAt):
        return float(omega.density(atom.point))
    if isinstance(atom, DeltaDerivative):
        return (-1.0) ** atom.order * _density_derivative(omega, atom.point, atom.order)
    if isinstance(atom, HeavisideAt):
        if atom.threshold >= omega.support.hi:
            return 0.0
        lo = max(atom.threshold, omega.support.lo)
        return integrate(omega.density, Interval(lo, omega.support.hi), tol)
    if isinstance(atom, Regular):
        hint = atom.support_hint
        f = atom.f
        rule = getattr(omega, "rule", None)
        # precomputed rule applies when f is smooth across the whole support
        if rule is not None and (hint is None or
                                 (hint.lo <= omega.support.lo and hint.hi >= omega.support.hi)):
            return float(np.dot(np.asarray(f(rule.nodes), dtype=float), rule.weights))
        domain = omega.support
        if hint is not None:
            domain = domain.intersect(hint)
            if domain is None:
                return 0.0
        g = omega.density
        return integrate(lambda x: f(x) * g(x), domain, tol)
    raise TypeError(f"unknown atom {atom!r}")


def pairing(u, omega: TestObject | FormVariation, tol: float = PAIRING_TOL) -> float:
    """Bracket <u, omega>; accepts any object exposing pair(omega, tol)."""
    return u.pair(omega, tol)


@dataclass(frozen=True)
class SmoothFunction:
    """A smooth scalar function with its analytic derivative.

    `second_derivative` and `support` are optional extras: the former
    sharpens derivative chains, the latter marks compactly supported
    witnesses for weak-limit integrals.
    """

    value: Callable
    derivative: Callable
    second_derivative: Callable | None = None
    support: Interval | None = None
    label: str = ""

    def __mul__(self, other: "SmoothFunction") -> "SmoothFunction":
        f, g = self, other
        second = None
        if f.second_derivative is not None and g.second_derivative is not None:
            def second(x, f=f, g=g):
                return (f.second_derivative(x) * g.value(x)
                        + 2.0 * f.derivative(x) * g.derivative(x)
                        + f.value(x) * g.second_derivative(x))
        supp = None
        if f.support is not None:
            supp = f.support if g.support is None else f.support.intersect(g.support)
        elif g.support is not None:
            supp = g.support
        return SmoothFunction(
            value=lambda x: f.value(x) * g.value(x),
            derivative=lambda x: f.derivative(x) * g.value(x) + f.value(x) * g.derivative(x),
            second_derivative=second,
            support=supp,
            label=f"{f.label}*{g.label}" if f.label and g.label else "")


@dataclass(frozen=True)
class Representative:
    """Element of the basic space: an evaluable map (omega, p) -> real.

    The provenance tag is for reporting only; evaluation never branches
    on it.  `singular_points` lists chart locations where the value
    varies on the scale of the test object's support, so sweeps can place
    quadrature breakpoints there.
    """

    eval: Callable[[TestObject, Point], float]
    tag: str = "custom"
    singular_points: tuple[float, ...] = field(default=())

    def __call__(self, omega: TestObject, p: Point) -> float:
        return self.eval(omega, p)

    def __add__(self, other: "Representative") -> "Representative":
        return rep_add(self, other)

    def __sub__(self, other: "Representative") -> "Representative":
        return rep_add(self, rep_scale(-1.0, other))

    def __mul__(self, other):
        if isinstance(other, Representative):
            return rep_mul(self, other)
        return rep_scale(float(other), self)

    __rmul__ = __mul__

    def __neg__(self) -> "Representative":
        return rep_scale(-1.0, self)


def _merged_points(a: Representative, b: Representative) -> tuple[float, ...]:
    return tuple(dict.fromkeys(a.singular_points + b.singular_points))


def rep_add(a: Representative, b: Representative) -> Representative:
    return Representative(lambda omega, p: a.eval(omega, p) + b.eval(omega, p),
                          tag="sum", singular_points=_merged_points(a, b))


def rep_mul(a: Representative, b: Representative) -> Representative:
    return Representative(lambda omega, p: a.eval(omega, p) * b.eval(omega, p),
                          tag="product", singular_points=_merged_points(a, b))


def rep_scale(c: float, a: Representative) -> Representative:
    return Representative(lambda omega, p: c * a.eval(omega, p),
                          tag="scaled", singular_points=a.singular_points)


def zero_rep() -> Representative:
    return Representative(lambda omega, p: 0.0, tag="custom")


def embed_distribution(u, tol: float = PAIRING_TOL) -> Representative:
    """The canonical embedding: iota(u)(omega, p) = <u, omega>."""
    sing = u.singular_points() if hasattr(u, "singular_points") else ()
    return Representative(lambda omega, p: pairing(u, omega, tol),
                          tag="embedded-distribution",
                          singular_points=tuple(sing))


def embed_smooth(f: SmoothFunction) -> Representative:
    """The smooth embedding: sigma(f)(omega, p) = f(p)."""
    return Representative(lambda omega, p: float(f.value(p)),
                          tag="embedded-smooth")


def embed_convolution(u, phi: MomentMollifier, tol: float = PAIRING_TOL):
    """Local-formalism evaluation (eps, x) -> <u, phi_eps(. - x)>.

    The translated test function is built here as printed, without the
    classical reflection, so comparisons against the direct embedding on
    scaled nets are restricted to even mollifiers.
    """
    prof = phi.profile

    def value(eps: float, x: float) -> float:
        if not 0.0 < eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        lo = x + eps * prof.support.lo
        hi = x + eps * prof.support.hi
        translated = TestObject(
            density=lambda y: prof.density((y - x) / eps) / eps,
            support=Interval(lo, hi),
            derivative=lambda y: prof.derivative((y - x) / eps) / (eps * eps),
            rule=None if prof.rule is None else prof.rule.shifted(x, eps))
        return pairing(u, translated, tol)

    return value


def d1_directional(r: Representative, omega: TestObject, p: Point,
                   eta: FormVariation, s: float | None = None) -> float:
    """Directional derivative of R in the omega slot along eta.

    Richardson-extrapolated central difference at steps s and s/2; the
    default step is 1e-4 scaled by the variation's sup norm, which keeps
    the density perturbation at a fixed absolute size.
    """
    if s is None:
        sup = grid_max_abs(eta.density, eta.support)
        s = D1_BASE_STEP / max(sup, 1e-12)

    def quotient(step: float) -> float:
        plus = r.eval(perturb(omega, eta, step), p)
        minus = r.eval(perturb(omega, eta, -step), p)
        return (plus - minus) / (2.0 * step)

    return (4.0 * quotient(0.5 * s) - quotient(s)) / 3.0
