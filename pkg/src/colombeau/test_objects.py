"""Compactly supported unit-integral 1-forms and their manipulations.

A test object is the pair (density, support) of a smooth compactly
supported density with unit integral, carried together with its analytic
derivative whenever one is available.  This module builds the canonical
bump, polynomial-corrected mollifiers with vanishing moments, scaled
nets concentrating at a point, Lie derivatives of forms, and pushforwards
under orientation-preserving diffeomorphisms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import Interval, NumericsError, integrate, quad_panels

_MOMENT_TOL = 1e-13
_RULE_TOL = 1e-13
_FD_STEP_FACTOR = 1e-6  # fallback derivative step, relative to support width

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


class OrientationError(NumericsError):
    """The map is not orientation-preserving on the relevant support."""


class MomentSystemError(NumericsError):
    """The moment linear system could not be solved reliably."""


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Fixed composite rule representing integration against a density.

    `weights` satisfy  integral of f * g dx ~ sum f(nodes) * weights  for
    any smooth f; `derivative_weights`, when present, do the same against
    g'.  It lets pairings against scaled nets collapse to a dot product
    instead of an adaptive quadrature per evaluation.
    """

    nodes: np.ndarray
    weights: np.ndarray
    derivative_weights: np.ndarray | None = None

    def shifted(self, p: float, eps: float) -> "QuadRule":
        """Rule for the net eps^-1 g((x - p)/eps) built from this one."""
        dw = None if self.derivative_weights is None \
            else self.derivative_weights / eps
        return QuadRule(nodes=p + eps * self.nodes, weights=self.weights,
                        derivative_weights=dw)


@dataclass(frozen=True, eq=False)
class TestObject:
    """A 1-form g(x) dx with compact support and unit integral.

    `derivative` is the analytic derivative of the density when known,
    or a finite-difference stand-in otherwise; pairings that need higher
    derivatives difference the density directly.  `rule` is an optional
    precomputed quadrature rule against the density, and `tail_mass`
    evaluates the exact partial integral of the density from a point to
    the upper end of the support (what a Heaviside pairing needs).
    """

    density: Callable
    support: Interval
    derivative: Callable | None = None
    rule: QuadRule | None = None
    tail_mass: Callable | None = None


@dataclass(frozen=True)
class MomentMollifier:
    """A centered profile with unit integral and moments 1..order zero."""

    profile: TestObject
    order: int


@dataclass(frozen=True, eq=False)
class FormVariation:
    """A compactly supported density with zero integral: a tangent
    direction to the unit-integral constraint."""

    density: Callable
    support: Interval
    derivative: Callable | None = None
    rule: QuadRule | None = None
    tail_mass: Callable | None = None


def _supported(fn, lo: float, hi: float):
    """Wrap fn so it is evaluated strictly inside (lo, hi) and is zero
    outside; scalar in, scalar out."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        xs = np.atleast_1d(arr)
        out = np.zeros_like(xs)
        m = (xs > lo) & (xs < hi)
        if m.any():
            out[m] = fn(xs[m])
        return float(out[0]) if scalar else out

    return wrapped


def fd_derivative(fn, width: float, factor: float = _FD_STEP_FACTOR):
    """Central-difference derivative of fn at step factor*width."""
    h = factor * width

    def deriv(x):
        return (fn(np.asarray(x, dtype=float) + h) - fn(np.asarray(x, dtype=float) - h)) / (2.0 * h)

    return deriv


def _profile_value(t):
    u = np.maximum(1.0 - t * t, 1e-300)
    return np.exp(-1.0 / u)


def _profile_derivative(t):
    # combined in log space: exp(-1/u) / u^2 underflows cleanly
    u = np.maximum(1.0 - t * t, 1e-300)
    return -2.0 * t * np.exp(-1.0 / u - 2.0 * np.log(u))


_bump_mass_value: float | None = None
_unit_panel_edges: np.ndarray | None = None
_unit_panel_nodes: np.ndarray | None = None
_unit_panel_scale: np.ndarray | None = None


def _bump_mass() -> float:
    """Integral of exp(-1/(1-t^2)) over (-1, 1), computed once."""
    global _bump_mass_value
    if _bump_mass_value is None:
        _bump_mass_value = integrate(_supported(_profile_value, -1.0, 1.0),
                                     Interval(-1.0, 1.0), tol=1e-13)
    return _bump_mass_value


def _unit_panels() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Panel edges plus GL15 nodes and scaled weights over the adaptive
    panel set of the unit bump; cached once and reused by every
    bump-backed rule."""
    global _unit_panel_edges, _unit_panel_nodes, _unit_panel_scale
    if _unit_panel_nodes is None:
        panels = quad_panels(_supported(_profile_value, -1.0, 1.0),
                             Interval(-1.0, 1.0), tol=_RULE_TOL)
        nodes = []
        scale = []
        for a, b in panels:
            half = 0.5 * (b - a)
            nodes.append(0.5 * (a + b) + half * _GL_NODES)
            scale.append(half * _GL_WEIGHTS)
        _unit_panel_edges = np.array([p[0] for p in panels] + [panels[-1][1]])
        _unit_panel_nodes = np.concatenate(nodes)
        _unit_panel_scale = np.concatenate(scale)
    return _unit_panel_edges, _unit_panel_nodes, _unit_panel_scale


def _density_rule(density, derivative, center: float, radius: float) -> QuadRule:
    """Composite rule against a bump-shaped density on its support."""
    _, t, w = _unit_panels()
    x = center + radius * t
    weights = radius * w * density(x)
    dweights = None if derivative is None else radius * w * derivative(x)
    return QuadRule(nodes=x, weights=weights, derivative_weights=dweights)


def _density_tail(density, center: float, radius: float) -> Callable:
    """Exact-to-rule partial integrals: tail(c) = integral of the density
    over [c, hi].  Suffix panel sums are precomputed; the panel containing
    c is finished with a single GL15 segment."""
    edges_t, _, _ = _unit_panels()
    edges = center + radius * edges_t
    per_panel = np.empty(edges.size - 1)
    for i in range(edges.size - 1):
        half = 0.5 * (edges[i + 1] - edges[i])
        x = 0.5 * (edges[i] + edges[i + 1]) + half * _GL_NODES
        per_panel[i] = half * float(np.dot(_GL_WEIGHTS, density(x)))
    suffix = np.concatenate([np.cumsum(per_panel[::-1])[::-1], [0.0]])

    def tail(c: float) -> float:
        if c <= edges[0]:
            return float(suffix[0])
        if c >= edges[-1]:
            return 0.0
        k = int(np.searchsorted(edges, c, side="right") - 1)
        half = 0.5 * (edges[k + 1] - c)
        x = 0.5 * (c + edges[k + 1]) + half * _GL_NODES
        partial = half * float(np.dot(_GL_WEIGHTS, density(x)))
        return partial + float(suffix[k + 1])

    return tail


def make_bump(center: float, radius: float) -> TestObject:
    """Normalized bump exp(-1/(1-t^2)) with t = (x-center)/radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = 1.0 / (radius * _bump_mass())
    lo, hi = center - radius, center + radius

    def dens(x):
        return c * _profile_value((x - center) / radius)

    def deriv(x):
        return (c / radius) * _profile_derivative((x - center) / radius)

    density = _supported(dens, lo, hi)
    derivative = _supported(deriv, lo, hi)
    return TestObject(density=density, support=Interval(lo, hi),
                      derivative=derivative,
                      rule=_density_rule(density, derivative, center, radius),
                      tail_mass=_density_tail(density, center, radius))


_mollifier_cache: dict[tuple[int, float], MomentMollifier] = {}


def make_moment_mollifier(q: int, radius: float = 1.0) -> MomentMollifier:
    """Mollifier with unit integral and vanishing moments 1..q.

    The profile is P(y) w(y) with w the normalized bump on [-radius,
    radius] and P the degree-q polynomial solving the moment system
    M c = e0, M[k, j] = integral of y^(k+j) w(y).  Since w is even the
    odd entries of M vanish identically and are zeroed exactly, so the
    profile is exactly even.  q = 0 returns the bump itself (up to the
    trivial 1x1 solve).
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if radius <= 0:
        raise ValueError("radius must be positive")
    key = (q, float(radius))
    cached = _mollifier_cache.get(key)
    if cached is not None:
        return cached

    w = make_bump(0.0, radius)
    moments = []
    for k in range(2 * q + 1):
        if k % 2 == 1:
            moments.append(0.0)
        else:
            moments.append(integrate(lambda y, k=k: y ** k * w.density(y),
                                     w.support, tol=_MOMENT_TOL))
    m = np.array([[moments[k + j] for j in range(q + 1)] for k in range(q + 1)])
    rhs = np.zeros(q + 1)
    rhs[0] = 1.0
    try:
        coeffs = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:  # cannot occur for the bump weight
        raise MomentSystemError(f"moment system singular for q={q}") from exc
    if float(np.max(np.abs(m @ coeffs - rhs))) > 1e-8:
        raise MomentSystemError(f"moment system ill-conditioned for q={q}")

    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()
    lo, hi = w.support.lo, w.support.hi

    def dens(y):
        return poly(y) * w.density(y)

    def deriv(y):
        return dpoly(y) * w.density(y) + poly(y) * w.derivative(y)

    density = _supported(dens, lo, hi)
    derivative = _supported(deriv, lo, hi)
    profile = TestObject(density=density, support=Interval(lo, hi),
                         derivative=derivative,
                         rule=_density_rule(density, derivative, 0.0, radius),
                         tail_mass=_density_tail(density, 0.0, radius))
    result = MomentMollifier(profile=profile, order=q)
    _mollifier_cache[key] = result
    return result


def scaled_net(phi: MomentMollifier, p: float, eps: float) -> TestObject:
    """Test object eps^-1 phi((x - p)/eps): the delta-approximating net.

    Unit integral is preserved exactly by the change of variables.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    prof = phi.profile
    lo = p + eps * prof.support.lo
    hi = p + eps * prof.support.hi

    def dens(x):
        return prof.density((x - p) / eps) / eps

    def deriv(x):
        return prof.derivative((x - p) / eps) / (eps * eps)

    rule = None if prof.rule is None else prof.rule.shifted(p, eps)
    tail = None
    if prof.tail_mass is not None:
        # change of variables: the partial mass is scale invariant
        tail = lambda c, f=prof.tail_mass: f((c - p) / eps)
    return TestObject(density=_supported(dens, lo, hi),
                      support=Interval(lo, hi),
                      derivative=_supported(deriv, lo, hi),
                      rule=rule, tail_mass=tail)


def lie_derivative_form(x_field, omega: TestObject) -> FormVariation:
    """Lie derivative of the 1-form: density (X g)' = X' g + X g'.

    The output integrates to zero (derivative of a compactly supported
    function), so it is a valid variation of the unit-integral slot.
    `x_field` needs `coefficient` and `coefficient_derivative` callables.
    """
    g = omega.density
    gp = omega.derivative if omega.derivative is not None \
        else fd_derivative(omega.density, omega.support.width)
    xc = x_field.coefficient
    xd = x_field.coefficient_derivative

    def dens(x):
        return xd(x) * g(x) + xc(x) * gp(x)

    rule = None
    if omega.rule is not None and omega.rule.derivative_weights is not None:
        n = omega.rule.nodes
        rule = QuadRule(nodes=n,
                        weights=(xd(n) * omega.rule.weights
                                 + xc(n) * omega.rule.derivative_weights))

    def tail(c):
        # integral of (X g)' over [c, hi] telescopes to -X(c) g(c)
        return -float(xc(c)) * float(g(c))

    return FormVariation(density=dens, support=omega.support, derivative=None,
                         rule=rule, tail_mass=tail)


def perturb(omega: TestObject, eta: FormVariation, s: float) -> TestObject:
    """Test object with density g + s*h; still unit-integral since the
    variation has zero mean."""
    lo = min(omega.support.lo, eta.support.lo)
    hi = max(omega.support.hi, eta.support.hi)

    def dens(x):
        return omega.density(x) + s * eta.density(x)

    if omega.derivative is not None and eta.derivative is not None:
        def deriv(x):
            return omega.derivative(x) + s * eta.derivative(x)
    else:
        deriv = None
    rule = None
    if (omega.rule is not None and eta.rule is not None
            and omega.rule.nodes is eta.rule.nodes):
        rule = QuadRule(nodes=omega.rule.nodes,
                        weights=omega.rule.weights + s * eta.rule.weights)
    tail = None
    if omega.tail_mass is not None and eta.tail_mass is not None:
        tail = lambda c, a=omega.tail_mass, b=eta.tail_mass: a(c) + s * b(c)
    return TestObject(density=dens, support=Interval(lo, hi), derivative=deriv,
                      rule=rule, tail_mass=tail)


def pushforward(mu, omega: TestObject) -> TestObject:
    """Image 1-form under an orientation-preserving diffeomorphism.

    density(y) = g(inv(y)) * inv'(y); the support maps to [mu(lo), mu(hi)]
    and the unit integral is preserved by the change of variables.  The
    derivative is analytic when mu carries a second derivative, else a
    finite-difference fallback at step 1e-6 * width.
    """
    probe = omega.support.grid(33)
    if float(np.min(mu.forward_derivative(probe))) <= 0.0:
        raise OrientationError(
            "map is not orientation-preserving on the test object support")
    new = Interval(float(mu.forward(omega.support.lo)),
                   float(mu.forward(omega.support.hi)))
    inv = mu.inverse
    fwd_d = mu.forward_derivative
    g = omega.density

    def dens(y):
        x = inv(y)
        return g(x) / fwd_d(x)

    density = _supported(dens, new.lo, new.hi)
    second = getattr(mu, "forward_second_derivative", None)
    if second is not None and omega.derivative is not None:
        gp = omega.derivative

        def deriv(y):
            x = inv(y)
            j = 1.0 / fwd_d(x)
            return gp(x) * j * j - g(x) * second(x) * j * j * j

        derivative = _supported(deriv, new.lo, new.hi)
    else:
        derivative = fd_derivative(density, new.width)
    return TestObject(density=density, support=new, derivative=derivative)
