"""Deterministic numerical primitives shared by every other module.

Four operations live here: adaptive Gauss-Legendre quadrature, RK4 flow
maps with step doubling, central finite differences (optionally Richardson
extrapolated), and log-log slope fitting on epsilon sweeps.  Everything is
a pure function of its inputs; callables are expected to accept numpy
arrays elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

# Effective-completeness window for flows: trajectories leaving it abort.
WORK_WINDOW = (-50.0, 50.0)

# Values below this floor are treated as zero in slope fits; pairings
# carry a few-1e-14 of double-precision round-off, so the floor sits one
# decade above that.
SLOPE_FLOOR = 1e-13

_GAUSS_POINTS = 15
_MAX_BISECTIONS = 48
_MAX_FLOW_STEP = 0.05


class NumericsError(Exception):
    """Base class for numerical failures raised by this package."""


class QuadratureError(NumericsError):
    """Adaptive quadrature hit the bisection limit.

    Carries the worst subinterval and its local error estimate so the
    caller can see where refinement stalled.
    """

    def __init__(self, message: str, worst: tuple[float, float], estimate: float):
        super().__init__(f"{message} (worst subinterval [{worst[0]:g}, {worst[1]:g}], "
                         f"local error ~{estimate:.3e})")
        self.worst = worst
        self.estimate = estimate


class FlowEscapeError(NumericsError):
    """A trajectory left the working window; the field is effectively
    incomplete at this scale."""


@dataclass(frozen=True)
class Interval:
    """Closed interval in the global chart coordinate, lo < hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return Interval(lo, hi) if lo < hi else None


@dataclass(frozen=True)
class EpsilonGrid:
    """Strictly decreasing geometric grid of scale parameters in (0, 1]."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = self.values
        if len(v) < 4:
            raise ValueError("need at least 4 grid values")
        if any(not 0.0 < x <= 1.0 for x in v):
            raise ValueError("grid values must lie in (0, 1]")
        ratios = [v[i + 1] / v[i] for i in range(len(v) - 1)]
        if any(r >= 1.0 for r in ratios):
            raise ValueError("grid must be strictly decreasing")
        if max(ratios) - min(ratios) > 1e-9 * max(ratios):
            raise ValueError("grid must be geometric (constant ratio)")

    @classmethod
    def dyadic(cls, coarse: int = 2, fine: int = 14) -> "EpsilonGrid":
        """Grid {2^-k : k = coarse..fine}; the package default is k = 2..14."""
        return cls(tuple(2.0 ** -k for k in range(coarse, fine + 1)))

    @classmethod
    def default(cls) -> "EpsilonGrid":
        return cls.dyadic()

    @property
    def ratio(self) -> float:
        return self.values[1] / self.values[0]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_POINTS)


def _panel_sums(f, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """GL15 panel estimates for a batch of panels, one f call total."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return half * (vals @ _WEIGHTS)


def _adaptive(f, edges_lo, edges_hi, tols, collect_panels: bool):
    """Breadth-first adaptive bisection over a batch of panels.

    Each level halves every unresolved panel and evaluates the whole
    level in a single call to f, which keeps vectorized integrands cheap.
    """
    a = np.asarray(edges_lo, dtype=float)
    b = np.asarray(edges_hi, dtype=float)
    tol = np.asarray(tols, dtype=float)
    whole = _panel_sums(f, a, b)
    total = 0.0
    panels: list[tuple[float, float]] = []
    for _ in range(_MAX_BISECTIONS):
        m = 0.5 * (a + b)
        halves = _panel_sums(f, np.concatenate([a, m]), np.concatenate([m, b]))
        left, right = halves[:a.size], halves[a.size:]
        refined = left + right
        err = np.abs(whole - refined)
        # round-off floor: machine-level disagreement counts as resolved
        done = err <= np.maximum(tol, 4e-16 * (np.abs(left) + np.abs(right)))
        total += float(refined[done].sum())
        if collect_panels and done.any():
            for lo, mi, hi in zip(a[done], m[done], b[done]):
                panels.append((float(lo), float(mi)))
                panels.append((float(mi), float(hi)))
        if done.all():
            return total, panels
        keep = ~done
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([0.5 * tol[keep], 0.5 * tol[keep]])
    worst = int(np.argmax(err))
    raise QuadratureError("quadrature did not converge",
                          (float(a[worst]), float(b[worst])), float(err[worst]))


def _split(domain: Interval, breakpoints: Sequence[float], tol: float):
    cuts = sorted({float(p) for p in breakpoints if domain.lo < p < domain.hi})
    edges = [domain.lo, *cuts, domain.hi]
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    return lo, hi, tol * (hi - lo) / domain.width


def integrate(f: Callable, domain: Interval, tol: float = 1e-12,
              breakpoints: Sequence[float] = ()) -> float:
    """Adaptively integrate a smooth function over an interval.

    Composite 15-point Gauss-Legendre panels are bisected until the local
    error estimate (panel value vs. the sum of its two halves) passes the
    tolerance allotted to the panel.  `breakpoints` pre-split the domain;
    pass the locations of narrow features so panels straddle rather than
    miss them.            Exact for polynomials up to degree 29 per panel.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi, tols = _split(domain, breakpoints, tol)
    total, _ = _adaptive(f, lo, hi, tols, collect_panels=False)
    return total


def quad_panels(f: Callable, domain: Interval, tol: float = 1e-13) -> list[tuple[float, float]]:
    """The accepted panel decomposition from an adaptive run on f.

    A fixed GL15 composite rule over these panels integrates f times any
    comparably smooth factor to roughly the requested tolerance; used to
    precompute reusable quadrature rules for test-object densities.
    """
    lo, hi, tols = _split(domain, (), tol)
    _, panels = _adaptive(f, lo, hi, tols, collect_panels=True)
    return sorted(panels)


def _rk4_fixed(field, y0: np.ndarray, tau: float, n: int,
               window, positions) -> np.ndarray:
    h = tau / n
    y = y0.copy()
    for _ in range(n):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if window is not None:
            pos = y[positions]
            if np.any(pos < window[0]) or np.any(pos > window[1]):
                raise FlowEscapeError(
                    f"trajectory left the working window {window} at t within {tau:g}")
    return y


def ode_flow_system(y0: np.ndarray, field: Callable, tau: float, tol: float = 1e-12,
                    window=None, positions=slice(None)) -> np.ndarray:
    """RK4 with step doubling for an autonomous system y' = field(y).

    Doubles the step count until two successive answers agree to 15*tol
    (classical fourth-order error estimate).  `positions` selects which
    state components are subject to the escape window.
    """
    y0 = np.asarray(y0, dtype=float)
    if tau == 0.0:
        return y0.copy()
    if window is not None:
        pos = y0[positions]
        if np.any(pos < window[0]) or np.any(pos > window[1]):
            raise FlowEscapeError("initial condition outside the working window")
    n = max(4, int(math.ceil(abs(tau) / _MAX_FLOW_STEP)))
    prev = _rk4_fixed(field, y0, tau, n, window, positions)
    while n < (1 << 20):
        n *= 2
        cur = _rk4_fixed(field, y0, tau, n, window, positions)
        if np.max(np.abs(cur - prev)) <= 15.0 * tol:
            return cur
        prev = cur
    raise NumericsError("flow integration did not reach the requested tolerance")


def ode_flow(x0, field: Callable, tau: float, tol: float = 1e-12,
             window=WORK_WINDOW):
    """Flow map Fl_tau of the scalar field x' = field(x), applied to x0.

    Accepts a scalar or an array of initial points (shared step count).
    Raises FlowEscapeError when a trajectory leaves `window`.
    """
    arr = np.asarray(x0, dtype=float)
    scalar = arr.ndim == 0
    state = np.atleast_1d(arr)
    out = ode_flow_system(state, field, tau, tol, window=window)
    return float(out[0]) if scalar else out


def central_diff(g: Callable, t0: float, h: float, richardson: bool = False) -> float:
    """Symmetric difference quotient of g at t0, optionally Richardson
    extrapolated from steps h and h/2 (raises the order from 2 to 4)."""
    if h <= 0:
        raise ValueError("h must be positive")

    def d(s):
        return (g(t0 + s) - g(t0 - s)) / (2.0 * s)

    if not richardson:
        return d(h)
    return (4.0 * d(0.5 * h) - d(h)) / 3.0


# Base steps for nth_derivative, balancing h^4 Richardson truncation
# against eps/h^m round-off per derivative order.
_FD_STEPS = {1: 1e-4, 2: 1e-3, 3: 3e-3, 4: 1e-2}


def _stencil(g, x, order, h):
    if order == 1:
        return (g(x + h) - g(x - h)) / (2.0 * h)
    ks = np.arange(order + 1)
    coeffs = np.array([(-1.0) ** k * math.comb(order, k) for k in ks])
    pts = x + (0.5 * order - ks) * h
    return float(np.dot(coeffs, [g(p) for p in pts])) / h ** order


def nth_derivative(g: Callable, x: float, order: int, scale: float = 1.0) -> float:
    """Order-m derivative of g at x by a central stencil with Richardson
    extrapolation; `scale` sets the length scale on which g varies."""
    if order < 1:
        raise ValueError("order must be >= 1")
    h = scale * _FD_STEPS.get(order, 1e-2)
    return (4.0 * _stencil(g, x, order, 0.5 * h) - _stencil(g, x, order, h)) / 3.0


def grid_max_abs(f: Callable, domain: Interval, n: int = 201) -> float:
    """Max of |f| over an equispaced grid; stands in for a sup norm."""
    return float(np.max(np.abs(f(domain.grid(n)))))


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of log(value) vs log(epsilon) on the tail window.

    `machine_zero` marks a series that sits at or below the clamp floor:
    identically negligible at machine precision (slope reported as +inf).
    """

    slope: float
    r2: float
    n_used: int
    machine_zero: bool = False


def fit_slope(samples: Iterable[tuple[float, float]], floor: float = SLOPE_FLOOR) -> SlopeFit:
    """Fit the asymptotic order of a positive series value(epsilon).

    Values at or below `floor` are clamped out.  The fit uses the
    smallest-epsilon half of the surviving points (at least 4 when
    available) to suppress preasymptotic bias.  Fewer than 3 survivors
    means the series hugs the floor and is classified machine-zero.
    """
    pts = sorted(samples, key=lambda s: -s[0])  # descending epsilon
    if len(pts) < 4:
        raise ValueError("need at least 4 samples")
    if any(v < 0 for _, v in pts):
        raise ValueError("values must be nonnegative")
    alive = [(e, v) for e, v in pts if v > floor]
    if len(alive) < 3:
        return SlopeFit(slope=math.inf, r2=1.0, n_used=len(alive), machine_zero=True)
    k = max(4, (len(alive) + 1) // 2)
    tail = alive[-min(k, len(alive)):]
    x = np.log(np.array([e for e, _ in tail]))
    y = np.log(np.array([v for _, v in tail]))
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(np.dot(x - xbar, x - xbar))
    sxy = float(np.dot(x - xbar, y - ybar))
    slope = sxy / sxx
    resid = y - ybar - slope * (x - xbar)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - ybar, y - ybar))
    r2 = 1.0 if ss_tot <= 1e-28 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope=slope, r2=r2, n_used=len(tail))
