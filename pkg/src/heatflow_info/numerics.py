"""Quadrature, Gaussian expectation, and finite-difference primitives.

Conventions used throughout the package:

  * Gauss-Hermite rules are in the probabilists' convention: nodes/weights
    (z_i, w_i) satisfy sum(w_i) = 1 and

        E[f(Z)] ~ sum_i w_i f(z_i),   Z ~ N(0,1),

    exact for polynomials of degree <= 2*order - 1.  This keeps every
    Gaussian expectation free of sqrt(2) bookkeeping.

  * Every integral returns an ErrorEstimate: the value together with the
    absolute difference between two refinement levels (order vs order/2 for
    Gauss-Hermite, grid vs half-grid for interval quadrature).  The estimate
    is floored at the roundoff level eps * sum_i |w_i f(x_i)| of the weighted
    sum so that comparisons against it stay meaningful when an integral is
    zero to machine precision.

  * The adaptive interval method integrates over [mu - R*sigma, mu + R*sigma]
    per component, R = truncation_radius in standard-deviation units, with
    overlapping component intervals merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_hermitenorm

from .errors import (
    ConvergenceFailureError,
    InvalidArgumentError,
    NumericFailureError,
)

_EPS = float(np.finfo(float).eps)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# degenerate-variance cutoff: below this a Gaussian is treated as a point mass
POINT_MASS_VARIANCE = 1e-300

# nodes per panel of the composite Gauss-Legendre rule used by the
# adaptive_interval method
_PANEL_ORDER = 16
_MAX_REFINEMENTS = 10

GAUSS_HERMITE = "gauss_hermite"
ADAPTIVE_INTERVAL = "adaptive_interval"


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs controlling every expectation and integral in the package.

    order is the Gauss-Hermite node count; truncation_radius (in standard
    deviations) bounds the adaptive method's intervals.  Defaults suit the
    smooth, rapidly decaying integrands this package produces; both are
    plain config knobs.
    """

    method: str = GAUSS_HERMITE
    order: int = 80
    truncation_radius: float = 12.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.method not in (GAUSS_HERMITE, ADAPTIVE_INTERVAL):
            raise InvalidArgumentError(f"unknown quadrature method {self.method!r}")
        if self.order < 2:
            raise InvalidArgumentError("order must be >= 2")
        if self.truncation_radius < 6:
            raise InvalidArgumentError("truncation_radius must be >= 6")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise InvalidArgumentError("tolerances must be positive")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class ErrorEstimate:
    """A numeric value paired with a refinement-based absolute error estimate."""

    value: float
    abs_error: float

    def __post_init__(self) -> None:
        if not self.abs_error >= 0.0:
            raise InvalidArgumentError("abs_error must be nonnegative")


@lru_cache(maxsize=64)
def gauss_hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilists' Gauss-Hermite rule: nodes and weights with sum(w) = 1."""
    if order < 2:
        raise InvalidArgumentError("order must be >= 2")
    nodes, weights = roots_hermitenorm(order)
    weights = weights / _SQRT_2PI
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _eval_vectorized(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate f on an array, falling back to a scalar loop for
    non-vectorized callables."""
    try:
        ys = np.asarray(f(xs), dtype=float)
    except (TypeError, ValueError):
        ys = None
    if ys is None or ys.shape != xs.shape:
        ys = np.array([float(f(float(x))) for x in xs])
    return ys


def _check_finite(xs: np.ndarray, ys: np.ndarray) -> None:
    bad = ~np.isfinite(ys)
    if bad.any():
        node = float(xs[bad][0])
        raise NumericFailureError(f"integrand not finite at x={node!r}", node=node)


def _weighted_sum(weights: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Weighted sum and its roundoff floor eps * sum |w_i y_i|."""
    value = float(weights @ ys)
    floor = _EPS * float(np.abs(weights) @ np.abs(ys))
    return value, floor


def expect_gaussian_1d(
    f: Callable,
    mean: float,
    variance: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ErrorEstimate:
    """E[f(mean + sqrt(variance) * Z)] for standard normal Z.

    Variance below POINT_MASS_VARIANCE returns f(mean) exactly (point-mass
    limit).  Raises NumericFailureError, carrying the offending node, if f is
    not finite inside the truncated domain.
    """
    if not variance >= 0.0:
        raise InvalidArgumentError("variance must be nonnegative")
    if variance < POINT_MASS_VARIANCE:
        y = _eval_vectorized(f, np.array([mean]))
        _check_finite(np.array([mean]), y)
        return ErrorEstimate(float(y[0]), 0.0)
    sd = math.sqrt(variance)
    if spec.method == GAUSS_HERMITE:
        coarse = _gh_expect(f, mean, sd, max(2, spec.order // 2))
        fine, floor = _gh_expect(f, mean, sd, spec.order, with_floor=True)
        return ErrorEstimate(fine, max(abs(fine - coarse), floor))
    lo = mean - spec.truncation_radius * sd
    hi = mean + spec.truncation_radius * sd

    def integrand(x: np.ndarray) -> np.ndarray:
        z = (x - mean) / sd
        return _eval_vectorized(f, x) * np.exp(-0.5 * z * z) / (_SQRT_2PI * sd)

    return _composite_refine(integrand, [(lo, hi)], spec, min_panel_width=sd)


def _gh_expect(f, mean, sd, order, with_floor=False):
    nodes, weights = gauss_hermite_rule(order)
    xs = mean + sd * nodes
    ys = _eval_vectorized(f, xs)
    _check_finite(xs, ys)
    value, floor = _weighted_sum(weights, ys)
    return (value, floor) if with_floor else value


def _merge_intervals(intervals: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of closed intervals, merged to avoid double counting."""
    ordered = sorted((float(lo), float(hi)) for lo, hi in intervals)
    merged = [ordered[0]]
    for lo, hi in ordered[1:]:
        prev_lo, prev_hi = merged[-1]
        if lo <= prev_hi:
            merged[-1] = (prev_lo, max(prev_hi, hi))
        else:
            merged.append((lo, hi))
    return merged


def _composite_value(fn, intervals, panels_per_unit) -> tuple[float, float]:
    nodes, weights = _legendre_rule(_PANEL_ORDER)
    total = 0.0
    floor = 0.0
    for lo, hi in intervals:
        n_panels = max(4, int(math.ceil((hi - lo) * panels_per_unit)))
        edges = np.linspace(lo, hi, n_panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        ys = fn(xs)
        _check_finite(xs, ys)
        w = (half[:, None] * weights[None, :]).ravel()
        v, fl = _weighted_sum(w, ys)
        total += v
        floor += fl
    return total, floor


def _composite_refine(fn, intervals, spec, min_panel_width) -> ErrorEstimate:
    """Composite Gauss-Legendre over merged intervals, halving panel width
    until two successive levels agree.

    Raises ConvergenceFailureError when the level-to-level difference stops
    shrinking across 3 refinements while still above tolerance.
    """
    intervals = _merge_intervals(intervals)
    per_unit = 1.0 / max(min_panel_width, 1e-12)
    prev, _ = _composite_value(fn, intervals, per_unit)
    errors: list[float] = []
    value = prev
    floor = 0.0
    for level in range(1, _MAX_REFINEMENTS + 1):
        per_unit *= 2.0
        value, floor = _composite_value(fn, intervals, per_unit)
        errors.append(abs(value - prev))
        tol = max(spec.abs_tol, spec.rel_tol * abs(value))
        if errors[-1] <= tol:
            return ErrorEstimate(value, max(errors[-1], floor))
        if len(errors) >= 3 and errors[-1] >= errors[-2] >= errors[-3] and errors[-1] > tol:
            raise ConvergenceFailureError(
                f"interval quadrature error stalled at {errors[-1]:.3e} "
                f"after {level} refinements"
            )
        prev = value
    return ErrorEstimate(value, max(errors[-1], floor))


def integrate_density_functional(
    g: Callable,
    weight_density: Callable,
    centers: Sequence[float],
    scales: Sequence[float],
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ErrorEstimate:
    """Integral of weight_density(x) * g(x) over the union of the truncated
    intervals [c_i - R*s_i, c_i + R*s_i], R = spec.truncation_radius.

    This is the workhorse behind the density functionals: with
    weight_density = rho it evaluates integrals of the form
    integral rho(x) g(x) dx.
    """
    centers = np.asarray(centers, dtype=float)
    scales = np.asarray(scales, dtype=float)
    if centers.shape != scales.shape or centers.ndim != 1 or centers.size == 0:
        raise InvalidArgumentError("centers and scales must be matching 1-D sequences")
    if not (scales > 0).all():
        raise InvalidArgumentError("scales must be positive")
    R = spec.truncation_radius
    intervals = [(c - R * s, c + R * s) for c, s in zip(centers, scales)]

    def integrand(x: np.ndarray) -> np.ndarray:
        return _eval_vectorized(weight_density, x) * _eval_vectorized(g, x)

    return _composite_refine(integrand, intervals, spec, min_panel_width=float(scales.min()))


def fd_default_step(t: float, order: int) -> float:
    """Step size balancing truncation against roundoff for central differences."""
    scale = max(abs(t), 1.0)
    return scale * (_EPS ** (1.0 / 3.0) if order == 1 else _EPS ** 0.25)


def finite_difference(
    curve: Callable[[float], float],
    t: float,
    order: int,
    step: float | None = None,
) -> float:
    """Central finite difference of a curve defined on t > 0.

    order 1: (f(t+h) - f(t-h)) / (2h);  order 2: (f(t+h) - 2 f(t) + f(t-h)) / h^2.
    """
    if order not in (1, 2):
        raise InvalidArgumentError("order must be 1 or 2")
    h = fd_default_step(t, order) if step is None else float(step)
    if h <= 0:
        raise InvalidArgumentError("step must be positive")
    if t - 2.0 * h <= 0:
        raise InvalidArgumentError(f"t - 2*step must stay positive (t={t!r}, step={h!r})")
    if order == 1:
        return (curve(t + h) - curve(t - h)) / (2.0 * h)
    return (curve(t + h) - 2.0 * curve(t) + curve(t - h)) / (h * h)
