"""Log-concavity certification and convexity thresholds for the mutual
information curve.

The evolved density of a point-mass mixture satisfies the exact identity

    -hess log rho_t(y) = (1/t) (I - Cov(X_0 | X_t = y) / t),

so log-concavity at time t is controlled by the posterior covariance.  Three
certificates bound where K(X_0; X_t) (the second derivative of mutual
information, up to the factor 1/2) can be negative:

  * log-concave initial law: nonnegative for every t;
  * support of diameter D (optionally convolved with a log-concave factor,
    e.g. a shared-variance Gaussian mixture): nonnegative for t >= D^2;
  * finite Fisher information and fourth moment: nonnegative for
    t >= J(X_0) M_4(X_0) / n^2, with a slightly tighter quadratic-root form
    reported alongside.

alpha_hat estimates the log-semiconcavity constant inf_y lambda_min of
-hess log rho by a dense one-dimensional grid scan; mixture Hessians are
smooth with O(k) critical regions, so a grid over +-12 standard deviations
suffices at the scales handled here.  Grid parameters are config knobs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BracketError,
    CheckFailedError,
    InvalidArgumentError,
    NumericFailureError,
    UnsupportedModelError,
)
from .functionals import fisher_info_initial, mutual_triple
from .mixtures import (
    MixtureModel,
    center_diameter,
    conditional_cov,
    heat_evolve,
    log_density_hessian_batch,
    stats,
)
from .numerics import DEFAULT_SPEC, QuadratureSpec

EIGEN_TOL = 1e-9
DEFAULT_GRID_RANGE = 12.0
DEFAULT_GRID_COUNT = 4096


@dataclass(frozen=True)
class SpatialGrid:
    """Descriptor of the 1-D scan grid."""

    lo: float
    hi: float
    count: int


@dataclass(frozen=True)
class LogConcavityReport:
    """Grid estimate of the log-semiconcavity constant at one time point."""

    t: float
    alpha_hat: float
    grid: SpatialGrid
    is_log_concave: bool
    eigen_tol: float = EIGEN_TOL


@dataclass(frozen=True)
class ConvexityThresholds:
    """Finite certificates above which the mutual information curve is convex.

    d_sq: squared center diameter when every component shares one variance
    (the bounded-part diameter; the shared Gaussian factor is the log-concave
    part), +inf otherwise.  fi_threshold: J(X_0) M_4(X_0) / n^2 for smooth
    initial data, +inf otherwise; fi_root_threshold is the sharper upper root
    of 2 n^2 t^2 - t J M_4 - n M_4, reported for information only.
    """

    d_sq: float
    fi_threshold: float
    fi_root_threshold: float
    log_concave_initial: bool
    fisher_info: float
    fourth_moment: float

    def min_finite(self) -> float:
        if self.log_concave_initial:
            return 0.0
        return min(self.d_sq, self.fi_threshold)


@dataclass(frozen=True)
class ConvexityScan:
    """K(X_0; X_t) along a time grid with sign classification."""

    t_grid: np.ndarray
    k_mut: np.ndarray
    k_err: np.ndarray
    nonconvex_intervals: tuple[tuple[float, float], ...]
    thresholds: ConvexityThresholds


def hessian_via_cov(initial: MixtureModel, t: float, y) -> np.ndarray:
    """-hess log rho_t(y) computed from the posterior covariance:
    (1/t) (I - Cov(X_0 | X_t = y) / t).  Point-mass initial data only."""
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    cov = conditional_cov(initial, t, y)
    return (np.eye(initial.dim) - cov / t) / t


def _scan_model_1d(model: MixtureModel) -> MixtureModel:
    if model.dim == 1:
        return model
    proj = model.collinear_projection()
    if proj is None:
        raise UnsupportedModelError(
            "log-concavity scan requires dim == 1 or collinear shared-variance "
            "components (the binding Hessian eigenvalue then lives on the "
            "center line)"
        )
    return proj


def log_concavity_report(
    model: MixtureModel,
    grid_range: float = DEFAULT_GRID_RANGE,
    grid_count: int = DEFAULT_GRID_COUNT,
    t: float = 0.0,
) -> LogConcavityReport:
    """alpha_hat = min over the grid of -(log rho)''.

    The grid spans mean +- grid_range standard deviations of the (projected)
    model.  The t argument only annotates the report with the flow time the
    model corresponds to.
    """
    if grid_count < 16:
        raise InvalidArgumentError("grid_count must be >= 16")
    if grid_range <= 0:
        raise InvalidArgumentError("grid_range must be positive")
    scan = _scan_model_1d(model)
    if not scan.is_smooth:
        raise UnsupportedModelError("log-concavity scan requires positive variances")
    st = stats(scan)
    sd = math.sqrt(st.variance)
    lo = float(st.mean[0] - grid_range * sd)
    hi = float(st.mean[0] + grid_range * sd)
    ys = np.linspace(lo, hi, grid_count)
    alpha = float(-log_density_hessian_batch(scan, ys).max())
    cap = 1.0 / float(scan.variances.min())
    if alpha > cap + EIGEN_TOL * max(1.0, cap):
        raise NumericFailureError(
            f"alpha_hat={alpha!r} exceeds the sharpest-component cap {cap!r}"
        )
    return LogConcavityReport(
        t=t,
        alpha_hat=alpha,
        grid=SpatialGrid(lo, hi, grid_count),
        is_log_concave=alpha >= -EIGEN_TOL,
    )


def log_concavity_at(initial: MixtureModel, t: float, **grid_kwargs) -> LogConcavityReport:
    """Report for the law of X_t given the initial model."""
    return log_concavity_report(heat_evolve(initial, t), t=t, **grid_kwargs)


def time_to_log_concavity(
    initial: MixtureModel,
    t_lo: float,
    t_hi: float,
    bisect_tol: float = 1e-6,
    grid_range: float = DEFAULT_GRID_RANGE,
    grid_count: int = DEFAULT_GRID_COUNT,
) -> float:
    """Smallest time (to bisect_tol) after which the evolved law scans as
    log-concave.

    Log-concavity along the flow is not assumed monotone: after bisecting,
    the result is confirmed on a forward grid and a CheckFailedError is
    raised if any later scanned time loses log-concavity.  The bracket must
    straddle the transition: not log-concave at t_lo, log-concave at t_hi.
    """
    if not (0 < t_lo < t_hi):
        raise InvalidArgumentError("need 0 < t_lo < t_hi")
    if bisect_tol <= 0:
        raise InvalidArgumentError("bisect_tol must be positive")
    if initial.k == 1 and initial.is_point_mass:
        raise BracketError("a single point mass evolves to a Gaussian: always log-concave")

    def concave_at(t: float) -> bool:
        return log_concavity_at(
            initial, t, grid_range=grid_range, grid_count=grid_count
        ).is_log_concave

    if concave_at(t_lo):
        raise BracketError(f"already log-concave at t_lo={t_lo!r}")
    if not concave_at(t_hi):
        raise BracketError(f"not yet log-concave at t_hi={t_hi!r}")
    lo, hi = t_lo, t_hi
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if concave_at(mid):
            hi = mid
        else:
            lo = mid
    t_star = hi
    for t in np.geomspace(t_star, max(t_hi, 2.0 * t_star), 12):
        if not concave_at(float(t)):
            raise CheckFailedError(
                f"log-concavity lost again at t={float(t)!r} after t*={t_star!r}"
            )
    if initial.is_point_mass:
        d_sq = center_diameter(initial) ** 2
        if t_star > d_sq + bisect_tol:
            raise CheckFailedError(
                f"t*={t_star!r} exceeds the squared-diameter certificate {d_sq!r}"
            )
    return t_star


def convexity_thresholds(
    initial: MixtureModel, spec: QuadratureSpec = DEFAULT_SPEC
) -> ConvexityThresholds:
    """Evaluate all applicable convexity certificates for an initial model."""
    st = stats(initial)
    if initial.has_shared_variance:
        d_sq = center_diameter(initial) ** 2
    else:
        d_sq = math.inf
    if initial.is_smooth:
        j0 = fisher_info_initial(initial, spec)
        n = initial.dim
        jm = j0 * st.fourth_moment
        fi = jm / n**2
        root = jm / (4.0 * n**2) * (1.0 + math.sqrt(1.0 + 8.0 * n / (j0**2 * st.fourth_moment)))
        fisher_val = j0
    else:
        fi = math.inf
        root = math.inf
        fisher_val = math.inf
    return ConvexityThresholds(
        d_sq=d_sq,
        fi_threshold=fi,
        fi_root_threshold=root,
        log_concave_initial=_initial_log_concave(initial),
        fisher_info=fisher_val,
        fourth_moment=st.fourth_moment,
    )


def _initial_log_concave(initial: MixtureModel) -> bool:
    if initial.k == 1:
        return True
    if not initial.is_smooth:
        return False
    try:
        return log_concavity_report(initial).is_log_concave
    except UnsupportedModelError:
        return False


def convexity_scan(
    initial: MixtureModel,
    t_grid,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ConvexityScan:
    """K(X_0; X_t) over the grid, with maximal sub-zero runs reported as
    nonconvex intervals.

    The per-point sign tolerance is max(quadrature error estimate, 1e-9) so
    integration noise is never declared nonconvexity.  Raises
    CheckFailedError if any nonconvex interval reaches past the smallest
    finite certificate from convexity_thresholds.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise InvalidArgumentError("t_grid must be a 1-D grid with >= 2 points")
    if not (np.diff(t_grid) > 0).all() or t_grid[0] <= 0:
        raise InvalidArgumentError("t_grid must be increasing and positive")
    k_vals = np.empty_like(t_grid)
    k_errs = np.empty_like(t_grid)
    for idx, t in enumerate(t_grid):
        k = mutual_triple(initial, float(t), spec)[2]
        k_vals[idx] = k.value
        k_errs[idx] = k.abs_error
    sign_tol = np.maximum(k_errs, 1e-9)
    below = k_vals < -sign_tol
    intervals: list[tuple[float, float]] = []
    start = None
    for idx, flag in enumerate(below):
        if flag and start is None:
            start = idx
        elif not flag and start is not None:
            intervals.append((float(t_grid[start]), float(t_grid[idx - 1])))
            start = None
    if start is not None:
        intervals.append((float(t_grid[start]), float(t_grid[-1])))
    thresholds = convexity_thresholds(initial, spec)
    cutoff = thresholds.min_finite()
    for lo, hi in intervals:
        if hi >= cutoff:
            raise CheckFailedError(
                f"nonconvex interval ({lo!r}, {hi!r}) reaches past the "
                f"certificate t >= {cutoff!r}"
            )
    return ConvexityScan(
        t_grid=t_grid,
        k_mut=k_vals,
        k_err=k_errs,
        nonconvex_intervals=tuple(intervals),
        thresholds=thresholds,
    )


def kj_mutual_lower_bound(j_mut: float, n: int, alpha: float) -> float:
    """Lower bound j_mut^2 / n + 2 alpha j_mut for K(X_0; X_t) when the
    evolved law is alpha-log-semiconcave; nonnegative whenever alpha >= 0."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    return j_mut * j_mut / n + 2.0 * alpha * j_mut
