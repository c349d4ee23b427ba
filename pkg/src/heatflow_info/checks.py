"""Named verification suites: derivative identities, exact identities, and
inequalities, each producing one PASS/FAIL line per check.

Every check pairs a computed quantity with an independently computed partner
and a tolerance.  Checks that do not apply to the supplied model (for
example posterior-covariance identities on a smooth mixture) are reported as
SKIP, never silently dropped.

The suites pin their own quadrature settings instead of inheriting the
caller's: finite differences divide by steps as small as 1e-8, so the curve
evaluations feeding them need roughly 1e-12 accuracy, which the adaptive
interval method delivers on every integrand used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import convexity, functionals
from .errors import UnsupportedModelError
from .functionals import (
    backward_info,
    conditional_fisher,
    conditional_fisher_direct,
    conditional_variance,
    fisher_info_initial,
    info_functionals,
    mutual_triple,
    reverse_mutual_fisher,
    reverse_mutual_fisher2_direct,
)
from .mixtures import (
    MixtureModel,
    heat_evolve,
    log_density_hessian,
    log_density_hessian_batch,
    posterior_weights_batch,
    stats,
)
from .numerics import (
    ADAPTIVE_INTERVAL,
    QuadratureSpec,
    fd_default_step,
    finite_difference,
)

SUITE_NAMES = ("derivatives", "identities", "inequalities")

# adaptive interval quadrature converges to ~1e-13 on every curve the finite
# differences touch; Gauss-Hermite at practical orders does not.  The second
# difference divides curve noise by h^2 ~ 1e-8, so the refinement must stop
# only at full convergence (tolerances near machine precision).
FD_SPEC = QuadratureSpec(
    method=ADAPTIVE_INTERVAL, order=80, truncation_radius=14.0, rel_tol=1e-13, abs_tol=1e-14
)
ID_SPEC = QuadratureSpec(method=ADAPTIVE_INTERVAL, order=120, truncation_radius=14.0)

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"


@dataclass(frozen=True)
class CheckResult:
    """One verification line: worst violation against its allowed tolerance."""

    name: str
    anchor: str
    max_violation: float
    tolerance: float
    status: str

    @staticmethod
    def from_violation(name: str, anchor: str, violation: float, tol: float) -> "CheckResult":
        return CheckResult(name, anchor, violation, tol, PASS if violation <= tol else FAIL)

    @staticmethod
    def skipped(name: str, anchor: str) -> "CheckResult":
        return CheckResult(name, anchor, math.nan, math.nan, SKIP)


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results) + 2
    awidth = max(len(r.anchor) for r in results) + 2
    lines = []
    for r in results:
        lines.append(
            f"{r.name:<{width}}{r.anchor:<{awidth}}"
            f"violation={r.max_violation:<12.3e} tol={r.tolerance:<12.3e} {r.status}"
        )
    return "\n".join(lines)


def default_time_grid() -> np.ndarray:
    return np.geomspace(0.05, 20.0, 40)


def run_suites(
    model: MixtureModel,
    suites,
    seed: int = 0,
    t_grid: np.ndarray | None = None,
) -> list[CheckResult]:
    if isinstance(suites, str):
        suites = SUITE_NAMES if suites == "all" else (suites,)
    grid = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    results: list[CheckResult] = []
    for suite in suites:
        if suite == "derivatives":
            results.extend(derivative_checks(model, grid))
        elif suite == "identities":
            results.extend(identity_checks(model, seed))
        elif suite == "inequalities":
            results.extend(inequality_checks(model, grid))
        else:
            raise UnsupportedModelError(f"unknown suite {suite!r}")
    return results


# -- derivative identities ------------------------------------------------------


def derivative_checks(model: MixtureModel, t_grid: np.ndarray) -> list[CheckResult]:
    """Finite differences of H(X_t) and I(X_0;X_t) against the Fisher
    functionals: dH/dt = J/2, d2H/dt2 = -K/2, dI/dt = -J_mut/2,
    d2I/dt2 = K_mut/2.

    Each difference is validated by halving its step: if the estimate moves
    by more than a quarter of the allowed residual, the curve's higher
    derivatives dominate at that time (deep concentration, t << separation^2)
    and the point is unresolvable by central differences, so it is excluded
    rather than reported as a violation.  A check with no resolvable points
    is a SKIP.
    """

    def h_curve(t: float) -> float:
        return info_functionals(model, t, FD_SPEC).h

    def i_curve(t: float) -> float:
        return info_functionals(model, t, FD_SPEC).i_mut

    targets = {
        "h1": ("entropy_rate", "dH/dt = J/2", 1e-4),
        "h2": ("entropy_curvature", "d2H/dt2 = -K/2", 1e-3),
        "i1": ("mutual_info_rate", "dI/dt = -J_mut/2", 1e-4),
        "i2": ("mutual_info_curvature", "d2I/dt2 = K_mut/2", 1e-4),
    }
    worst = dict.fromkeys(targets, -math.inf)
    for t in t_grid:
        t = float(t)
        f = info_functionals(model, t, FD_SPEC)
        per_point = {
            "h1": (h_curve, 1, 0.5 * f.j),
            "h2": (h_curve, 2, -0.5 * f.k),
            "i1": (i_curve, 1, -0.5 * f.j_mut),
            "i2": (i_curve, 2, 0.5 * f.k_mut),
        }
        for key, (curve, order, target) in per_point.items():
            tol = targets[key][2]
            scale = max(abs(target), 1e-8)
            step = fd_default_step(t, order)
            estimates = [
                finite_difference(curve, t, order, step=s)
                for s in (0.5 * step, step, 2.0 * step)
            ]
            if max(estimates) - min(estimates) > 0.5 * tol * scale:
                continue  # no step resolves this point: truncation at larger
                # steps, value quantization at smaller ones
            worst[key] = max(worst[key], abs(estimates[1] - target) / scale)
    results = []
    for key, (name, anchor, tol) in targets.items():
        if worst[key] == -math.inf:
            results.append(CheckResult.skipped(name, anchor))
        else:
            results.append(CheckResult.from_violation(name, anchor, worst[key], tol))
    return results


# -- exact identities -----------------------------------------------------------

_ID_TIMES = (0.1, 0.3, 1.0, 3.0)


def identity_checks(model: MixtureModel, seed: int = 0) -> list[CheckResult]:
    results = [hessian_covariance_check(model, seed)]
    results.append(backward_fisher_check(model))
    results.append(mmse_variance_check(model))
    results.append(variance_decomposition_check(model))
    results.append(backward_decomposition_check(model))
    results.append(conditional_fisher_check(model))
    results.append(reverse_second_order_check(model))
    return results


def hessian_covariance_check(model: MixtureModel, seed: int, pairs: int = 200) -> CheckResult:
    """Exact identity -hess log rho_t(y) = (1/t)(I - Cov(X_0|X_t=y)/t) at
    random (t, y); point-mass initial data."""
    name, anchor = "hessian_covariance", "-hess log rho_t = (I - Cov/t)/t"
    if not model.is_point_mass:
        return CheckResult.skipped(name, anchor)
    rng = np.random.default_rng(seed)
    span = float(np.abs(model.centers).max()) + 1.0
    worst = 0.0
    for _ in range(pairs):
        t = float(np.exp(rng.uniform(math.log(0.05), math.log(10.0))))
        y = rng.uniform(-span - 6.0 * math.sqrt(t), span + 6.0 * math.sqrt(t), size=model.dim)
        lhs = convexity.hessian_via_cov(model, t, y)
        rhs = -log_density_hessian(heat_evolve(model, t), y)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return CheckResult.from_violation(name, anchor, worst, 1e-8)


def backward_fisher_check(model: MixtureModel) -> CheckResult:
    """J(X_0;X_t) equals the backward Fisher information phi."""
    name, anchor = "backward_fisher_match", "J_mut = phi"
    if not model.is_point_mass:
        return CheckResult.skipped(name, anchor)
    worst, tol = 0.0, 0.0
    for t in _ID_TIMES:
        j_mut = mutual_triple(model, t, ID_SPEC)[1]
        b = backward_info(model, t, ID_SPEC)
        scale = max(abs(j_mut.value), abs(b.phi), 1e-12)
        worst = max(worst, abs(j_mut.value - b.phi) / scale)
        tol = max(tol, (2.0 * (j_mut.abs_error + b.err["phi"]) + 1e-9) / scale)
    return CheckResult.from_violation(name, anchor, worst, max(tol, 1e-8))


def mmse_variance_check(model: MixtureModel) -> CheckResult:
    """J(X_0;X_t) = Var(X_0|X_t)/t^2, the mmse form of the mutual Fisher
    information; applicable to point-mass and smooth one-dimensional models."""
    name, anchor = "mmse_variance", "J_mut = Var(X0|Xt)/t^2"
    try:
        worst, tol = 0.0, 0.0
        for t in _ID_TIMES:
            j_mut = mutual_triple(model, t, ID_SPEC)[1]
            if model.is_point_mass:
                b = backward_info(model, t, ID_SPEC)
                var, var_err = b.var_cond, b.err["var_cond"]
            else:
                v = conditional_variance(model, t, ID_SPEC)
                var, var_err = v.value, v.abs_error
            rhs = var / t**2
            scale = max(abs(j_mut.value), abs(rhs), 1e-12)
            worst = max(worst, abs(j_mut.value - rhs) / scale)
            tol = max(tol, (2.0 * (j_mut.abs_error + var_err / t**2) + 1e-9) / scale)
        return CheckResult.from_violation(name, anchor, worst, max(tol, 1e-8))
    except UnsupportedModelError:
        return CheckResult.skipped(name, anchor)


def variance_decomposition_check(model: MixtureModel) -> CheckResult:
    """K(X_0;X_t) = 2 Var(X_0|X_t)/t^3 - E|Cov|_HS^2/t^4 for point-mass
    initial data."""
    name, anchor = "variance_decomposition", "K_mut = 2V/t^3 - C/t^4"
    if not model.is_point_mass:
        return CheckResult.skipped(name, anchor)
    worst = 0.0
    for t in _ID_TIMES:
        k_mut = mutual_triple(model, t, ID_SPEC)[2]
        b = backward_info(model, t, ID_SPEC)
        rhs = 2.0 * b.var_cond / t**3 - b.cov_hs_sq / t**4
        scale = max(abs(k_mut.value), abs(rhs), 1e-9)
        worst = max(worst, abs(k_mut.value - rhs) / scale)
    return CheckResult.from_violation(name, anchor, worst, 1e-5)


def backward_decomposition_check(model: MixtureModel) -> CheckResult:
    """K(X_0;X_t) = psi + 2 E[<-hess log rho_t, Cov/t^2>] for point-mass
    one-dimensional initial data; all three pieces computed separately."""
    name, anchor = "backward_decomposition", "K_mut = psi + 2<hess, cov>"
    scan = model if model.dim == 1 else model.collinear_projection()
    if not model.is_point_mass or scan is None:
        return CheckResult.skipped(name, anchor)
    worst = 0.0
    for t in _ID_TIMES:
        k_mut = mutual_triple(scan, t, ID_SPEC)[2]
        b = backward_info(scan, t, ID_SPEC)
        evolved = heat_evolve(scan, t)

        def cross(ys: np.ndarray) -> np.ndarray:
            neg_hess = -log_density_hessian_batch(evolved, ys)
            w = posterior_weights_batch(scan, t, ys)
            a = scan.centers[:, 0]
            cov = np.maximum(w @ (a * a) - (w @ a) ** 2, 0.0)
            return neg_hess * cov / t**2

        cross_term = functionals._expect_under_model(cross, evolved, ID_SPEC)
        rhs = b.psi + 2.0 * cross_term.value
        scale = max(abs(k_mut.value), abs(rhs), 1e-9)
        worst = max(worst, abs(k_mut.value - rhs) / scale)
    return CheckResult.from_violation(name, anchor, worst, 1e-5)


def conditional_fisher_check(model: MixtureModel) -> CheckResult:
    """J(X_0|X_t) = J(X_0) + n/t: double quadrature of the defining integral
    against the shift formula; smooth one-dimensional initial data."""
    name, anchor = "conditional_fisher_shift", "J(X0|Xt) = J(X0) + n/t"
    if not model.is_smooth or model.dim != 1:
        return CheckResult.skipped(name, anchor)
    worst = 0.0
    for t in _ID_TIMES:
        direct = conditional_fisher_direct(model, t, ID_SPEC)
        formula = conditional_fisher(model, t, ID_SPEC)
        worst = max(worst, abs(direct.value - formula) / max(abs(formula), 1.0))
    return CheckResult.from_violation(name, anchor, worst, 1e-6)


def reverse_second_order_check(model: MixtureModel) -> CheckResult:
    """K(X_t;X_0) = n/t^2 + 2 J(X_0)/t: defining integrals against the
    formula; smooth one-dimensional initial data."""
    name, anchor = "reverse_second_order", "K(Xt;X0) = n/t^2 + 2J0/t"
    if not model.is_smooth or model.dim != 1:
        return CheckResult.skipped(name, anchor)
    worst = 0.0
    for t in _ID_TIMES:
        direct = reverse_mutual_fisher2_direct(model, t, ID_SPEC)
        _, formula = reverse_mutual_fisher(model, t, ID_SPEC)
        worst = max(worst, abs(direct.value - formula) / max(abs(formula), 1.0))
    return CheckResult.from_violation(name, anchor, worst, 1e-6)


# -- inequalities ----------------------------------------------------------------


def inequality_checks(model: MixtureModel, t_grid: np.ndarray) -> list[CheckResult]:
    sub_grid = np.asarray(t_grid, dtype=float)[:: max(1, len(t_grid) // 12)]
    return [
        square_trace_bound_check(model, sub_grid),
        semiconcave_bound_check(model, sub_grid),
        backward_square_bound_check(model),
        posterior_variance_floor_check(model),
        posterior_cov_fourth_moment_check(model),
    ]


def square_trace_bound_check(model: MixtureModel, t_grid: np.ndarray) -> CheckResult:
    """K(X_t) >= J(X_t)^2 / n along the flow, within twice the error
    estimates (the squared-trace vs squared-norm comparison)."""
    name, anchor = "square_trace_bound", "K >= J^2/n"
    worst = -math.inf
    for t in t_grid:
        f = info_functionals(model, float(t), ID_SPEC)
        slack = 2.0 * (f.err["k"] + 2.0 * abs(f.j) * f.err["j"] / f.dim) + 1e-9
        worst = max(worst, (f.j**2 / f.dim - f.k) - slack)
    return CheckResult.from_violation(name, anchor, worst, 0.0)


def semiconcave_bound_check(model: MixtureModel, t_grid: np.ndarray) -> CheckResult:
    """Wherever the evolved law scans as log-concave (alpha_hat >= 0),
    K_mut >= J_mut^2/n + 2 alpha_hat J_mut."""
    name, anchor = "semiconcave_bound", "K_mut >= J_mut^2/n + 2a J_mut"
    try:
        worst = -math.inf
        seen = False
        for t in t_grid:
            t = float(t)
            report = convexity.log_concavity_at(model, t)
            if not report.is_log_concave:
                continue
            seen = True
            _, j_mut, k_mut = mutual_triple(model, t, ID_SPEC)
            bound = convexity.kj_mutual_lower_bound(max(j_mut.value, 0.0), model.dim, report.alpha_hat)
            slack = 2.0 * (k_mut.abs_error + j_mut.abs_error * (abs(j_mut.value) + report.alpha_hat)) + 1e-9
            worst = max(worst, (bound - k_mut.value) - slack)
        if not seen:
            return CheckResult.skipped(name, anchor)
        return CheckResult.from_violation(name, anchor, worst, 0.0)
    except UnsupportedModelError:
        return CheckResult.skipped(name, anchor)


def backward_square_bound_check(model: MixtureModel) -> CheckResult:
    """psi >= phi^2 / n for the backward quantities; point-mass initial."""
    name, anchor = "backward_square_bound", "psi >= phi^2/n"
    if not model.is_point_mass:
        return CheckResult.skipped(name, anchor)
    worst = -math.inf
    for t in _ID_TIMES:
        b = backward_info(model, t, ID_SPEC)
        slack = 2.0 * (b.err["psi"] + 2.0 * abs(b.phi) * b.err["phi"] / model.dim) + 1e-12
        worst = max(worst, (b.phi**2 / model.dim - b.psi) - slack)
    return CheckResult.from_violation(name, anchor, worst, 0.0)


def posterior_variance_floor_check(model: MixtureModel) -> CheckResult:
    """Var(X_0|X_t) >= n^2 / (J(X_0) + n/t), the conditional uncertainty
    floor; smooth one-dimensional initial data."""
    name, anchor = "posterior_variance_floor", "V >= n^2/(J0 + n/t)"
    if not model.is_smooth or model.dim != 1:
        return CheckResult.skipped(name, anchor)
    j0 = fisher_info_initial(model, ID_SPEC)
    worst = -math.inf
    for t in _ID_TIMES:
        v = conditional_variance(model, t, ID_SPEC)
        floor = 1.0 / (j0 + 1.0 / t)
        slack = 2.0 * v.abs_error + 1e-12
        worst = max(worst, (floor - v.value) - slack)
    return CheckResult.from_violation(name, anchor, worst, 0.0)


def posterior_cov_fourth_moment_check(model: MixtureModel) -> CheckResult:
    """E|Cov(X_0|X_t)|_HS^2 <= M_4(X_0); point-mass initial data."""
    name, anchor = "posterior_cov_fourth_moment", "E|Cov|^2 <= M4"
    if not model.is_point_mass:
        return CheckResult.skipped(name, anchor)
    m4 = stats(model).fourth_moment
    worst = -math.inf
    for t in _ID_TIMES:
        b = backward_info(model, t, ID_SPEC)
        slack = 2.0 * b.err["cov_hs_sq"] + 1e-12
        worst = max(worst, (b.cov_hs_sq - m4) - slack)
    return CheckResult.from_violation(name, anchor, worst, 0.0)
