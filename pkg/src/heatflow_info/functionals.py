"""Entropy / Fisher functionals of mixtures and their mutual counterparts
along the heat flow.

For a smooth density rho in R^n:

    H(X) = -int rho log rho,
    J(X) =  int rho |grad log rho|^2,
    K(X) =  int rho |hess log rho|_HS^2,

and along X_t = X_0 + sqrt(t) Z the mutual quantities are Gaussian-baseline
comparisons:

    I(X_0; X_t) = H(X_t) - (n/2) log(2 pi t e),
    J(X_0; X_t) = n/t    - J(X_t),
    K(X_0; X_t) = n/t^2  - K(X_t).

The reverse-order quantities do not depend on the evolved law at all:
J(X_t; X_0) = n/t and K(X_t; X_0) = n/t^2 + 2 J(X_0)/t.

Closed forms for an equal-weight pair of components at +-a use the
one-dimensional Gaussian V_u = N(u, u).  With u = |a|^2 / t a pair of point
masses gives

    I     = u - E[log cosh V_u]
    J_mut = (|a|^2/t^2) E[sech^2 V_u]
    K_mut = (2|a|^2/t^3) E[sech^2 V_u] - (|a|^4/t^4) E[sech^4 V_u]

and a pair of N(+-a, sI) gives, with u = |a|^2/(s+t),

    I     = (n/2) log(1 + s/t) + u - E[log cosh V_u]
    J_mut = n s / (t (s+t)) + (|a|^2/(s+t)^2) E[sech^2 V_u]
    K_mut = n s (s+2t) / (t^2 (s+t)^2)
            + (2|a|^2/(s+t)^3) E[sech^2 V_u] - (|a|^4/(s+t)^4) E[sech^4 V_u].

log cosh and sech are evaluated through scaled exponentials so arguments of
several hundred neither overflow nor lose the tail.

Quadrature paths are one-dimensional.  Models in higher dimension are served
either by the pair closed forms (dimension enters only through |a|^2 and the
explicit n-terms) or, for collinear shared-variance mixtures, by exact
reduction to the center line.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgumentError, NumericFailureError, UnsupportedModelError
from .mixtures import (
    MixtureModel,
    heat_evolve,
    log_density_batch,
    log_density_hessian_batch,
    posterior_weights_batch,
    score_batch,
)
from .numerics import (
    DEFAULT_SPEC,
    GAUSS_HERMITE,
    ErrorEstimate,
    QuadratureSpec,
    expect_gaussian_1d,
    gauss_hermite_rule,
    integrate_density_functional,
)

_EPS = float(np.finfo(float).eps)
_LOG2 = math.log(2.0)
_LOG_2PI = math.log(2.0 * math.pi)

# quadrature paths refuse smaller times for point-mass initial data: the
# evolved density is numerically singular below this
SMALL_T_FLOOR = 1e-6

AUTO = "auto"
QUADRATURE = "quadrature"
CLOSED_FORM = "closed_form"


def log_cosh(x):
    """log cosh(x) = |x| + log1p(e^(-2|x|)) - log 2, overflow-free."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LOG2


def sech_sq(x):
    """sech(x)^2 via scaled exponentials; decays like 4 e^(-2|x|)."""
    e2 = np.exp(-2.0 * np.abs(x))
    return 4.0 * e2 / (1.0 + e2) ** 2


def sech_4(x):
    return sech_sq(x) ** 2


def gaussian_baseline_entropy(n: int, t: float) -> float:
    """(n/2) log(2 pi t e): entropy of N(0, tI), the conditional law of X_t."""
    return 0.5 * n * (_LOG_2PI + math.log(t) + 1.0)


# -- expectations under a mixture ---------------------------------------------


def _expect_under_model(f: Callable, model: MixtureModel, spec: QuadratureSpec) -> ErrorEstimate:
    """E_{X ~ model}[f(X)] for a smooth one-dimensional mixture.

    Gauss-Hermite: exact decomposition sum_i p_i E_{N(a_i, s_i)}[f].
    Adaptive: integral of rho * f over the merged truncated intervals.
    """
    if model.dim != 1:
        raise UnsupportedModelError("quadrature expectations require dim == 1")
    if not model.is_smooth:
        raise UnsupportedModelError("quadrature expectations require positive variances")
    if spec.method == GAUSS_HERMITE:
        value = 0.0
        err = 0.0
        for p, a, s in zip(model.weights, model.centers[:, 0], model.variances):
            part = expect_gaussian_1d(f, float(a), float(s), spec)
            value += p * part.value
            err += p * part.abs_error
        return ErrorEstimate(value, err)
    rho = lambda xs: np.exp(log_density_batch(model, xs))
    return integrate_density_functional(
        f, rho, model.centers[:, 0], np.sqrt(model.variances), spec
    )


def entropy(model: MixtureModel, spec: QuadratureSpec = DEFAULT_SPEC) -> ErrorEstimate:
    """H = -E[log rho(X)] by quadrature; dim == 1, all variances positive."""
    return _expect_under_model(lambda xs: -log_density_batch(model, xs), model, spec)


def fisher(model: MixtureModel, spec: QuadratureSpec = DEFAULT_SPEC) -> ErrorEstimate:
    """J = E[((log rho)'(X))^2] by quadrature; dim == 1."""
    return _expect_under_model(lambda xs: score_batch(model, xs) ** 2, model, spec)


def fisher2(model: MixtureModel, spec: QuadratureSpec = DEFAULT_SPEC) -> ErrorEstimate:
    """K = E[((log rho)''(X))^2] by quadrature; dim == 1."""
    return _expect_under_model(
        lambda xs: log_density_hessian_batch(model, xs) ** 2, model, spec
    )


def fisher_info_initial(initial: MixtureModel, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """J(X_0); +inf for point masses, exact for a single Gaussian, quadrature
    (after collinear reduction if needed) for smooth mixtures."""
    if not initial.is_smooth:
        return math.inf
    if initial.k == 1:
        return initial.dim / float(initial.variances[0])
    if initial.dim == 1:
        return fisher(initial, spec).value
    proj = initial.collinear_projection()
    if proj is None:
        raise UnsupportedModelError(
            "Fisher information only available for dim == 1 or collinear "
            "shared-variance mixtures"
        )
    # each direction orthogonal to the center line is an independent N(., s)
    extra = (initial.dim - 1) / float(initial.variances[0])
    return fisher(proj, spec).value + extra


# -- mutual functionals: quadrature path --------------------------------------


def _check_mutual_args(initial: MixtureModel, t: float) -> None:
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if initial.is_point_mass and t < SMALL_T_FLOOR:
        raise InvalidArgumentError(
            f"quadrature path refuses t < {SMALL_T_FLOOR} for point-mass initial "
            "data; use the pair closed forms"
        )


def _mutual_triple_quadrature(
    initial: MixtureModel, t: float, spec: QuadratureSpec
) -> tuple[ErrorEstimate, ErrorEstimate, ErrorEstimate]:
    _check_mutual_args(initial, t)
    model = initial
    extra_dims = 0
    shared_s = 0.0
    if initial.dim > 1:
        proj = initial.collinear_projection()
        if proj is None:
            raise UnsupportedModelError(
                "quadrature mutual functionals require dim == 1 or a collinear "
                "shared-variance mixture"
            )
        model = proj
        extra_dims = initial.dim - 1
        shared_s = float(initial.variances[0])
    evolved = heat_evolve(model, t)
    h = entropy(evolved, spec)
    j = fisher(evolved, spec)
    k = fisher2(evolved, spec)
    gi, gj, gk = _gaussian_mutual_terms(extra_dims, shared_s, t)
    i_mut = ErrorEstimate(h.value - gaussian_baseline_entropy(1, t) + gi, h.abs_error)
    j_mut = ErrorEstimate(1.0 / t - j.value + gj, j.abs_error)
    k_mut = ErrorEstimate(1.0 / t**2 - k.value + gk, k.abs_error)
    return i_mut, j_mut, k_mut


def _gaussian_mutual_terms(n_dims: int, s: float, t: float) -> tuple[float, float, float]:
    """Exact mutual functionals contributed by n_dims independent N(., s)
    coordinates: the single-Gaussian values I = (1/2) log(1 + s/t) etc."""
    if n_dims == 0 or s == 0.0:
        return 0.0, 0.0, 0.0
    st = s + t
    return (
        0.5 * n_dims * math.log1p(s / t),
        n_dims * s / (t * st),
        n_dims * s * (s + 2.0 * t) / (t * t * st * st),
    )


# -- mutual functionals: closed forms ------------------------------------------


def _pair_expectations(u: float, spec: QuadratureSpec):
    elc = expect_gaussian_1d(log_cosh, u, u, spec)
    e2 = expect_gaussian_1d(sech_sq, u, u, spec)
    e4 = expect_gaussian_1d(sech_4, u, u, spec)
    return elc, e2, e4


def two_point_closed_form(
    a_norm_sq: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[ErrorEstimate, ErrorEstimate, ErrorEstimate]:
    """(I, J_mut, K_mut) for the equal-weight pair of point masses at +-a.

    Dimension enters only through |a|^2.  No small-t floor: u = |a|^2/t may be
    arbitrarily large.
    """
    if a_norm_sq <= 0:
        raise InvalidArgumentError("a_norm_sq must be positive")
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    u = a_norm_sq / t
    elc, e2, e4 = _pair_expectations(u, spec)
    i = ErrorEstimate(u - elc.value, elc.abs_error + 4.0 * _EPS * max(u, 1.0))
    c2 = a_norm_sq / t**2
    j = ErrorEstimate(c2 * e2.value, c2 * e2.abs_error)
    c2k = 2.0 * a_norm_sq / t**3
    c4k = a_norm_sq**2 / t**4
    k_val = c2k * e2.value - c4k * e4.value
    k_err = c2k * e2.abs_error + c4k * e4.abs_error
    k_err += 4.0 * _EPS * (abs(c2k * e2.value) + abs(c4k * e4.value))
    return i, j, ErrorEstimate(k_val, k_err)


def two_gaussian_closed_form(
    a_norm_sq: float,
    s: float,
    t: float,
    n: int = 1,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> tuple[ErrorEstimate, ErrorEstimate, ErrorEstimate]:
    """(I, J_mut, K_mut) for the equal-weight pair N(-a, sI), N(a, sI).

    The s -> 0 limit recovers the point-mass pair; a_norm_sq = 0 degenerates
    to a single Gaussian (the V_0 expectations become point evaluations at 0).
    """
    if s <= 0:
        raise InvalidArgumentError("s must be positive")
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if a_norm_sq < 0:
        raise InvalidArgumentError("a_norm_sq must be nonnegative")
    st = s + t
    u = a_norm_sq / st
    elc, e2, e4 = _pair_expectations(u, spec)
    gi, gj, gk = _gaussian_mutual_terms(n, s, t)
    i_val = gi + u - elc.value
    i = ErrorEstimate(i_val, elc.abs_error + 4.0 * _EPS * max(u, abs(gi), 1.0))
    c2 = a_norm_sq / st**2
    j = ErrorEstimate(gj + c2 * e2.value, c2 * e2.abs_error + 4.0 * _EPS * max(gj, 1.0))
    c2k = 2.0 * a_norm_sq / st**3
    c4k = a_norm_sq**2 / st**4
    k_val = gk + c2k * e2.value - c4k * e4.value
    k_err = c2k * e2.abs_error + c4k * e4.abs_error
    k_err += 4.0 * _EPS * (abs(gk) + abs(c2k * e2.value) + abs(c4k * e4.value))
    return i, j, ErrorEstimate(k_val, k_err)


# -- mutual functionals: dispatch ----------------------------------------------


def mutual_triple(
    initial: MixtureModel,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    path: str = AUTO,
) -> tuple[ErrorEstimate, ErrorEstimate, ErrorEstimate]:
    """(I, J_mut, K_mut) at time t, choosing the best available route.

    auto: single component -> exact Gaussian formulas; equal-weight pair ->
    closed forms; otherwise one-dimensional quadrature (with collinear
    reduction).  path="quadrature" forces the quadrature route (used to
    cross-check the closed forms); path="closed_form" requires a model the
    closed forms cover.
    """
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if path == QUADRATURE:
        return _mutual_triple_quadrature(initial, t, spec)
    pair = initial.symmetric_pair()
    if initial.k == 1:
        gi, gj, gk = _gaussian_mutual_terms(initial.dim, float(initial.variances[0]), t)
        zero = ErrorEstimate(gi, 0.0), ErrorEstimate(gj, 0.0), ErrorEstimate(gk, 0.0)
        return zero
    if pair is not None:
        a_sq, s = pair
        if s == 0.0:
            return two_point_closed_form(a_sq, t, spec)
        return two_gaussian_closed_form(a_sq, s, t, initial.dim, spec)
    if path == CLOSED_FORM:
        raise UnsupportedModelError(
            "closed forms cover single components and equal-weight pairs only"
        )
    return _mutual_triple_quadrature(initial, t, spec)


def mutual_info(
    initial: MixtureModel,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    path: str = AUTO,
) -> ErrorEstimate:
    """I(X_0; X_t) = H(X_t) - (n/2) log(2 pi t e)."""
    return mutual_triple(initial, t, spec, path)[0]


def mutual_fisher(
    initial: MixtureModel,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    path: str = AUTO,
) -> ErrorEstimate:
    """J(X_0; X_t) = n/t - J(X_t); nonnegative up to quadrature error."""
    return mutual_triple(initial, t, spec, path)[1]


def mutual_fisher2(
    initial: MixtureModel,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    path: str = AUTO,
) -> ErrorEstimate:
    """K(X_0; X_t) = n/t^2 - K(X_t); carries no sign guarantee."""
    return mutual_triple(initial, t, spec, path)[2]


def reverse_mutual_fisher(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[float, float]:
    """(J(X_t; X_0), K(X_t; X_0)) = (n/t, n/t^2 + 2 J(X_0)/t), exactly.

    K is +inf for point-mass initial data (their Fisher information is
    infinite).
    """
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    n = initial.dim
    j_rev = n / t
    j0 = fisher_info_initial(initial, spec)
    k_rev = math.inf if math.isinf(j0) else n / t**2 + 2.0 * j0 / t
    return j_rev, k_rev


def reverse_mutual_fisher2_direct(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> ErrorEstimate:
    """K(X_t; X_0) from its defining integrals, for cross-checking.

    Conditioning on X_t shifts the initial log-density Hessian by exactly
    -1/t, so K(X_0 | X_t) - K(X_0) = E[(h_0(X_0) - 1/t)^2] - E[h_0(X_0)^2]
    with h_0 = (log rho_0)''.  Both expectations run over the initial law.
    """
    if not initial.is_smooth:
        raise UnsupportedModelError("direct reverse functional requires a smooth initial")
    shifted = _expect_under_model(
        lambda xs: (log_density_hessian_batch(initial, xs) - 1.0 / t) ** 2, initial, spec
    )
    plain = fisher2(initial, spec)
    return ErrorEstimate(shifted.value - plain.value, shifted.abs_error + plain.abs_error)


# -- backward (statistical) quantities -----------------------------------------


@dataclass(frozen=True)
class BackwardInfo:
    """Backward Fisher quantities of X_0 given X_t for point-mass initial data.

    phi  = E[tr Cov(X_0 | X_t)] / t^2        (backward Fisher information)
    psi  = E[|Cov(X_0 | X_t)|_HS^2] / t^4    (backward second-order)
    var_cond   = E[tr Cov(X_0 | X_t)]        (the mmse)
    cov_hs_sq  = E[|Cov(X_0 | X_t)|_HS^2]
    """

    phi: float
    psi: float
    var_cond: float
    cov_hs_sq: float
    err: Mapping[str, float]


def _posterior_cov_1d(initial: MixtureModel, t: float, ys: np.ndarray) -> np.ndarray:
    w = posterior_weights_batch(initial, t, ys)
    a = initial.centers[:, 0]
    mean = w @ a
    second = w @ (a * a)
    return np.maximum(second - mean * mean, 0.0)


def backward_info(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> BackwardInfo:
    """Backward quantities by quadrature over the evolved law.

    Point-mass initial only; models in dim > 1 must be collinear (the
    posterior covariance then lives on the center line and the scalar
    reduction is exact).
    """
    if not initial.is_point_mass:
        raise UnsupportedModelError("backward_info requires a point-mass initial model")
    _check_mutual_args(initial, t)
    model = initial if initial.dim == 1 else initial.collinear_projection()
    if model is None:
        raise UnsupportedModelError("backward_info requires collinear centers for dim > 1")
    evolved = heat_evolve(model, t)
    var_cond = _expect_under_model(lambda ys: _posterior_cov_1d(model, t, ys), evolved, spec)
    cov_hs = _expect_under_model(
        lambda ys: _posterior_cov_1d(model, t, ys) ** 2, evolved, spec
    )
    result = BackwardInfo(
        phi=var_cond.value / t**2,
        psi=cov_hs.value / t**4,
        var_cond=var_cond.value,
        cov_hs_sq=cov_hs.value,
        err=MappingProxyType(
            {
                "phi": var_cond.abs_error / t**2,
                "psi": cov_hs.abs_error / t**4,
                "var_cond": var_cond.abs_error,
                "cov_hs_sq": cov_hs.abs_error,
            }
        ),
    )
    _validate_backward(result, initial.dim)
    return result


def _validate_backward(b: BackwardInfo, n: int) -> None:
    tol_phi = 2.0 * b.err["phi"] + 1e-12
    tol_psi = 2.0 * b.err["psi"] + 2.0 * abs(b.phi) * tol_phi / n + 1e-12 * max(1.0, b.phi**2)
    if b.phi < -tol_phi or b.psi < -tol_psi:
        raise NumericFailureError("backward quantities came out negative beyond tolerance")
    if b.psi - b.phi**2 / n < -tol_psi:
        raise NumericFailureError(
            f"backward power bound violated: psi={b.psi!r} < phi^2/n={b.phi**2 / n!r}"
        )


def conditional_variance(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> ErrorEstimate:
    """Var(X_0 | X_t) = E[Var(X_0 | X_t = y)], the mmse of estimating X_0.

    Works for smooth and point-mass one-dimensional initial data: given the
    component, X_0 | (i, y) is N(mu_i(y), tau_i) with tau_i = s_i t/(s_i + t)
    and mu_i(y) = (t a_i + s_i y)/(s_i + t).
    """
    if initial.dim != 1:
        raise UnsupportedModelError("conditional_variance requires dim == 1")
    _check_mutual_args(initial, t)
    a = initial.centers[:, 0]
    s = initial.variances
    tau = s * t / (s + t)
    evolved = heat_evolve(initial, t)

    def var_given(ys: np.ndarray) -> np.ndarray:
        w = posterior_weights_batch(initial, t, ys)
        mu = (t * a[None, :] + s[None, :] * ys[:, None]) / (s + t)[None, :]
        mean = (w * mu).sum(axis=1)
        second = (w * (tau[None, :] + mu * mu)).sum(axis=1)
        return np.maximum(second - mean * mean, 0.0)

    return _expect_under_model(var_given, evolved, spec)


def conditional_fisher(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """J(X_0 | X_t) = J(X_0) + n/t; +inf for point-mass initial data."""
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    j0 = fisher_info_initial(initial, spec)
    return math.inf if math.isinf(j0) else j0 + initial.dim / t

def conditional_fisher_direct(
    initial: MixtureModel, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> ErrorEstimate:
    """J(X_0 | X_t) by double quadrature of the defining integral.

    Outer expectation over X_t, inner over the conditional mixture
    sum_i v_i(y) N(mu_i(y), tau_i); the conditional score is
    (log rho_0)'(x) - (x - y)/t.
    """
    if initial.dim != 1 or not initial.is_smooth:
        raise UnsupportedModelError("direct conditional Fisher requires smooth dim == 1")
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    a = initial.centers[:, 0]
    s = initial.variances
    tau = s * t / (s + t)
    nodes, wq = gauss_hermite_rule(spec.order)
    evolved = heat_evolve(initial, t)

    def inner(ys: np.ndarray) -> np.ndarray:
        v = posterior_weights_batch(initial, t, ys)            # (m, k)
        mu = (t * a[None, :] + s[None, :] * ys[:, None]) / (s + t)[None, :]
        xs = mu[:, :, None] + np.sqrt(tau)[None, :, None] * nodes[None, None, :]
        score0 = score_batch(initial, xs.ravel()).reshape(xs.shape)
        cond_score = score0 - (xs - ys[:, None, None]) / t
        vals = (cond_score**2) @ wq                            # (m, k)
        return (v * vals).sum(axis=1)

    return _expect_under_model(inner, evolved, spec)


# -- bundled functionals ---------------------------------------------------------


@dataclass(frozen=True)
class InfoFunctionals:
    """All six functionals at one time point, with per-field error estimates."""

    t: float
    h: float
    j: float
    k: float
    i_mut: float
    j_mut: float
    k_mut: float
    err: Mapping[str, float]
    dim: int = 1

    def __post_init__(self) -> None:
        tol_j = 2.0 * self.err["j"] + 1e-12 * max(1.0, abs(self.j))
        tol_k = 2.0 * self.err["k"] + 1e-12 * max(1.0, abs(self.k))
        if self.j < -tol_j or self.k < -tol_k:
            raise NumericFailureError("negative Fisher functional beyond tolerance")
        j_sq = self.j**2 / self.dim
        power_tol = tol_k + 2.0 * abs(self.j) * tol_j / self.dim + 1e-9 * max(1.0, j_sq)
        if self.k - j_sq < -power_tol:
            raise NumericFailureError(
                f"second-order bound violated: K={self.k!r} < J^2/n={j_sq!r}"
            )
        tol_jm = 2.0 * self.err["j_mut"] + 1e-12 * max(1.0, abs(self.j_mut))
        if self.j_mut < -tol_jm:
            raise NumericFailureError("mutual Fisher information negative beyond tolerance")


def info_functionals(
    initial: MixtureModel,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    path: str = AUTO,
) -> InfoFunctionals:
    """Evaluate H/J/K of the evolved law and the mutual triple at time t.

    The two sides are linked by the exact Gaussian baselines, so whichever
    route computes one side also determines the other.
    """
    i_mut, j_mut, k_mut = mutual_triple(initial, t, spec, path)
    n = initial.dim
    h = i_mut.value + gaussian_baseline_entropy(n, t)
    j = n / t - j_mut.value
    k = n / t**2 - k_mut.value
    err = {
        "h": i_mut.abs_error,
        "j": j_mut.abs_error,
        "k": k_mut.abs_error,
        "i_mut": i_mut.abs_error,
        "j_mut": j_mut.abs_error,
        "k_mut": k_mut.abs_error,
    }
    return InfoFunctionals(
        t=t,
        h=h,
        j=j,
        k=k,
        i_mut=i_mut.value,
        j_mut=j_mut.value,
        k_mut=k_mut.value,
        err=MappingProxyType(err),
        dim=n,
    )
