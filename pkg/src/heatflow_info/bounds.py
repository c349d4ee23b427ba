"""Small-time concentration of mutual information for point-mass mixtures.

For X_0 = sum_i p_i delta_{a_i} with distinct centers, minimum separation
m = min_{i != j} |a_i - a_j| and weight ratio bound
p_inf = max_{i,j} p_i / p_j, the gap between the discrete entropy
h(p) = -sum p_i log p_i and the mutual information obeys, for
0 < t <= m^2 / (676 p_inf^2),

    0 <= h(p) - I(X_0; X_t) <= 3 (k - 1) p_inf exp(-0.085 m^2 / t).

The exponential is handled in log space throughout: at the validity boundary
the exponent is about -57.5 and the bound underflows a double well before the
regimes of interest.

The scalar estimate behind the bound states that for b > 0,
c >= max(1, 26/b) and standard normal Z,

    E[log(1 + b exp(cZ - c^2/2))] <= 3 b exp(-0.085 c^2),

and is checked here by quadrature with the integrand evaluated as a softplus
in log space.

Exponential concentration of the gap forces every time-derivative of the
mutual information curve to vanish at t -> 0; derivative_vanishing_check
traces the first two derivatives down a decreasing time sequence and asserts
the rise-then-fall shape this implies for the mutual Fisher information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CheckFailedError, InvalidArgumentError, UnsupportedModelError
from .functionals import SMALL_T_FLOOR, mutual_triple, two_point_closed_form
from .mixtures import MixtureModel, stats
from .numerics import DEFAULT_SPEC, QuadratureSpec, expect_gaussian_1d

EXPONENT_RATE = 0.085
VALIDITY_CONSTANT = 676.0  # 26^2
_LATTICE_B = (0.1, 1.0, 5.0, 26.0, 100.0)


@dataclass(frozen=True)
class GenMixtReport:
    """One grid point of the concentration-bound verification.

    valid flags t <= m^2 / (676 p_inf^2); gap is h(p) - I(X_0; X_t); margin
    is bound - gap.  Rows the quadrature path cannot reach (general mixtures
    below the small-t floor) carry skipped=True and NaN gap/margin.
    """

    t: float
    valid: bool
    gap: float
    bound: float
    margin: float
    gap_err: float = 0.0
    skipped: bool = False


def genmixt_log_bound(k: int, p_inf: float, m: float, t: float) -> float:
    return math.log(3.0 * (k - 1) * p_inf) - EXPONENT_RATE * m * m / t


def genmixt_bound(k: int, p_inf: float, m: float, t: float) -> tuple[float, bool]:
    """(bound, valid) for the entropy gap: bound = 3(k-1) p_inf e^(-0.085 m^2/t),
    computed in log space; valid = (t <= m^2 / (676 p_inf^2))."""
    if k < 2:
        raise InvalidArgumentError("k must be >= 2")
    if p_inf < 1.0:
        raise InvalidArgumentError("p_inf is a max/min ratio, hence >= 1")
    if m <= 0 or t <= 0:
        raise InvalidArgumentError("m and t must be positive")
    log_bound = genmixt_log_bound(k, p_inf, m, t)
    bound = math.exp(log_bound) if log_bound > -745.0 else 0.0
    valid = t <= m * m / (VALIDITY_CONSTANT * p_inf * p_inf)
    return bound, valid


def verify_genmixt(
    initial: MixtureModel,
    t_grid,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> list[GenMixtReport]:
    """Check 0 <= h(p) - I <= bound over the grid wherever valid.

    The gap comes from the pair closed form when the model is an equal-weight
    pair (no small-t floor) and from one-dimensional quadrature otherwise;
    grid points below the quadrature floor that the closed form cannot serve
    are skipped with a flag, never silently.  Violations beyond twice the
    quadrature error raise CheckFailedError.
    """
    if not initial.is_point_mass or initial.k < 2:
        raise UnsupportedModelError("concentration bound applies to point-mass mixtures, k >= 2")
    st = stats(initial)
    h_p = st.discrete_entropy
    pair = initial.symmetric_pair()
    reports = []
    for t in np.asarray(t_grid, dtype=float):
        t = float(t)
        bound, valid = genmixt_bound(initial.k, st.p_inf, st.min_separation, t)
        if pair is not None:
            i_mut = two_point_closed_form(pair[0], t, spec)[0]
        elif t < SMALL_T_FLOOR:
            reports.append(
                GenMixtReport(t, valid, math.nan, bound, math.nan, skipped=True)
            )
            continue
        else:
            i_mut = mutual_triple(initial, t, spec)[0]
        gap = h_p - i_mut.value
        margin = bound - gap
        tol = 2.0 * i_mut.abs_error
        if valid and (gap < -tol or margin < -tol):
            raise CheckFailedError(
                f"concentration bound violated at t={t!r}: gap={gap!r}, "
                f"bound={bound!r}, tolerance={tol!r}"
            )
        reports.append(GenMixtReport(t, valid, gap, bound, margin, gap_err=i_mut.abs_error))
    return reports


@dataclass(frozen=True)
class TailEstimateCheck:
    """lhs = E[log(1 + b e^(cZ - c^2/2))], rhs = 3 b e^(-0.085 c^2)."""

    b: float
    c: float
    lhs: float
    rhs: float
    valid: bool
    lhs_err: float


def log2_lemma_check(
    b: float, c: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> TailEstimateCheck:
    """Evaluate both sides of the scalar tail estimate at one (b, c).

    The integrand log(1 + exp(e)) with e = log b + c z - c^2/2 is a softplus
    evaluated in log space, so huge positive and huge negative exponents are
    both exact.  valid = (c >= max(1, 26/b)), the estimate's domain.
    """
    if b <= 0:
        raise InvalidArgumentError("b must be positive")
    if c <= 0:
        raise InvalidArgumentError("c must be positive")
    log_b = math.log(b)
    shift = 0.5 * c * c

    def integrand(z: np.ndarray) -> np.ndarray:
        e = log_b + c * z - shift
        out = np.empty_like(e)
        big = e > 30.0
        out[big] = e[big] + np.log1p(np.exp(-e[big]))
        out[~big] = np.log1p(np.exp(e[~big]))
        return out

    lhs = expect_gaussian_1d(integrand, 0.0, 1.0, spec)
    log_rhs = math.log(3.0 * b) - EXPONENT_RATE * c * c
    rhs = math.exp(log_rhs) if log_rhs > -745.0 else 0.0
    return TailEstimateCheck(
        b=b,
        c=c,
        lhs=lhs.value,
        rhs=rhs,
        valid=c >= max(1.0, 26.0 / b),
        lhs_err=lhs.abs_error,
    )


def tail_estimate_lattice(
    spec: QuadratureSpec = DEFAULT_SPEC,
    bs: tuple[float, ...] = _LATTICE_B,
) -> list[TailEstimateCheck]:
    """The standard (b, c) lattice: per b, c in {c0, c0+1, c0+2, 2c0, 4c0}
    with c0 = max(1, 26/b); 25 points, all inside the validity domain."""
    checks = []
    for b in bs:
        c0 = max(1.0, 26.0 / b)
        for c in (c0, c0 + 1.0, c0 + 2.0, 2.0 * c0, 4.0 * c0):
            checks.append(log2_lemma_check(b, c, spec))
    return checks


@dataclass(frozen=True)
class DerivativeTraceRow:
    t: float
    j_mut: float
    k_mut: float


def derivative_vanishing_check(
    initial: MixtureModel,
    t_sequence,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> list[DerivativeTraceRow]:
    """Trace J(X_0;X_t) and K(X_0;X_t) down a decreasing time sequence and
    assert the small-time pattern the exponential concentration forces.

    Requires an equal-weight pair of point masses (the closed forms have no
    small-t floor).  Asserts: over the sequence extended by a few larger
    context times, the mutual Fisher information rises and then falls (its
    peak is interior); below the peak both |J_mut| and |K_mut| shrink
    monotonically toward zero.
    """
    pair = initial.symmetric_pair()
    if pair is None or not initial.is_point_mass:
        raise UnsupportedModelError(
            "derivative trace requires an equal-weight pair of point masses"
        )
    a_sq = pair[0]
    ts = np.asarray(t_sequence, dtype=float)
    if ts.ndim != 1 or ts.size < 3:
        raise InvalidArgumentError("t_sequence must have at least 3 points")
    if not (np.diff(ts) < 0).all() or ts[-1] <= 0:
        raise InvalidArgumentError("t_sequence must be strictly decreasing and positive")

    rows = [
        DerivativeTraceRow(float(t), *[ee.value for ee in two_point_closed_form(a_sq, float(t), spec)[1:]])
        for t in ts
    ]

    # context times above the sequence to witness the far side of the peak;
    # the peak of J_mut sits near t ~ a_sq / 3
    ctx_hi = max(10.0 * a_sq, 4.0 * float(ts[0]))
    ctx = np.geomspace(float(ts[0]), ctx_hi, 12)[1:]
    j_ctx = [two_point_closed_form(a_sq, float(t), spec)[1].value for t in ctx]
    increasing_t = list(reversed([r.j_mut for r in rows])) + j_ctx
    peak = int(np.argmax(increasing_t))
    if peak == 0 or peak == len(increasing_t) - 1:
        raise CheckFailedError("mutual Fisher information did not rise and then fall")

    _assert_tail_shrinks([r.j_mut for r in rows], "J")
    _assert_tail_shrinks([r.k_mut for r in rows], "K")
    return rows


def _assert_tail_shrinks(values: list[float], label: str) -> None:
    mags = [abs(v) for v in values]
    peak = int(np.argmax(mags))
    slack = 1e-12 * max(mags)
    for prev, cur in zip(mags[peak:], mags[peak + 1 :]):
        if cur > prev + slack:
            raise CheckFailedError(
                f"|{label}_mut| stopped shrinking below its peak along t -> 0"
            )
