import math

import numpy as np
import pytest

from heatflow_info.convexity import (
    convexity_scan,
    convexity_thresholds,
    hessian_via_cov,
    kj_mutual_lower_bound,
    log_concavity_at,
    log_concavity_report,
    time_to_log_concavity,
)
from heatflow_info.errors import BracketError, CheckFailedError, InvalidArgumentError
from heatflow_info.functionals import mutual_triple
from heatflow_info.mixtures import MixtureModel, heat_evolve, log_density_hessian
from heatflow_info.numerics import QuadratureSpec

SPEC = QuadratureSpec(order=160)


def two_point(a=1.0):
    return MixtureModel.point_mixture([0.5, 0.5], [-a, a])


def two_gauss(s, a=1.0):
    return MixtureModel(1, [0.5, 0.5], [-a, a], [s, s])


# -- Hessian from posterior covariance ------------------------------------------


def test_hessian_via_cov_single_center():
    m = MixtureModel.point_mixture([1.0], [2.0])
    for t in (0.3, 1.0):
        assert hessian_via_cov(m, t, 5.0)[0, 0] == pytest.approx(1.0 / t, abs=1e-14)


def test_hessian_via_cov_origin_value():
    # oracle: posterior at y=0 is +-1 with probability 1/2, covariance 1
    for t in (0.5, 1.0, 2.0):
        got = hessian_via_cov(two_point(), t, 0.0)[0, 0]
        assert got == pytest.approx((1.0 / t) * (1.0 - 1.0 / t), abs=1e-13)
    assert hessian_via_cov(two_point(), 0.5, 0.0)[0, 0] < 0.0
    assert hessian_via_cov(two_point(), 2.0, 0.0)[0, 0] > 0.0


def test_hessian_via_cov_matches_density_hessian():
    rng = np.random.default_rng(42)
    m = MixtureModel.point_mixture([0.2, 0.3, 0.5], [-1.0, 0.4, 1.7])
    for _ in range(200):
        t = float(np.exp(rng.uniform(math.log(0.05), math.log(10.0))))
        y = float(rng.uniform(-8.0, 8.0))
        lhs = hessian_via_cov(m, t, y)[0, 0]
        rhs = -log_density_hessian(heat_evolve(m, t), y)[0, 0]
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_hessian_via_cov_psd_above_diameter_sq():
    m = MixtureModel.point_mixture([0.3, 0.3, 0.4], [[0.0, 0.0], [1.0, 0.0], [0.0, 1.5]])
    rng = np.random.default_rng(8)
    d_sq = 1.5**2 + 1.0  # diameter between (1,0) and (0,1.5)
    for _ in range(40):
        y = rng.normal(scale=3.0, size=2)
        h = hessian_via_cov(m, d_sq + 0.1, y)
        assert np.linalg.eigvalsh(h).min() >= -1e-12


# -- log-concavity reports ----------------------------------------------------------


def test_gaussian_alpha_is_inverse_variance():
    g = MixtureModel.single_gaussian(0.0, 2.0)
    rep = log_concavity_report(g)
    assert rep.alpha_hat == pytest.approx(0.5, abs=1e-12)
    assert rep.is_log_concave


def test_two_gauss_not_log_concave_early():
    # oracle: hessian_via_cov at the origin gives (1/t)(1 - 1/t) = -2 at t=0.5
    rep = log_concavity_at(two_point(), 0.5)
    assert rep.alpha_hat == pytest.approx(-2.0, abs=1e-3)
    assert not rep.is_log_concave


def test_two_gauss_log_concave_late():
    rep = log_concavity_at(two_point(), 4.5)
    assert rep.is_log_concave
    assert rep.alpha_hat >= 0.0


def test_alpha_lower_bound_from_diameter():
    # (1/t)(1 - D^2/t) lower-bounds the scanned constant for point mixtures
    m = MixtureModel.point_mixture([0.25, 0.4, 0.35], [-0.8, 0.1, 1.2])
    d_sq = 2.0**2
    for t in np.geomspace(0.1, 20.0, 12):
        rep = log_concavity_at(m, float(t))
        assert rep.alpha_hat >= (1.0 / t) * (1.0 - d_sq / t) - 1e-9


def test_alpha_capped_by_sharpest_component():
    m = two_gauss(0.5)
    rep = log_concavity_report(m)
    assert rep.alpha_hat <= 1.0 / 0.5 + 1e-9


def test_report_rejects_tiny_grid():
    with pytest.raises(InvalidArgumentError):
        log_concavity_report(two_gauss(1.0), grid_count=8)


def test_wide_mixture_is_log_concave():
    # overlap dominates separation: s = 10 >> 1 keeps the mixture log-concave
    rep = log_concavity_report(two_gauss(10.0))
    assert rep.is_log_concave


# -- time to log-concavity -----------------------------------------------------------


def test_two_point_transition_time_is_one():
    # oracle: the binding point is y = 0 where the Hessian is (1/t)(1 - 1/t);
    # accuracy is limited by the spatial grid resolution near y = 0
    t_star = time_to_log_concavity(two_point(), 0.2, 3.0, bisect_tol=1e-7)
    assert t_star == pytest.approx(1.0, abs=1e-3)


def test_transition_time_below_diameter_sq():
    m = MixtureModel.point_mixture([0.3, 0.3, 0.4], [-1.0, 0.2, 1.0])
    t_star = time_to_log_concavity(m, 0.05, 6.0, bisect_tol=1e-6)
    assert t_star <= 4.0 + 1e-6


def test_single_point_brackets_fail():
    with pytest.raises(BracketError):
        time_to_log_concavity(MixtureModel.point_mixture([1.0], [0.5]), 0.1, 5.0)


def test_bad_brackets_fail():
    with pytest.raises(BracketError):
        time_to_log_concavity(two_point(), 2.0, 5.0)  # already log-concave
    with pytest.raises(BracketError):
        time_to_log_concavity(two_point(), 0.1, 0.5)  # still not log-concave


# -- thresholds ------------------------------------------------------------------------


def test_thresholds_two_point():
    th = convexity_thresholds(two_point())
    assert th.d_sq == 4.0
    assert math.isinf(th.fi_threshold)
    assert not th.log_concave_initial
    assert th.min_finite() == 4.0


def test_thresholds_standard_gaussian():
    th = convexity_thresholds(MixtureModel.single_gaussian(0.0, 1.0))
    assert th.d_sq == 0.0
    assert th.fi_threshold == pytest.approx(3.0, abs=1e-8)  # J * M4 = 1 * 3
    assert th.fi_root_threshold <= th.fi_threshold
    assert th.log_concave_initial
    assert th.min_finite() == 0.0


def test_thresholds_two_gauss_shared_s():
    th = convexity_thresholds(two_gauss(0.5), SPEC)
    assert th.d_sq == 4.0
    assert math.isfinite(th.fi_threshold)
    # root form is the sharper certificate from the quadratic inequality
    assert th.fi_root_threshold <= th.fi_threshold


def test_thresholds_mixed_variances():
    m = MixtureModel(1, [0.4, 0.6], [-1.0, 1.5], [0.3, 0.7])
    th = convexity_thresholds(m, SPEC)
    assert math.isinf(th.d_sq)
    assert math.isfinite(th.fi_threshold)


# -- scans -------------------------------------------------------------------------------


def test_scan_gaussian_never_nonconvex():
    scan = convexity_scan(MixtureModel.single_gaussian(0.0, 1.0), np.geomspace(0.01, 10, 60), SPEC)
    assert scan.nonconvex_intervals == ()


def test_scan_two_point_dips_inside_window():
    scan = convexity_scan(two_point(), np.geomspace(0.01, 10.0, 200), SPEC)
    assert scan.nonconvex_intervals
    assert all(hi < 4.0 for _, hi in scan.nonconvex_intervals)
    deep = min(scan.k_mut + 10.0 * np.maximum(scan.k_err, 1e-12))
    assert deep < 0.0


def test_scan_rescaled_centers_shift_dip():
    # centers +-c rescale the dip region by c^2
    scan = convexity_scan(two_point(2.0), np.geomspace(0.05, 40.0, 200), SPEC)
    assert scan.nonconvex_intervals
    assert all(hi < 16.0 for _, hi in scan.nonconvex_intervals)


def test_scan_validates_grid():
    with pytest.raises(InvalidArgumentError):
        convexity_scan(two_point(), [1.0, 0.5], SPEC)
    with pytest.raises(InvalidArgumentError):
        convexity_scan(two_point(), [-1.0, 1.0], SPEC)


# -- pairing with the semiconcavity bound -----------------------------------------------


def test_kj_bound_trivial_values():
    assert kj_mutual_lower_bound(0.0, 1, 5.0) == 0.0
    assert kj_mutual_lower_bound(2.0, 1, 0.0) == 4.0
    assert kj_mutual_lower_bound(1.0, 4, 0.25) == pytest.approx(0.75)
    with pytest.raises(InvalidArgumentError):
        kj_mutual_lower_bound(1.0, 0, 0.0)


def test_kj_bound_nonnegative_when_log_concave():
    for j in (0.0, 0.3, 2.0):
        assert kj_mutual_lower_bound(j, 1, 0.5) >= 0.0


def test_kj_bound_observed_on_flow():
    m = two_gauss(0.5)
    for t in (4.5, 8.0):
        rep = log_concavity_at(m, t)
        assert rep.is_log_concave
        _, j_mut, k_mut = mutual_triple(m, t, SPEC)
        bound = kj_mutual_lower_bound(max(j_mut.value, 0.0), 1, rep.alpha_hat)
        slack = 2 * (k_mut.abs_error + j_mut.abs_error) + 1e-9
        assert k_mut.value >= bound - slack


def test_log_concave_time_implies_kmut_nonneg():
    m = two_point()
    for t in (1.1, 2.0, 6.0):
        rep = log_concavity_at(m, t)
        if rep.is_log_concave:
            k = mutual_triple(m, t, SPEC)[2]
            assert k.value >= -2 * k.abs_error - 1e-9
