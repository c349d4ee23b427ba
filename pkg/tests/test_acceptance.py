"""Acceptance suite: one test per criterion, each printing a PASS line with
the criterion number when it completes.  Tolerances are pinned here, not
configurable."""

import math

import numpy as np
import pytest

from heatflow_info import checks
from heatflow_info.bounds import (
    derivative_vanishing_check,
    log2_lemma_check,
    tail_estimate_lattice,
    verify_genmixt,
)
from heatflow_info.convexity import convexity_scan, convexity_thresholds
from heatflow_info.functionals import (
    entropy,
    fisher,
    fisher2,
    info_functionals,
    mutual_triple,
    two_gaussian_closed_form,
    two_point_closed_form,
)
from heatflow_info.mixtures import MixtureModel, heat_evolve, stats
from heatflow_info.numerics import (
    ADAPTIVE_INTERVAL,
    QuadratureSpec,
    finite_difference,
)

GH200 = QuadratureSpec(order=200)
ADAPTIVE = QuadratureSpec(
    method=ADAPTIVE_INTERVAL, order=80, truncation_radius=14.0, rel_tol=1e-13, abs_tol=1e-14
)


def passed(num: int, label: str) -> None:
    print(f"ACCEPTANCE {num:02d} {label}: PASS")


def two_point(a=1.0):
    return MixtureModel.point_mixture([0.5, 0.5], [-a, a])


def two_gauss(s, a=1.0):
    return MixtureModel(1, [0.5, 0.5], [-a, a], [s, s])


NARROW = two_gauss(1e-3)


def test_criterion_01_gaussian_closed_forms():
    for var in (0.25, 1.0, 4.0):
        g = MixtureModel.single_gaussian(0.0, var)
        assert abs(entropy(g, GH200).value - 0.5 * math.log(2 * math.pi * math.e * var)) < 1e-8
        assert abs(fisher(g, GH200).value - 1.0 / var) < 1e-8
        assert abs(fisher2(g, GH200).value - 1.0 / var**2) < 1e-8
    passed(1, "gaussian closed forms")


def test_criterion_02_derivative_identities():
    grid = np.geomspace(0.05, 20.0, 40)
    h_curve = lambda t: info_functionals(NARROW, t, ADAPTIVE).h
    i_curve = lambda t: info_functionals(NARROW, t, ADAPTIVE).i_mut
    for t in grid:
        t = float(t)
        f = info_functionals(NARROW, t, ADAPTIVE)
        fd1_h = finite_difference(h_curve, t, 1)
        fd1_i = finite_difference(i_curve, t, 1)
        assert abs(fd1_h - 0.5 * f.j) / abs(0.5 * f.j) < 1e-4
        assert abs(fd1_i + 0.5 * f.j_mut) / max(abs(0.5 * f.j_mut), 1e-8) < 1e-4
        fd2_h = finite_difference(h_curve, t, 2)
        fd2_i = finite_difference(i_curve, t, 2)
        assert abs(fd2_h + 0.5 * f.k) / abs(0.5 * f.k) < 1e-3
        assert abs(fd2_i - 0.5 * f.k_mut) / max(abs(0.5 * f.k_mut), 1e-8) < 1e-3
    passed(2, "first and second derivative identities")


def test_criterion_03_closed_form_vs_quadrature():
    u_grid = np.geomspace(0.01, 100.0, 30)
    pair = two_point()
    for u in u_grid:
        t = 1.0 / float(u)
        cf = two_point_closed_form(1.0, t, GH200)
        qd = mutual_triple(pair, t, GH200, path="quadrature")
        for a, b in zip(cf, qd):
            assert abs(a.value - b.value) < 1e-6
    s = 1e-3
    gm = two_gauss(s)
    for u in u_grid:
        t = 1.0 / float(u) - s
        cf = two_gaussian_closed_form(1.0, s, t, 1, GH200)
        qd = mutual_triple(gm, t, GH200, path="quadrature")
        for a, b in zip(cf, qd):
            assert abs(a.value - b.value) < 1e-6
    passed(3, "pair closed forms agree with quadrature")


def test_criterion_04_two_point_scan_shape():
    i_small = two_point_closed_form(1.0, 1e-4, GH200)[0]  # u = 1e4
    assert abs(i_small.value - math.log(2.0)) < 1e-4
    scan = convexity_scan(two_point(), np.geomspace(0.01, 10.0, 200), GH200)
    deep = scan.k_mut < -10.0 * np.maximum(scan.k_err, 1e-12)
    assert deep.any()
    assert all(hi < 4.0 for _, hi in scan.nonconvex_intervals)
    for t, k, err in zip(scan.t_grid, scan.k_mut, scan.k_err):
        if t >= 4.0:
            assert k >= -(2.0 * err + 1e-9)
    passed(4, "two-point scan: log 2 start, dip inside (0, 4), convex after")


def test_criterion_05_two_gaussian_scan_shape():
    assert two_gaussian_closed_form(1.0, 1e-3, 1e-4, 1, GH200)[2].value > 0.0
    ts = np.geomspace(1e-3, 4.0, 120)
    vals = [two_gaussian_closed_form(1.0, 1e-3, float(t), 1, GH200)[2].value for t in ts]
    assert min(vals) < 0.0
    th = convexity_thresholds(NARROW, GH200)
    start = min(4.0, th.fi_threshold)
    for t in np.geomspace(start, 20.0, 12):
        k = mutual_triple(NARROW, float(t), GH200)[2]
        assert k.value >= -(2.0 * k.abs_error + 1e-9)
    passed(5, "two-gaussian scan: positive start, dip, convex past threshold")


def test_criterion_06_log_concave_initial_always_convex():
    models = [
        MixtureModel.single_gaussian(0.0, 0.25),
        MixtureModel.single_gaussian(0.0, 4.0),
        MixtureModel.single_gaussian(2.0, 5.0),  # shifted, asymmetric about 0
    ]
    for m in models:
        for t in np.geomspace(0.01, 50.0, 40):
            k = mutual_triple(m, float(t), GH200)[2]
            assert k.value >= -(2.0 * k.abs_error + 1e-12)
    passed(6, "log-concave initial data keeps K_mut nonnegative")


def test_criterion_07_fisher_moment_certificate():
    for s in (0.1, 0.5):
        m = two_gauss(s)
        j0 = fisher(m, GH200).value
        m4 = stats(m).fourth_moment
        threshold = j0 * m4  # n = 1
        for t in np.geomspace(threshold, 4.0 * threshold, 12):
            k = mutual_triple(m, float(t), GH200)[2]
            assert k.value >= -(2.0 * k.abs_error + 1e-9)
    passed(7, "finite Fisher/moment certificate")


def _theorem4_battery():
    return [
        two_point(),                                                        # k=2, m=2
        MixtureModel.point_mixture([0.3, 0.7], [-1.0, 2.0]),                # k=2 uneven
        MixtureModel.point_mixture([1 / 3] * 3, [-1.0, 0.0, 1.0]),          # k=3, m=1
        MixtureModel.point_mixture([0.2, 0.3, 0.5], [-2.0, 0.5, 3.0]),      # k=3 uneven
        MixtureModel.point_mixture([0.1, 0.2, 0.3, 0.25, 0.15], [-3.0, -1.0, 0.0, 2.0, 4.0]),
        MixtureModel(2, [0.5, 0.5], [[-0.6, -0.8], [0.6, 0.8]], [0.0, 0.0]),  # pair in R^2
    ]


def test_criterion_08_concentration_bound():
    for model in _theorem4_battery():
        st = stats(model)
        cutoff = st.min_separation**2 / (676.0 * st.p_inf**2)
        grid = np.geomspace(max(cutoff / 50.0, 2e-6), 3.0 * cutoff, 14)
        reports = verify_genmixt(model, grid, GH200)  # raises on violation
        seen_valid = 0
        for r in reports:
            if not r.valid or r.skipped:
                continue
            seen_valid += 1
            tol = 2.0 * r.gap_err
            assert r.gap >= -tol
            assert r.gap <= r.bound + tol
        assert seen_valid >= 5
    passed(8, "entropy-gap concentration bound across the battery")


def test_criterion_09_tail_estimate_lattice():
    # the interval method resolves the softplus transition to half-grid
    # estimates far below 1e-10; its composite rule uses well over 200 nodes
    spec = QuadratureSpec(
        method=ADAPTIVE_INTERVAL, order=200, truncation_radius=14.0, rel_tol=1e-12, abs_tol=1e-13
    )
    lattice = tail_estimate_lattice(spec)
    assert len(lattice) >= 25
    for c in lattice:
        assert c.valid
        assert c.lhs <= c.rhs
        assert c.lhs_err < 1e-10 * max(c.lhs, 1.0)
    passed(9, "scalar tail-estimate lattice")


def test_criterion_10_identity_suite():
    point = MixtureModel.point_mixture([0.2, 0.3, 0.5], [-1.0, 0.4, 1.7])
    smooth = two_gauss(0.5)

    hes = checks.hessian_covariance_check(point, seed=2024)
    assert hes.status == checks.PASS and hes.max_violation < 1e-8

    cond = checks.conditional_fisher_check(smooth)
    assert cond.status == checks.PASS and cond.max_violation < 1e-6

    rev = checks.reverse_second_order_check(smooth)
    assert rev.status == checks.PASS and rev.max_violation < 1e-6

    for model in (point, smooth):
        immse = checks.mmse_variance_check(model)
        assert immse.status == checks.PASS
        assert immse.max_violation <= immse.tolerance

    kheat = checks.variance_decomposition_check(point)
    assert kheat.status == checks.PASS and kheat.max_violation < 1e-5

    kpsi = checks.backward_decomposition_check(point)
    assert kpsi.status == checks.PASS and kpsi.max_violation < 1e-5
    passed(10, "identity suite")


def test_criterion_11_inequality_suite():
    battery = [
        MixtureModel.single_gaussian(0.0, 1.0),
        MixtureModel.single_gaussian(2.0, 5.0),
        two_point(),
        MixtureModel.point_mixture([0.3, 0.7], [-1.0, 2.0]),
        MixtureModel.point_mixture([1 / 3] * 3, [-1.0, 0.0, 1.0]),
        two_gauss(0.5),
        NARROW,
    ]
    grid = np.geomspace(0.05, 20.0, 12)
    for model in battery:
        for result in checks.inequality_checks(model, grid):
            assert result.status != checks.FAIL, (model, result)
    passed(11, "inequality suite with zero violations")


def test_criterion_12_derivatives_vanish_at_zero():
    seq = [0.2 * 2.0**-j for j in range(9)]
    rows = derivative_vanishing_check(two_point(), seq, GH200)
    j_mags = [abs(r.j_mut) for r in rows]
    k_mags = [abs(r.k_mut) for r in rows]
    j_peak = int(np.argmax(j_mags))
    k_peak = int(np.argmax(k_mags))
    assert all(a >= b for a, b in zip(j_mags[j_peak:], j_mags[j_peak + 1 :]))
    assert all(a >= b for a, b in zip(k_mags[k_peak:], k_mags[k_peak + 1 :]))
    assert j_mags[-1] < 1e-6
    assert k_mags[-1] < 1e-6
    passed(12, "mutual Fisher derivatives vanish at small time")
