"""Adaptive quadrature building blocks and the nested outage oracle."""

import math

import numpy as np
import pytest

from xpharq import (
    ConvergenceError,
    PowerProfile,
    RateSchedule,
    hbar_quadrature,
    integrate_adaptive,
    joint_density_x,
    outage_asymptotic_general,
    outage_k1,
    outage_k2_exact,
    xp_outage_quadrature,
)


# ---------------------------------------------------------------------------
# panel rule and adaptive driver


def test_single_panel_polynomial_exactness():
    """One 15-point panel must integrate polynomials up to degree 22 exactly.

    With a large tolerance the driver accepts the first panel untouched, so
    this pins the embedded node/weight constants themselves.
    """
    for deg in (0, 1, 5, 13, 22):
        res = integrate_adaptive(lambda x, d=deg: x**d, 0.0, 1.0, tol=1.0)
        assert res.value == pytest.approx(1.0 / (deg + 1), rel=5e-15), f"degree {deg}"
    # degree 13 is inside the embedded lower-order rule too: error estimate ~ 0
    res = integrate_adaptive(lambda x: x**13, 0.0, 1.0, tol=1.0)
    assert res.abs_error_estimate < 1e-12


def test_integrate_constant_and_exponential():
    res = integrate_adaptive(lambda x: np.ones_like(x), 0.0, 1.0, tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-14)
    res = integrate_adaptive(np.exp, 0.0, 1.0, tol=1e-13)
    assert res.value == pytest.approx(math.e - 1.0, rel=1e-13)
    assert abs(res.value - (math.e - 1.0)) <= res.abs_error_estimate + 1e-15


def test_integrate_log_over_x():
    res = integrate_adaptive(lambda x: np.log(x) / x, 1.0, 2.0, tol=1e-13)
    assert res.value == pytest.approx(math.log(2.0) ** 2 / 2.0, rel=1e-12)


def test_integrate_scalar_only_integrand():
    # integrands that choke on array input fall back to a scalar loop
    def f(x):
        return math.exp(-float(x))

    res = integrate_adaptive(f, 0.0, 1.0, tol=1e-12)
    assert res.value == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)


def test_integrate_empty_interval():
    res = integrate_adaptive(np.exp, 2.0, 2.0, tol=1e-12)
    assert res.value == 0.0


def test_integrate_relative_tolerance_mode():
    # absolute target unreachable for a large value; relative target drives it
    res = integrate_adaptive(lambda x: 1e12 * np.exp(x), 0.0, 1.0, tol=1e-300, rel_tol=1e-10)
    assert res.value == pytest.approx(1e12 * (math.e - 1.0), rel=1e-9)


def test_integrate_convergence_failure_keeps_best_estimate():
    def rough(x):
        return 1.0 / np.sqrt(np.abs(x))

    with pytest.raises(ConvergenceError) as info:
        integrate_adaptive(rough, 0.0, 1.0, tol=1e-14, limit=16)
    err = info.value
    assert err.best_estimate is not None
    # the true value is 2; the partial result should already be close
    assert abs(err.best_estimate - 2.0) < 0.05
    assert err.error_estimate is not None and err.error_estimate > 0.0


# ---------------------------------------------------------------------------
# transformed joint density


def test_joint_density_unit_point():
    powers = PowerProfile((1.0, 1.0))
    assert joint_density_x((1.0, 1.0), powers) == pytest.approx(1.0, rel=1e-14)


def test_joint_density_outside_support():
    powers = PowerProfile((1.0, 1.0))
    assert joint_density_x((0.5, 2.0), powers) == 0.0  # x_1 < 1
    assert joint_density_x((2.0, 1.5), powers) == 0.0  # x_2 < x_1


def test_joint_density_normalizes_k2():
    powers = PowerProfile((1.0, 2.0))
    g1, g2 = powers.snr_bars
    hi1 = 1.0 + 45.0 * g1

    def inner(x1: float) -> float:
        hi2 = x1 * (1.0 + 45.0 * g2)

        def f(x2):
            return np.array([joint_density_x((x1, v), powers) for v in np.atleast_1d(x2)])

        return integrate_adaptive(f, x1, hi2, tol=1e-11).value

    def outer(x1):
        return np.array([inner(float(v)) for v in np.atleast_1d(x1)])

    total = integrate_adaptive(outer, 1.0, hi1, tol=1e-8).value
    assert total == pytest.approx(1.0, abs=1e-6)


def test_joint_density_normalizes_k3():
    powers = PowerProfile((1.0, 0.5, 2.0))
    g1, g2, g3 = powers.snr_bars

    def mass_above(x1: float) -> float:
        def inner(x2: float) -> float:
            hi3 = x2 * (1.0 + 40.0 * g3)

            def f(x3):
                return np.array(
                    [joint_density_x((x1, x2, v), powers) for v in np.atleast_1d(x3)]
                )

            return integrate_adaptive(f, x2, hi3, tol=1e-10).value

        def fmid(x2):
            return np.array([inner(float(v)) for v in np.atleast_1d(x2)])

        hi2 = x1 * (1.0 + 40.0 * g2)
        return integrate_adaptive(fmid, x1, hi2, tol=1e-9).value

    def fout(x1):
        return np.array([mass_above(float(v)) for v in np.atleast_1d(x1)])

    total = integrate_adaptive(fout, 1.0, 1.0 + 40.0 * g1, tol=1e-7).value
    assert total == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# nested outage oracle


def test_oracle_k1_closed_form():
    est = xp_outage_quadrature(RateSchedule((1.5,)), PowerProfile((5.0,)))
    assert est.value == pytest.approx(outage_k1(1.5, 5.0), rel=1e-12)


def test_oracle_matches_two_round_closed_form():
    for r, g in (((1.0, 1.0), (10.0, 10.0)), ((2.0, 0.5), (3.0, 30.0))):
        rates, powers = RateSchedule(r), PowerProfile(g)
        oracle = xp_outage_quadrature(rates, powers, tol=1e-12, rel_tol=1e-10)
        exact = outage_k2_exact(rates, powers)
        assert oracle.value == pytest.approx(exact.value, rel=1e-8), (r, g)


def test_oracle_vanishing_first_rate():
    # R_1 -> 0 collapses the first integration cell; outage goes to zero
    est = xp_outage_quadrature(RateSchedule((1e-9, 1.0)), PowerProfile((10.0, 10.0)))
    assert 0.0 <= est.value < 1e-9


def test_oracle_k3_high_snr_matches_asymptote():
    rates = RateSchedule((1.0, 1.0, 1.0))
    powers = PowerProfile((1e6, 1e6, 1e6))
    est = xp_outage_quadrature(rates, powers, tol=1e-30, rel_tol=1e-7)
    asym = outage_asymptotic_general(rates, powers)
    assert est.value == pytest.approx(asym, rel=0.05)


def test_oracle_rejects_unsupported_round_counts():
    with pytest.raises(ValueError):
        xp_outage_quadrature(RateSchedule((1.0,) * 5), PowerProfile((10.0,) * 5))
    with pytest.raises(ValueError):
        xp_outage_quadrature(RateSchedule((1.0, 1.0)), PowerProfile((10.0,)))


# ---------------------------------------------------------------------------
# nested hbar oracle


def test_hbar_quadrature_base_case():
    # k = K needs no integration: 2^{R_K^sum} - x
    rates = RateSchedule((1.0, 1.0))
    assert hbar_quadrature(rates, k=2, x=1.5) == pytest.approx(2.5, rel=1e-14)


def test_hbar_quadrature_two_rounds_analytic():
    # K = 2, k = 1 at x = 1: integral_1^2 t^{-1} (4 - t) dt = 4 ln 2 - 1
    rates = RateSchedule((1.0, 1.0))
    assert hbar_quadrature(rates, k=1, x=1.0) == pytest.approx(
        4.0 * math.log(2.0) - 1.0, rel=1e-12
    )


def test_hbar_quadrature_three_rounds():
    rates = RateSchedule((1.0, 1.0, 1.0))
    ln2 = math.log(2.0)
    expected = 12.0 * ln2**2 - 4.0 * ln2 + 1.0
    assert hbar_quadrature(rates, k=1, x=1.0) == pytest.approx(expected, rel=1e-10)


def test_hbar_quadrature_rejects_x_beyond_cell():
    rates = RateSchedule((1.0, 1.0))
    with pytest.raises(ValueError):
        hbar_quadrature(rates, k=1, x=5.0)  # upper end of the k=1 cell is 2
