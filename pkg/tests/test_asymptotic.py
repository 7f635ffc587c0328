"""High-SNR coefficient recursion, asymptotic outage terms, and slope fits."""

import math

import numpy as np
import pytest

from xpharq import (
    PowerProfile,
    RateSchedule,
    build_hbar_table,
    diversity_order_fit,
    hbar_eval,
    hbar_quadrature,
    integrate_adaptive,
    outage_asymptotic_general,
    outage_k2_asymptotic,
    phi_asymptotic,
    phi_quadrature,
    upper_incomplete_gamma_complex,
)

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# two-round asymptote


def test_phi_asymptotic_equals_residue_assembly():
    """The implemented form must equal the two-pole residue sum.

    Residues at s = 0 and s = -1 of the contour integrand give
    e^{1/g1+1/g2} [Gamma(1,b1) - Gamma(1,b2) + z ln(b1/b2)] with
    b_i the scaled thresholds and z the contour argument.
    """
    for r1, r2, g1, g2 in ((1.0, 1.0, 100.0, 100.0), (0.5, 2.0, 50.0, 200.0)):
        b1 = 2.0**r2 / g2
        b2 = 2.0 ** (r1 + r2) / g2
        z = 2.0 ** (r1 + r2) / (g1 * g2)
        gam1 = complex(upper_incomplete_gamma_complex(1.0, b1)).real
        gam2 = complex(upper_incomplete_gamma_complex(1.0, b2)).real
        residues = math.exp(1.0 / g1 + 1.0 / g2) * (
            gam1 - gam2 + z * (math.log(b1) - math.log(b2))
        )
        assert phi_asymptotic(r1, r2, g1, g2) == pytest.approx(residues, rel=1e-9)


def test_phi_asymptotic_approaches_phi():
    g = 1e4
    exact = phi_quadrature(1.0, 1.0, g, g).value
    approx = phi_asymptotic(1.0, 1.0, g, g)
    assert abs(approx - exact) / exact < 0.01


def test_phi_asymptotic_rejects_bad_input():
    with pytest.raises(ValueError):
        phi_asymptotic(0.0, 1.0, 10.0, 10.0)
    with pytest.raises(ValueError):
        phi_asymptotic(1.0, 1.0, -5.0, 10.0)


def test_outage_k2_asymptotic_coefficient():
    # R = (1, 1): the gamma1*gamma2-scaled outage tends to 4 ln 2 - 1
    v = outage_k2_asymptotic(RateSchedule((1.0, 1.0)), PowerProfile((100.0, 50.0)))
    assert v * 100.0 * 50.0 == pytest.approx(4.0 * _LN2 - 1.0, rel=1e-14)


def test_outage_k2_asymptotic_matches_general_path():
    rates = RateSchedule((0.7, 1.3))
    powers = PowerProfile((30.0, 400.0))
    a = outage_k2_asymptotic(rates, powers)
    b = outage_asymptotic_general(rates, powers)
    assert a == pytest.approx(b, rel=1e-12)


def test_outage_k2_asymptotic_rejects_other_k():
    with pytest.raises(ValueError):
        outage_k2_asymptotic(RateSchedule((1.0,)), PowerProfile((10.0,)))


# ---------------------------------------------------------------------------
# coefficient recursion


def test_hbar_table_two_rounds_unit_rates():
    table = build_hbar_table(RateSchedule((1.0, 1.0)))
    assert table.coeffs[1] == pytest.approx((4.0,))
    assert table.coeffs[0] == pytest.approx((4.0 * _LN2 - 2.0, -4.0))


def test_hbar_table_three_rounds_unit_rates():
    table = build_hbar_table(RateSchedule((1.0, 1.0, 1.0)))
    assert table.coeffs[2] == pytest.approx((8.0,))
    assert table.coeffs[1] == pytest.approx((16.0 * _LN2 - 4.0, -8.0))
    assert table.coeffs[0] == pytest.approx(
        (12.0 * _LN2**2 - 4.0 * _LN2 + 2.0, 4.0 - 16.0 * _LN2, 4.0)
    )


def test_hbar_table_penultimate_linear_coefficient():
    # c_{K-1,1} = -2^{R_K^sum} regardless of the schedule
    rng = np.random.default_rng(3)
    rates = RateSchedule(tuple(rng.uniform(0.25, 3.0, 5)))
    table = build_hbar_table(rates)
    expected = -(2.0 ** rates.cumulative(5))
    assert table.coeffs[3][1] == pytest.approx(expected, rel=1e-14)


def test_hbar_eval_reference_values():
    t2 = build_hbar_table(RateSchedule((1.0, 1.0)))
    assert hbar_eval(t2, 2, 1.0) == pytest.approx(3.0, rel=1e-14)
    assert hbar_eval(t2, 1, 1.0) == pytest.approx(4.0 * _LN2 - 1.0, rel=1e-14)
    t3 = build_hbar_table(RateSchedule((1.0, 1.0, 1.0)))
    assert hbar_eval(t3, 3, 1.0) == pytest.approx(7.0, rel=1e-14)
    assert hbar_eval(t3, 2, 1.0) == pytest.approx(16.0 * _LN2 - 3.0, rel=1e-14)
    assert hbar_eval(t3, 1, 1.0) == pytest.approx(
        12.0 * _LN2**2 - 4.0 * _LN2 + 1.0, rel=1e-12
    )


def test_hbar_eval_validation():
    table = build_hbar_table(RateSchedule((1.0, 1.0, 1.0)))
    with pytest.raises(ValueError):
        hbar_eval(table, 0, 1.0)
    with pytest.raises(ValueError):
        hbar_eval(table, 4, 1.0)
    with pytest.raises(ValueError):
        hbar_eval(table, 1, 0.0)
    with pytest.raises(ValueError):
        build_hbar_table(RateSchedule((1.0,)))


def test_hbar_integral_identity_all_levels():
    """hbar_{K,k}(x) = integral_x^{2^{R_k^sum}} t^{-1} hbar_{K,k+1}(t) dt.

    Checks the defining identity level by level, which exercises every
    coefficient of the table rather than only the top value.
    """
    rng = np.random.default_rng(11)
    rates = RateSchedule(tuple(rng.uniform(0.3, 2.0, 4)))
    table = build_hbar_table(rates)
    cums = rates.cumulative()
    for k in (1, 2, 3):
        top = 2.0 ** cums[k - 1]
        for x in (0.5, 1.0, 0.8 * top):

            def integrand(t, level=k + 1):
                return np.array(
                    [hbar_eval(table, level, float(v)) / float(v) for v in np.atleast_1d(t)]
                )

            ref = integrate_adaptive(integrand, x, top, tol=1e-12, rel_tol=1e-11).value
            assert hbar_eval(table, k, x) == pytest.approx(ref, rel=1e-9), (k, x)


def test_hbar_recursion_matches_nested_quadrature():
    rng = np.random.default_rng(5)
    for K in (2, 3, 4, 5):
        rates = RateSchedule(tuple(rng.uniform(0.25, 3.0, K)))
        rec = hbar_eval(build_hbar_table(rates), 1, 1.0)
        orc = hbar_quadrature(rates, k=1, x=1.0)
        assert rec == pytest.approx(orc, rel=1e-10), K


def test_hbar_top_coefficient_positive():
    rng = np.random.default_rng(17)
    for _ in range(25):
        K = int(rng.integers(2, 6))
        rates = RateSchedule(tuple(rng.uniform(0.25, 3.0, K)))
        assert hbar_eval(build_hbar_table(rates), 1, 1.0) > 0.0


# ---------------------------------------------------------------------------
# general asymptote and slope fits


def test_outage_asymptotic_general_three_rounds():
    v = outage_asymptotic_general(
        RateSchedule((1.0, 1.0, 1.0)), PowerProfile((100.0, 100.0, 100.0))
    )
    expected = (12.0 * _LN2**2 - 4.0 * _LN2 + 1.0) / 1e6
    assert v == pytest.approx(expected, rel=1e-12)


def test_outage_asymptotic_general_validation():
    with pytest.raises(ValueError):
        outage_asymptotic_general(RateSchedule((1.0, 1.0)), PowerProfile((10.0,)))
    with pytest.raises(ValueError):
        outage_asymptotic_general(RateSchedule((1.0,)), PowerProfile((10.0,)))


def test_diversity_fit_recovers_synthetic_power_law():
    points = [(g, 0.37 / g**2) for g in (1e4, 1e5, 1e6)]
    fit = diversity_order_fit(points)
    assert fit.diversity_order == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log10(0.37), abs=1e-12)
    assert fit.points[0][0] == pytest.approx(40.0)  # stored in dB


def test_diversity_fit_on_asymptotic_three_rounds():
    rates = RateSchedule((1.0, 1.0, 1.0))
    points = []
    for db in (50.0, 55.0, 60.0):
        g = 10.0 ** (db / 10.0)
        points.append((g, outage_asymptotic_general(rates, PowerProfile((g, g, g)))))
    fit = diversity_order_fit(points)
    assert fit.diversity_order == pytest.approx(3.0, abs=1e-9)


def test_diversity_fit_validation():
    with pytest.raises(ValueError):
        diversity_order_fit([(1e4, 1e-3), (1e5, 1e-5)])
    with pytest.raises(ValueError):
        diversity_order_fit([(1e5, 1e-3), (1e4, 1e-5), (1e6, 1e-7)])
    with pytest.raises(ValueError):
        diversity_order_fit([(1e4, 1e-3), (1e5, 0.0), (1e6, 1e-7)])
