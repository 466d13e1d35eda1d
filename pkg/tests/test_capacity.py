import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampcap.capacity import (
    CapacityResult,
    c0_reference,
    c_heterodyne_avg,
    c_heterodyne_instance,
    c_holevo_avg,
    c_holevo_initial_decrease,
    c_holevo_instance,
    c_holevo_noamp,
    c_infinity,
    capacity_curve,
    holevo_avg_from_moments,
    holevo_initial_decrease_term,
    increase_factor_report,
)
from ampcap.errors import DomainError, ThresholdError
from ampcap.medium import MediumParams, diffusion_averages, r_eff
from ampcap.oracle import quad_average_moments
from ampcap.specfun import EULER_GAMMA, LN2

mp.mp.dps = 40
GAMMA_BITS = EULER_GAMMA / LN2


def mp_scaled_e1(x):
    x = mp.mpf(x)
    return mp.exp(x) * mp.e1(x)


def mp_holevo_avg(a, sigma_bar):
    a, sb = mp.mpf(a), mp.mpf(sigma_bar)
    s = sb - 1
    return float(a * (mp.log(sb / s) + mp_scaled_e1(sb / a) - mp_scaled_e1(s / a)) / mp.log(2))


def mp_holevo_noamp(a):
    a = mp.mpf(a)
    return float(a * (mp_scaled_e1(1 / a) + mp.euler - mp.log(a)) / mp.log(2))


def test_result_type():
    r = CapacityResult(1.5, "heterodyne_closed")
    assert float(r) == 1.5 and r.err_estimate == 0.0
    with pytest.raises(ValueError):
        CapacityResult(1.0, "made_up")


def test_heterodyne_instance():
    assert c_heterodyne_instance(0.0).bits == 0.0
    assert c_heterodyne_instance(1.0).bits == 1.0
    assert c_heterodyne_instance(7.0).bits == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(DomainError):
        c_heterodyne_instance(-1.0)


def test_heterodyne_avg_examples():
    assert c_heterodyne_avg(1.0).bits == pytest.approx(0.860347, abs=5e-7)
    assert c_heterodyne_avg(1.0).bits == pytest.approx(float(mp_scaled_e1(1) / mp.log(2)), rel=1e-15)
    big = c_heterodyne_avg(1e4).bits
    assert big == pytest.approx(12.4563, abs=1e-4)
    assert abs(big - (math.log2(1e4) - GAMMA_BITS)) < 0.0015
    assert c_heterodyne_avg(1e-6).bits == pytest.approx(1e-6 / LN2, rel=2e-6)
    assert c_heterodyne_avg(0.0).bits == 0.0
    with pytest.raises(DomainError):
        c_heterodyne_avg(-1e-3)


def test_c0_reference():
    assert c0_reference(1.0).bits == 1.0
    assert c0_reference(3.0).bits == 2.0


@given(st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=300, deadline=None)
def test_heterodyne_below_c0(r):
    assert c_heterodyne_avg(r).bits < c0_reference(r).bits


def test_gap_tends_to_gamma_over_ln2():
    gap = c0_reference(1e6).bits - c_heterodyne_avg(1e6).bits
    assert abs(gap - 0.832746) < 0.01
    assert GAMMA_BITS == pytest.approx(0.832746, abs=1e-6)


@pytest.mark.parametrize("r", np.logspace(-6, 6, 25))
def test_heterodyne_avg_matches_mpmath(r):
    assert c_heterodyne_avg(r).bits == pytest.approx(float(mp_scaled_e1(1 / r) / mp.log(2)), rel=1e-14)


def test_c_infinity():
    assert c_infinity(1.0).bits == pytest.approx(float(mp_scaled_e1(2) / mp.log(2)), rel=1e-15)
    # the commonly quoted six-digit value rounds the last place down
    assert c_infinity(1.0).bits == pytest.approx(0.5212870037, abs=1e-10)
    assert c_infinity(1e-5).bits == pytest.approx(0.5e-5 / LN2, rel=1e-4)
    assert c_infinity(1e5).bits == pytest.approx(math.log2(0.5e5) - GAMMA_BITS, abs=1e-3)
    assert c_infinity(3.0).bits == c_heterodyne_avg(1.5).bits
    with pytest.raises(DomainError):
        c_infinity(0.0)


def test_holevo_instance_examples():
    assert c_holevo_instance(0.5, 1.0, 2.0).bits == pytest.approx(2.0, rel=1e-15)
    assert c_holevo_instance(0.5, 2.0, 2.0).bits == pytest.approx(0.7548875, abs=1e-7)
    assert c_holevo_instance(0.0, 5.0, 2.0).bits == 0.0
    assert c_holevo_instance(0.0, 1.0, 2.0).bits == 0.0
    with pytest.raises(DomainError):
        c_holevo_instance(0.5, 0.99, 1.0)
    with pytest.raises(DomainError):
        c_holevo_instance(-0.5, 1.0, 1.0)


@given(st.floats(min_value=0.0, max_value=1e4), st.floats(min_value=1.0, max_value=1e4))
@settings(max_examples=300, deadline=None)
def test_holevo_instance_above_heterodyne(tau, sigma):
    # the Holevo quantity bounds the heterodyne rate log2(1 + tau P/(sigma P0))
    h = c_holevo_instance(tau, sigma, 1.0).bits
    het = c_heterodyne_instance(tau / sigma).bits
    assert h >= het - 1e-12 * max(1.0, het)


def test_holevo_instance_large_sigma_limit():
    # large tau P/P0 and sigma at a fixed ratio: both rates approach log2(tau P / sigma P0)
    tau, sigma = 1e9, 1e7
    assert c_holevo_instance(tau, sigma, 1.0).bits == pytest.approx(math.log2(tau / sigma), abs=0.02)


@pytest.mark.parametrize("sigma_bar", [1.0 + 1e-7, 1.001, 1.01, 1.1, 2.0, 10.0, 100.0, 1e4])
@pytest.mark.parametrize("a", [1e-4, 0.01, 1.0, 100.0, 1e5])
def test_holevo_closed_form_matches_mpmath(sigma_bar, a):
    # a multiplies a difference of O(1/a) terms, so accuracy degrades like a * eps
    rel = 1e-12 * max(1.0, a / 100.0)
    assert holevo_avg_from_moments(a, sigma_bar) == pytest.approx(mp_holevo_avg(a, sigma_bar), rel=rel)


def test_holevo_avg_example_against_quadrature():
    p = MediumParams.from_power_per_mode(10, math.pi / 2, 0.1, 1.0)
    avg = diffusion_averages(p)
    quad = quad_average_moments("holevo", avg.tau_bar * p.power_per_p0, avg.sigma_bar, abs_tol=1e-13)
    assert c_holevo_avg(p).bits == pytest.approx(quad.bits, rel=1e-8)
    assert c_holevo_avg(p).method == "holevo_closed"


def test_holevo_avg_errors_and_limits():
    p = MediumParams.from_power_per_mode(10, math.pi, 0.1, 1.0)
    with pytest.raises(ThresholdError):
        c_holevo_avg(p)
    near = MediumParams.from_power_per_mode(10, 1e-4, 0.1, 1.0)
    base = c_holevo_noamp(diffusion_averages(near.with_length_ratio(0.0)).tau_bar, near.power_per_p0)
    assert abs(c_holevo_avg(near).bits - base.bits) <= 1e-6


def test_holevo_avg_tiny_gain_uses_quadrature():
    p = MediumParams.from_power_per_mode(10, 1e-9, 0.1, 1.0)
    res = c_holevo_avg(p)
    assert res.err_estimate > 0
    base = c_holevo_noamp(diffusion_averages(p.with_length_ratio(0.0)).tau_bar, p.power_per_p0).bits
    assert res.bits == pytest.approx(base, abs=1e-8)


@given(
    st.integers(min_value=1, max_value=100),
    st.floats(min_value=1e-4, max_value=math.pi - 1e-4),
    st.floats(min_value=1e-3, max_value=0.25),
    st.floats(min_value=1e-3, max_value=1e3),
)
@settings(max_examples=200, deadline=None)
def test_holevo_avg_dominates_heterodyne(n, lam, m, x):
    p = MediumParams.from_power_per_mode(n, lam, m, x)
    assert c_holevo_avg(p).bits >= c_heterodyne_avg(r_eff(p)).bits - 1e-9


@pytest.mark.parametrize("a", [1e-6, 1e-3, 0.0133333, 0.1, 1.0, 10.0, 1e3, 1e5])
def test_holevo_noamp_matches_mpmath(a):
    res = c_holevo_noamp(a, 1.0)
    assert res.bits == pytest.approx(mp_holevo_noamp(a), abs=1e-9, rel=1e-10)
    assert 0 < res.err_estimate <= 1e-9


def test_holevo_noamp_two_quadrature_schemes():
    tau_bar = 4 * 0.1 / 30
    a = c_holevo_noamp(tau_bar, 10.0).bits
    b = quad_average_moments("holevo", tau_bar * 10.0, 1.0, abs_tol=1e-12).bits
    assert a > 0
    assert a == pytest.approx(b, abs=1e-9)


@given(st.floats(min_value=1e-5, max_value=1.0), st.floats(min_value=1e-3, max_value=1e4))
@settings(max_examples=100, deadline=None)
def test_holevo_noamp_above_heterodyne(tau_bar, power):
    assert c_holevo_noamp(tau_bar, power).bits >= c_heterodyne_avg(tau_bar * power).bits


def test_holevo_noamp_small_signal():
    assert c_holevo_noamp(1e-12, 1.0).bits < 1e-9
    with pytest.raises(DomainError):
        c_holevo_noamp(0.0, 1.0)


def test_initial_decrease_term():
    p = MediumParams.from_power_per_mode(10, 0.1, 0.1, 1.0)
    # (4 * 0.1 * 0.01 / 3) log2(10 pi); a hand value of 0.0066278 is off in the fifth digit
    assert holevo_initial_decrease_term(p) == pytest.approx(0.4 * 0.01 / 3 * math.log2(10 * math.pi), rel=1e-15)
    assert holevo_initial_decrease_term(p) == pytest.approx(0.0066278, rel=1e-3)
    base = c_holevo_noamp(diffusion_averages(p.with_length_ratio(0.0)).tau_bar, p.power_per_p0).bits
    approx = c_holevo_initial_decrease(p)
    assert approx.method == "approximation"
    assert approx.bits == pytest.approx(base - holevo_initial_decrease_term(p), abs=1e-15)
    zero = c_holevo_initial_decrease(p.with_length_ratio(0.0))
    assert zero.bits == base
    with pytest.raises(DomainError):
        c_holevo_initial_decrease(p.with_length_ratio(0.3))


def test_initial_decrease_sign_and_scaling():
    # the exact decrease has the predicted sign and the predicted L^2 log(1/L)
    # shape only asymptotically; the ratio creeps towards one very slowly
    base = MediumParams.from_power_per_mode(10, 0.0, 0.05, 1.0)
    c0 = c_holevo_noamp(diffusion_averages(base).tau_bar, base.power_per_p0, abs_tol=1e-13).bits
    ratios = []
    for lam in (0.1, 0.01, 1e-3):
        p = base.with_length_ratio(lam)
        ratios.append((c_holevo_avg(p).bits - c0) / -holevo_initial_decrease_term(p))
    assert all(0.5 < r < 1.0 for r in ratios)
    assert ratios == sorted(ratios)


def test_increase_factor_report():
    weak = increase_factor_report(0.05, 1e-6)
    assert weak["ratio"] == pytest.approx(weak["weak_power"], rel=1e-5)
    assert weak["weak_power"] == pytest.approx(7.5)
    assert math.isnan(weak["strong_power"])
    strong = increase_factor_report(0.01, 1e8)
    assert strong["ratio"] == pytest.approx(strong["strong_power"], rel=0.1)


def test_capacity_curve_shapes():
    p = MediumParams.from_power_per_mode(10, 0.0, 0.05, 1.0)
    rows = capacity_curve(p, np.linspace(0.0, math.pi - 1e-3, 50))
    assert len(rows) == 50
    het = [r[1] for r in rows]
    hol = [r[2] for r in rows]
    assert np.all(np.diff(het) >= 0)
    assert min(hol) < hol[0]
    assert all(h >= c - 1e-9 for h, c in zip(hol, het))
