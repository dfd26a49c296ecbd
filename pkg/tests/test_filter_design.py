import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gausspulse import filter_design as fd
from gausspulse import pulse_shapes as ps
from gausspulse.params import PulseParams, SampledSignal
from gausspulse.special_functions import TruncationError

builders = {"H1": fd.build_H1, "H2": fd.build_H2, "H3": fd.build_H3, "H4": fd.build_H4}
lam_beta = st.floats(0.5, 3.0)


def _tail_certified_order(p, name, tol=1e-12):
    return max(40, fd.select_order(p, name, tol))


# -- coefficients ------------------------------------------------------------


def test_coefficients_reference(p1):
    a = fd.coefficients_a(p1, 5)
    assert a[0] == 1.0
    assert a[1] == pytest.approx(-math.exp(-0.25) / (1 - math.exp(-0.5)), rel=1e-15)
    assert a[1] == pytest.approx(-1.9793, abs=1e-4)
    assert a[-1] == 0.0 and a[-7] == 0.0


@given(lb=lam_beta, n=st.integers(0, 60))
def test_coefficient_signs_alternate(lb, n):
    a = fd.coefficients_a(PulseParams(1.0, lb), n)
    if a[n] != 0:
        assert math.copysign(1, a[n]) == (-1) ** n


def test_denominator_reference(p1):
    b = fd.denominator_b(p1, 3)
    assert b[0] == 1.0
    assert b[1] == pytest.approx(math.exp(-0.25) / (1 - math.exp(-0.5)), rel=1e-15)


@given(lb=lam_beta)
def test_series_product_is_one(lb):
    # (sum a_n z^-n)(sum b_n z^-n) = 1 coefficient-wise: the two Euler products are reciprocal
    p = PulseParams(1.0, lb)
    N = 30
    conv = np.convolve(fd.coefficients_a(p, N).values, fd.denominator_b(p, N))[: N + 1]
    expected = np.zeros(N + 1)
    expected[0] = 1
    scale = np.max(np.abs(fd.coefficients_a(p, N).values))
    assert np.max(np.abs(conv - expected)) < 1e-12 * scale


@pytest.mark.parametrize("name", ["H1", "H2", "H3", "H4"])
def test_select_order_monotone_in_tolerance(p1, name):
    orders = [fd.select_order(p1, name, tol) for tol in (1e-4, 1e-8, 1e-12)]
    assert orders == sorted(orders)


def test_select_order_economy():
    # the all-pole realization needs far fewer taps than the FIR one
    p = PulseParams(1.0, 0.5)
    assert fd.select_order(p, "H1", 1e-12) < fd.select_order(p, "H3", 1e-12)


def test_select_order_budget(p1):
    with pytest.raises(TruncationError):
        fd.select_order(PulseParams(1.0, 0.05), "H3", 1e-16, fd.TruncationPolicy(max_terms=50))


# -- realizations ------------------------------------------------------------


def test_H2_poles_reference(p1):
    f = fd.build_H2(p1, 2)
    np.testing.assert_allclose(f.poles, [-math.exp(-0.25), -math.exp(-0.75)], rtol=1e-15)
    np.testing.assert_allclose(f.poles, [-0.77880, -0.47237], atol=5e-6)
    np.testing.assert_allclose(f.denominator, np.poly(f.poles), atol=1e-13)


@given(lb=lam_beta, N=st.integers(1, 25))
def test_poles_inside_unit_circle(lb, N):
    p = PulseParams(1.0, lb)
    for name in ("H2", "H4"):
        f = builders[name](p, N)
        assert np.all(np.abs(f.poles) < 1)


def test_zero_order_is_identity(p1):
    for name in ("H1", "H2", "H3"):
        f = builders[name](p1, 0)
        sig = SampledSignal(0.0, 1.0, np.array([0.3, -1.2, 4.0]))
        assert np.array_equal(fd.apply_filter(f, sig).values, sig.values)


def test_negative_order_rejected(p1):
    with pytest.raises(ValueError):
        fd.build_H1(p1, -1)


def test_unstable_cascade_rejected(p1):
    with pytest.raises(fd.UnstableFilterError):
        fd.RationalFilter([1.0], [1.0, -1.5], np.array([1.5]), "cascade_order1")


def test_H3_taps_and_impulse(p1):
    f = fd.build_H3(p1, 12)
    np.testing.assert_array_equal(f.numerator, fd.coefficients_a(p1, 12).values)
    np.testing.assert_array_equal(fd.impulse_response(f, 13), f.numerator)


def test_H1_impulse_converges_to_coefficients(p1):
    a = fd.coefficients_a(p1, 20).values
    errs = [np.max(np.abs(fd.impulse_response(fd.build_H1(p1, N), 21) - a)) for N in (5, 10, 20, 40)]
    assert all(b <= a_ for a_, b in zip(errs, errs[1:]))
    assert errs[0] > 1e-6 and errs[-1] < 1e-12


def test_H2_impulse_matches_coefficients(p1):
    a = fd.coefficients_a(p1, 19).values
    # 40 stages still drop a factor of relative size ~q^81 = 1.6e-9
    literal = np.max(np.abs(fd.impulse_response(fd.build_H2(p1, 40), 20) - a))
    assert 1e-10 < literal < 5e-8
    N = _tail_certified_order(p1, "H2")
    assert np.max(np.abs(fd.impulse_response(fd.build_H2(p1, N), 20) - a)) < 1e-10


def test_H3_response_vs_reciprocal_product(p1):
    theta = np.linspace(-math.pi, math.pi, 129)
    target = 1 / ps.p_factor(theta, p1)
    # FIR truncation at 40 taps leaves |a_41| ~ 3e-4, so the literal order is far off
    assert np.max(np.abs(fd.build_H3(p1, 40).frequency_response(theta) - target)) > 1e-4
    N = _tail_certified_order(p1, "H3", 1e-13)
    assert np.max(np.abs(fd.build_H3(p1, N).frequency_response(theta) - target)) < 1e-10
    assert np.max(np.abs(fd.build_H1(p1, 40).frequency_response(theta) - target)) < 1e-10


@given(theta=st.floats(-math.pi, math.pi))
def test_H4_response_real_and_even(theta):
    f = fd.build_H4(PulseParams(1.0, 1.0), 15)
    r = f.frequency_response(np.array([theta, -theta]))
    assert abs(r[0].imag) < 1e-12 * abs(r[0])
    assert r[0].real == pytest.approx(r[1].real, rel=1e-13)


def test_H4_all_poles(p1):
    f = fd.build_H4(p1, 4)
    inside = np.sort(f.all_poles()[np.abs(f.all_poles()) < 1])
    np.testing.assert_allclose(inside, np.sort(-(p1.q ** (2 * np.arange(4) + 1.0))), rtol=1e-15)


@pytest.mark.parametrize("lb", [1.0, 1.5])
def test_H4_turns_autocorrelation_into_delta(lb):
    p = PulseParams(1.0, lb)
    k = np.arange(-80, 81)
    sig = SampledSignal(float(k[0] * p.lam), p.lam, ps.capital_phi(k * p.lam, p))
    N = _tail_certified_order(p, "H4")
    y = fd.apply_filter(fd.build_H4(p, N), sig).values
    centre = slice(60, 101)
    assert np.max(np.abs(y[centre] - (k[centre] == 0))) < 1e-10


def test_apply_filter_mirror_boundary(p1):
    x = np.ones(50)
    N = _tail_certified_order(p1, "H2")
    y = fd.apply_filter(fd.build_H2(p1, N), SampledSignal(0.0, 1.0, x), "mirror").values
    # a constant input reaches the DC gain 1/P(1) everywhere once mirrored
    dc = 1 / ps.p_factor(0.0, p1).real
    assert np.max(np.abs(y - dc)) < 1e-12


def test_impulse_response_rejects_zero_phase(p1):
    with pytest.raises(ValueError):
        fd.impulse_response(fd.build_H4(p1, 3), 10)


@pytest.mark.parametrize("name", ["H1", "H2", "H3", "H4"])
def test_json_round_trip(p1, name):
    f = builders[name](p1, 20)
    g = fd.RationalFilter.from_dict(json.loads(json.dumps(f.to_dict())))
    theta = 2 * math.pi * np.arange(64) / 64
    assert np.max(np.abs(f.frequency_response(theta) - g.frequency_response(theta))) < 1e-14


# -- sample values of the orthonormal root -----------------------------------


@pytest.mark.parametrize("lb", [0.7, 1.0, 2.0])
def test_phi_ortho_samples_match_dense(lb):
    p = PulseParams(1.0, lb)
    s = fd.phi_ortho_samples(p, -5, 15)
    dense = ps.phi_ortho_time(s.grid, p)
    assert np.max(np.abs(s.values - dense)) < 1e-12


def test_phi_ortho_samples_left_tail(p1):
    s = fd.phi_ortho_samples(p1, -40, -30)
    assert np.max(np.abs(s.values)) < 1e-15


def test_phi_ortho_samples_autocorrelation(p1):
    # r[k] = sum_m s[m] s[m-k] against sum_{j,l} c_j c_l g(k + l - j) with
    # g(d) = sum_m phi(m lam) phi((m-d) lam) summed directly and c from the Gram oracle
    from gausspulse.oracles import _ortho_coefficients

    c = _ortho_coefficients(p1)
    amp = math.sqrt(p1.beta) * math.pi**-0.25
    m = np.arange(-200, 201)
    phi = lambda k: amp * p1.q ** (2.0 * k * k)
    j = np.arange(c.size)
    s = fd.phi_ortho_samples(p1, -30, 250).values
    for k in (0, 1, 3):
        r = float(np.dot(s[k:], s[: s.size - k]))
        d = k + j[None, :] - j[:, None]
        uniq, inv = np.unique(d, return_inverse=True)
        g = np.array([np.dot(phi(m), phi(m - dd)) for dd in uniq])[inv].reshape(d.shape)
        assert r == pytest.approx(float(c @ g @ c), rel=1e-11, abs=1e-14)


def test_phi_ortho_samples_empty_range(p1):
    with pytest.raises(ValueError):
        fd.phi_ortho_samples(p1, 3, 2)
