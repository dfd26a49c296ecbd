import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from gausspulse import pulse_shapes as ps
from gausspulse.params import PulseParams
from gausspulse.special_functions import theta3

LB = [0.5, 1.0, 1.5, 2.0, 3.0]
xs = st.floats(-30, 30)
lam_beta = st.floats(0.3, 4.0)


# -- Gaussian generator and autocorrelation ----------------------------------


def test_phi_peak_and_integral(p1):
    assert ps.gaussian_phi(0.0, p1) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-10)
    val, _ = integrate.quad(lambda x: ps.gaussian_phi(x, p1), -np.inf, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_unit_energy(p1):
    assert ps.unit_energy_phi(0.0, p1) == pytest.approx(0.7511255445, abs=1e-10)
    val, _ = integrate.quad(lambda x: ps.unit_energy_phi(x, p1) ** 2, -np.inf, np.inf, epsabs=1e-14)
    assert val == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("d", [0.0, 0.4, 1.0, 3.0])
def test_shifted_inner_product_by_quadrature(p1, d):
    val, _ = integrate.quad(lambda x: ps.unit_energy_phi(x - d, p1) * ps.unit_energy_phi(x, p1),
                            -np.inf, np.inf, epsabs=1e-14)
    assert val == pytest.approx(ps.shifted_inner_product(d, p1), abs=1e-12)


def test_capital_phi(p1):
    assert ps.capital_phi_hat(0.0, p1) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    for x in (0.0, 0.7, 2.5):
        val, _ = integrate.quad(lambda y: ps.gaussian_phi(y, p1) * ps.gaussian_phi(y - x, p1),
                                -np.inf, np.inf, epsabs=1e-14)
        assert val == pytest.approx(ps.capital_phi(x, p1), abs=1e-10)


@given(x=xs, lb=lam_beta)
def test_even_functions(x, lb):
    p = PulseParams(1.0, lb)
    for fn in (ps.gaussian_phi, ps.capital_phi, ps.phi_int_time, ps.varphi_int_time, ps.s0_time):
        assert fn(x, p) == pytest.approx(fn(-x, p), abs=1e-15)
    for fn in (ps.gaussian_phi_hat, ps.phi_int_freq, ps.s0_freq):
        assert fn(x, p) == pytest.approx(fn(-x, p), abs=1e-15)


def test_puc_sum_close_to_one(p1):
    # the partition of unity holds only approximately for Gaussians
    x = np.linspace(0, 1, 11)
    dev = np.max(np.abs(ps.puc_sum(x, PulseParams(1.0, 0.5)) - 1))
    assert dev < 1e-6


# -- ISI-free kernel ---------------------------------------------------------


def test_phi_int_freq_at_zero(p1):
    t = p1.tau.imag
    expected = (p1.lam / math.sqrt(2 * math.pi)) / (math.sqrt(t) * theta3(0.0, p1.tau))
    assert ps.phi_int_freq(0.0, p1) == pytest.approx(expected, rel=1e-15)
    # at lambda*beta = 1 theta3(0) = 2 sqrt(pi) and sqrt(t) = 1/(2 sqrt(pi)), so the value is 1/sqrt(2 pi)
    assert ps.phi_int_freq(0.0, p1) == pytest.approx(0.3989422804014327, rel=1e-14)


@pytest.mark.parametrize("lb", LB)
def test_isi_free(lb):
    p = PulseParams(1.0, lb)
    n = np.arange(-10, 11)
    np.testing.assert_allclose(ps.phi_int_time(n * p.lam, p), (n == 0).astype(float), atol=1e-10)
    np.testing.assert_allclose(ps.varphi_int_time(n * p.lam, p), (n == 0).astype(float), atol=1e-10)
    np.testing.assert_allclose(ps.s0_time(n * p.lam, p), (n == 0).astype(float), atol=0)


@pytest.mark.parametrize("lb", LB)
def test_kernel_continuous_across_guard_band(lb):
    p = PulseParams(1.0, lb)
    for m in (0, 1, -3):
        x = p.lam * (m + np.array([-2e-8, -5e-9, 5e-9, 2e-8]))
        v = ps.phi_int_time(x, p)
        assert np.max(np.abs(np.diff(v))) < 1e-6


@pytest.mark.parametrize("lb", [0.5, 1.0, 1.5])
def test_periodization_sums_to_one(lb):
    p = PulseParams(1.0, lb)
    w = np.arange(257) / 257 * p.Lambda
    total = sum(ps.phi_int_freq(w + k * p.Lambda, p) for k in range(-20, 21))
    assert np.max(np.abs(p.Lambda / math.sqrt(2 * math.pi) * total - 1)) < 1e-10


def test_s0_close_to_phi_int_at_reference(p1):
    x = ps.default_time_grid(p1)
    assert np.max(np.abs(ps.phi_int_time(x, p1) - ps.s0_time(x, p1))) < 1e-14


def test_s0_approximation_degrades_with_step():
    devs = []
    for lb in (1.0, 2.0, 3.0):
        p = PulseParams(1.0, lb)
        x = ps.default_time_grid(p)
        devs.append(np.max(np.abs(ps.phi_int_time(x, p) - ps.s0_time(x, p))))
    assert devs[0] < devs[1] < devs[2]


def test_varphi_int_reproduces_space_member(p1):
    # f = phi(. - 3 lam) lies in V_lam(phi)
    n = np.arange(-60, 61)
    x = np.linspace(-5, 8, 131)
    f = lambda t: ps.gaussian_phi(t - 3 * p1.lam, p1)
    rec = np.array([np.dot(f(n * p1.lam), ps.varphi_int_time(xx - n * p1.lam, p1)) for xx in x])
    assert np.max(np.abs(rec - f(x))) < 1e-8


# -- orthonormal root --------------------------------------------------------


@pytest.mark.parametrize("lb", [0.5, 1.0, 1.5, 2.0])
def test_spectral_factorization(lb):
    p = PulseParams(1.0, lb)
    w = np.linspace(-3 * p.Lambda, 3 * p.Lambda, 513)
    lhs = ps.phi_int_freq(w, p)
    rhs = math.sqrt(2 * math.pi) * np.abs(ps.phi_ortho_freq(w, p)) ** 2
    keep = lhs > 1e-300
    assert np.max(np.abs(lhs - rhs)[keep] / lhs[keep]) < 1e-10


@given(lb=lam_beta)
def test_p_factor_bounded_below(lb):
    p = PulseParams(1.0, lb)
    theta = np.linspace(-math.pi, math.pi, 201)
    mag = np.abs(ps.p_factor(theta, p))
    # the minimum sits at theta = pi and equals prod (1 - q^{2n+1}) > 0
    assert np.min(mag) > 0
    n = np.arange(2000)
    assert np.min(mag) == pytest.approx(np.prod(1 - p.q ** (2 * n + 1.0)), rel=1e-10)


def test_phi_ortho_leading_coefficient(p1):
    # far left only the n = 0 term of the sum survives
    x = -10.0
    assert ps.phi_ortho_time(x, p1) == pytest.approx(ps.unit_energy_phi(x, p1) / math.sqrt(p1.Q0), rel=2e-4)


# -- offset interpolant ------------------------------------------------------


def test_offset_zero_matches_plain_denominator(p1):
    w = np.linspace(-p1.Lambda, p1.Lambda, 33)
    den0 = ps.offset_denominator(w, 0.0, p1)
    # sum_n phi(n lam) e^{-i n lam w} is the theta-type sum underlying phi_int
    n = np.arange(-40, 41)
    direct = np.exp(-1j * np.outer(w, n)) @ ps.gaussian_phi(n * 1.0, p1)
    np.testing.assert_allclose(den0, direct, atol=1e-15)


@given(a=st.floats(-0.45, 0.45), k=st.integers(-3, 3))
def test_offset_denominator_periodic_in_a(a, k):
    # shifting a by k lam relabels the samples: D_{a+k lam}(w) = e^{i k lam w} D_a(w)
    p = PulseParams(1.0, 1.0)
    w = np.linspace(-3, 3, 7)
    lhs = ps.offset_denominator(w, a + k * p.lam, p)
    rhs = np.exp(1j * k * p.lam * w) * ps.offset_denominator(w, a, p)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_offset_reconstruction(p1):
    a = 0.3 * p1.lam
    n = np.arange(-60, 61)
    f = lambda t: ps.gaussian_phi(t - 2 * p1.lam, p1)
    x = np.linspace(-4, 6, 81)
    kern = ps.phi_int_offset_time((x[:, None] - n[None, :] * p1.lam).ravel(), a, p1).reshape(x.size, n.size)
    rec = kern @ f(a + n * p1.lam)
    assert np.max(np.abs(rec - f(x))) < 1e-6


def test_offset_singular_raises():
    # half-step offset with coarse sampling makes the denominator vanish at w = Lambda/2
    p = PulseParams(1.0, 5.0)
    with pytest.raises(ps.SingularOffsetError):
        ps.phi_int_offset_freq(np.array([p.Lambda / 2]), 0.5 * p.lam, p)
