import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gausspulse import pulse_shapes as ps
from gausspulse.params import PulseParams, SampledSignal
from gausspulse.sampling import (
    GaussianComponent,
    GaussianMixture,
    QuadratureError,
    error_bound,
    kernel_window,
    offset_reconstruct,
    phi_descriptor,
    prefilter,
    reconstruct,
    run_pipeline,
)


def test_prefilter_of_phi_is_autocorrelation(p1):
    g = prefilter(phi_descriptor(p1), p1)
    x = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(g(x), ps.capital_phi(x, p1), rtol=1e-14, atol=1e-300)


def test_prefilter_of_zero(p1):
    g = prefilter(GaussianMixture(()), p1)
    assert np.all(g(np.linspace(-3, 3, 7)) == 0)


@pytest.mark.parametrize("width", [0.3, 2.5])
def test_closed_form_and_quadrature_agree(p1, width):
    f = GaussianMixture((GaussianComponent(1 / math.sqrt(width * math.sqrt(math.pi)), 0.4, width),))
    x = np.linspace(-4, 4, 9)
    a = prefilter(f, p1, "closed_form")(x)
    b = prefilter(f, p1, "quadrature")(x)
    assert np.max(np.abs(a - b)) < 1e-10
    # plain callables always go through quadrature
    c = prefilter(lambda y: f(y), p1)(x)
    assert np.max(np.abs(a - c)) < 1e-10


def test_quadrature_failure_surfaces(p1):
    wild = lambda y: np.sin(1e4 * y) / (abs(y - 0.1) ** 0.99 + 1e-300)
    with pytest.raises(QuadratureError):
        prefilter(wild, p1, "quadrature")(np.array([0.1]))


def test_mixture_energy_closed_form(p1):
    f = GaussianMixture.random(3, p1, seed=7)
    x = np.linspace(-40, 40, 200001)
    assert f.energy() == pytest.approx(np.trapezoid(f(x) ** 2, x), rel=1e-9)


def test_random_mixture_is_seeded(p1):
    assert GaussianMixture.random(3, p1, 11) == GaussianMixture.random(3, p1, 11)
    assert GaussianMixture.random(3, p1, 11) != GaussianMixture.random(3, p1, 12)


def test_bad_component_width():
    with pytest.raises(ValueError):
        GaussianComponent(1.0, 0.0, 0.0)


# -- reconstruction ----------------------------------------------------------


def test_delta_samples_give_kernel(p1):
    vals = np.zeros(41)
    vals[20] = 1.0
    s = SampledSignal(-20.0, 1.0, vals)
    x = np.linspace(-6, 6, 97)
    out = reconstruct(s, p1, x).values
    np.testing.assert_allclose(out, ps.phi_int_time(x, p1), atol=1e-16)


def test_reconstruct_rejects_wrong_step(p1):
    with pytest.raises(ValueError):
        reconstruct(SampledSignal(0.0, 0.5, np.ones(4)), p1, np.linspace(0, 1, 3))


@given(seed=st.integers(0, 10_000))
def test_interpolation_property(seed):
    p = PulseParams(1.0, 1.0)
    res = run_pipeline(GaussianMixture.random(3, p, seed), p, np.linspace(-4, 4, 129))
    assert res.interpolation_error < 1e-13


def test_kernel_window_bounds_tail(p1):
    w = kernel_window(p1)
    x = np.linspace(w, w + 5, 11)
    assert np.max(np.abs(ps.phi_int_time(x, p1))) < 1e-17


def test_offset_reconstruct(p1):
    a = 0.3
    f = lambda t: ps.gaussian_phi(t - 2.0, p1)
    n = np.arange(-60, 61)
    s = SampledSignal(a + n[0], 1.0, f(a + n))
    x = np.linspace(-4, 6, 41)
    assert np.max(np.abs(offset_reconstruct(s, a, p1, x).values - f(x))) < 1e-6
    with pytest.raises(ValueError):
        offset_reconstruct(SampledSignal(0.1, 1.0, f(0.1 + n)), a, p1, x)


# -- error bound -------------------------------------------------------------


def test_bound_reference_value(p1):
    assert error_bound(p1, 1.0) == pytest.approx(16 / math.sqrt(2 * math.pi) * math.exp(-math.pi**2 / 2), rel=1e-15)
    assert error_bound(p1, 1.0) == pytest.approx(0.04591, abs=1e-5)
    assert error_bound(p1, 0.0) == 0.0
    with pytest.raises(ValueError):
        error_bound(p1, -1.0)


@given(beta=st.floats(0.3, 3), lam=st.floats(0.3, 3))
def test_bound_halving_step(beta, lam):
    full = error_bound(PulseParams(beta, lam), 1.0)
    half = error_bound(PulseParams(beta, lam / 2), 1.0)
    expected = math.exp(-3 * (math.pi / lam) ** 2 / (2 * beta**2))
    if full > 1e-250:
        assert half / full == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_pipeline_phi_passes(beta):
    p = PulseParams(beta, 1 / beta)
    res = run_pipeline(phi_descriptor(p), p, p.lam * np.linspace(-6, 6, 193))
    assert res.passed
    assert res.error_sup < 1e-14


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
@pytest.mark.parametrize("lb", [0.5, 1.0, 2.0])
def test_pipeline_mixture_passes(seed, lb):
    p = PulseParams(1.0, lb)
    res = run_pipeline(GaussianMixture.random(3, p, seed), p, p.lam * np.linspace(-6, 6, 193))
    assert res.passed


def test_pipeline_zero(p1):
    res = run_pipeline(GaussianMixture(()), p1, np.linspace(-3, 3, 49))
    assert res.error_sup == 0.0 and res.bound == 0.0 and res.passed
    assert np.all(res.g_tilde.values == 0)


def test_pipeline_offset_samples(p1):
    res = run_pipeline(GaussianMixture.random(3, p1, 5), p1, np.linspace(-5, 5, 161), offset=0.3)
    assert res.passed


def test_pipeline_coarse_step_is_coherent():
    p = PulseParams(1.0, 2.0)
    res = run_pipeline(phi_descriptor(p), p, np.linspace(-10, 10, 161))
    assert math.isfinite(res.error_sup)
    assert res.bound > error_bound(PulseParams(1.0, 1.0), res.energy_f)
