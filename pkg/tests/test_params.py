import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gausspulse.params import PulseParams, SampledSignal


def test_derived_constants(p1):
    assert p1.q == pytest.approx(math.exp(-0.25), rel=1e-15)
    assert p1.q_prime == pytest.approx(math.exp(-4 * math.pi**2), rel=1e-14)
    assert p1.Lambda == pytest.approx(2 * math.pi)
    assert p1.i_tau == pytest.approx(-1 / (4 * math.pi))
    assert p1.Q0 == pytest.approx(np.prod(1 - math.exp(-0.5) ** (np.arange(400) + 1.0)), rel=1e-14)


@pytest.mark.parametrize("beta,lam", [(0, 1), (1, 0), (-1, 1), (math.inf, 1), (1, math.nan)])
def test_rejects_invalid(beta, lam):
    with pytest.raises(ValueError):
        PulseParams(beta, lam)


def test_supported_region():
    assert PulseParams(1, 0.2).in_supported_region()
    assert not PulseParams(1, 6).in_supported_region()
    assert not PulseParams(1, 0.1).in_supported_region()


@given(beta=st.floats(0.1, 10), lam=st.floats(0.1, 3))
def test_nome_depends_on_product_only(beta, lam):
    p = PulseParams(beta, lam)
    other = PulseParams(beta * lam, 1.0)
    assert p.q == pytest.approx(other.q, rel=1e-13)
    assert p.with_tau_scaled(2.0).q == pytest.approx(p.q**2, rel=1e-12)


def test_sampled_signal_validation():
    s = SampledSignal.from_function(np.sin, 0.0, 0.5, 4)
    assert len(s) == 4
    np.testing.assert_allclose(s.grid, [0, 0.5, 1.0, 1.5])
    with pytest.raises(ValueError):
        SampledSignal(0.0, 1.0, [])
    with pytest.raises(ValueError):
        SampledSignal(0.0, 1.0, [1.0, np.nan])
    with pytest.raises(ValueError):
        SampledSignal(0.0, -1.0, [1.0])
    with pytest.raises(ValueError):
        SampledSignal(0.0, 1.0, [1.0], "space")
