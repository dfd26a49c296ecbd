"""Gaussian generator, ISI-free interpolants and the orthonormal root pulse.

Fourier convention throughout: ``f_hat(w) = (2 pi)^{-1/2} int e^{-i x w} f(x) dx``.
All evaluators accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import math

import numpy as np

from .filter_design import coefficients_a, select_order
from .params import PulseParams, SampledSignal
from .special_functions import (
    DEFAULT_POLICY,
    TruncationError,
    TruncationPolicy,
    theta1_derivative_ratio,
    theta1_over_prime,
    theta3,
)

__all__ = [
    "PulseParams",
    "SampledSignal",
    "SingularOffsetError",
    "gaussian_phi",
    "gaussian_phi_hat",
    "unit_energy_phi",
    "unit_energy_phi_hat",
    "shifted_inner_product",
    "capital_phi",
    "capital_phi_hat",
    "phi_int_freq",
    "phi_int_time",
    "s0_time",
    "s0_freq",
    "p_factor",
    "phi_ortho_time",
    "phi_ortho_freq",
    "varphi_int_time",
    "varphi_int_freq",
    "offset_denominator",
    "phi_int_offset_freq",
    "phi_int_offset_time",
    "puc_sum",
    "default_time_grid",
    "default_freq_grid",
]

SQRT2PI = math.sqrt(2 * math.pi)
GUARD_BAND = 1e-8


class SingularOffsetError(ValueError):
    """The offset-sampling denominator nearly vanishes on the requested grid."""


def _out(x, arr):
    return arr.item() if np.ndim(x) == 0 else arr


def _inv_sinh(v: np.ndarray) -> np.ndarray:
    """1/sinh(v) without overflow; callers keep v away from 0."""
    av = np.abs(v)
    with np.errstate(over="ignore", under="ignore"):
        e = np.exp(-av)
        return np.sign(v) * 2 * e / (1 - e * e)


# ---------------------------------------------------------------------------
# Gaussian building blocks
# ---------------------------------------------------------------------------


def gaussian_phi(x, p: PulseParams):
    """Unit-area Gaussian with standard deviation 1/beta."""
    x = np.asarray(x, dtype=float)
    return _out(x, p.beta / SQRT2PI * np.exp(-0.5 * (p.beta * x) ** 2))


def gaussian_phi_hat(omega, p: PulseParams):
    w = np.asarray(omega, dtype=float)
    return _out(w, np.exp(-0.5 * (w / p.beta) ** 2) / SQRT2PI)


def unit_energy_phi(x, p: PulseParams):
    """Unit-energy Gaussian ``beta^{1/2} pi^{-1/4} exp(-beta^2 x^2 / 2)``."""
    x = np.asarray(x, dtype=float)
    return _out(x, math.sqrt(p.beta) * math.pi**-0.25 * np.exp(-0.5 * (p.beta * x) ** 2))


def unit_energy_phi_hat(omega, p: PulseParams):
    w = np.asarray(omega, dtype=float)
    return _out(w, math.pi**-0.25 / math.sqrt(p.beta) * np.exp(-0.5 * (w / p.beta) ** 2))


def shifted_inner_product(d, p: PulseParams):
    """<phi(. - d), phi> for the unit-energy Gaussian: exp(-beta^2 d^2 / 4)."""
    d = np.asarray(d, dtype=float)
    return _out(d, np.exp(-0.25 * (p.beta * d) ** 2))


def capital_phi(x, p: PulseParams):
    """Autocorrelation of :func:`gaussian_phi`, a Gaussian of variance 2/beta^2."""
    x = np.asarray(x, dtype=float)
    return _out(x, p.beta / (2 * math.sqrt(math.pi)) * np.exp(-0.25 * (p.beta * x) ** 2))


def capital_phi_hat(omega, p: PulseParams):
    w = np.asarray(omega, dtype=float)
    return _out(w, SQRT2PI * np.abs(gaussian_phi_hat(w, p)) ** 2)


def puc_sum(x, p: PulseParams, n_terms: int = 50):
    """Partial sum ``sum_{|n|<=N} phi_lam(x+n)`` with ``phi_lam(x) = lam*phi(lam*x)``."""
    x = np.asarray(x, dtype=float)
    n = np.arange(-n_terms, n_terms + 1)
    vals = p.lam * gaussian_phi(p.lam * (x[..., None] + n), p)
    return _out(x, vals.sum(axis=-1))


# ---------------------------------------------------------------------------
# ISI-free interpolant and its simple approximation
# ---------------------------------------------------------------------------


def phi_int_freq(omega, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """Fourier transform of the ISI-free kernel (real and positive)."""
    w = np.asarray(omega, dtype=float)
    z = np.abs(w) / p.Lambda  # even in w; keeps the two signs bit-identical
    t = p.tau.imag
    with np.errstate(under="ignore"):
        num = np.exp(-(math.pi / t) * z**2)
    den = math.sqrt(t) * np.asarray(theta3(z, p.tau, "auto", policy))
    return _out(w, p.lam / SQRT2PI * num / den)


def _interpolant(x, p: PulseParams, policy: TruncationPolicy):
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(x / p.lam).ravel()
    c = math.pi * p.i_tau  # i*pi*tau < 0
    tau_m = p.modular_tau
    m = np.round(u)
    d = u - m
    out = np.empty_like(u)

    exact = d == 0
    out[exact] = np.where(m[exact] == 0, 1.0, 0.0)

    ratio = theta1_derivative_ratio(tau_m, policy)
    guard = ~exact & (np.abs(d) < GUARD_BAND)
    g0 = guard & (m == 0)
    if g0.any():
        uu = u[g0] ** 2
        out[g0] = (1 + ratio * uu / 6) / (1 + c * c * uu / 6)
    gn = guard & (m != 0)
    if gn.any():
        # theta_1(m + d) = (-1)^m (theta_1'(0) d + theta_1'''(0) d^3 / 6 + ...)
        dd = d[gn]
        sign = np.where(m[gn] % 2 == 0, 1.0, -1.0)
        out[gn] = c * sign * (dd + ratio * dd**3 / 6) * _inv_sinh(c * u[gn])

    rest = ~exact & ~guard
    if rest.any():
        out[rest] = c * np.asarray(theta1_over_prime(u[rest], tau_m, policy)) * _inv_sinh(c * u[rest])
    return _out(x, out.reshape(x.shape))


def phi_int_time(x, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """ISI-free kernel in time: (i pi tau / theta_1'(0,-1/tau)) theta_1(x/lam,-1/tau) / sinh(i pi tau x/lam)."""
    return _interpolant(x, p, policy)


def varphi_int_time(x, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """Interpolant of the shift-invariant space itself: the kernel with tau -> 2 tau."""
    return _interpolant(x, p.with_tau_scaled(2.0), policy)


def varphi_int_freq(omega, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    return phi_int_freq(omega, p.with_tau_scaled(2.0), policy)


def s0_time(x, p: PulseParams):
    """i tau sin(pi x/lam) / sinh(i pi tau x/lam), equal to 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(x / p.lam).ravel()
    c = math.pi * p.i_tau
    m = np.round(u)
    d = u - m
    out = np.empty_like(u)
    exact = d == 0
    out[exact] = np.where(m[exact] == 0, 1.0, 0.0)
    g0 = ~exact & (np.abs(u) < GUARD_BAND)
    out[g0] = (1 - (math.pi * u[g0]) ** 2 / 6) / (1 + (c * u[g0]) ** 2 / 6)
    rest = ~exact & ~g0
    sin_pu = np.where(m[rest] % 2 == 0, 1.0, -1.0) * np.sin(math.pi * d[rest])
    out[rest] = p.i_tau * sin_pu * _inv_sinh(c * u[rest])
    return _out(x, out.reshape(x.shape))


def s0_freq(omega, p: PulseParams):
    """Closed-form Fourier transform of :func:`s0_time`.

    Evaluated as (1 - e^{-2A}) / (1 + e^{-2A} + e^{|B|-A}(1 + e^{-2|B|})) with
    A = -pi/(i tau) and B = lam w/(i tau), which avoids cosh overflow.
    """
    w = np.asarray(omega, dtype=float)
    a = -math.pi / p.i_tau
    b = np.abs(p.lam * w / p.i_tau)
    with np.errstate(over="ignore", under="ignore"):
        val = -math.expm1(-2 * a) / (1 + math.exp(-2 * a) + np.exp(b - a) * (1 + np.exp(-2 * b)))
    return _out(w, p.lam / SQRT2PI * val)


# ---------------------------------------------------------------------------
# Orthonormal root pulse
# ---------------------------------------------------------------------------


def p_factor(theta, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """P(e^{i theta}) = prod_{n>=1} (1 + q^{2n-1} e^{-i theta}).

    The number of factors M is the first with
    ``exp(q^{2M+1} / ((1-q^2)(1-q^{2M+1}))) - 1 < rel_tol``.
    """
    th = np.asarray(theta, dtype=float)
    q = p.q
    m = 0
    while True:
        r = q ** (2 * m + 1)
        s = r / ((1 - q * q) * (1 - r))
        if s < 1 and math.expm1(s) < policy.rel_tol:
            break
        m += 1
        if m >= policy.max_terms:
            raise TruncationError("P(z) product not certified")
    stages = q ** (2 * np.arange(m) + 1.0)
    zinv = np.exp(-1j * th)
    return _out(th, np.prod(1 + stages * zinv[..., None], axis=-1))


def phi_ortho_time(x, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """Q0^{-1/2} sum_{n>=0} a_n phi(x - n lam) with a_n = (-q)^n / (q^2;q^2)_n.

    The sum stops at the order whose certified coefficient tail is below
    ``rel_tol`` times the largest coefficient.
    """
    x = np.asarray(x, dtype=float)
    n_max = select_order(p, "H3", policy.rel_tol, policy)
    a = coefficients_a(p, n_max).values
    shifts = x[..., None] - p.lam * np.arange(n_max + 1)
    vals = unit_energy_phi(shifts, p) @ a
    return _out(x, vals / math.sqrt(p.Q0))


def phi_ortho_freq(omega, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """lam^{1/2} phi_hat(w) / ((-i tau)^{1/4} Q0^{1/2} P(e^{2 pi i w / Lambda}))."""
    w = np.asarray(omega, dtype=float)
    pz = p_factor(2 * math.pi * w / p.Lambda, p, policy)
    scale = math.sqrt(p.lam) / (p.tau.imag**0.25 * math.sqrt(p.Q0))
    return _out(w, scale * gaussian_phi_hat(w, p) / pz)


# ---------------------------------------------------------------------------
# Offset interpolant
# ---------------------------------------------------------------------------


def _offset_window(a: float, p: PulseParams, tol: float) -> np.ndarray:
    """Indices n whose neglected samples phi(a + n lam) sum below tol * phi(0)."""
    beta, lam = p.beta, p.lam
    radius = math.sqrt(-2 * math.log(tol)) / beta
    while True:
        # for |y| >= R consecutive samples shrink by at least exp(-beta^2 R lam)
        tail = 2 * math.exp(-0.5 * (beta * radius) ** 2) / -math.expm1(-(beta**2) * radius * lam)
        if tail < tol:
            break
        radius *= 1.25
    lo = math.floor((-radius - a) / lam)
    hi = math.ceil((radius - a) / lam)
    return np.arange(lo, hi + 1)


def offset_denominator(omega, a: float, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """sum_n phi(a + n lam) e^{-i n lam w}."""
    w = np.asarray(omega, dtype=float)
    n = _offset_window(a, p, policy.rel_tol)
    samples = gaussian_phi(a + n * p.lam, p)
    return _out(w, np.exp(-1j * p.lam * np.multiply.outer(w, n)) @ samples)


def _check_denominator(den: np.ndarray, p: PulseParams) -> None:
    # lam * den is dimensionless (about 1 for well-behaved offsets)
    smallest = float(np.min(np.abs(den))) * p.lam if np.size(den) else 1.0
    if smallest < 1e-12:
        raise SingularOffsetError(f"offset denominator nearly vanishes (|lam*D| = {smallest:.3e})")


def phi_int_offset_freq(omega, a: float, p: PulseParams, policy: TruncationPolicy = DEFAULT_POLICY):
    """phi_hat(w) / sum_n phi(a + n lam) e^{-i n lam w} for samples taken at a + n lam."""
    w = np.asarray(omega, dtype=float)
    den = np.asarray(offset_denominator(w, a, p, policy))
    _check_denominator(den, p)
    return _out(w, gaussian_phi_hat(w, p) / den)


def phi_int_offset_time(x, a: float, p: PulseParams, n_fft: int = 1024,
                        policy: TruncationPolicy = DEFAULT_POLICY):
    """Offset interpolant in time via the Fourier series of 1/denominator.

    1/D is Lambda-periodic, ``1/D(w) = sum_k c_k e^{-i k lam w}``, so the
    interpolant is ``sum_k c_k phi(x - k lam)``.  The c_k come from an FFT over
    one period; ``n_fft`` must be large enough that the c_k have decayed.
    """
    x = np.asarray(x, dtype=float)
    w = p.Lambda * np.arange(n_fft) / n_fft
    den = np.asarray(offset_denominator(w, a, p, policy))
    _check_denominator(den, p)
    # c_k = mean_j e^{+i k lam w_j} / D(w_j) = ifft(1/D)[k]
    c = np.fft.ifft(1.0 / den)
    k = np.fft.fftfreq(n_fft, 1.0 / n_fft).astype(int)
    edge = np.abs(c[np.abs(k) >= n_fft // 2 - 1]).max()
    if edge > 1e-13 * np.abs(c).max():
        raise TruncationError(f"n_fft={n_fft} too small for offset coefficients (edge {edge:.2e})")
    shifts = x[..., None] - p.lam * k
    vals = gaussian_phi(shifts, p) @ c.real
    return _out(x, vals)


# ---------------------------------------------------------------------------
# Default grids
# ---------------------------------------------------------------------------


def default_time_grid(p: PulseParams) -> np.ndarray:
    """x in [-8 lam, 8 lam], step lam/32."""
    return p.lam * np.arange(-8 * 32, 8 * 32 + 1) / 32


def default_freq_grid(p: PulseParams) -> np.ndarray:
    """w in [-4 Lambda, 4 Lambda], step Lambda/64."""
    return p.Lambda * np.arange(-4 * 64, 4 * 64 + 1) / 64
