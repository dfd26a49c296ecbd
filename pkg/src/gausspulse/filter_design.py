"""Digital filters whose impulse responses approximate the coefficients a_n.

The four realizations share one set of closed forms in the nome q:

* H1: all-pole IIR with denominator taps q^{n^2} / (q^2;q^2)_n
* H2: cascade of first-order sections with poles -q^{2n+1}
* H3: FIR with taps a_n = (-q)^n / (q^2;q^2)_n
* H4: causal/anticausal (zero-phase) cascade H2(z) H2(1/z)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.signal import lfilter

from .params import PulseParams, SampledSignal
from .special_functions import DEFAULT_POLICY, TruncationError, TruncationPolicy, q_pochhammer_sequence

__all__ = [
    "CoefficientSequence",
    "RationalFilter",
    "UnstableFilterError",
    "coefficients_a",
    "denominator_b",
    "select_order",
    "build_H1",
    "build_H2",
    "build_H3",
    "build_H4",
    "apply_filter",
    "impulse_response",
    "phi_ortho_samples",
]

Realization = Literal["fir", "iir_direct", "cascade_order1", "zero_phase_cascade"]


class UnstableFilterError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientSequence:
    values: np.ndarray
    q: float

    def __getitem__(self, n: int) -> float:
        # causal: a_n = 0 for n < 0
        if n < 0:
            return 0.0
        return float(self.values[n])

    def __len__(self) -> int:
        return len(self.values)


def coefficients_a(p: PulseParams, n_max: int) -> CoefficientSequence:
    """a_n = (-q)^n / (q^2;q^2)_n for n = 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    q = p.q
    n = np.arange(n_max + 1)
    vals = (-q) ** n / q_pochhammer_sequence(q * q, q * q, n_max)
    return CoefficientSequence(vals, q)


def denominator_b(p: PulseParams, n_max: int) -> np.ndarray:
    """b_n = q^{n^2} / (q^2;q^2)_n for n = 0..n_max (b_0 = 1)."""
    q = p.q
    n = np.arange(n_max + 1, dtype=float)
    with np.errstate(under="ignore"):
        return q ** (n * n) / q_pochhammer_sequence(q * q, q * q, n_max)


def select_order(p: PulseParams, realization: str, tol: float,
                 policy: TruncationPolicy = DEFAULT_POLICY, relative: bool = True) -> int:
    """Smallest N whose neglected part is certified below ``tol``.

    ``H1``: sum_{n>N} b_n; ``H3``: sum_{n>N} |a_n|; ``H2``/``H4``: the
    coefficient perturbation of the dropped stages,
    expm1(q^{2N+1} / ((1-q^2)(1-q^{2N+1}))).  With ``relative`` the H1/H3
    bounds are compared against ``tol`` times the largest coefficient so far.
    """
    q = p.q
    if realization in ("H2", "H4"):
        for n in range(policy.max_terms):
            r = q ** (2 * n + 1)
            s = r / ((1 - q * q) * (1 - r))
            if s < 1 and math.expm1(s) < tol:
                return n
        raise TruncationError(f"{realization}: order not found within {policy.max_terms}")
    if realization not in ("H1", "H3"):
        raise ValueError(f"unknown realization {realization!r}")
    log_q = math.log(q)
    log_c = 0.0  # log |coefficient n|
    log_max = 0.0
    for n in range(policy.max_terms):
        # coefficient n+1 and a ratio bound valid for all later steps
        k = n + 1
        log1m = math.log1p(-(q ** (2 * k)))
        if realization == "H1":
            log_next = log_c + (2 * k - 1) * log_q - log1m
            ratio = q ** (2 * k + 1) / (1 - q ** (2 * k + 2))
        else:
            log_next = log_c + log_q - log1m
            ratio = q / (1 - q ** (2 * k + 2))
        if ratio < 1:
            tail = math.exp(log_next) / (1 - ratio)
            scale = math.exp(log_max) if relative else 1.0
            if tail < tol * scale:
                return n
        log_c = log_next
        log_max = max(log_max, log_c)
    raise TruncationError(f"{realization}: order not found within {policy.max_terms}")


@dataclass
class RationalFilter:
    """H(z) = gain * N(z^-1) / D(z^-1), coefficients in ascending powers of z^-1.

    For ``zero_phase_cascade`` the response is gain / (D(z^-1) D(z)) with D the
    causal part; ``poles`` then lists the stage poles inside the unit circle.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    poles: np.ndarray | None = None
    realization_tag: Realization = "iir_direct"
    gain: float = 1.0
    q: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        # np.poly of an empty pole list is the scalar 1.0
        self.numerator = np.atleast_1d(np.asarray(self.numerator, dtype=float))
        self.denominator = np.atleast_1d(np.asarray(self.denominator, dtype=float))
        if self.poles is not None:
            self.poles = np.asarray(self.poles, dtype=float)
        if self.denominator.size == 0 or self.denominator[0] != 1.0:
            raise ValueError("denominator[0] must be 1")
        if self.realization_tag not in ("fir", "iir_direct", "cascade_order1", "zero_phase_cascade"):
            raise ValueError(f"unknown realization {self.realization_tag!r}")
        if self.realization_tag in ("cascade_order1", "zero_phase_cascade"):
            if self.poles is None:
                raise ValueError(f"{self.realization_tag} needs a pole list")
            if np.any(np.abs(self.poles) >= 1):
                raise UnstableFilterError(f"stage pole outside the open unit disc: {self.poles}")

    @property
    def order(self) -> int:
        return max(self.numerator.size, self.denominator.size) - 1

    def all_poles(self) -> np.ndarray:
        """Every pole of H in the z-plane (anticausal stages contribute 1/pole)."""
        if self.poles is None:
            return np.roots(self.denominator) if self.denominator.size > 1 else np.array([])
        if self.realization_tag == "zero_phase_cascade":
            return np.concatenate([self.poles, 1.0 / self.poles])
        return self.poles.copy()

    def frequency_response(self, theta) -> np.ndarray:
        """H(e^{i theta})."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        zinv = np.exp(-1j * th)
        num = np.polynomial.polynomial.polyval(zinv, self.numerator)
        if self.realization_tag == "cascade_order1":
            den = np.prod(1 - self.poles * zinv[:, None], axis=1)
        elif self.realization_tag == "zero_phase_cascade":
            z = 1 / zinv
            den = np.prod((1 - self.poles * zinv[:, None]) * (1 - self.poles * z[:, None]), axis=1)
        else:
            den = np.polynomial.polynomial.polyval(zinv, self.denominator)
        return self.gain * num / den

    def to_dict(self) -> dict:
        return {
            "realization": self.realization_tag,
            "numerator": [float(v) for v in self.numerator],
            "denominator": [float(v) for v in self.denominator],
            "poles": None if self.poles is None else [float(v) for v in self.poles],
            "gain": float(self.gain),
            "q": self.q,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RationalFilter":
        return cls(
            numerator=d["numerator"],
            denominator=d["denominator"],
            poles=d.get("poles"),
            realization_tag=d["realization"],
            gain=d.get("gain", 1.0),
            q=d.get("q"),
        )


def _check_order(N: int) -> None:
    if N < 0:
        raise ValueError(f"order must be >= 0, got {N}")


def build_H1(p: PulseParams, N: int) -> RationalFilter:
    """All-pole IIR: 1 / (1 + sum_{n=1}^N q^{n^2}/(q^2;q^2)_n z^-n)."""
    _check_order(N)
    return RationalFilter([1.0], denominator_b(p, N), None, "iir_direct", q=p.q)


def stage_poles(p: PulseParams, N: int) -> np.ndarray:
    """z_n = -q^{2n+1}, n = 0..N-1."""
    return -(p.q ** (2 * np.arange(N) + 1.0))


def build_H2(p: PulseParams, N: int) -> RationalFilter:
    """Cascade prod_{n<N} 1/(1 + q^{2n+1} z^-1)."""
    _check_order(N)
    poles = stage_poles(p, N)
    return RationalFilter([1.0], np.poly(poles), poles, "cascade_order1", q=p.q)


def build_H3(p: PulseParams, N: int) -> RationalFilter:
    """FIR with taps a_0..a_N."""
    _check_order(N)
    return RationalFilter(coefficients_a(p, N).values, [1.0], None, "fir", q=p.q)


def _autocorrelation_center(poles: np.ndarray, q: float) -> float:
    """Center output of the unit-gain zero-phase cascade fed with q^{k^2}."""
    k_max = max(int(math.ceil(-40 * math.log(10) / math.log(q))), 16)
    k = np.arange(-k_max, k_max + 1, dtype=float)
    with np.errstate(under="ignore"):
        x = q ** (k * k)
    y = x
    for pole in poles:
        y = lfilter([1.0], [1.0, -pole], y)
        y = lfilter([1.0], [1.0, -pole], y[::-1])[::-1]
    return float(y[k_max])


def build_H4(p: PulseParams, N: int, gain: float | None = None) -> RationalFilter:
    """Zero-phase cascade H2(z) H2(1/z).

    The default gain makes the filtered samples Phi(k lam) of the Gaussian
    autocorrelation equal 1 at k = 0.
    """
    _check_order(N)
    poles = stage_poles(p, N)
    if gain is None:
        phi0 = p.beta / (2 * math.sqrt(math.pi))
        gain = 1.0 / (phi0 * _autocorrelation_center(poles, p.q))
    return RationalFilter([1.0], np.poly(poles), poles, "zero_phase_cascade", gain=gain, q=p.q)


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def _pad_width(f: RationalFilter, n: int) -> int:
    if f.realization_tag == "fir":
        return f.numerator.size - 1
    poles = f.poles if f.poles is not None else np.roots(f.denominator)
    r = float(np.max(np.abs(poles))) if np.size(poles) else 0.0
    if r == 0.0:
        return f.numerator.size
    return int(math.ceil(math.log(1e-17) / math.log(r))) + f.numerator.size


def _run(f: RationalFilter, x: np.ndarray) -> np.ndarray:
    tag = f.realization_tag
    if tag == "fir":
        y = lfilter(f.numerator, [1.0], x)
    elif tag == "iir_direct":
        y = lfilter(f.numerator, f.denominator, x)
    elif tag == "cascade_order1":
        y = x
        for pole in f.poles:
            y = lfilter([1.0], [1.0, -pole], y)
        y = lfilter(f.numerator, [1.0], y)
    else:
        y = x
        for pole in f.poles:
            y = lfilter([1.0], [1.0, -pole], y)
            y = lfilter([1.0], [1.0, -pole], y[::-1])[::-1]
        y = lfilter(f.numerator, [1.0], y)
    return f.gain * y if f.gain != 1.0 else y


def apply_filter(f: RationalFilter, signal: SampledSignal,
                 boundary: Literal["zero_pad", "mirror"] = "zero_pad") -> SampledSignal:
    """Filter ``signal`` on its own grid.

    Zero-phase cascades run each stage forward and then backward.  With
    ``mirror`` the input is extended by whole-sample reflection before
    filtering and cropped afterwards.
    """
    x = signal.values
    if (f.numerator.size == 1 and f.denominator.size == 1 and f.numerator[0] == 1.0
            and f.gain == 1.0 and (f.poles is None or f.poles.size == 0)):
        return SampledSignal(signal.start, signal.step, x.copy(), signal.domain_tag)
    if boundary == "zero_pad":
        y = _run(f, x)
    elif boundary == "mirror":
        w = _pad_width(f, x.size)
        if x.size == 1:
            xp = np.full(2 * w + 1, x[0])
        else:
            xp = np.pad(x, w, mode="reflect")
        y = _run(f, xp)[w:w + x.size]
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return SampledSignal(signal.start, signal.step, y, signal.domain_tag)


def impulse_response(f: RationalFilter, length: int) -> np.ndarray:
    """First ``length`` samples of the causal impulse response."""
    if f.realization_tag == "zero_phase_cascade":
        raise ValueError("zero-phase cascades are not causal; use apply_filter on a centered impulse")
    x = np.zeros(length)
    x[0] = 1.0
    return _run(f, x)


def phi_ortho_samples(p: PulseParams, m_start: int, m_stop: int,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> SampledSignal:
    """phi_ortho(m lam) for m_start <= m <= m_stop from the coefficient filter.

    phi_ortho(m lam) = Q0^{-1/2} sum_n a_n phi((m-n) lam) and
    phi(k lam) = beta^{1/2} pi^{-1/4} q^{2k^2}, so only |m-n| <= W contributes,
    W being the first width with 2 q^{2(W+1)^2}/(1-q^{4W+6}) < rel_tol.
    """
    if m_stop < m_start:
        raise ValueError("empty index range")
    q = p.q
    w = 0
    while True:
        r = q ** (4 * w + 6)
        if r < 1 and 2 * q ** (2.0 * (w + 1) ** 2) / (1 - r) < policy.rel_tol:
            break
        w += 1
        if w >= policy.max_terms:
            raise TruncationError("Gaussian window not certified")
    m = np.arange(m_start, m_stop + 1)
    n_hi = max(m_stop + w, 0)
    a = coefficients_a(p, n_hi).values
    vals = np.zeros(m.size)
    amp = math.sqrt(p.beta) * math.pi**-0.25
    for i, mm in enumerate(m):
        n = np.arange(max(mm - w, 0), max(mm + w + 1, 0))
        if n.size == 0:
            continue
        k = (mm - n).astype(float)
        with np.errstate(under="ignore"):
            vals[i] = amp * np.dot(a[n], q ** (2 * k * k))
    return SampledSignal(m_start * p.lam, p.lam, vals / math.sqrt(p.Q0), "time")
