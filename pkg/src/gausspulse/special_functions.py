"""q-series and theta-function evaluators with certified truncation.

Every infinite sum or product here stops only once a rigorous majorant of
the neglected tail is below the requested tolerance; otherwise a
:class:`TruncationError` is raised.  All arithmetic is double precision and
the nome is real, ``0 < q < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "Nome",
    "TruncationPolicy",
    "TruncationError",
    "DEFAULT_POLICY",
    "q_pochhammer",
    "q_pochhammer_sequence",
    "theta3",
    "theta1",
    "theta1_prime_at_zero",
    "theta1_third_at_zero",
    "theta1_over_prime",
    "theta1_derivative_ratio",
    "euler_identity_sides",
    "euler_identity_residual",
    "jacobi_triple_product_sides",
    "jacobi_triple_product_residual",
]


class TruncationError(ArithmeticError):
    """A series or product could not be certified within ``max_terms``."""


@dataclass(frozen=True)
class TruncationPolicy:
    rel_tol: float = 1e-16
    max_terms: int = 100_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class Nome:
    """Real nome ``q = exp(i*pi*tau)`` for purely imaginary ``tau``."""

    q: float

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"nome must lie in (0, 1), got {self.q}")

    @classmethod
    def from_tau(cls, tau: complex) -> "Nome":
        t = _imag_tau(tau)
        return cls(math.exp(-math.pi * t))

    @classmethod
    def from_lambda_beta(cls, lam_beta: float) -> "Nome":
        return cls(math.exp(-(lam_beta**2) / 4.0))

    @property
    def source_tau(self) -> complex:
        return 1j * (-math.log(self.q) / math.pi)

    def __float__(self) -> float:
        return self.q


def _as_q(q) -> float:
    q = float(q)
    if not (0.0 < q < 1.0):
        raise ValueError(f"nome must lie in (0, 1), got {q}")
    return q


def _imag_tau(tau) -> float:
    tau = complex(tau)
    if tau.imag <= 0 or not math.isfinite(tau.imag):
        raise ValueError(f"tau must have positive imaginary part, got {tau}")
    if abs(tau.real) > 1e-14 * tau.imag:
        raise ValueError(f"only purely imaginary tau is supported, got {tau}")
    return tau.imag


# ---------------------------------------------------------------------------
# q-Pochhammer
# ---------------------------------------------------------------------------


def q_pochhammer(a, q, n=math.inf, policy: TruncationPolicy = DEFAULT_POLICY):
    """(a;q)_n = (1-a)(1-aq)...(1-aq^{n-1}); ``n=math.inf`` gives the limit.

    The infinite product stops at the first K with
    ``|a| q^K / ((1-q)(1-|a| q^K)) < rel_tol``, which bounds
    ``|log prod_{k>=K}(1 - a q^k)|``.
    """
    q = float(q)
    if not abs(q) < 1:
        raise ValueError(f"|q| must be < 1, got {q}")
    if n == 0:
        return 1.0
    if n != math.inf:
        n = int(n)
        if n < 0:
            raise ValueError("n must be a natural number or math.inf")
        return float(np.prod(1.0 - a * q ** np.arange(n)))
    aq = abs(a)
    prod = 1.0
    k = 0
    while k < policy.max_terms:
        x = aq * abs(q) ** k
        if x < 1 and x / ((1 - abs(q)) * (1 - x)) < policy.rel_tol:
            return prod
        prod *= 1.0 - a * q**k
        if prod == 0.0:
            return 0.0
        k += 1
    raise TruncationError(f"(a;q)_inf not certified after {policy.max_terms} factors (a={a}, q={q})")


def q_pochhammer_sequence(a: float, q: float, n_max: int) -> np.ndarray:
    """Array ``[(a;q)_0, (a;q)_1, ..., (a;q)_{n_max}]``."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.ones(n_max + 1)
    if n_max:
        out[1:] = np.cumprod(1.0 - a * float(q) ** np.arange(n_max))
    return out


# ---------------------------------------------------------------------------
# Theta functions
# ---------------------------------------------------------------------------


def _scalar_out(z_in, arr):
    if np.ndim(z_in) == 0:
        return arr.item()
    return arr


def _grow(n: int, policy: TruncationPolicy, what: str) -> int:
    if n >= policy.max_terms:
        raise TruncationError(f"{what}: not certified within {policy.max_terms} terms")
    return min(2 * n, policy.max_terms)


def _theta3_nome(z: np.ndarray, q: float, policy: TruncationPolicy) -> np.ndarray:
    y = float(np.max(np.abs(z.imag))) if z.size else 0.0
    growth = math.exp(2 * math.pi * y)
    n_terms = 8
    while True:
        n = np.arange(1, n_terms + 1)
        r = q ** (2 * n_terms + 3) * growth
        if r < 1:
            tail = 2 * q ** ((n_terms + 1) ** 2) * growth ** (n_terms + 1) / (1 - r)
            w = q ** (n.astype(float) ** 2)
            if np.all(np.isreal(z)):
                s = 1 + 2 * (np.cos(2 * np.pi * np.outer(z.real, n)) @ w)
            else:
                e = np.exp(2j * np.pi * np.outer(z, n))
                s = 1 + (e + 1 / e) @ w
            # cancellation makes pointwise relative accuracy unreachable near
            # the minimum, so the tail is measured against the function scale
            if z.size == 0 or tail <= policy.rel_tol * np.max(np.abs(s)):
                return s
        n_terms = _grow(n_terms, policy, "theta3 nome series")


def _theta3_modular(z: np.ndarray, t: float, policy: TruncationPolicy) -> np.ndarray:
    kappa = math.pi / t
    y = float(np.max(np.abs(z.imag))) if z.size else 0.0
    n_terms = 4
    while True:
        r = math.exp(-kappa * (2 * n_terms + 3))
        tail = 2 * math.exp(kappa * y * y - kappa * (n_terms + 1) ** 2) / (1 - r) / math.sqrt(t)
        n = np.arange(-n_terms - 1, n_terms + 1)
        u = z[:, None] + n[None, :]
        if np.all(np.isreal(z)):
            s = np.exp(-kappa * u.real**2).sum(axis=1)
        else:
            s = np.exp(-kappa * u**2).sum(axis=1)
        s = s / math.sqrt(t)
        if z.size == 0 or tail <= policy.rel_tol * np.min(np.abs(s)):
            return s
        n_terms = _grow(n_terms, policy, "theta3 modular series")


Representation = Literal["nome_series", "modular_series", "auto"]


def theta3(z, tau, representation: Representation = "auto", policy: TruncationPolicy = DEFAULT_POLICY):
    """Jacobi theta_3(z, tau) for purely imaginary ``tau``.

    ``nome_series`` sums q^{n^2} e^{2 pi i n z}; ``modular_series`` sums the
    Poisson-dual Gaussians (-i tau)^{-1/2} e^{-(i pi/tau)(z+n)^2}.  ``auto``
    uses the nome series when q <= e^{-pi} and the modular one otherwise.
    """
    t = _imag_tau(tau)
    q = math.exp(-math.pi * t)
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    z_red = z_arr - np.floor(z_arr.real)
    if representation == "auto":
        representation = "nome_series" if t >= 1.0 else "modular_series"
    if representation == "nome_series":
        s = _theta3_nome(z_red, q, policy)
    elif representation == "modular_series":
        s = _theta3_modular(z_red, t, policy)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    if not np.all(np.isfinite(s)):
        raise FloatingPointError("non-finite theta3 value")
    if np.isrealobj(z) or np.all(np.asarray(z).imag == 0):
        s = s.real
    return _scalar_out(z, s.reshape(np.shape(z)))


def _theta1_terms(tau_arg, policy: TruncationPolicy, y: float = 0.0, power: int = 0):
    """Indices n and scaled weights for the theta_1 series.

    Returns ``(n, w, log_lead)`` with
    ``2 q'^{(n+1/2)^2} (-1)^n (2n+1)^power = exp(log_lead) * w[n]``, where
    ``log_lead = log(2 q'^{1/4})``; the scaling keeps small-q' cases finite.
    """
    t = _imag_tau(tau_arg)
    log_q = -math.pi * t
    n_terms = 4
    while True:
        m = n_terms  # first neglected index
        # relative to the leading term: |term_n| <= q'^{n^2+n} (2n+1)^power e^{(2n+1) pi y}
        log_first = log_q * (m * m + m) + power * math.log(2 * m + 1) + (2 * m + 1) * math.pi * y
        log_ratio = log_q * (2 * m + 2) + power * math.log((2 * m + 3) / (2 * m + 1)) + 2 * math.pi * y
        if log_ratio < 0:
            tail = math.exp(log_first) / (1 - math.exp(log_ratio))
            if tail <= policy.rel_tol:
                n = np.arange(n_terms)
                w = np.exp(log_q * (n * n + n)) * (-1.0) ** n * (2.0 * n + 1) ** power
                return n, w, math.log(2.0) + log_q / 4
        n_terms = _grow(n_terms, policy, "theta1 series")


def _theta1_scaled(z, tau_arg, policy: TruncationPolicy):
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    # theta_1(z + m) = (-1)^m theta_1(z); keeps the sine arguments small
    m = np.round(z_arr.real)
    u = z_arr - m
    y = float(np.max(np.abs(u.imag))) if u.size else 0.0
    n, w, log_lead = _theta1_terms(tau_arg, policy, y=y)
    s = np.sin(np.pi * np.outer(u, 2 * n + 1)) @ w
    s = s * np.where(m % 2 == 0, 1.0, -1.0)
    if np.isrealobj(z) or np.all(np.asarray(z).imag == 0):
        s = s.real
    return s.reshape(np.shape(z)), log_lead


def theta1(z, tau_arg, policy: TruncationPolicy = DEFAULT_POLICY):
    """theta_1(z, tau) = 2 sum_{n>=0} q^{(n+1/2)^2} (-1)^n sin((2n+1) pi z)."""
    s, log_lead = _theta1_scaled(z, tau_arg, policy)
    return _scalar_out(z, s * math.exp(log_lead))


def theta1_prime_at_zero(tau_arg, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """d/dz theta_1(z, tau) at z = 0."""
    _, w, log_lead = _theta1_terms(tau_arg, policy, power=1)
    return float(math.pi * w.sum() * math.exp(log_lead))


def theta1_third_at_zero(tau_arg, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Third z-derivative of theta_1 at 0 (used for Taylor guards)."""
    _, w, log_lead = _theta1_terms(tau_arg, policy, power=3)
    return float(-(math.pi**3) * w.sum() * math.exp(log_lead))


def theta1_over_prime(z, tau_arg, policy: TruncationPolicy = DEFAULT_POLICY):
    """theta_1(z, tau) / theta_1'(0, tau), finite even when q' underflows."""
    s, _ = _theta1_scaled(z, tau_arg, policy)
    _, w1, _ = _theta1_terms(tau_arg, policy, power=1)
    return _scalar_out(z, s / (math.pi * w1.sum()))


def theta1_derivative_ratio(tau_arg, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Ratio of the third to the first z-derivative of theta_1 at 0."""
    _, w1, _ = _theta1_terms(tau_arg, policy, power=1)
    _, w3, _ = _theta1_terms(tau_arg, policy, power=3)
    return float(-(math.pi**2) * w3.sum() / w1.sum())


# ---------------------------------------------------------------------------
# Euler and Jacobi identities
# ---------------------------------------------------------------------------

EulerKind = Literal["id_24", "id_25", "id_id1", "id_id2"]
ResidualMode = Literal["series", "partial"]


def _factor_count(p0: float, ratio: float, policy: TruncationPolicy, what: str) -> int:
    """Smallest M with exp(sum_{k>=M} p0 ratio^k / (1 - p0 ratio^k)) - 1 < rel_tol."""
    m = 0
    while m < policy.max_terms:
        p = p0 * ratio**m
        if p < 0.5:
            s = p / ((1 - ratio) * (1 - p))
            if math.expm1(s) < policy.rel_tol:
                return m
        m += 1
    raise TruncationError(f"{what}: product not certified within {policy.max_terms} factors")


def _expand_product(stage_params, n: int, kind: str) -> np.ndarray:
    """Power-series coefficients (degree <= n) of prod (1 + p w) or prod 1/(1 - p w)."""
    c = np.zeros(n + 1)
    c[0] = 1.0
    for p in stage_params:
        if kind == "mul":
            c[1:] = c[1:] + p * c[:-1]
        else:
            c = lfilter([1.0], [1.0, -p], c)
    return c


def _euler_setup(kind: str, q: float, N: int, policy: TruncationPolicy):
    """Series coefficients c_0..c_N (variable v) and product stage parameters.

    Returns (coeffs, stage_mul, stages, var) where the product is
    prod(1 + s v) when ``stage_mul`` and prod 1/(1 - s v) otherwise.
    """
    n = np.arange(N + 1)
    if kind == "id_24":
        coeffs = q ** (n * (n - 1) / 2) / q_pochhammer_sequence(q, q, N)
        p0, ratio, mul = 1.0, q, True
    elif kind == "id_25":
        coeffs = 1.0 / q_pochhammer_sequence(q, q, N)
        p0, ratio, mul = 1.0, q, False
    elif kind == "id_id1":
        coeffs = q ** (n.astype(float) ** 2) / q_pochhammer_sequence(q * q, q * q, N)
        p0, ratio, mul = q, q * q, True
    elif kind == "id_id2":
        coeffs = (-q) ** n / q_pochhammer_sequence(q * q, q * q, N)
        p0, ratio, mul = -q, q * q, False
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    return coeffs, p0, ratio, mul


def euler_identity_sides(kind: EulerKind, z, q, N: int, mode: ResidualMode = "series",
                         policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[complex, complex]:
    """Both sides of an Euler-type identity truncated at order ``N``.

    ``id_24``: 1 + sum q^{n(n-1)/2}/(q;q)_n z^n = prod_{n>=0} (1 + z q^n)
    ``id_25``: 1 + sum z^n/(q;q)_n = prod_{n>=0} 1/(1 - z q^n),  |z| < 1
    ``id_id1``: 1 + sum q^{n^2}/(q^2;q^2)_n z^-n = prod (1 + q^{2n+1} z^-1),  |z| >= 1
    ``id_id2``: 1 + sum (-q)^n/(q^2;q^2)_n z^-n = prod 1/(1 + q^{2n+1} z^-1),  |z| >= 1

    ``mode="series"`` truncates both sides as power series at degree N (the
    product is expanded with a certified number of factors, then cut);
    ``mode="partial"`` takes N+1 series terms against N product factors.
    """
    q = _as_q(q)
    if N < 0:
        raise ValueError("order N must be >= 0")
    z = complex(z)
    if kind == "id_25" and not abs(z) < 1:
        raise ValueError("id_25 requires |z| < 1")
    if kind in ("id_id1", "id_id2") and not abs(z) >= 1:
        raise ValueError(f"{kind} requires |z| >= 1")
    if kind in ("id_24", "id_25") and z == 0:
        return 1.0 + 0j, 1.0 + 0j
    coeffs, p0, ratio, mul = _euler_setup(kind, q, N, policy)
    v = z if kind in ("id_24", "id_25") else 1.0 / z
    powers = v ** np.arange(N + 1)
    lhs = complex(np.dot(coeffs, powers))
    if mode == "partial":
        stages = p0 * ratio ** np.arange(N)
        if mul:
            rhs = complex(np.prod(1.0 + stages * v))
        else:
            rhs = complex(1.0 / np.prod(1.0 - stages * v))
        return lhs, rhs
    if mode != "series":
        raise ValueError(f"unknown mode {mode!r}")
    m = _factor_count(abs(p0), ratio, policy, kind)
    stages = p0 * ratio ** np.arange(max(m, 1))
    expanded = _expand_product(stages, N, "mul" if mul else "div")
    return lhs, complex(np.dot(expanded, powers))


def euler_identity_residual(kind: EulerKind, z, q, N: int, mode: ResidualMode = "series",
                            policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    lhs, rhs = euler_identity_sides(kind, z, q, N, mode, policy)
    return abs(lhs - rhs)


def jacobi_triple_product_sides(z, q, N: int, mode: ResidualMode = "series",
                                policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[complex, complex]:
    """sum_{|n|<=N} q^{n^2} z^n against prod (1-q^{2n})(1+q^{2n-1}/z)(1+q^{2n-1} z).

    In ``series`` mode the product is expanded as a Laurent series over a
    certified number of factors and cut to |k| <= N; ``partial`` multiplies
    the factors n = 1..N directly.
    """
    q = _as_q(q)
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    if N < 0:
        raise ValueError("order N must be >= 0")
    n = np.arange(1, N + 1)
    w = q ** (n.astype(float) ** 2)
    lhs = complex(1.0 + np.dot(w, z**n + z ** (-n)))
    if mode == "partial":
        p = q ** (2 * n - 1.0)
        rhs = np.prod((1 - q ** (2.0 * n)) * (1 + p / z) * (1 + p * z))
        return lhs, complex(rhs)
    if mode != "series":
        raise ValueError(f"unknown mode {mode!r}")
    m = max(_factor_count(q, q * q, policy, "jacobi"), 1)
    # Laurent coefficients for powers -m..m; all positive, so no cancellation
    c = np.zeros(2 * m + 1)
    c[m] = 1.0
    for k in range(1, m + 1):
        p = q ** (2 * k - 1)
        c = (1 + p * p) * c + p * np.concatenate(([0.0], c[:-1])) + p * np.concatenate((c[1:], [0.0]))
    c *= q_pochhammer(q * q, q * q, math.inf, policy)
    kk = np.arange(-min(N, m), min(N, m) + 1)
    rhs = complex(np.dot(c[m + kk], z**kk.astype(float)))
    return lhs, rhs


def jacobi_triple_product_residual(z, q, N: int, mode: ResidualMode = "series",
                                   policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    lhs, rhs = jacobi_triple_product_sides(z, q, N, mode, policy)
    return abs(lhs - rhs)
