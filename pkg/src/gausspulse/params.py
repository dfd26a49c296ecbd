"""Shared parameter and signal containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .special_functions import DEFAULT_POLICY, Nome, q_pochhammer

SUPPORTED_LAMBDA_BETA = (0.2, 5.0)


@dataclass(frozen=True)
class PulseParams:
    """Bandwidth ``beta`` and sampling step ``lam`` plus derived constants.

    ``tau = i (lam*beta)^2 / (4 pi)``, ``q = exp(-(lam*beta)^2 / 4)``,
    ``q_prime = exp(-4 pi^2 / (lam*beta)^2)`` and ``Q0 = (q^2; q^2)_inf``.
    """

    beta: float
    lam: float
    Lambda: float = field(init=False)
    tau: complex = field(init=False)
    q: float = field(init=False)
    q_prime: float = field(init=False)
    Q0: float = field(init=False)

    def __post_init__(self):
        for name in ("beta", "lam"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        lb = self.lam * self.beta
        set_ = object.__setattr__
        set_(self, "Lambda", 2 * math.pi / self.lam)
        set_(self, "tau", 1j * lb**2 / (4 * math.pi))
        set_(self, "q", math.exp(-(lb**2) / 4))
        set_(self, "q_prime", math.exp(-4 * math.pi**2 / lb**2))
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"lam*beta={lb} gives a nome outside (0, 1)")
        set_(self, "Q0", q_pochhammer(self.q**2, self.q**2, math.inf, DEFAULT_POLICY))

    @property
    def lam_beta(self) -> float:
        return self.lam * self.beta

    @property
    def nome(self) -> Nome:
        return Nome(self.q)

    @property
    def i_tau(self) -> float:
        """i*tau, a negative real number."""
        return -self.tau.imag

    @property
    def modular_tau(self) -> complex:
        """-1/tau, the argument of theta_1 in the time-domain kernel."""
        return -1 / self.tau

    def in_supported_region(self) -> bool:
        lo, hi = SUPPORTED_LAMBDA_BETA
        return lo <= self.lam_beta <= hi

    def with_tau_scaled(self, factor: float) -> "PulseParams":
        """Parameters whose tau is ``factor`` times this one (beta -> sqrt(factor) beta)."""
        return PulseParams(self.beta * math.sqrt(factor), self.lam)


@dataclass
class SampledSignal:
    """Uniform grid ``start + k*step`` with sample values."""

    start: float
    step: float
    values: np.ndarray
    domain_tag: Literal["time", "frequency"] = "time"

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("values must be a non-empty 1-D sequence")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")
        if self.domain_tag not in ("time", "frequency"):
            raise ValueError(f"unknown domain tag {self.domain_tag!r}")

    @classmethod
    def from_function(cls, fn, start: float, step: float, count: int, domain_tag="time"):
        grid = start + step * np.arange(count)
        return cls(start, step, np.asarray(fn(grid)), domain_tag)

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.values.size)

    def __len__(self) -> int:
        return self.values.size
