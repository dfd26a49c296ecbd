"""Gaussian-based ISI-free pulses, their orthonormal root and the matching digital filters."""

from .params import PulseParams, SampledSignal
from .special_functions import Nome, TruncationError, TruncationPolicy

__version__ = "0.1.0"

__all__ = ["PulseParams", "SampledSignal", "Nome", "TruncationError", "TruncationPolicy", "__version__"]
