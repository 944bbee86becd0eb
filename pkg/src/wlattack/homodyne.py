"""Balanced and unbalanced homodyne detector models with a classical LO.

The local oscillator is treated as a classical field alpha_LO = |alpha_LO|
e^{i theta}; only the other input port's vacuum mode is quantized.  Two
arrangements appear at the receiver of a heterodyne CVQKD link:

* one-port: a single asymmetric beam splitter (ABS) whose two output
  intensities carry anticorrelated vacuum fluctuations (the same vacuum
  sample enters both ports with opposite sign);
* two-port: an ABS followed by a subtractor.  For a vacuum signal its output
  fluctuates with the shot-noise variance 4T(1-T)N0 and carries the
  deterministic imbalance -(1-2T)|alpha_LO|^2.

Each physical splitter event draws an independent vacuum mode: distinct
splitters have distinct open ports.  Detection efficiency, electronic noise
and saturation are deliberately not modeled.

Raw outputs are photocurrent-scale quantities.  Dividing a two-port output by
2*sqrt(lo_intensity) expresses it in quadrature (sqrt(N0)) units, in which the
balanced vacuum output has variance exactly N0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import QuadraturePair, RandomSource, ShotNoise, UNIT_SHOT_NOISE

#: signal/LO intensity ratio above which the linearized model is questionable
LINEAR_REGIME_RATIO = 1e-3


class LinearizationWarning(UserWarning):
    """The dropped |alpha_S|^2 terms are not obviously negligible."""


@dataclass(frozen=True)
class DetectorSpec:
    """Beam-splitter transmittance, LO phase, and photocurrent constant q.

    q is fixed to 1: it cancels in every normalized measurement, so a value
    other than 1 would only invite silent double scaling.
    """

    t: float
    theta: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0):
            raise DomainError(f"transmittance must lie in [0, 1], got {self.t}")
        if not math.isfinite(self.theta):
            raise DomainError(f"theta must be finite, got {self.theta}")
        if self.q != 1.0:
            raise DomainError(f"q is fixed to 1 in this model, got {self.q}")


@dataclass(frozen=True)
class BeamState:
    """A classical beam: photon-number intensity plus mean quadratures.

    The vacuum state has zero intensity and zero means; its fluctuations are
    supplied by the detector model, not stored here.
    """

    intensity: float
    mean_quadratures: QuadraturePair = QuadraturePair(0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.intensity) and self.intensity >= 0.0):
            raise DomainError(f"intensity must be finite and >= 0, got {self.intensity}")

    @classmethod
    def vacuum(cls) -> "BeamState":
        return cls(0.0)


@dataclass(frozen=True)
class PortIntensities:
    """Output intensities of a one-port unbalanced detector."""

    i1: float
    i2: float


def balanced_output(lo_intensity: float, in_quadratures: QuadraturePair, theta: float) -> float:
    """Two-port balanced homodyne output 2|alpha_LO| (x_in cos t + p_in sin t)."""
    if not (math.isfinite(lo_intensity) and lo_intensity > 0.0):
        raise DomainError(f"lo_intensity must be finite and > 0, got {lo_intensity}")
    return (
        2.0
        * math.sqrt(lo_intensity)
        * (in_quadratures.x * math.cos(theta) + in_quadratures.p * math.sin(theta))
    )


def two_port_shot_noise_variance(t: float, n0: ShotNoise = UNIT_SHOT_NOISE) -> float:
    """Shot-noise variance 4T(1-T)N0 of the normalized two-port output."""
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {t}")
    return 4.0 * t * (1.0 - t) * n0.n0


def two_port_ubhd_output(
    spec: DetectorSpec,
    signal: BeamState,
    lo_intensity: float,
    rng: RandomSource,
    include_signal_intensity: bool = False,
) -> float:
    """One sample of the two-port unbalanced output.

    Returns 2 sqrt(T(1-T)) x_theta - (1-2T) lo_intensity, where x_theta is a
    balanced output built from the signal's classical means plus one fresh
    vacuum sample per quadrature (drawn x then p).  The signal's own
    intensity term (1-2T)|alpha_S|^2 is dropped from the linearized model by
    default; ``include_signal_intensity=True`` restores it exactly.
    """
    if lo_intensity > 0.0 and signal.intensity / lo_intensity >= LINEAR_REGIME_RATIO:
        warnings.warn(
            f"signal/LO intensity ratio {signal.intensity / lo_intensity:.3g} >= "
            f"{LINEAR_REGIME_RATIO:g}; the linearized UBHD output drops "
            "|alpha_S|^2 terms that are no longer small",
            LinearizationWarning,
            stacklevel=2,
        )
    x_in = signal.mean_quadratures.x + rng.gaussian(0.0, 1.0)
    p_in = signal.mean_quadratures.p + rng.gaussian(0.0, 1.0)
    x_theta = balanced_output(lo_intensity, QuadraturePair(x_in, p_in), spec.theta)
    out = 2.0 * math.sqrt(spec.t * (1.0 - spec.t)) * x_theta - (1.0 - 2.0 * spec.t) * lo_intensity
    if include_signal_intensity:
        out += (1.0 - 2.0 * spec.t) * signal.intensity
    return out


def two_port_ubhd_vacuum_samples(
    t: float, lo_intensity: float, n: int, rng: RandomSource, theta: float = 0.0
) -> np.ndarray:
    """Vectorized vacuum-input samples of the two-port unbalanced output.

    Identical statistics to calling :func:`two_port_ubhd_output` n times with
    a vacuum signal; meant for Monte Carlo variance checks at n ~ 1e6.
    """
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {t}")
    if not (math.isfinite(lo_intensity) and lo_intensity > 0.0):
        raise DomainError(f"lo_intensity must be finite and > 0, got {lo_intensity}")
    if n < 1:
        raise DomainError(f"need n >= 1 samples, got {n}")
    x_n = rng.gaussian(0.0, 1.0, n)
    p_n = rng.gaussian(0.0, 1.0, n)
    x_theta = 2.0 * math.sqrt(lo_intensity) * (x_n * math.cos(theta) + p_n * math.sin(theta))
    return 2.0 * math.sqrt(t * (1.0 - t)) * x_theta - (1.0 - 2.0 * t) * lo_intensity


def one_port_ubhd_intensities(t: float, lo_intensity: float, rng: RandomSource) -> PortIntensities:
    """Port intensities of a one-port unbalanced detector for a bright LO.

    One vacuum quadrature X_N ~ Normal(0, N0) is drawn; the same sample
    enters the two ports with opposite sign, so I1 + I2 equals the input
    intensity exactly for every sample.
    """
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {t}")
    if not (math.isfinite(lo_intensity) and lo_intensity > 0.0):
        raise DomainError(f"lo_intensity must be finite and > 0, got {lo_intensity}")
    x_n = rng.gaussian(0.0, 1.0)
    fluctuation = 2.0 * math.sqrt(t * (1.0 - t) * lo_intensity) * x_n
    return PortIntensities(t * lo_intensity + fluctuation, (1.0 - t) * lo_intensity - fluctuation)


def one_port_ubhd_samples(t: float, lo_intensity: float, n: int, rng: RandomSource):
    """Vectorized one-port samples; returns the (I1, I2) arrays."""
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {t}")
    if n < 1:
        raise DomainError(f"need n >= 1 samples, got {n}")
    x_n = rng.gaussian(0.0, 1.0, n)
    fluctuation = 2.0 * math.sqrt(t * (1.0 - t) * lo_intensity) * x_n
    return t * lo_intensity + fluctuation, (1.0 - t) * lo_intensity - fluctuation
