"""Shot-noise-normalized units, shared value types, and seeded sampling.

Conventions used throughout the package:

* Quadratures are dimensionless, expressed in sqrt(N0) units; every variance
  is a multiple of the shot-noise unit N0.  N0 is fixed to 1 internally: a
  :class:`ShotNoise` carrying a different value only rescales reported
  variances, it never changes the dimensionless physics.
* Intensities (|alpha|^2) are photon numbers.  A bright telecom local
  oscillator is of order 1e8 photons per pulse.
* All random sampling goes through an explicit :class:`RandomSource`.  There
  is no module-level random state: identical seed and call sequence give a
  bit-identical sample sequence.  Gaussian draws use numpy's PCG64 bit
  generator with ``Generator.normal`` (ziggurat algorithm), whose stream is
  stable for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class ShotNoise:
    """The variance unit N0 appearing in the Heisenberg bound dx*dp >= N0."""

    n0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.n0) and self.n0 > 0):
            raise DomainError(f"shot-noise unit must be finite and positive, got {self.n0}")


#: Default unit used when no explicit ShotNoise is supplied.
UNIT_SHOT_NOISE = ShotNoise()


@dataclass(frozen=True)
class QuadraturePair:
    """An (x, p) quadrature pair in sqrt(N0) units."""

    x: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise DomainError(f"quadratures must be finite, got ({self.x}, {self.p})")


@dataclass(frozen=True)
class ProtocolParams:
    """Session-level physics of the heterodyne link.

    v_a            Alice's Gaussian modulation variance, in N0 units.
    eta            power transmittance of the Alice->Bob fiber, in [0, 1].
    lo_intensity   photon number |alpha_LO|^2 of the genuine local oscillator.
    epsilon        tolerated excess noise in N0 units (detection threshold).
    """

    v_a: float = 10.0
    eta: float = 0.6
    lo_intensity: float = 1e8
    epsilon: float = 0.01
    n0: ShotNoise = field(default_factory=ShotNoise)

    def __post_init__(self):
        if not (0.0 <= self.eta <= 1.0):
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if not (math.isfinite(self.v_a) and self.v_a >= 0.0):
            raise DomainError(f"v_a must be finite and >= 0, got {self.v_a}")
        if not (math.isfinite(self.lo_intensity) and self.lo_intensity > 0.0):
            raise DomainError(f"lo_intensity must be finite and > 0, got {self.lo_intensity}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")

    @property
    def lo_amplitude(self) -> float:
        """|alpha_LO|, the genuine LO field amplitude."""
        return math.sqrt(self.lo_intensity)


class RandomSource:
    """Deterministic Gaussian sampler owned by exactly one consumer.

    Wraps ``numpy.random.Generator(PCG64(seed))``.  Parallel work must not
    share one source; derive independent streams with :meth:`spawn`.
    """

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)):
            raise DomainError(f"seed must be an integer, got {type(seed).__name__}")
        if not (0 <= int(seed) <= _MAX_SEED):
            raise DomainError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self):
        return f"RandomSource(seed={self.seed})"

    def gaussian(self, mean: float, variance: float, size=None):
        """Draw Normal(mean, variance) samples; scalar when ``size`` is None."""
        if not (math.isfinite(variance) and variance >= 0.0):
            raise DomainError(f"variance must be finite and >= 0, got {variance}")
        out = self._generator.normal(mean, math.sqrt(variance), size)
        return float(out) if size is None else out

    def standard_normal(self, size=None):
        out = self._generator.standard_normal(size)
        return float(out) if size is None else out

    def spawn(self, task_index: int) -> "RandomSource":
        """Independent stream for task ``task_index`` of a parallel sweep.

        The child seed is derived from ``SeedSequence((seed, task_index))``,
        so the partition is reproducible and does not overlap the parent.
        """
        child = np.random.SeedSequence((self.seed, int(task_index)))
        return RandomSource(int(child.generate_state(1, np.uint64)[0]))


def sample_gaussian_pair(
    rng: RandomSource, variance: float, n0: ShotNoise = UNIT_SHOT_NOISE
) -> QuadraturePair:
    """Independent x, p ~ Normal(0, variance * n0); draw order is x then p."""
    if not (math.isfinite(variance) and variance >= 0.0):
        raise DomainError(f"variance must be finite and >= 0, got {variance}")
    scaled = variance * n0.n0
    return QuadraturePair(rng.gaussian(0.0, scaled), rng.gaussian(0.0, scaled))
