"""Wavelength-dependent fused-coupler transmittance and its inversion.

A practical single-mode fused coupler splits power according to

    T(lam) = F^2 * sin^2(c * w * lam^2.5 / F)

with F the maximal coupled-power amplitude (F^2 <= 1), c the coupling
coefficient and w the heat-source width.  Wavelengths are in micrometers
everywhere, which keeps the lam^2.5 phase argument of order one at telecom
wavelengths.

No published parameter set pins (F, c, w); the default model uses F = 1 with
c*w calibrated so that T(1.55 um) = 1/2 on a rising branch (phase pi/4), i.e.
the genuine 1550 nm local oscillator sees a balanced splitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoSolutionError

#: c*w product of the default model: phase(1.55 um) = pi/4.
DEFAULT_COUPLING = (math.pi / 4.0) / 1.55**2.5

#: Transmittance match tolerance for inversion results.
T_MATCH_TOL = 1e-9

#: Bisection tolerance on wavelength, micrometers.
LAMBDA_TOL = 1e-12


@dataclass(frozen=True)
class CouplerModel:
    """Parameters (F, c, w) of the sin^2 transmittance law."""

    f: float = 1.0
    c: float = DEFAULT_COUPLING
    w: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.f * self.f <= 1.0):
            raise DomainError(f"need 0 < f^2 <= 1, got f={self.f}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise DomainError(f"coupling coefficient must be > 0, got {self.c}")
        if not (math.isfinite(self.w) and self.w > 0.0):
            raise DomainError(f"heat-source width must be > 0, got {self.w}")

    def phase(self, lam):
        """Phase argument c*w*lam^2.5/F; strictly increasing in lam."""
        return self.c * self.w * lam**2.5 / self.f


@dataclass(frozen=True)
class WavelengthBand:
    """Closed wavelength search window [lambda_min, lambda_max], micrometers."""

    lambda_min: float = 1.2
    lambda_max: float = 1.9

    def __post_init__(self):
        if not (0.0 < self.lambda_min < self.lambda_max):
            raise DomainError(
                f"need 0 < lambda_min < lambda_max, got ({self.lambda_min}, {self.lambda_max})"
            )


#: Default model/band pair used by the CLI and the attack solver.
DEFAULT_COUPLER = CouplerModel()
DEFAULT_BAND = WavelengthBand()


def transmittance(model: CouplerModel, lam):
    """Power transmittance T(lam) = F^2 sin^2(c w lam^2.5 / F).

    Accepts a positive scalar or an ndarray of positive wavelengths in
    micrometers; returns the matching scalar or array in [0, f^2].
    """
    arr = np.asarray(lam, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"wavelength must be finite and > 0, got {lam}")
    t = model.f**2 * np.sin(model.phase(arr)) ** 2
    return float(t) if np.isscalar(lam) or arr.ndim == 0 else t


def _lambda_of_phase(model: CouplerModel, theta: float) -> float:
    # inverse of phase(): lam = (theta * F / (c w))^(1/2.5)
    return (theta * model.f / (model.c * model.w)) ** 0.4


def _tangent_roots(model: CouplerModel, band: WavelengthBand, half_period_offset: float):
    """Wavelengths where the phase hits offset + k*pi inside the band.

    offset pi/2 gives the sine peaks (T = f^2), offset 0 the zeros (T = 0).
    These are tangency points of T(lam) - target, invisible to sign-change
    bracketing, so they are located analytically through the phase.
    """
    theta_lo = model.phase(band.lambda_min)
    theta_hi = model.phase(band.lambda_max)
    k_lo = math.ceil((theta_lo - half_period_offset) / math.pi - 1e-12)
    k_lo = max(k_lo, 0 if half_period_offset > 0.0 else 1)  # lam > 0 excludes theta = 0
    roots = []
    k = k_lo
    while True:
        theta = half_period_offset + k * math.pi
        if theta > theta_hi * (1.0 + 1e-15):
            break
        if theta >= theta_lo * (1.0 - 1e-15):
            roots.append(_lambda_of_phase(model, theta))
        k += 1
    return roots


def invert_transmittance(
    model: CouplerModel,
    target_t: float,
    band: WavelengthBand,
    grid_points: int = 10_000,
) -> list:
    """All wavelengths in the band with transmittance equal to ``target_t``.

    Transversal crossings are found by bracketing sign changes of
    T(lam) - target_t on a ``grid_points`` grid and bisecting each bracket
    to ``LAMBDA_TOL``; tangency targets (0 and f^2) are resolved through the
    phase argument instead.  The result is sorted ascending, deduplicated,
    and filtered to |T(lam) - target_t| < ``T_MATCH_TOL``.  An empty list
    means the band contains no solution; a target outside [0, f^2] raises
    :class:`NoSolutionError`.
    """
    fsq = model.f**2
    if not math.isfinite(target_t) or target_t < 0.0 or target_t > fsq:
        raise NoSolutionError(
            f"target transmittance {target_t} outside the attainable range [0, {fsq}]"
        )
    if grid_points < 2:
        raise DomainError(f"grid_points must be >= 2, got {grid_points}")

    if target_t == 0.0:
        roots = _tangent_roots(model, band, 0.0)
    elif target_t == fsq:
        roots = _tangent_roots(model, band, math.pi / 2.0)
    else:
        grid = np.linspace(band.lambda_min, band.lambda_max, grid_points)
        h = transmittance(model, grid) - target_t
        roots = [float(grid[i]) for i in np.nonzero(h == 0.0)[0]]
        for i in np.nonzero(h[:-1] * h[1:] < 0.0)[0]:
            lo, hi = float(grid[i]), float(grid[i + 1])
            flo = float(h[i])
            while hi - lo > LAMBDA_TOL:
                mid = 0.5 * (lo + hi)
                fmid = transmittance(model, mid) - target_t
                if fmid == 0.0:
                    lo = hi = mid
                elif (fmid < 0.0) == (flo < 0.0):
                    lo, flo = mid, fmid
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))

    roots.sort()
    unique = []
    for lam in roots:
        if unique and lam - unique[-1] < 1e-9:
            continue
        if abs(transmittance(model, lam) - target_t) < T_MATCH_TOL:
            unique.append(lam)
    return unique
