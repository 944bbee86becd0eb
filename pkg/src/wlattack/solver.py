"""Forged-beam parameters reproducing Eve's heterodyne outcome at Bob's station.

Eve sends two non-interfering beams, a fake signal (transmittance T1 seen by
the wavelength-dependent splitters, intensity A = |alpha'_S|^2) and a fake
local oscillator (T2, L = |alpha'_LO|^2).  Bob reads sqrt(eta/2) x_E and
sqrt(eta/2) p_E exactly when the beam parameters satisfy

    (1-T1)(1-2T1) A - (1-T2)(1-2T2) L = sqrt(eta) x_E |alpha_LO|  =: c_x
        T1(1-2T1) A -     T2(1-2T2) L = sqrt(eta) p_E |alpha_LO|  =: c_p

Moving the L terms right gives targets R_x = c_x + (1-T2)(1-2T2) L and
R_p = c_p + T2(1-2T2) L, and the pair collapses to

    (1-2T1) A = R_x + R_p,   (1-2T1)^2 A = R_x - R_p,

so for a given T2 the solution T1 = R_p/(R_x+R_p), A = (R_x+R_p)^2/(R_x-R_p)
is unique, and it is admissible (T1 in [0, 1], A >= 0) exactly when R_x and
R_p share a sign and R_x > R_p.  Since R_x - R_p = c_x - c_p + (1-2T2)^2 L,
outcomes with x_E > p_E admit weak-signal solutions with T2 within O(c/L) of
1/2, while outcomes with x_E < p_E provably force A of order L however T2 is
chosen (the sign structure of the splitter coefficients is asymmetric in x
and p).  The search below therefore prefers T2 nearest 1/2 among candidates
meeting the weak-signal bound A <= weak_signal_ratio * L, and otherwise falls
back to the admissible candidate of smallest A, which is still an exact
solution of the attacking equations.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupler import CouplerModel, WavelengthBand, invert_transmittance
from .errors import BranchError, DomainError, InfeasibleError, NoSolutionError, UnrealizableError

#: Residual tolerance, relative to the scale sqrt(eta)|alpha_LO| max(|x_E|,|p_E|,1).
RESIDUAL_TOL = 1e-9

#: Default weak-signal guard: accept |alpha'_S|^2 up to this fraction of |alpha'_LO|^2.
WEAK_SIGNAL_RATIO = 0.01

#: Telecom anchor used when choosing among wavelength realizations, micrometers.
TELECOM_WAVELENGTH = 1.55

_T2_GRID_LO = 0.01
_T2_GRID_HI = 0.99
_T2_GRID_POINTS = 2001
_ZERO_OUTCOME = 1e-12
_T1_SLACK = 1e-9


@dataclass(frozen=True)
class AttackSolution:
    """Forged-beam operating point; wavelengths are filled by coupler inversion."""

    t1: float
    t2: float
    signal_intensity: float
    lo_intensity: float
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.t1 <= 1.0 and 0.0 <= self.t2 <= 1.0):
            raise DomainError(f"transmittances must lie in [0, 1], got ({self.t1}, {self.t2})")
        if not (math.isfinite(self.signal_intensity) and self.signal_intensity >= 0.0):
            raise DomainError(f"signal_intensity must be >= 0, got {self.signal_intensity}")
        if not (math.isfinite(self.lo_intensity) and self.lo_intensity > 0.0):
            raise DomainError(f"lo_intensity must be > 0, got {self.lo_intensity}")
        for lam in (self.lambda1, self.lambda2):
            if lam is not None and not lam > 0.0:
                raise DomainError(f"wavelengths must be > 0, got {lam}")


def _validate_channel(eta: float, lo_amplitude: float):
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if not (math.isfinite(lo_amplitude) and lo_amplitude > 0.0):
        raise DomainError(f"lo_amplitude must be finite and > 0, got {lo_amplitude}")


def residual_scale(x_e: float, p_e: float, eta: float, lo_amplitude: float) -> float:
    """Scale against which attack-equation residuals are judged (floor 1 photon)."""
    return max(math.sqrt(eta) * lo_amplitude * max(abs(x_e), abs(p_e), 1.0), 1.0)


def attack_residuals(sol: AttackSolution, x_e: float, p_e: float, eta: float, lo_amplitude: float):
    """(LHS - RHS) of both attacking equations for the given solution."""
    _validate_channel(eta, lo_amplitude)
    root_eta = math.sqrt(eta)
    d1 = 1.0 - 2.0 * sol.t1
    d2 = 1.0 - 2.0 * sol.t2
    r_x = (
        (1.0 - sol.t1) * d1 * sol.signal_intensity
        - (1.0 - sol.t2) * d2 * sol.lo_intensity
        - root_eta * x_e * lo_amplitude
    )
    r_p = (
        sol.t1 * d1 * sol.signal_intensity
        - sol.t2 * d2 * sol.lo_intensity
        - root_eta * p_e * lo_amplitude
    )
    return r_x, r_p


def solve_same_sign(
    x_e: float,
    p_e: float,
    eta: float,
    lo_amplitude: float,
    forged_lo_intensity: Optional[float] = None,
) -> AttackSolution:
    """Closed-form solution at T2 = 1/2 (forged LO identical to the genuine one).

    With the T2 terms annihilated, the ratio of the two equations gives
    T1 = p_E / (x_E + p_E) and the p-equation fixes the signal intensity.
    Requires strictly same-sign outcomes; additionally the intensity
    A = sqrt(eta) p_E |alpha_LO| / (T1 (1-2T1)) must come out nonnegative,
    which holds iff x_E > p_E (for both sign choices).  Everything else
    raises :class:`BranchError` pointing at :func:`solve_general`.
    """
    _validate_channel(eta, lo_amplitude)
    if forged_lo_intensity is None:
        forged_lo_intensity = lo_amplitude * lo_amplitude
    if not forged_lo_intensity > 0.0:
        raise DomainError(f"forged_lo_intensity must be > 0, got {forged_lo_intensity}")

    if not x_e * p_e > 0.0:
        raise BranchError(
            f"same-sign closed form needs x_E * p_E > 0, got ({x_e}, {p_e}); use solve_general"
        )
    t1 = p_e / (x_e + p_e)
    denom = t1 * (1.0 - 2.0 * t1)
    if denom == 0.0:
        raise BranchError(
            "x_E = p_E gives T1 = 1/2, which annihilates both left-hand sides; "
            "this measure-zero singular case is handled by solve_general with T2 != 1/2"
        )
    a = math.sqrt(eta) * p_e * lo_amplitude / denom
    if a < 0.0:
        raise BranchError(
            "the T2 = 1/2 reduction admits no nonnegative forged-signal intensity "
            f"for x_E < p_E (got ({x_e}, {p_e})); use solve_general"
        )
    return AttackSolution(t1=t1, t2=0.5, signal_intensity=a, lo_intensity=forged_lo_intensity)


_GRID_T2 = np.linspace(_T2_GRID_LO, _T2_GRID_HI, _T2_GRID_POINTS)
_GRID_F = (1.0 - _GRID_T2) * (1.0 - 2.0 * _GRID_T2)
_GRID_G = _GRID_T2 * (1.0 - 2.0 * _GRID_T2)


def _candidate_t2(c_x: float, c_p: float, forged_lo: float):
    """Analytic T2 candidates near 1/2, as offsets d = 1 - 2 T2.

    d = 0 is the plain reduction.  The two quadratic roots put the forged
    signal on a boundary: T2(1-2T2) L = -c_p routes it entirely to the x
    detector (T1 -> 0), (1-T2)(1-2T2) L = -c_x entirely to the p detector
    (T1 -> 1).  Both keep A near |c_x - c_p|, the minimal weak-beam scale.
    """
    out = [0.0]
    disc_p = 1.0 + 8.0 * c_p / forged_lo
    if disc_p >= 0.0:
        out.append(-4.0 * c_p / (forged_lo * (1.0 + math.sqrt(disc_p))))
    disc_x = 1.0 - 8.0 * c_x / forged_lo
    if disc_x >= 0.0:
        out.append(-4.0 * c_x / (forged_lo * (1.0 + math.sqrt(disc_x))))
    # critical point of A(d), the least-bright admissible region when x_E < p_E
    s = c_x + c_p
    if s != 0.0 and abs((c_x - c_p) / s) <= 1.0 - 2.0 * _T2_GRID_LO:
        out.append((c_x - c_p) / s)
    return [(1.0 - d) / 2.0 for d in out]


def _try_t2_scalar(t2: float, c_x: float, c_p: float, forged_lo: float):
    """(t1, a) at one T2, or None when inadmissible; plain-float arithmetic."""
    d = 1.0 - 2.0 * t2
    r_x = c_x + (1.0 - t2) * d * forged_lo
    r_p = c_p + t2 * d * forged_lo
    diff = r_x - r_p
    if diff <= 0.0:
        return None
    s = r_x + r_p
    if s == 0.0:
        return None
    t1 = r_p / s
    if t1 < -_T1_SLACK or t1 > 1.0 + _T1_SLACK:
        return None
    return min(max(t1, 0.0), 1.0), s * s / diff


def _evaluate_grid(t2: np.ndarray, f2: np.ndarray, g2: np.ndarray, c_x, c_p, forged_lo):
    """Vectorized admissibility map over candidate T2 values."""
    r_x = c_x + f2 * forged_lo
    r_p = c_p + g2 * forged_lo
    s = r_x + r_p
    diff = r_x - r_p
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(s != 0.0, r_p / np.where(s != 0.0, s, 1.0), np.inf)
        a = np.where(diff > 0.0, s * s / np.where(diff > 0.0, diff, 1.0), np.inf)
    ok = (diff > 0.0) & (t1 >= -_T1_SLACK) & (t1 <= 1.0 + _T1_SLACK) & np.isfinite(a)
    return ok, np.clip(t1, 0.0, 1.0), a


def solve_general(
    x_e: float,
    p_e: float,
    eta: float,
    lo_amplitude: float,
    forged_lo_intensity: Optional[float] = None,
    t2_search=None,
    weak_signal_ratio: float = WEAK_SIGNAL_RATIO,
) -> AttackSolution:
    """Solve the attacking equations for any heterodyne outcome.

    The analytic candidates (the plain T2 = 1/2 reduction, the two boundary
    offsets, the brightness-critical point) are tried in that order; the
    first meeting the weak-signal bound A <= weak_signal_ratio * L wins.
    Otherwise all of them plus a uniform grid of 2001 points on
    [0.01, 0.99] are scanned: among guarded candidates the one nearest
    T2 = 1/2, and if none is guarded (the case x_E < p_E at bright forged
    LO) the admissible candidate of smallest A, which is still an exact
    solution.
    ``t2_search`` replaces every candidate with an explicit iterable.  The
    returned solution always satisfies both equations to ``RESIDUAL_TOL``
    relative; an empty admissible set raises :class:`InfeasibleError`
    carrying the scanned interval.
    """
    _validate_channel(eta, lo_amplitude)
    forged_lo = lo_amplitude * lo_amplitude if forged_lo_intensity is None else forged_lo_intensity
    if not forged_lo > 0.0:
        raise DomainError(f"forged_lo_intensity must be > 0, got {forged_lo}")

    if max(abs(x_e), abs(p_e)) < _ZERO_OUTCOME:
        # zero outcome: balanced fake LO and no fake signal reproduce it exactly
        return AttackSolution(t1=0.5, t2=0.5, signal_intensity=0.0, lo_intensity=forged_lo)

    root_eta = math.sqrt(eta)
    c_x = root_eta * x_e * lo_amplitude
    c_p = root_eta * p_e * lo_amplitude
    if c_x == 0.0 and c_p == 0.0:
        # eta = 0 erases the targets; nothing needs resending
        return AttackSolution(t1=0.5, t2=0.5, signal_intensity=0.0, lo_intensity=forged_lo)
    guard = weak_signal_ratio * forged_lo

    if t2_search is not None:
        candidates = np.asarray(sorted(set(float(t) for t in t2_search)))
        if candidates.size == 0 or np.any((candidates <= 0.0) | (candidates >= 1.0)):
            raise DomainError(f"t2_search values must lie strictly inside (0, 1): {t2_search}")
        d = 1.0 - 2.0 * candidates
        f2, g2 = (1.0 - candidates) * d, candidates * d
    else:
        near_half = [t for t in _candidate_t2(c_x, c_p, forged_lo) if 0.0 < t < 1.0]
        for t2 in near_half:
            hit = _try_t2_scalar(t2, c_x, c_p, forged_lo)
            if hit is not None and hit[1] <= guard:
                sol = AttackSolution(hit[0], t2, hit[1], forged_lo)
                return _checked(sol, x_e, p_e, eta, lo_amplitude)
        extra = np.asarray(near_half)
        candidates = np.concatenate([extra, _GRID_T2])
        d = 1.0 - 2.0 * extra
        f2 = np.concatenate([(1.0 - extra) * d, _GRID_F])
        g2 = np.concatenate([extra * d, _GRID_G])

    ok, t1, a = _evaluate_grid(candidates, f2, g2, c_x, c_p, forged_lo)
    if not np.any(ok):
        raise InfeasibleError(
            f"no admissible T2 for outcome ({x_e}, {p_e}) with forged LO {forged_lo}",
            scanned_interval=(float(candidates.min()), float(candidates.max())),
        )
    guarded = ok & (a <= guard)
    if np.any(guarded):
        # nearest to 1/2; ties resolve to the earliest candidate, deterministically
        idx = int(np.argmin(np.where(guarded, np.abs(candidates - 0.5), np.inf)))
    else:
        idx = int(np.argmin(np.where(ok, a, np.inf)))
    sol = AttackSolution(float(t1[idx]), float(candidates[idx]), float(a[idx]), forged_lo)
    return _checked(sol, x_e, p_e, eta, lo_amplitude)


def _checked(sol, x_e, p_e, eta, lo_amplitude) -> AttackSolution:
    r_x, r_p = attack_residuals(sol, x_e, p_e, eta, lo_amplitude)
    scale = residual_scale(x_e, p_e, eta, lo_amplitude)
    if max(abs(r_x), abs(r_p)) > RESIDUAL_TOL * scale:
        raise InfeasibleError(
            f"candidate solution violates the attacking equations: residuals "
            f"({r_x:.3e}, {r_p:.3e}) at scale {scale:.3e} for outcome ({x_e}, {p_e})"
        )
    return sol


def realize_wavelengths(
    sol: AttackSolution,
    model: CouplerModel,
    band: WavelengthBand,
    grid_points: int = 10_000,
) -> AttackSolution:
    """Fill lambda1, lambda2 with in-band wavelengths realizing T1, T2.

    Both beams should pass any spectral filtering around the telecom line,
    so among multiple in-band solutions the wavelength nearest 1.55 um is
    chosen for each.  Raises :class:`UnrealizableError` naming every
    transmittance the band cannot realize.
    """
    choices = {}
    unrealized = []
    for name, t in (("t1", sol.t1), ("t2", sol.t2)):
        try:
            lams = invert_transmittance(model, t, band, grid_points=grid_points)
        except NoSolutionError:
            lams = []
        if not lams:
            unrealized.append(name)
        else:
            choices[name] = min(lams, key=lambda lam: (abs(lam - TELECOM_WAVELENGTH), lam))
    if unrealized:
        raise UnrealizableError(
            f"no wavelength in [{band.lambda_min}, {band.lambda_max}] um realizes "
            + ", ".join(f"{n}={getattr(sol, n)}" for n in unrealized),
            unrealized=unrealized,
        )
    return dataclasses.replace(sol, lambda1=choices["t1"], lambda2=choices["t2"])
