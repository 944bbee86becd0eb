"""Conditional-variance analysis and covariance-based parameter estimation.

Central quantity: the conditional variance of Bob's measurement given Eve's,

    V_B|E(T2) = 2 T2 (1-T2) (1-2T2)^2 N0   (one-port ABS fluctuation term)
              + 8 T2 (1-T2)^2 N0           (two-port shot-noise term)

valid when the forged LO has the genuine intensity and the forged signal is
negligible.  V_B|E vanishes at T2 = 0 and 1, equals N0 at T2 = 0.5 and near
0.152, and peaks at about 1.2432 N0 near T2 = 0.301.  Bob's variance
conditioned on Alice adds the channel term: V_B|A = eta N0 + V_B|E.

The attack is invisible to parameter estimation when V_B|E = (1-eta) N0,
which makes the measured V_B|A match the honest heterodyne budget N0;
:func:`hiding_t2` returns every T2 achieving that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InfeasibleError, InsufficientDataError
from .units import ShotNoise, UNIT_SHOT_NOISE

#: Default excess-noise detection threshold, in N0 units.
DETECTION_THRESHOLD = 0.01


@dataclass(frozen=True)
class VarianceReport:
    """V_B|E split into its two noise terms; v_ba is filled when eta is known."""

    v_be: float
    first_term: float
    second_term: float
    v_ba: Optional[float] = None


@dataclass(frozen=True)
class EstimationReport:
    """Covariance estimates over a session dataset.

    t_hat        slope of Bob on Alice; sqrt(eta/2) for the simulated chain.
    excess_hat   empirical V_B|A per round, minus the honest budget N0,
                 in N0 units (0 means the channel looks honest).
    """

    t_hat: float
    excess_hat: float
    n_rounds: int
    t_se: float
    excess_se: float


def _kernel(t: float, n0: float) -> tuple:
    # the two closed-form noise terms for a unit-intensity beam at transmittance t
    one_minus = 1.0 - t
    first = 2.0 * t * one_minus * (1.0 - 2.0 * t) ** 2 * n0
    second = 8.0 * t * one_minus**2 * n0
    return first, second


def v_be_closed_form(t2: float, n0: ShotNoise = UNIT_SHOT_NOISE) -> VarianceReport:
    """Closed-form V_B|E(T2) with its one-port and two-port terms."""
    if not (0.0 <= t2 <= 1.0):
        raise DomainError(f"t2 must lie in [0, 1], got {t2}")
    first, second = _kernel(t2, n0.n0)
    return VarianceReport(v_be=first + second, first_term=first, second_term=second)


def v_be_general(
    t2: float,
    signal_intensity: float,
    lo_intensity: float,
    genuine_lo_intensity: float,
    t1: float,
    n0: ShotNoise = UNIT_SHOT_NOISE,
) -> float:
    """V_B|E without the weak-signal / genuine-LO approximations.

    Evaluates the full x-quadrature noise budget

        [ (1-2T1)^2 4T1(1-T1) I_S + (1-2T2)^2 4T2(1-T2) I_LO
          + 4(1-T1) I_S 4T1(1-T1) N0 + 4(1-T2) I_LO 4T2(1-T2) N0 ]
        / (2 |alpha_LO|^2)

    which regroups exactly into kernel(T1) I_S/g + kernel(T2) I_LO/g with
    g the genuine LO intensity, the form used here.  At I_S = 0 and
    I_LO = g it reduces bit-for-bit to :func:`v_be_closed_form`.
    """
    for name, t in (("t1", t1), ("t2", t2)):
        if not (0.0 <= t <= 1.0):
            raise DomainError(f"{name} must lie in [0, 1], got {t}")
    if signal_intensity < 0.0 or lo_intensity < 0.0:
        raise DomainError("intensities must be >= 0")
    if not genuine_lo_intensity > 0.0:
        raise DomainError(f"genuine_lo_intensity must be > 0, got {genuine_lo_intensity}")
    f1, s1 = _kernel(t1, n0.n0)
    f2, s2 = _kernel(t2, n0.n0)
    return (f1 + s1) * (signal_intensity / genuine_lo_intensity) + (f2 + s2) * (
        lo_intensity / genuine_lo_intensity
    )


def v_ba(eta: float, t2: float, n0: ShotNoise = UNIT_SHOT_NOISE) -> float:
    """Bob-given-Alice conditional variance eta*N0 + V_B|E(T2)."""
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    return eta * n0.n0 + v_be_closed_form(t2, n0).v_be


def _v_be_value(t: float) -> float:
    first, second = _kernel(t, 1.0)
    return first + second


def _v_be_derivative(t: float) -> float:
    # d/dt of 10t - 26t^2 + 24t^3 - 8t^4, the expanded quartic
    return 10.0 - 52.0 * t + 72.0 * t * t - 32.0 * t**3


def v_be_argmax() -> tuple:
    """(argmax, max) of V_B|E over [0, 1], from the derivative's cubic root."""
    lo, hi = 0.25, 0.35
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _v_be_derivative(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    return t_star, _v_be_value(t_star)


def hiding_t2(eta: float, grid_points: int = 10_000) -> list:
    """All T2 in [0, 1] with V_B|E(T2) = (1-eta) N0, sorted ascending.

    Roots are bracketed on a uniform grid, bisected to machine width and
    polished with Newton steps so that |V_B|E(root) - target| stays within
    1e-12.  For 0 < 1-eta < max V_B|E there are exactly two roots, one on
    each monotone branch; for eta = 1 the zeros sit at the interval
    endpoints 0 and 1, which are returned directly.
    """
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    target = 1.0 - eta
    _, v_max = v_be_argmax()
    if target > v_max:
        raise InfeasibleError(
            f"hiding target {target} N0 exceeds the V_B|E maximum {v_max:.6f} N0",
            scanned_interval=(0.0, 1.0),
        )

    grid = [i / (grid_points - 1) for i in range(grid_points)]
    g = [_v_be_value(t) - target for t in grid]

    roots = [grid[i] for i in range(grid_points) if g[i] == 0.0]
    for i in range(grid_points - 1):
        if g[i] * g[i + 1] < 0.0:
            lo, hi, glo = grid[i], grid[i + 1], g[i]
            while True:
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                gmid = _v_be_value(mid) - target
                if gmid == 0.0:
                    lo = hi = mid
                    break
                if (gmid < 0.0) == (glo < 0.0):
                    lo, glo = mid, gmid
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            for _ in range(3):  # Newton polish; the quartic slope is O(1) here
                slope = _v_be_derivative(root)
                if slope == 0.0:
                    break
                step = (_v_be_value(root) - target) / slope
                root = min(1.0, max(0.0, root - step))
            roots.append(root)

    out = []
    for r in sorted(roots):
        if out and r - out[-1] < 1e-9:
            continue
        if abs(_v_be_value(r) - target) > 1e-12:
            raise InfeasibleError(
                f"root polish failed at t2={r!r}", scanned_interval=(0.0, 1.0)
            )
        out.append(r)
    return out


def sweep_v_be(t2_min: float = 0.0, t2_max: float = 1.0, steps: int = 1001) -> list:
    """Uniform grid of (t2, first_term, second_term, v_be) rows.

    The grid point i is t2_min + (i * span) / (steps - 1), which lands on
    exactly representable values such as 0.5 when the bounds are 0 and 1.
    """
    if not (0.0 <= t2_min < t2_max <= 1.0):
        raise DomainError(f"need 0 <= t2_min < t2_max <= 1, got ({t2_min}, {t2_max})")
    if steps < 2:
        raise DomainError(f"need steps >= 2, got {steps}")
    span = t2_max - t2_min
    rows = []
    for i in range(steps):
        t2 = t2_min + (i * span) / (steps - 1)
        first, second = _kernel(t2, 1.0)
        rows.append((t2, first, second, first + second))
    return rows


def _sample_cov(a: np.ndarray, b: np.ndarray) -> float:
    n = a.size
    return float(np.dot(a - a.mean(), b - b.mean()) / (n - 1))


def estimate_parameters(dataset, use_both_quadratures: bool = False) -> EstimationReport:
    """Slope and excess-noise estimates over a session dataset.

    Per quadrature: t_hat is the least-squares slope of Bob on Alice,
    Cov(q_A, q_B) / Var(q_A), whose population value for the simulated
    chain is sqrt(eta/2); its standard error is the usual regression one.
    excess_hat = Var(q_B - sqrt(eta/2) q_A)/N0 - 1 compares the empirical
    Bob-given-Alice variance with the honest heterodyne budget of one
    shot-noise unit, with the Var-of-sample-variance standard error.  Both
    errors scale as 1/sqrt(n).  The x quadrature alone is used unless
    ``use_both_quadratures`` pools x and p (independent noise, so pooled
    standard errors shrink by sqrt(2)).
    """
    n = dataset.n_rounds
    if n < 100:
        raise InsufficientDataError(f"parameter estimation needs >= 100 rounds, got {n}")
    params = dataset.params
    n0 = params.n0.n0
    if params.v_a <= 0.0:
        raise InsufficientDataError("parameter estimation needs v_a > 0")
    root_half_eta = math.sqrt(params.eta / 2.0)

    pairs = [(dataset.alice_x, dataset.bob_x)]
    if use_both_quadratures:
        pairs.append((dataset.alice_p, dataset.bob_p))

    t_hats, t_ses, excesses, excess_ses = [], [], [], []
    for q_a, q_b in pairs:
        cov = _sample_cov(q_a, q_b)
        var_a = float(np.var(q_a, ddof=1))
        slope = cov / var_a
        t_hats.append(slope)
        ols_resid_var = float(np.var(q_b - slope * q_a, ddof=1))
        t_ses.append(math.sqrt(max(ols_resid_var, 0.0) / (n * var_a)))
        resid = q_b - root_half_eta * q_a
        v_emp = float(np.var(resid, ddof=1))
        excesses.append(v_emp / n0 - 1.0)
        excess_ses.append((v_emp / n0) * math.sqrt(2.0 / (n - 1)))

    k = len(pairs)
    return EstimationReport(
        t_hat=sum(t_hats) / k,
        excess_hat=sum(excesses) / k,
        n_rounds=n,
        t_se=sum(t_ses) / k / math.sqrt(k),
        excess_se=sum(excess_ses) / k / math.sqrt(k),
    )


def excess_noise_detected(report: EstimationReport, threshold: float = DETECTION_THRESHOLD) -> bool:
    """Whether the estimated excess noise exceeds the tolerated allowance."""
    return report.excess_hat > threshold
