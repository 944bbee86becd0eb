"""Monte Carlo of full protocol rounds under the wavelength attack.

Round structure: Alice draws Gaussian means (x_A, p_A) of variance V_A N0 and
sends a coherent state; Eve intercepts, heterodynes it (one unit of coherent
noise from the state plus one from her detection), solves for forged-beam
parameters and resends; Bob's wavelength-dependent heterodyne chain yields

    x_B = sqrt(eta/2) x_E + x_B|E,    p_B = sqrt(eta/2) p_E + p_B|E,

with the deviation terms assembled from four independent noise sources per
quadrature: the two first-stage splitter vacua (one sample each, entering the
x and p branches with opposite signs), and the fresh two-port shot-noise
draws of the measuring splitters, weighted by the reflected-port intensities
for x and the transmitted-port intensities for p.

Attack bookkeeping per round: T2 and the forged-LO intensity are session
constants (the conditional variance V_B|E depends on them alone), while T1
and the forged-signal intensity track Eve's outcome: T1 = p_E/(x_E + p_E)
for same-sign outcomes, else the boundary value 0 or 1 that routes the weak
signal entirely to one detector.  The signal intensity follows the reduced
closed form, capped at one percent of the forged LO so the weak-signal
regime of the variance analysis holds for every round.  Exact attacking-
equation residuals at a session-constant T2 away from 1/2 would force
forged-beam intensities of order |alpha_LO|^2 for roughly half the outcomes
(see :mod:`wlattack.solver`); the session keeps the idealized weak-beam
bookkeeping instead, which is the regime the closed-form V_B|E describes.

Determinism: one RandomSource drawn in fixed blocks of ``n_rounds`` samples
each, in the order (x_A, p_A, alice coherent noise x/p, Eve heterodyne noise
x/p, first-splitter vacua for signal and LO, two-port draws dXS, dPS, dXLO,
dPLO).  Identical (params, config, n_rounds, seed) reproduce the dataset
bit for bit.  Parallel variants must partition rounds across sources derived
with RandomSource.spawn; nothing here shares mutable state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import analysis
from .coupler import CouplerModel, WavelengthBand, invert_transmittance
from .errors import (
    ConfigError,
    ContractViolationError,
    DomainError,
    NoSolutionError,
    SessionInfeasibleError,
)
from .solver import (
    RESIDUAL_TOL,
    TELECOM_WAVELENGTH,
    AttackSolution,
    attack_residuals,
    residual_scale,
)
from .units import ProtocolParams, QuadraturePair, RandomSource

_POLICIES = ("fixed", "hiding", "same-sign-only")

#: Weak-beam cap on the per-round forged-signal intensity, as a fraction of the forged LO.
SIGNAL_INTENSITY_CAP = 0.01

CSV_HEADER = "round,x_A,p_A,x_E,p_E,x_B,p_B,T1,T2,signal_intensity"


@dataclass(frozen=True)
class AttackConfig:
    """Session-level attack policy.

    t2_policy   "fixed" (use ``t2``), "hiding" (solve V_B|E = (1-eta) N0 and
                pick the wavelength-realizable root nearest the telecom
                line), or "same-sign-only" (T2 = 1/2 with the closed-form
                branch only; rounds it cannot solve abort the session).
    """

    t2_policy: str = "hiding"
    t2: Optional[float] = None
    forged_lo_intensity: Optional[float] = None

    def __post_init__(self):
        if self.t2_policy not in _POLICIES:
            raise ConfigError(
                f"unknown t2_policy {self.t2_policy!r}; expected one of {_POLICIES}",
                key="attack.t2_policy",
            )
        if self.t2_policy == "fixed":
            if self.t2 is None or not (0.0 <= self.t2 <= 1.0):
                raise ConfigError(
                    f"fixed policy needs t2 in [0, 1], got {self.t2}", key="attack.t2"
                )
        if self.forged_lo_intensity is not None and not self.forged_lo_intensity > 0.0:
            raise ConfigError(
                f"forged_lo_intensity must be > 0, got {self.forged_lo_intensity}",
                key="attack.forged_lo_intensity",
            )


@dataclass(frozen=True)
class RoundRecord:
    alice: QuadraturePair
    eve: QuadraturePair
    bob: QuadraturePair
    solution: AttackSolution


@dataclass
class SessionDataset:
    """Column-oriented per-round records of one simulated session."""

    params: ProtocolParams
    seed: int
    t2: float
    forged_lo_intensity: float
    alice_x: np.ndarray = field(repr=False)
    alice_p: np.ndarray = field(repr=False)
    eve_x: np.ndarray = field(repr=False)
    eve_p: np.ndarray = field(repr=False)
    bob_x: np.ndarray = field(repr=False)
    bob_p: np.ndarray = field(repr=False)
    t1: np.ndarray = field(repr=False)
    signal_intensity: np.ndarray = field(repr=False)

    @property
    def n_rounds(self) -> int:
        return int(self.alice_x.size)

    def __len__(self) -> int:
        return self.n_rounds

    def record(self, i: int) -> RoundRecord:
        return RoundRecord(
            alice=QuadraturePair(float(self.alice_x[i]), float(self.alice_p[i])),
            eve=QuadraturePair(float(self.eve_x[i]), float(self.eve_p[i])),
            bob=QuadraturePair(float(self.bob_x[i]), float(self.bob_p[i])),
            solution=AttackSolution(
                t1=float(self.t1[i]),
                t2=self.t2,
                signal_intensity=float(self.signal_intensity[i]),
                lo_intensity=self.forged_lo_intensity,
            ),
        )

    def __getitem__(self, i: int) -> RoundRecord:
        return self.record(range(self.n_rounds)[i])

    def __iter__(self) -> Iterator[RoundRecord]:
        return (self.record(i) for i in range(self.n_rounds))

    def _rows(self):
        for i in range(self.n_rounds):
            yield (
                i,
                self.alice_x[i],
                self.alice_p[i],
                self.eve_x[i],
                self.eve_p[i],
                self.bob_x[i],
                self.bob_p[i],
                self.t1[i],
                self.t2,
                self.signal_intensity[i],
            )

    def write_csv(self, path) -> None:
        """One record per line; floats at 17 significant digits for exact round-trip."""
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in self._rows():
                fh.write(f"{row[0]:d}," + ",".join(f"{v:.17g}" for v in row[1:]) + "\n")

    def write_jsonl(self, path) -> None:
        """Same columns as the CSV export, one JSON object per line."""
        keys = CSV_HEADER.split(",")
        with open(path, "w", newline="\n") as fh:
            for row in self._rows():
                rendered = [f"{row[0]:d}"] + [f"{v:.17g}" for v in row[1:]]
                fh.write(
                    "{" + ", ".join(f'{json.dumps(k)}: {r}' for k, r in zip(keys, rendered)) + "}\n"
                )


def resolve_t2(
    config: AttackConfig,
    params: ProtocolParams,
    coupler_model: Optional[CouplerModel] = None,
    band: Optional[WavelengthBand] = None,
) -> float:
    """The session T2 implied by the attack policy.

    Hiding roots come in pairs; when a coupler model and band are supplied
    the realizable root whose wavelength lies nearest 1.55 um is selected,
    otherwise the root nearest 1/2 (whose wavelength is nearest the genuine
    LO line under the default calibration).
    """
    if config.t2_policy == "fixed":
        return float(config.t2)
    if config.t2_policy == "same-sign-only":
        return 0.5
    roots = analysis.hiding_t2(params.eta)
    if coupler_model is not None and band is not None:
        realizable = []
        for root in roots:
            try:
                lams = invert_transmittance(coupler_model, root, band)
            except NoSolutionError:
                lams = []
            if lams:
                best = min(abs(lam - TELECOM_WAVELENGTH) for lam in lams)
                realizable.append((best, root))
        if realizable:
            return min(realizable)[1]
    return min(roots, key=lambda r: (abs(r - 0.5), r))


def eve_heterodyne(alice_means: QuadraturePair, rng: RandomSource, n0: float = 1.0) -> QuadraturePair:
    """Eve's measured quadratures: Alice's means plus two shot-noise units each.

    One unit is the coherent-state noise of Alice's preparation, the other is
    Eve's own heterodyne detection noise.  Draw order: state noise (x, p),
    then detection noise (x, p).
    """
    na_x = rng.gaussian(0.0, n0)
    na_p = rng.gaussian(0.0, n0)
    ne_x = rng.gaussian(0.0, n0)
    ne_p = rng.gaussian(0.0, n0)
    return QuadraturePair(alice_means.x + na_x + ne_x, alice_means.p + na_p + ne_p)


def _deviation_pair(t1, t2, i_s, i_lo, genuine_lo, draws, n0: float = 1.0):
    """(x_B|E, p_B|E) from six unit draws (xn2, xn3, dxs, dps, dxlo, dplo)."""
    xn2, xn3, dxs_raw, dps_raw, dxlo_raw, dplo_raw = draws
    root_n0 = np.sqrt(n0)
    w_sig = (1.0 - 2.0 * t1) * 2.0 * np.sqrt(t1 * (1.0 - t1) * i_s) * root_n0
    w_lo = (1.0 - 2.0 * t2) * 2.0 * np.sqrt(t2 * (1.0 - t2) * i_lo) * root_n0
    dxs = dxs_raw * np.sqrt(4.0 * t1 * (1.0 - t1) * n0)
    dps = dps_raw * np.sqrt(4.0 * t1 * (1.0 - t1) * n0)
    dxlo = dxlo_raw * np.sqrt(4.0 * t2 * (1.0 - t2) * n0)
    dplo = dplo_raw * np.sqrt(4.0 * t2 * (1.0 - t2) * n0)
    denom = math.sqrt(2.0 * genuine_lo)
    x_dev = (
        -w_sig * xn2
        + w_lo * xn3
        + 2.0 * np.sqrt((1.0 - t1) * i_s) * dxs
        + 2.0 * np.sqrt((1.0 - t2) * i_lo) * dxlo
    ) / denom
    p_dev = (
        w_sig * xn2
        - w_lo * xn3
        + 2.0 * np.sqrt(t1 * i_s) * dps
        + 2.0 * np.sqrt(t2 * i_lo) * dplo
    ) / denom
    return x_dev, p_dev


def bob_measure(
    sol: AttackSolution,
    eve: QuadraturePair,
    params: ProtocolParams,
    rng: RandomSource,
    validate: bool = True,
    noiseless: bool = False,
) -> QuadraturePair:
    """Bob's heterodyne readings for one round under the forged beams.

    The deterministic part is sqrt(eta/2) times Eve's outcome, guaranteed by
    the attacking equations (checked against ``sol`` unless ``validate`` is
    disabled); the deviation adds the first-splitter vacuum samples (shared
    between x and p with opposite signs) and the fresh two-port shot-noise
    draws.  ``noiseless`` suppresses every draw, leaving the deterministic
    part; draws still occur so the stream position is unchanged.
    """
    if validate:
        r_x, r_p = attack_residuals(sol, eve.x, eve.p, params.eta, params.lo_amplitude)
        scale = residual_scale(eve.x, eve.p, params.eta, params.lo_amplitude)
        if max(abs(r_x), abs(r_p)) > RESIDUAL_TOL * scale:
            raise ContractViolationError(
                f"solution residuals ({r_x:.3e}, {r_p:.3e}) exceed {RESIDUAL_TOL} x scale "
                f"{scale:.3e}; this solution does not reproduce the outcome ({eve.x}, {eve.p})"
            )
    n0 = params.n0.n0
    draws = [rng.gaussian(0.0, 1.0) for _ in range(6)]
    if noiseless:
        draws = [0.0] * 6
    x_dev, p_dev = _deviation_pair(
        sol.t1, sol.t2, sol.signal_intensity, sol.lo_intensity, params.lo_intensity, draws, n0
    )
    root = math.sqrt(params.eta / 2.0)
    return QuadraturePair(root * eve.x + float(x_dev), root * eve.p + float(p_dev))


def _weak_beam_bookkeeping(eve_x, eve_p, eta, lo_amplitude, forged_lo):
    """Per-round (T1, signal intensity) of the idealized weak-beam attack.

    Same-sign outcomes use the closed-form ratio T1 = p_E/(x_E + p_E) with
    the reduced-equation intensity; mixed-sign outcomes sit on the boundary
    (T1 = 0 for x_E > p_E, else 1) with the minimal weak-beam intensity
    |c_x - c_p|.  Intensities are capped at SIGNAL_INTENSITY_CAP times the
    forged LO; near-zero outcomes send no fake signal at all.
    """
    c_x = math.sqrt(eta) * lo_amplitude * eve_x
    c_p = math.sqrt(eta) * lo_amplitude * eve_p
    degenerate = np.maximum(np.abs(eve_x), np.abs(eve_p)) < 1e-12
    same_sign = (eve_x * eve_p > 0.0) & ~degenerate

    total = np.where(same_sign, eve_x + eve_p, 1.0)
    ratio = eve_p / total
    t1 = np.where(same_sign, ratio, np.where(eve_x > eve_p, 0.0, 1.0))
    t1 = np.where(degenerate, 0.5, t1)

    denom = t1 * (1.0 - 2.0 * t1)
    boundary_a = np.abs(c_x - c_p)
    with np.errstate(divide="ignore", invalid="ignore"):
        reduced_a = np.where(denom != 0.0, np.abs(c_p / np.where(denom != 0.0, denom, 1.0)), np.inf)
    a = np.where(same_sign, reduced_a, boundary_a)
    a = np.where(degenerate, 0.0, np.minimum(a, SIGNAL_INTENSITY_CAP * forged_lo))
    return t1, a


def run_session(
    params: ProtocolParams,
    attack_config: AttackConfig,
    n_rounds: int,
    seed: int,
    coupler_model: Optional[CouplerModel] = None,
    band: Optional[WavelengthBand] = None,
    noiseless: bool = False,
) -> SessionDataset:
    """Simulate ``n_rounds`` attacked protocol rounds; fully seeded."""
    if n_rounds < 1:
        raise DomainError(f"need n_rounds >= 1, got {n_rounds}")
    t2 = resolve_t2(attack_config, params, coupler_model, band)
    forged_lo = (
        params.lo_intensity
        if attack_config.forged_lo_intensity is None
        else attack_config.forged_lo_intensity
    )
    n0 = params.n0.n0
    rng = RandomSource(seed)
    n = int(n_rounds)

    alice_x = rng.gaussian(0.0, params.v_a * n0, n)
    alice_p = rng.gaussian(0.0, params.v_a * n0, n)
    na_x = rng.gaussian(0.0, n0, n)
    na_p = rng.gaussian(0.0, n0, n)
    ne_x = rng.gaussian(0.0, n0, n)
    ne_p = rng.gaussian(0.0, n0, n)
    draws = [rng.gaussian(0.0, 1.0, n) for _ in range(6)]
    if noiseless:
        na_x = na_p = ne_x = ne_p = np.zeros(n)
        draws = [np.zeros(n) for _ in range(6)]

    eve_x = alice_x + na_x + ne_x
    eve_p = alice_p + na_p + ne_p

    if attack_config.t2_policy == "same-sign-only":
        solvable = (eve_x * eve_p > 0.0) & (eve_x > eve_p)
        if not bool(np.all(solvable)):
            k = int(np.argmin(solvable))
            raise SessionInfeasibleError(
                k,
                f"outcome ({eve_x[k]}, {eve_p[k]}) has no same-sign T2=1/2 solution "
                "with nonnegative intensities",
            )
        t1 = eve_p / (eve_x + eve_p)
        signal = math.sqrt(params.eta) * params.lo_amplitude * eve_p / (t1 * (1.0 - 2.0 * t1))
    else:
        t1, signal = _weak_beam_bookkeeping(
            eve_x, eve_p, params.eta, params.lo_amplitude, forged_lo
        )

    x_dev, p_dev = _deviation_pair(t1, t2, signal, forged_lo, params.lo_intensity, draws, n0)
    root = math.sqrt(params.eta / 2.0)
    return SessionDataset(
        params=params,
        seed=int(seed),
        t2=t2,
        forged_lo_intensity=forged_lo,
        alice_x=alice_x,
        alice_p=alice_p,
        eve_x=eve_x,
        eve_p=eve_p,
        bob_x=root * eve_x + x_dev,
        bob_p=root * eve_p + p_dev,
        t1=np.asarray(t1, dtype=float),
        signal_intensity=np.asarray(signal, dtype=float),
    )
