"""Shot-level simulation of the mains-synchronized Hahn-echo feedforward
protocol.

Per echo time tau the protocol runs three 50-shot blocks: <X> and <Y> of the
synchronized echo determine the phase estimate Phi = atan2(<Y>, <X>), then a
corrected block measures <C> = cos(Phi_true - Phi).  Each shot is
triggered on the mains zero crossing and therefore occupies one 20 ms
period, so one block spans n_shots periods of wall-clock time; slow drift
of the comb amplitude between the estimation and correction blocks is what
limits <C>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS, PhysicalConstants
from .noise import AcFieldModel, AmplitudeScaleProcess, sample_amplitude_trajectory
from .sequences import phase_echo

__all__ = [
    "ShotConfig",
    "PhaseEstimate",
    "FeedforwardOutcome",
    "sample_observable",
    "estimate_phase",
    "run_feedforward",
]


@dataclass(frozen=True)
class ShotConfig:
    """Measurement shots per observable and the readout fidelities.

    exact=True short-circuits sampling and returns true expectations (the
    infinite-shot limit).
    """

    n_shots: int = 50
    readout_fidelity_0: float = 0.925
    readout_fidelity_1: float = 0.925
    shot_period: float = 0.02
    exact: bool = False

    def __post_init__(self) -> None:
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        for f in (self.readout_fidelity_0, self.readout_fidelity_1):
            if not (0.5 < f <= 1.0):
                raise ValueError("readout fidelities must lie in (0.5, 1]")
        if not self.shot_period > 0.0:
            raise ValueError("shot_period must be > 0")


@dataclass(frozen=True)
class PhaseEstimate:
    phi: float
    x_raw: float
    y_raw: float
    defined: bool = True


@dataclass(frozen=True)
class FeedforwardOutcome:
    tau: float
    phi_estimate: float
    c_expectation: float
    x_raw: float
    y_raw: float
    c_std: float = 0.0


def _correct_and_clip(p_click: float, cfg: ShotConfig) -> float:
    f0, f1 = cfg.readout_fidelity_0, cfg.readout_fidelity_1
    p_up = (p_click - (1.0 - f0)) / (f1 + f0 - 1.0)
    return float(np.clip(2.0 * p_up - 1.0, -1.0, 1.0))


def sample_observable(true_expectation: float, cfg: ShotConfig,
                      rng: np.random.Generator) -> float:
    """Fidelity-corrected estimator of a Pauli expectation from n_shots.

    Each shot is a Bernoulli outcome with p = (1 + E)/2 passed through the
    binary readout confusion matrix; the block estimate is inverted through
    the same matrix and clipped to [-1, 1].
    """
    if abs(true_expectation) > 1.0 + 1e-12:
        raise ValueError("|true_expectation| must be <= 1")
    if cfg.exact:
        return float(np.clip(true_expectation, -1.0, 1.0))
    p_up = 0.5 * (1.0 + true_expectation)
    f0, f1 = cfg.readout_fidelity_0, cfg.readout_fidelity_1
    p_click = p_up * f1 + (1.0 - p_up) * (1.0 - f0)
    k = rng.binomial(cfg.n_shots, min(max(p_click, 0.0), 1.0))
    return _correct_and_clip(k / cfg.n_shots, cfg)


def _sample_shotwise(true_expectations: np.ndarray, cfg: ShotConfig,
                     rng: np.random.Generator) -> float:
    """Block estimator when the true expectation drifts shot to shot."""
    if cfg.exact:
        return float(np.clip(np.mean(true_expectations), -1.0, 1.0))
    p_up = 0.5 * (1.0 + true_expectations)
    f0, f1 = cfg.readout_fidelity_0, cfg.readout_fidelity_1
    p_click = np.clip(p_up * f1 + (1.0 - p_up) * (1.0 - f0), 0.0, 1.0)
    clicks = rng.random(p_click.size) < p_click
    return _correct_and_clip(float(np.mean(clicks)), cfg)


def estimate_phase(model: AcFieldModel, tau: float, cfg: ShotConfig,
                   rng: np.random.Generator, t0: float = 0.0,
                   constants: PhysicalConstants = CONSTANTS) -> PhaseEstimate:
    """Estimate the synchronized echo phase from <X> and <Y> blocks.

    Returns the two-argument arctangent, which resolves the quadrant (the
    estimate is the true phase modulo 2 pi).  x_raw = y_raw = 0 is flagged
    as an undefined-phase outcome.
    """
    if not tau > 0.0:
        raise ValueError("tau must be > 0")
    phi_true = phase_echo(model, tau, t0, constants)
    x_raw = sample_observable(math.cos(phi_true), cfg, rng)
    y_raw = sample_observable(math.sin(phi_true), cfg, rng)
    if x_raw == 0.0 and y_raw == 0.0:
        return PhaseEstimate(phi=float("nan"), x_raw=x_raw, y_raw=y_raw, defined=False)
    return PhaseEstimate(phi=math.atan2(y_raw, x_raw), x_raw=x_raw, y_raw=y_raw)


def run_feedforward(model: AcFieldModel, taus, cfg: ShotConfig,
                    drift: AmplitudeScaleProcess | None,
                    rng: np.random.Generator,
                    n_repetitions: int = 12,
                    estimate_each_repetition: bool = True,
                    t0: float = 0.0,
                    constants: PhysicalConstants = CONSTANTS) -> list[FeedforwardOutcome]:
    """Simulate the X / Y / C block protocol for each echo time.

    Per repetition the wall clock advances one shot_period per shot through
    the X, Y and C blocks in order; the comb amplitude follows one drift
    trajectory across all blocks and repetitions of a given tau (drift=None
    freezes a = 1).  Phases are linear in the comb amplitude, so the
    per-shot true phase is a(t) * Phi_echo.  With
    estimate_each_repetition=False the estimate from the first repetition
    corrects every later C block.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    n = cfg.n_shots
    outcomes: list[FeedforwardOutcome] = []
    for tau in taus:
        phi_unit = phase_echo(model, float(tau), t0, constants)
        shot_times = np.arange(3 * n * n_repetitions) * cfg.shot_period
        if drift is None:
            a_traj = np.ones(shot_times.size)
        else:
            a_traj = sample_amplitude_trajectory(drift, shot_times, rng)
        phi_est = float("nan")
        x_raw = y_raw = float("nan")
        c_values = []
        for rep in range(n_repetitions):
            base = 3 * n * rep
            a_x = a_traj[base:base + n]
            a_y = a_traj[base + n:base + 2 * n]
            a_c = a_traj[base + 2 * n:base + 3 * n]
            if estimate_each_repetition or rep == 0:
                x_raw = _sample_shotwise(np.cos(a_x * phi_unit), cfg, rng)
                y_raw = _sample_shotwise(np.sin(a_y * phi_unit), cfg, rng)
                if x_raw == 0.0 and y_raw == 0.0:
                    phi_est = float("nan")
                else:
                    phi_est = math.atan2(y_raw, x_raw)
            if math.isnan(phi_est):
                c_values.append(0.0)
                continue
            c_values.append(_sample_shotwise(np.cos(a_c * phi_unit - phi_est), cfg, rng))
        c_arr = np.asarray(c_values)
        outcomes.append(FeedforwardOutcome(
            tau=float(tau), phi_estimate=phi_est,
            c_expectation=float(np.mean(c_arr)),
            x_raw=x_raw, y_raw=y_raw,
            c_std=float(np.std(c_arr, ddof=1)) if c_arr.size > 1 else 0.0))
    return outcomes
