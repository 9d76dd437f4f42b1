"""Accumulated phase and filter-function response of Ramsey / Hahn / CPMG
sequences under the harmonic-comb interference model.

A CPMG-N sequence is pi/2 - tau - [pi - 2 tau]*(N-1) - pi - tau - pi/2 with
total time T = 2 N tau and instantaneous pi pulses.  Its response to one
field component B cos(w (t - t0) + phi) is the sign-toggled integral

    Phi = gamma_nv * integral_0^T y(t) B cos(w (t - t0) + phi) dt,

with y(t) = +-1 flipping at each pi pulse.  Evaluating the integral gives a
closed form whose trigonometric structure depends on the parity of N:

    N even:  Phi = (2 gamma B / w) (1 - sec(w tau)) sin(N w tau)
                   * cos(w (N tau - t0) + phi)
    N odd:   Phi = (2 gamma B / w) (sec(w tau) - 1) cos(N w tau)
                   * sin(w (N tau - t0) + phi)

The odd branch reduces to the Hahn-echo form
(4 gamma B / w) sin^2(w tau / 2) sin(w (tau - t0) + phi) at N = 1.  The
1 - sec(w tau) factor has removable singularities at w tau = pi/2 + m pi,
handled by an exact reformulation near the poles.

The time offset passed to the phase functions adds to the model's own t0;
unsynchronized expectation values average it over one fundamental period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constants import CONSTANTS, TWO_PI, PhysicalConstants
from .noise import AcFieldModel

__all__ = [
    "PulseSequence",
    "SequenceResponse",
    "filter_function",
    "phase_cpmg",
    "phase_ramsey",
    "phase_echo",
    "phase_of",
    "respond",
    "expectation_unsynchronized",
    "is_revival",
    "ramsey_envelope",
]

#: half-width (rad) of the window around sec poles where the exact
#: near-pole reformulation is used instead of the direct formula
POLE_WINDOW = 1e-6


@dataclass(frozen=True)
class PulseSequence:
    """Ramsey(T), Hahn(tau) or CPMG(N, tau); tau is the half inter-pulse
    delay for Hahn/CPMG and the total free-evolution time for Ramsey."""

    kind: str
    n_pulses: int
    tau: float

    def __post_init__(self) -> None:
        if self.kind not in ("ramsey", "hahn", "cpmg"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if not self.tau > 0.0:
            raise ValueError("tau must be > 0")
        expected = {"ramsey": self.n_pulses == 0, "hahn": self.n_pulses == 1,
                    "cpmg": self.n_pulses >= 1}
        if not expected[self.kind]:
            raise ValueError(f"invalid n_pulses={self.n_pulses} for {self.kind}")

    @classmethod
    def ramsey(cls, total_time: float) -> "PulseSequence":
        return cls("ramsey", 0, total_time)

    @classmethod
    def hahn(cls, tau: float) -> "PulseSequence":
        return cls("hahn", 1, tau)

    @classmethod
    def cpmg(cls, n_pulses: int, tau: float) -> "PulseSequence":
        return cls("cpmg", n_pulses, tau)

    @property
    def total_time(self) -> float:
        return self.tau if self.kind == "ramsey" else 2.0 * self.n_pulses * self.tau


@dataclass(frozen=True)
class SequenceResponse:
    phase: float
    expectation_x: float


def _one_minus_sec(alpha):
    # 1 - sec(a) = -2 sin^2(a/2) / cos(a): exact and cancellation-free for
    # small a, diverges at the sec poles (handled by callers).
    alpha = np.asarray(alpha, dtype=float)
    s = np.sin(0.5 * alpha)
    return -2.0 * s * s / np.cos(alpha)


def _toggle_factor(n_pulses: int, alpha):
    """(1-sec a) sin(N a) for even N, (sec a - 1) cos(N a) for odd N.

    Vectorized over alpha = w tau.  Within POLE_WINDOW of a sec pole
    a0 = pi/2 + m pi the product is evaluated through the identity

        factor = q * sin(N eps) * (1 + 1 / (sigma sin eps)),  eps = a - a0,

    with sigma = sin(a0) = (-1)^m and q = cos(N a0) (even N) or sin(N a0)
    (odd N), both computed by integer arithmetic.  The limit at eps -> 0 is
    q * N / sigma.
    """
    scalar = np.ndim(alpha) == 0
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    n = int(n_pulses)
    with np.errstate(divide="ignore", invalid="ignore"):
        if n % 2 == 0:
            out = _one_minus_sec(alpha) * np.sin(n * alpha)
        else:
            out = -_one_minus_sec(alpha) * np.cos(n * alpha)

    # nearest pole: a0 = pi/2 + m pi
    m = np.round((alpha - 0.5 * math.pi) / math.pi).astype(int)
    eps = alpha - (0.5 * math.pi + m * math.pi)
    near = np.abs(eps) < POLE_WINDOW
    if np.any(near):
        m_n = m[near]
        eps_n = eps[near]
        sigma = np.where(m_n % 2 == 0, 1.0, -1.0)
        odd_steps = 2 * m_n + 1  # a0 = odd_steps * pi/2
        if n % 2 == 0:
            # cos(N a0) with N a0 = (N/2) * odd_steps * pi
            q = np.where(((n // 2) * odd_steps) % 2 == 0, 1.0, -1.0)
        else:
            # sin(N a0): N * odd_steps mod 4 is 1 or 3
            q = np.where((n * odd_steps) % 4 == 1, 1.0, -1.0)
        sn = np.sin(n * eps_n)
        ratio = np.where(eps_n == 0.0, float(n),
                         sn / np.where(eps_n == 0.0, 1.0, np.sin(eps_n)))
        out[near] = q * (sn + ratio / sigma)
    return float(out[0]) if scalar else out


def filter_function(omega, n_pulses: int, tau: float):
    """Complex CPMG filter F(w) = int_0^T y(t) e^{-i w t} dt (units: s).

    For even N this equals T e^{-i w N tau} (1 - sec(w tau)) sinc-form
    sin(w N tau)/(w N tau); for odd N the toggled integral instead gives
    (2 i / w) e^{-i w N tau} (sec(w tau) - 1) cos(N w tau).  DC fields are
    refocused: F(0) = 0.
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    out = np.zeros(omega.shape, dtype=complex)
    nz = omega != 0.0
    w = omega[nz]
    alpha = w * tau
    n = int(n_pulses)
    carrier = np.exp(-1j * n * alpha)
    factor = np.atleast_1d(_toggle_factor(n, alpha))
    if n % 2 == 0:
        out[nz] = (2.0 / w) * carrier * factor
    else:
        out[nz] = (2.0j / w) * carrier * factor
    return complex(out[0]) if scalar else out


def _offset(model: AcFieldModel, t0) -> np.ndarray:
    return np.asarray(t0, dtype=float) + model.t0


def phase_cpmg(model: AcFieldModel, n_pulses: int, tau: float, t0=0.0,
               constants: PhysicalConstants = CONSTANTS):
    """Phase (rad) accumulated by a CPMG-N sequence started at mains offset t0."""
    t0 = _offset(model, t0)
    n = int(n_pulses)
    total = np.zeros(t0.shape, dtype=float)
    for c in model.components:
        w = TWO_PI * c.frequency
        pref = 2.0 * constants.gamma_nv * c.amplitude / w
        factor = _toggle_factor(n, w * tau)
        arg = w * (n * tau - t0) + c.phase
        if n % 2 == 0:
            total = total + pref * factor * np.cos(arg)
        else:
            total = total + pref * factor * np.sin(arg)
    return float(total) if total.ndim == 0 else total


def phase_ramsey(model: AcFieldModel, total_time: float, t0=0.0,
                 constants: PhysicalConstants = CONSTANTS):
    """Phase (rad) accumulated during free evolution of duration total_time."""
    if not total_time > 0.0:
        raise ValueError("total_time must be > 0")
    t0 = _offset(model, t0)
    total = np.zeros(t0.shape, dtype=float)
    half = 0.5 * total_time
    for c in model.components:
        w = TWO_PI * c.frequency
        pref = 2.0 * constants.gamma_nv * c.amplitude / w
        total = total + pref * np.sin(w * half) * np.cos(w * (half - t0) + c.phase)
    return float(total) if total.ndim == 0 else total


def phase_echo(model: AcFieldModel, tau: float, t0=0.0,
               constants: PhysicalConstants = CONSTANTS):
    """Hahn-echo phase (rad); equals phase_cpmg with N = 1."""
    if not tau > 0.0:
        raise ValueError("tau must be > 0")
    t0 = _offset(model, t0)
    total = np.zeros(t0.shape, dtype=float)
    for c in model.components:
        w = TWO_PI * c.frequency
        pref = 4.0 * constants.gamma_nv * c.amplitude / w
        s = np.sin(0.5 * w * tau)
        total = total + pref * s * s * np.sin(w * (tau - t0) + c.phase)
    return float(total) if total.ndim == 0 else total


def phase_of(model: AcFieldModel, seq: PulseSequence, t0=0.0,
             constants: PhysicalConstants = CONSTANTS):
    if seq.kind == "ramsey":
        return phase_ramsey(model, seq.tau, t0, constants)
    if seq.kind == "hahn":
        return phase_echo(model, seq.tau, t0, constants)
    return phase_cpmg(model, seq.n_pulses, seq.tau, t0, constants)


def respond(model: AcFieldModel, seq: PulseSequence, t0: float = 0.0,
            constants: PhysicalConstants = CONSTANTS) -> SequenceResponse:
    """Synchronized (single-t0) response: <X> = cos(Phi)."""
    phi = phase_of(model, seq, t0, constants)
    return SequenceResponse(phase=phi, expectation_x=math.cos(phi))


def expectation_unsynchronized(model: AcFieldModel, seq: PulseSequence,
                               n_t0: int = 400,
                               constants: PhysicalConstants = CONSTANTS) -> float:
    """<X> averaged over the sequence trigger offset.

    Midpoint average of cos(Phi(t0)) over n_t0 offsets spanning one
    fundamental period (20 ms for a 50 Hz comb).
    """
    if n_t0 < 2:
        raise ValueError("n_t0 must be >= 2")
    period = model.fundamental_period
    if period is None:
        return 1.0
    t0s = (np.arange(n_t0) + 0.5) * (period / n_t0)
    return float(np.mean(np.cos(phase_of(model, seq, t0s, constants))))


def _quantize_us(value_s: float, name: str) -> int:
    us = value_s * 1e6
    nearest = round(us)
    if abs(us - nearest) > 1e-6 or nearest < 0:
        raise ValueError(f"{name} must be a whole number of microseconds, got {value_s} s")
    return int(nearest)


def is_revival(t_dd: float, tau: float, f_ac: float) -> bool:
    """Whether the CPMG filter vanishes for a field at f_ac.

    True iff T = 2 N tau is an integer multiple of T_ac = 1/f_ac and tau is
    not (1/4 + n/2) T_ac for any integer n >= 0.  Times are quantized to
    integer microseconds and the integer tests use exact rationals.
    """
    t_dd_us = _quantize_us(t_dd, "t_dd")
    tau_us = _quantize_us(tau, "tau")
    t_ac_us = Fraction(10**6) / Fraction(f_ac)
    k = Fraction(t_dd_us) / t_ac_us
    if k.denominator != 1 or k <= 0:
        return False
    n2 = (Fraction(tau_us) / t_ac_us - Fraction(1, 4)) / Fraction(1, 2)
    return not (n2.denominator == 1 and n2 >= 0)


def ramsey_envelope(model: AcFieldModel, amplitude_range: tuple[float, float],
                    times, n_t0: int = 400, n_a: int = 21,
                    constants: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """Ramsey expectation averaged over trigger offset and comb amplitude scale.

    For each total evolution time the t0-averaged expectation is further
    averaged over n_a scale factors uniformly spaced in amplitude_range;
    phases are linear in the field so scaling multiplies Phi directly.
    """
    a_min, a_max = amplitude_range
    if not (0.0 < a_min <= a_max):
        raise ValueError("need 0 < a_min <= a_max")
    a_grid = np.linspace(a_min, a_max, n_a) if n_a > 1 else np.array([0.5 * (a_min + a_max)])
    period = model.fundamental_period
    times = np.asarray(times, dtype=float)
    if period is None:
        return np.ones_like(times)
    t0s = (np.arange(n_t0) + 0.5) * (period / n_t0)
    out = np.empty(times.shape)
    for i, total_time in enumerate(times.ravel()):
        phi = phase_ramsey(model, float(total_time), t0s, constants)
        out.ravel()[i] = np.mean(np.cos(a_grid[:, None] * phi[None, :]))
    return out
