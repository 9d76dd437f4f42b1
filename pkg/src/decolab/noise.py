"""Multi-harmonic mains-interference field model.

The interference is a comb of harmonics of the grid frequency,

    B(t) = sum_i B_i cos(w_i (t - t0) + phi_i),

stored in SI units (tesla, hertz, radians).  The bundled 8-component
50..450 Hz model (``table1_model``) is the fitted interference comb used by
the pulse-sequence and feedforward simulations.  Slow fluctuations of the
overall comb amplitude are modelled by a clipped mean-reverting scale
factor a(t) with stationary mean 1 (``AmplitudeScaleProcess``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import MG_TO_TESLA, TWO_PI


class ConfigError(ValueError):
    """Malformed field-model configuration file."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f" (line {line})" if line is not None else ""
        what = f" key '{key}'" if key else ""
        super().__init__(f"config error{where}{what}: {message}")


@dataclass(frozen=True)
class AcComponent:
    """One harmonic: amplitude in tesla, frequency in Hz, phase in rad."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.amplitude < 0.0:
            raise ValueError("component amplitude must be >= 0")
        if self.frequency <= 0.0:
            raise ValueError("component frequency must be > 0")


@dataclass(frozen=True)
class AcFieldModel:
    """Ordered comb of AC components plus the waveform time offset t0 (s).

    t0 = 0 labels the positive zero-crossing of the fundamental; it must lie
    in [0, fundamental period).
    """

    components: tuple[AcComponent, ...] = ()
    t0: float = 0.0

    def __post_init__(self) -> None:
        freqs = [c.frequency for c in self.components]
        if any(f2 <= f1 for f1, f2 in zip(freqs, freqs[1:])):
            raise ValueError("component frequencies must be strictly increasing")
        period = self.fundamental_period
        if period is not None and not (0.0 <= self.t0 < period):
            raise ValueError(f"t0 must lie in [0, {period}) s")

    @property
    def fundamental_period(self) -> float | None:
        """Period of the lowest harmonic (20 ms for a 50 Hz comb); None if empty."""
        if not self.components:
            return None
        return 1.0 / self.components[0].frequency

    def with_t0(self, t0: float) -> "AcFieldModel":
        return replace(self, t0=t0)


def field_at(model: AcFieldModel, t):
    """Instantaneous field B(t) in tesla; ``t`` may be a scalar or array."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for c in model.components:
        w = TWO_PI * c.frequency
        total = total + c.amplitude * np.cos(w * (t - model.t0) + c.phase)
    return float(total) if total.ndim == 0 else total


# Fitted interference comb: (frequency Hz, amplitude mG, phase rad).  The
# 50 Hz phase defines the zero of the phase convention.  There is no 400 Hz
# component.
TABLE1_COMPONENTS = (
    (50.0, 2.95, 0.0),
    (100.0, 0.024, 3.0),
    (150.0, 0.490, -1.77),
    (200.0, 0.0065, -0.4),
    (250.0, 0.046, 4.33),
    (300.0, 0.010, 0.0),
    (350.0, 0.0376, 0.9),
    (450.0, 0.0409, -1.3),
)


def table1_model(t0: float = 0.0) -> AcFieldModel:
    """The bundled 8-harmonic 50..450 Hz interference model."""
    comps = tuple(
        AcComponent(amplitude=amp_mg * MG_TO_TESLA, frequency=f, phase=ph)
        for f, amp_mg, ph in TABLE1_COMPONENTS
    )
    return AcFieldModel(components=comps, t0=t0)


def scale_amplitudes(model: AcFieldModel, a: float) -> AcFieldModel:
    """Multiply every amplitude by a > 0; frequencies, phases, t0 unchanged."""
    if not a > 0.0:
        raise ValueError("scale factor must be strictly positive")
    comps = tuple(replace(c, amplitude=c.amplitude * a) for c in model.components)
    return replace(model, components=comps)


@dataclass(frozen=True)
class AmplitudeScaleProcess:
    """Clipped mean-reverting scale factor a(t) for the comb amplitudes.

    Stationary mean 1; `sigma` is the stationary standard deviation before
    clipping to [a_min, a_max].  The bounds default to the observed swing of
    the interference amplitude; `sigma` defaults to the sub-percent level
    consistent with the feedforward-corrected echo decay (the slow-drift law
    is otherwise unconstrained).
    """

    a_min: float = 0.85
    a_max: float = 1.27
    correlation_time: float = 3.0
    sigma: float = 0.01

    def __post_init__(self) -> None:
        if not (0.0 < self.a_min <= 1.0 <= self.a_max):
            raise ValueError("bounds must satisfy 0 < a_min <= 1 <= a_max")
        if not self.correlation_time > 0.0:
            raise ValueError("correlation_time must be > 0")
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")

    def clip(self, a):
        return np.clip(a, self.a_min, self.a_max)


def sample_amplitude_trajectory(
    proc: AmplitudeScaleProcess, times: Sequence[float], rng: np.random.Generator
) -> np.ndarray:
    """Sample a(t) at the given increasing times.

    Uses the exact Ornstein-Uhlenbeck transition between samples, then clips
    to [a_min, a_max].  Deterministic given the rng state.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty(0)
    if np.any(np.diff(times) < 0.0):
        raise ValueError("times must be non-decreasing")
    out = np.empty(times.size)
    tau = proc.correlation_time
    a = 1.0 + proc.sigma * rng.standard_normal()
    out[0] = a = float(proc.clip(a))
    for i in range(1, times.size):
        dt = times[i] - times[i - 1]
        decay = math.exp(-dt / tau) if dt / tau < 700.0 else 0.0
        innov = proc.sigma * math.sqrt(max(0.0, 1.0 - decay * decay))
        a = 1.0 + (a - 1.0) * decay + innov * rng.standard_normal()
        out[i] = a = float(proc.clip(a))
    return out


# ---------------------------------------------------------------------------
# Key-value configuration file format
# ---------------------------------------------------------------------------
# t0_s = 0.0
# [component]
# frequency_Hz = 50
# amplitude_mG = 2.95
# phase_rad = 0.0
# [component] ...

_COMPONENT_KEYS = {"frequency_Hz", "amplitude_mG", "phase_rad"}


def save_field_config(model: AcFieldModel, path: str | Path) -> None:
    lines = ["# mains interference field model", f"t0_s = {model.t0!r}", ""]
    for c in model.components:
        lines.append("[component]")
        lines.append(f"frequency_Hz = {c.frequency!r}")
        lines.append(f"amplitude_mG = {c.amplitude / MG_TO_TESLA!r}")
        lines.append(f"phase_rad = {c.phase!r}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def load_field_config(path: str | Path) -> AcFieldModel:
    """Parse a field-model config file; raises ConfigError with line numbers."""
    t0 = 0.0
    records: list[dict[str, float]] = []
    current: dict[str, float] | None = None

    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[component]":
            current = {}
            records.append(current)
            continue
        if line.startswith("["):
            raise ConfigError(f"unknown section {line!r}", line=lineno)
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        try:
            num = float(value)
        except ValueError:
            raise ConfigError(f"value {value!r} is not a number", line=lineno, key=key) from None
        if current is None:
            if key != "t0_s":
                raise ConfigError("only 't0_s' may appear before the first [component]",
                                  line=lineno, key=key)
            t0 = num
        else:
            if key not in _COMPONENT_KEYS:
                raise ConfigError(f"unknown component key (expected one of {sorted(_COMPONENT_KEYS)})",
                                  line=lineno, key=key)
            current[key] = num

    comps = []
    for rec in records:
        missing = _COMPONENT_KEYS - rec.keys()
        if missing:
            raise ConfigError(f"component is missing {sorted(missing)}")
        comps.append(AcComponent(amplitude=rec["amplitude_mG"] * MG_TO_TESLA,
                                 frequency=rec["frequency_Hz"],
                                 phase=rec["phase_rad"]))
    comps.sort(key=lambda c: c.frequency)
    try:
        return AcFieldModel(components=tuple(comps), t0=t0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def default_config_path() -> Path:
    """Path of the bundled default (Table-equivalent) config file."""
    return Path(__file__).parent / "data" / "mains_50hz.cfg"
