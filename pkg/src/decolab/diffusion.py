"""Ornstein-Uhlenbeck spectral diffusion of an optical transition and the
check-probe photon-count models built on it.

Frequencies and linewidths are in MHz, the diffusion coefficient D in
MHz^2 s^-1, times in seconds.  In model coordinates the probe/sink laser
sits at f = 0 and the line centre f0 and the heralded starting frequency
default to 0 as well.

Without ionization the frequency distribution stays Gaussian,

    P(f, t) = N(mu(t), V(t)),  mu(t) = f_start e^{-theta t} + f0 (1 - e^{-theta t}),
    V(t) = (D / theta) (1 - e^{-2 theta t}),   theta = D (2 sqrt(2 ln 2) / gamma_i)^2,

and the expected counts are a Voigt profile (Gaussian (*) homogeneous
Lorentzian).  With a delta-function ionization sink of strength S at f = 0
the solution is built in the Laplace domain from the eigenfunction
expansion of the sinkless propagator (quantum-harmonic-oscillator
eigenfunctions, lambda_n = n theta), then inverted numerically with the
fixed-Talbot contour.  The truncated expansion is only valid for
t >> 1/(theta N_eigen); the solver enforces that bound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .fitting import DecayCurve, FitResult, FitError, least_squares

__all__ = [
    "OuDiffusionModel",
    "HomogeneousLine",
    "IonizationSink",
    "SolverSettings",
    "ValidityError",
    "ou_variance",
    "ou_mean",
    "ou_pdf",
    "tau_c",
    "power_broadened_linewidth",
    "faddeeva_w",
    "voigt_density",
    "counts_no_ionization",
    "lanczos_lgamma",
    "stable_hermite_gaussian",
    "hermite_phi_table",
    "eigen_weight",
    "laplace_p0",
    "laplace_p_with_sink",
    "invert_laplace",
    "SinkSolver",
    "counts_with_ionization",
    "PowerDataset",
    "joint_fit_backward",
    "fit_ionization_rate",
    "read_diffusion_csv",
    "write_diffusion_csv",
    "read_manifest",
]

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
LN2_8 = 8.0 * math.log(2.0)


class ValidityError(ValueError):
    """Requested time below the truncated-expansion validity bound."""


@dataclass(frozen=True)
class OuDiffusionModel:
    """Diffusion coefficient D (MHz^2/s), inhomogeneous FWHM gamma_i (MHz),
    line centre f0 (MHz)."""

    d_coeff: float
    gamma_i: float
    f0: float = 0.0

    def __post_init__(self) -> None:
        if not self.d_coeff > 0.0:
            raise ValueError("d_coeff must be > 0")
        if not self.gamma_i > 0.0:
            raise ValueError("gamma_i must be > 0")

    @property
    def theta(self) -> float:
        """Mean-reversion rate (s^-1): D (2 sqrt(2 ln 2) / gamma_i)^2."""
        return self.d_coeff * (FWHM_PER_SIGMA / self.gamma_i) ** 2

    @property
    def stationary_variance(self) -> float:
        """gamma_i^2 / (8 ln 2) = D / theta, in MHz^2."""
        return self.gamma_i ** 2 / LN2_8


@dataclass(frozen=True)
class HomogeneousLine:
    """Peak counts c0 and Lorentzian FWHM gamma_h (MHz), possibly power-broadened."""

    c0: float
    gamma_h: float

    def __post_init__(self) -> None:
        if self.c0 < 0.0:
            raise ValueError("c0 must be >= 0")
        if not self.gamma_h > 0.0:
            raise ValueError("gamma_h must be > 0")

    def counts(self, detuning):
        hw = 0.5 * self.gamma_h
        d = np.asarray(detuning, dtype=float)
        out = self.c0 * hw * hw / (d * d + hw * hw)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class IonizationSink:
    """Delta-sink strength S (s^-1) at f_ion; forward counts are rescaled by
    forward_rescale for the check-block ionization loss."""

    strength_s: float
    f_ion: float = 0.0
    forward_rescale: float = 0.96

    def __post_init__(self) -> None:
        if self.strength_s < 0.0:
            raise ValueError("strength_s must be >= 0")


@dataclass(frozen=True)
class SolverSettings:
    """Sink-solver controls.

    inversion_nodes defaults to 24: in double precision the fixed-Talbot
    error decreases with node count only up to ~24 nodes, beyond which the
    e^{2M/5} contour amplification of roundoff dominates and accuracy
    degrades.  compensated_summation switches the contour sum to fsum.
    """

    n_eigen: int = 2000
    inversion_nodes: int = 24
    min_valid_time_factor: float = 10.0
    grid_halfwidth_sigmas: float = 6.5
    grid_points: int = 801
    compensated_summation: bool = False

    def __post_init__(self) -> None:
        if self.n_eigen < 1:
            raise ValueError("n_eigen must be >= 1")
        if self.inversion_nodes < 4:
            raise ValueError("inversion_nodes must be >= 4")


def ou_variance(model: OuDiffusionModel, tau_d):
    """Frequency variance (MHz^2) after diffusion time tau_d."""
    t = np.asarray(tau_d, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("tau_d must be >= 0")
    v_inf = model.stationary_variance
    out = v_inf * -np.expm1(-2.0 * model.d_coeff * t / v_inf)
    return float(out) if out.ndim == 0 else out


def ou_mean(model: OuDiffusionModel, tau_d, f_start: float = 0.0):
    t = np.asarray(tau_d, dtype=float)
    decay = np.exp(-model.theta * t)
    out = f_start * decay + model.f0 * (1.0 - decay)
    return float(out) if out.ndim == 0 else out


def ou_pdf(model: OuDiffusionModel, f, tau_d: float, f_start: float = 0.0):
    """Gaussian density (MHz^-1) of the transition frequency at tau_d > 0."""
    if not tau_d > 0.0:
        raise ValueError("tau_d must be > 0")
    f = np.asarray(f, dtype=float)
    mu = ou_mean(model, tau_d, f_start)
    var = ou_variance(model, tau_d)
    out = np.exp(-0.5 * (f - mu) ** 2 / var) / math.sqrt(2.0 * math.pi * var)
    return float(out) if out.ndim == 0 else out


def tau_c(d_coeff: float, gamma_h: float) -> float:
    """Diffusion time at which the frequency spread reaches gamma_h:
    gamma_h^2 / (16 ln 2 D), valid for gamma_h << gamma_i."""
    if d_coeff <= 0.0 or gamma_h <= 0.0:
        raise ValueError("inputs must be positive")
    return gamma_h ** 2 / (2.0 * LN2_8 * d_coeff)


def power_broadened_linewidth(gamma0: float, b: float, power: float) -> float:
    """gamma_h(P) = sqrt(gamma0^2 + b P)."""
    if gamma0 < 0.0 or b < 0.0 or power < 0.0:
        raise ValueError("inputs must be non-negative")
    return math.sqrt(gamma0 * gamma0 + b * power)


# ---------------------------------------------------------------------------
# Voigt profile via the complex error function
# ---------------------------------------------------------------------------

def _weideman_coefficients(n_terms: int = 48) -> tuple[float, np.ndarray]:
    # rational approximation of w(z) on the upper half-plane (Weideman 1994)
    big_m = 2 * n_terms
    big_m2 = 2 * big_m
    k = np.arange(-big_m + 1, big_m)
    ell = math.sqrt(n_terms / math.sqrt(2.0))
    theta = k * math.pi / big_m
    t = ell * np.tan(theta / 2.0)
    f = np.exp(-t * t) * (ell * ell + t * t)
    f = np.concatenate(([0.0], f))
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / big_m2
    return ell, a[1:n_terms + 1][::-1]


_WEIDEMAN_L, _WEIDEMAN_A = _weideman_coefficients(48)


def faddeeva_w(z):
    """w(z) = exp(-z^2) erfc(-i z) for Im(z) >= 0 (rational approximation)."""
    z = np.asarray(z, dtype=complex)
    ell = _WEIDEMAN_L
    zz = (ell + 1j * z) / (ell - 1j * z)
    poly = np.zeros_like(z)
    for c in _WEIDEMAN_A:
        poly = poly * zz + c
    out = 2.0 * poly / (ell - 1j * z) ** 2 + (1.0 / math.sqrt(math.pi)) / (ell - 1j * z)
    return complex(out) if out.ndim == 0 else out


def voigt_density(x, sigma: float, gamma_hwhm: float):
    """Gaussian(sigma) (*) Lorentzian(HWHM) density at x."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = (x + 1j * gamma_hwhm) / (sigma * math.sqrt(2.0))
    out = np.real(faddeeva_w(z)) / (sigma * math.sqrt(2.0 * math.pi))
    return float(out[0]) if scalar else out


def counts_no_ionization(model: OuDiffusionModel, line: HomogeneousLine, tau_d: float,
                         probe_detuning: float = 0.0, f_start: float = 0.0) -> float:
    """Expected counts after sinkless diffusion: Voigt evaluation of the
    homogeneous line convolved with the diffused frequency distribution."""
    if tau_d < 0.0:
        raise ValueError("tau_d must be >= 0")
    if tau_d == 0.0:
        return float(line.counts(probe_detuning - f_start))
    mu = ou_mean(model, tau_d, f_start)
    sigma = math.sqrt(ou_variance(model, tau_d))
    hw = 0.5 * line.gamma_h
    return float(line.c0 * math.pi * hw * voigt_density(probe_detuning - mu, sigma, hw))


# ---------------------------------------------------------------------------
# stable Hermite functions
# ---------------------------------------------------------------------------

# Lanczos g=7, n=9 coefficients for the log-Gamma function
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_lgamma(x: float) -> float:
    """log Gamma(x) for x > 0 by the Lanczos approximation."""
    if x <= 0.0:
        raise ValueError("x must be > 0")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - lanczos_lgamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


_PI_QUARTER = math.pi ** 0.25


def _hermite_phi_recurrence(n: int, x: np.ndarray) -> np.ndarray:
    h_prev = np.exp(-0.5 * x * x) / _PI_QUARTER
    if n == 0:
        return h_prev
    h = math.sqrt(2.0) * x * h_prev
    for k in range(1, n):
        h, h_prev = x * math.sqrt(2.0 / (k + 1)) * h - math.sqrt(k / (k + 1.0)) * h_prev, h
    return h


def _hermite_phi_asymptotic(n: int, x: np.ndarray) -> np.ndarray:
    # e^{-x^2/2} H_n(x) ~ (2^n/sqrt(pi)) Gamma((n+1)/2) cos(x sqrt(2n) - n pi/2)
    log_amp = (0.5 * n * math.log(2.0) + lanczos_lgamma(0.5 * (n + 1))
               - 0.5 * lanczos_lgamma(n + 1.0) - 0.75 * math.log(math.pi))
    return math.exp(log_amp) * np.cos(x * math.sqrt(2.0 * n) - 0.5 * n * math.pi)


def stable_hermite_gaussian(n: int, x, crossover: int = 50):
    """Normalized Hermite function e^{-x^2/2} H_n(x) / sqrt(2^n n! sqrt(pi)).

    Exact three-term recurrence up to ``crossover``, the asymptotic cosine
    form (log-space amplitude via the Lanczos log-Gamma) above it.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if n <= crossover:
        out = _hermite_phi_recurrence(n, x)
    else:
        out = _hermite_phi_asymptotic(n, x)
    return float(out[0]) if scalar else out


def hermite_phi_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """All normalized Hermite functions 0..n_max-1 at x, shape (n_max, len(x)).

    The normalized recurrence is bounded, so this is overflow-safe at any
    order; it is the evaluation path used inside the sink solver.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((n_max, x.size))
    table[0] = np.exp(-0.5 * x * x) / _PI_QUARTER
    if n_max > 1:
        table[1] = math.sqrt(2.0) * x * table[0]
    for k in range(1, n_max - 1):
        table[k + 1] = x * math.sqrt(2.0 / (k + 1)) * table[k] - \
            math.sqrt(k / (k + 1.0)) * table[k - 1]
    return table


def _x_units(model: OuDiffusionModel) -> float:
    """Conversion MHz -> dimensionless oscillator coordinate sqrt(theta/2D)."""
    return math.sqrt(model.theta / (2.0 * model.d_coeff))


def eigen_weight(model: OuDiffusionModel, n: int, f, crossover: int = 50):
    """Expansion weight w_n(f) = psi_0(f) psi_n(f) psi_n(0) / psi_0(0) in MHz^-1.

    The source sits at f = 0 in model coordinates; odd orders vanish there.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n % 2 == 1:
        out = np.zeros(np.shape(f)) if np.ndim(f) else 0.0
        return out
    scale = _x_units(model)
    x = np.asarray(f, dtype=float) * scale
    phi0 = stable_hermite_gaussian(0, x, crossover)
    phin = stable_hermite_gaussian(n, x, crossover)
    phin0 = stable_hermite_gaussian(n, 0.0, crossover)
    phi00 = 1.0 / _PI_QUARTER
    out = scale * phi0 * phin * phin0 / phi00
    return float(out) if np.ndim(out) == 0 else out


def _weight_table(model: OuDiffusionModel, f: np.ndarray, n_eigen: int,
                  source: float = 0.0) -> np.ndarray:
    """w_n(f) for n < n_eigen with the source at ``source``; shape (n_eigen, len(f))."""
    scale = _x_units(model)
    x = np.atleast_1d(np.asarray(f, dtype=float)) * scale
    x0 = np.array([source * scale])
    table = hermite_phi_table(n_eigen, x)
    table0 = hermite_phi_table(n_eigen, x0)[:, 0]
    phi0_x = table[0]
    phi0_src = table0[0]
    return scale * phi0_x * table * (table0[:, None] / phi0_src)


def laplace_p0(model: OuDiffusionModel, f, s, settings: SolverSettings = SolverSettings(),
               f_start: float = 0.0):
    """Laplace transform of the sinkless solution, sum_n w_n(f)/(n theta + s)."""
    s = np.asarray(s, dtype=complex)
    w = _weight_table(model, f, settings.n_eigen, source=f_start)
    n = np.arange(settings.n_eigen)
    resolvent = 1.0 / (n[:, None] * model.theta + s.ravel()[None, :])
    out = np.tensordot(w, resolvent, axes=(0, 0))  # (len(f), len(s))
    if np.ndim(f) == 0 and s.ndim == 0:
        return complex(out[0, 0])
    if np.ndim(f) == 0:
        return out[0].reshape(s.shape)
    if s.ndim == 0:
        return out[:, 0]
    return out


def laplace_p_with_sink(model: OuDiffusionModel, sink: IonizationSink, f, s,
                        settings: SolverSettings = SolverSettings()):
    """Laplace-domain solution with the delta sink at f_ion (start at f_ion):
    P~(f, s) = P~0(f, s) (1 - S P~0(0, s) / (1 + S P~0(0, s)))."""
    p0_f = laplace_p0(model, f, s, settings, f_start=sink.f_ion)
    p0_sink = laplace_p0(model, sink.f_ion, s, settings, f_start=sink.f_ion)
    return p0_f * (1.0 - sink.strength_s * p0_sink / (1.0 + sink.strength_s * p0_sink))


# ---------------------------------------------------------------------------
# fixed-Talbot inversion
# ---------------------------------------------------------------------------

def _talbot_nodes(t: float, m: int):
    r = 2.0 * m / (5.0 * t)
    theta = np.arange(1, m) * math.pi / m
    cot = 1.0 / np.tan(theta)
    s = np.empty(m, dtype=complex)
    s[0] = r
    s[1:] = r * theta * (cot + 1j)
    gamma = np.empty(m, dtype=complex)
    gamma[0] = 0.5 * math.exp(r * t)
    gamma[1:] = np.exp(t * s[1:]) * (1.0 + 1j * theta * (1.0 + cot * cot) - 1j * cot)
    return s, gamma, r


def invert_laplace(transform: Callable, t: float,
                   settings: SolverSettings = SolverSettings(),
                   min_valid_time: float | None = None) -> float:
    """Invert a Laplace transform at time t with the fixed-Talbot contour.

    ``transform`` must accept a complex numpy array of s values.  When
    ``min_valid_time`` is given, times below it raise ValidityError (the
    truncated eigen-expansion is only valid for t >> 1/(theta N_eigen)).
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    if min_valid_time is not None and t < min_valid_time:
        raise ValidityError(
            f"t = {t} s is below the validity bound {min_valid_time} s "
            "(truncated expansion requires t >> 1/(theta * n_eigen))")
    m = settings.inversion_nodes
    s, gamma, r = _talbot_nodes(t, m)
    vals = np.asarray(transform(s), dtype=complex)
    terms = np.real(gamma * vals)
    total = math.fsum(terms) if settings.compensated_summation else float(np.sum(terms))
    return 2.0 / (5.0 * t) * total


# ---------------------------------------------------------------------------
# sink solver
# ---------------------------------------------------------------------------

class SinkSolver:
    """Diffusion with a delta ionization sink, solved per diffusion time on a
    fixed frequency grid.

    Caches the eigen-weight tables, so repeated evaluations (fits, S sweeps)
    are cheap.  All returned densities are MHz^-1 on ``grid``.
    """

    def __init__(self, model: OuDiffusionModel, sink: IonizationSink,
                 settings: SolverSettings = SolverSettings(),
                 grid: np.ndarray | None = None):
        self.model = model
        self.sink = sink
        self.settings = settings
        if grid is None:
            half = settings.grid_halfwidth_sigmas * math.sqrt(model.stationary_variance)
            centre = sink.f_ion
            grid = np.linspace(centre - half, centre + half, settings.grid_points)
        self.grid = np.asarray(grid, dtype=float)
        self._w_f = _weight_table(model, self.grid, settings.n_eigen, source=sink.f_ion)
        self._w_sink = _weight_table(model, np.array([sink.f_ion]), settings.n_eigen,
                                     source=sink.f_ion)[:, 0]
        self._n_theta = np.arange(settings.n_eigen) * model.theta

    @property
    def min_valid_time(self) -> float:
        return self.settings.min_valid_time_factor / (self.model.theta * self.settings.n_eigen)

    def _check_time(self, tau_d: float) -> None:
        if tau_d < self.min_valid_time:
            raise ValidityError(
                f"tau_d = {tau_d} s is below the validity bound {self.min_valid_time} s "
                "(truncated expansion requires tau_d >> 1/(theta * n_eigen))")

    def _resolvent(self, s: np.ndarray) -> np.ndarray:
        return 1.0 / (self._n_theta[:, None] + s[None, :])

    def pdf(self, tau_d: float, strength_s: float | None = None) -> np.ndarray:
        """P(f, tau_d) on the grid, by Talbot inversion of the sink solution."""
        self._check_time(tau_d)
        strength = self.sink.strength_s if strength_s is None else strength_s
        s, gamma, _ = _talbot_nodes(tau_d, self.settings.inversion_nodes)
        res = self._resolvent(s)
        p0_f = self._w_f.T @ res  # (nf, m)
        p0_sink = self._w_sink @ res  # (m,)
        factor = 1.0 / (1.0 + strength * p0_sink)
        vals = p0_f * factor[None, :]
        return 2.0 / (5.0 * tau_d) * np.real(vals @ gamma)

    def survival(self, tau_d: float, strength_s: float | None = None) -> float:
        """Integral of P over the grid (1 when S = 0, up to inversion error)."""
        return float(np.trapezoid(self.pdf(tau_d, strength_s), self.grid))

    def counts(self, line: HomogeneousLine, tau_d: float, probe_detuning: float = 0.0,
               strength_s: float | None = None) -> float:
        """Counts from convolving the sink solution with the homogeneous line."""
        pdf = self.pdf(tau_d, strength_s)
        return float(np.trapezoid(pdf * line.counts(probe_detuning - self.grid), self.grid))

    def counts_factorized(self, line: HomogeneousLine, taus: Sequence[float],
                          probe_detuning: float = 0.0) -> Callable[[float], np.ndarray]:
        """Precompute per-time tables so counts(S) costs O(nodes) per call.

        The sink strength enters only through the per-node scalar factor
        1/(1 + S P~0(sink, s_k)), so the Lorentzian-weighted integrals of
        P~0 can be frozen once per (model, taus, grid).
        """
        taus = [float(t) for t in taus]
        for t in taus:
            self._check_time(t)
        lor = line.counts(probe_detuning - self.grid)
        tables = []
        for t in taus:
            s, gamma, _ = _talbot_nodes(t, self.settings.inversion_nodes)
            res = self._resolvent(s)
            q = (lor[:, None] * (self._w_f.T @ res))  # (nf, m)
            q_int = np.trapezoid(q, self.grid, axis=0)  # (m,)
            p0_sink = self._w_sink @ res
            tables.append((t, gamma, q_int, p0_sink))

        def counts_of_s(strength: float) -> np.ndarray:
            out = np.empty(len(tables))
            for i, (t, gamma, q_int, p0_sink) in enumerate(tables):
                vals = q_int / (1.0 + strength * p0_sink)
                out[i] = 2.0 / (5.0 * t) * np.sum(np.real(gamma * vals))
            return out

        return counts_of_s


def counts_with_ionization(model: OuDiffusionModel, sink: IonizationSink,
                           line: HomogeneousLine, tau_d: float,
                           probe_detuning: float = 0.0,
                           settings: SolverSettings = SolverSettings()) -> float:
    """Counts under diffusion plus delta-sink ionization (backward-time sense;
    apply sink.forward_rescale for the forward-time correlation)."""
    solver = SinkSolver(model, sink, settings)
    return solver.counts(line, tau_d, probe_detuning)


# ---------------------------------------------------------------------------
# joint fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerDataset:
    power_nw: float
    curve: DecayCurve


def joint_fit_backward(datasets: Sequence[PowerDataset], gamma_h_fixed: float,
                       f0: float = 0.0) -> FitResult:
    """Joint fit of backward-correlation counts for all powers.

    One shared inhomogeneous linewidth gamma_i; a separate diffusion
    coefficient D and peak counts C0 per power.  gamma_h is fixed (strong
    covariance with gamma_i otherwise).  Parameter names: gamma_i, then
    D_<power>, C0_<power> per dataset.
    """
    if not datasets:
        raise FitError("need at least one dataset")
    slices = []
    start = 0
    for ds in datasets:
        n = len(ds.curve)
        slices.append(slice(start, start + n))
        start += n
    x_all = np.concatenate([ds.curve.x for ds in datasets])
    y_all = np.concatenate([ds.curve.y for ds in datasets])
    sig_all = (np.concatenate([ds.curve.sigma for ds in datasets])
               if all(ds.curve.sigma is not None for ds in datasets) else None)

    hw = 0.5 * gamma_h_fixed

    def model_fn(x, params):
        gamma_i = params[0]
        out = np.empty_like(x)
        for i, sl in enumerate(slices):
            d_i, c0_i = params[1 + 2 * i], params[2 + 2 * i]
            model = OuDiffusionModel(d_coeff=d_i, gamma_i=gamma_i, f0=f0)
            sigma = np.sqrt(ou_variance(model, x[sl]))
            out[sl] = c0_i * math.pi * hw * voigt_density(-ou_mean(model, x[sl]), sigma, hw)
        return out

    # initial guesses: C0 from the first point, gamma_i from the plateau
    # ratio, D from the half-decay time
    names = ["gamma_i"]
    p0 = []
    gammas = []
    for ds in datasets:
        y = ds.curve.y
        c0_guess = float(np.max(y))
        plateau = max(float(np.mean(y[-2:])) / c0_guess, 1e-3)
        sigma_inf = hw * math.sqrt(math.pi / 2.0) / plateau / math.sqrt(2.0 * math.pi) * 2.0
        gammas.append(FWHM_PER_SIGMA * sigma_inf)
        half_level = 0.5 * (1.0 + plateau) * c0_guess
        below = np.nonzero(y < half_level)[0]
        t_half = float(ds.curve.x[below[0]]) if below.size else float(ds.curve.x[-1])
        d_guess = gamma_h_fixed ** 2 / (2.0 * LN2_8 * t_half)
        p0.extend([d_guess, c0_guess])
        tag = f"{ds.power_nw:g}nW"
        names.extend([f"D_{tag}", f"C0_{tag}"])
    p0 = [float(np.median(gammas))] + p0
    bounds = [(1e-6, np.inf)] * len(p0)
    return least_squares(model_fn, p0, x_all, y_all, sigma=sig_all,
                         bounds=bounds, param_names=names)


def fit_ionization_rate(dataset: PowerDataset, backward_model: OuDiffusionModel,
                        line: HomogeneousLine, forward_rescale: float = 0.96,
                        settings: SolverSettings = SolverSettings(),
                        s_initial: float = 1.0) -> FitResult:
    """One-parameter fit of the sink strength S to forward-correlation counts.

    The backward-fit diffusion model and homogeneous line are held fixed;
    the model counts are forward_rescale * ionizing counts.
    """
    solver = SinkSolver(backward_model, IonizationSink(strength_s=0.0), settings)
    counts_of_s = solver.counts_factorized(line, dataset.curve.x)

    def model_fn(x, params):
        return forward_rescale * counts_of_s(float(params[0]))

    return least_squares(model_fn, [s_initial], dataset.curve.x, dataset.curve.y,
                         sigma=dataset.curve.sigma, bounds=[(0.0, np.inf)],
                         param_names=["S"])


# ---------------------------------------------------------------------------
# dataset files
# ---------------------------------------------------------------------------

def write_diffusion_csv(path: str | Path, taus: np.ndarray, forward: np.ndarray,
                        backward: np.ndarray, stderr: np.ndarray) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tau_d_s", "counts_forward", "counts_backward", "stderr"])
        for row in zip(taus, forward, backward, stderr):
            writer.writerow([repr(float(v)) for v in row])


def read_diffusion_csv(path: str | Path) -> tuple[DecayCurve, DecayCurve]:
    """Returns (forward, backward) curves with shared tau axis and stderr."""
    taus, fwd, bwd, err = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        while header and header[0].lstrip().startswith("#"):
            header = next(reader)
        if [h.strip() for h in header] != ["tau_d_s", "counts_forward", "counts_backward", "stderr"]:
            raise ValueError(f"unexpected diffusion CSV header: {header}")
        for row in reader:
            if not row or row[0].lstrip().startswith("#"):
                continue
            taus.append(float(row[0]))
            fwd.append(float(row[1]))
            bwd.append(float(row[2]))
            err.append(float(row[3]))
    taus_a, err_a = np.array(taus), np.array(err)
    return (DecayCurve(taus_a, np.array(fwd), err_a),
            DecayCurve(taus_a, np.array(bwd), err_a))


def read_manifest(path: str | Path) -> list[tuple[float, Path]]:
    """Manifest lines: '<power_nW> <csv-file>' relative to the manifest."""
    base = Path(path).parent
    out = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        power, name = line.split(None, 1)
        out.append((float(power), base / name.strip()))
    return out
