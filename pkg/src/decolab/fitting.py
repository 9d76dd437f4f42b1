"""Nonlinear least-squares engine and the decay/scaling fits built on it.

The engine is a damped Gauss-Newton (Levenberg-Marquardt) minimizer of
weighted squared residuals with a forward-difference Jacobian (relative
step 1e-6) and box bounds enforced by projection.  It is deterministic:
same inputs, same iterates.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DecayCurve",
    "FitResult",
    "FitError",
    "least_squares",
    "fit_stretched_exp",
    "fit_power_scaling",
    "stretched_exp",
    "rescale_to_unit_amplitude",
    "read_decay_csv",
    "write_decay_csv",
    "fit_result_to_json",
]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class DecayCurve:
    """Samples (x, y) with optional standard errors sigma."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have equal length")
        if self.sigma is not None and self.sigma.shape != self.x.shape:
            raise ValueError("sigma must match x")
        if np.any(np.diff(self.x) <= 0.0):
            raise ValueError("x must be strictly increasing")

    def __len__(self) -> int:
        return self.x.size


@dataclass
class FitResult:
    param_names: list[str]
    params: dict[str, float]
    stderr: dict[str, float]
    covariance: np.ndarray
    reduced_chi2: float
    converged: bool
    n_iter: int = 0
    message: str = ""

    def values(self) -> np.ndarray:
        return np.array([self.params[k] for k in self.param_names])


def _forward_jacobian(fn: Callable[[np.ndarray], np.ndarray], p: np.ndarray,
                      r0: np.ndarray, rel_step: float = 1e-6,
                      scale: np.ndarray | None = None) -> np.ndarray:
    jac = np.empty((r0.size, p.size))
    for i in range(p.size):
        # relative step on the larger of the current value and the typical
        # scale (from the initial guess), so parameters converging to zero
        # keep a resolvable step; absolute fallback if both vanish
        typ = abs(p[i]) if scale is None else max(abs(p[i]), scale[i])
        h = rel_step * typ if typ != 0.0 else rel_step
        pp = p.copy()
        pp[i] += h
        jac[:, i] = (fn(pp) - r0) / h
    return jac


def least_squares(model_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                  params0: Sequence[float],
                  x: np.ndarray,
                  y: np.ndarray,
                  sigma: np.ndarray | None = None,
                  bounds: Sequence[tuple[float, float]] | None = None,
                  param_names: Sequence[str] | None = None,
                  jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                  max_iter: int = 500,
                  xtol: float = 1e-12,
                  ftol: float = 1e-14) -> FitResult:
    """Levenberg-Marquardt fit of model_fn(x, params) to y.

    Weighted by 1/sigma when sigma is given.  Bounds are (lo, hi) pairs per
    parameter; trial steps are projected into the box.  On reaching max_iter
    the last iterate is returned with converged=False.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = np.array(params0, dtype=float)
    npar = p.size
    names = list(param_names) if param_names is not None else [f"p{i}" for i in range(npar)]
    if sigma is not None:
        w = 1.0 / np.asarray(sigma, dtype=float)
    else:
        w = np.ones_like(y)
    lo = np.full(npar, -np.inf)
    hi = np.full(npar, np.inf)
    if bounds is not None:
        for i, (l, h) in enumerate(bounds):
            lo[i], hi[i] = l, h
        if np.any(p < lo) or np.any(p > hi):
            raise FitError("initial parameters must lie within bounds")

    def residuals(params: np.ndarray) -> np.ndarray:
        return (model_fn(x, params) - y) * w

    typical = np.abs(p)

    def weighted_jacobian(params: np.ndarray, r0: np.ndarray) -> np.ndarray:
        if jacobian is not None:
            return jacobian(x, params) * w[:, None]
        return _forward_jacobian(residuals, params, r0, scale=typical)

    def scaled_normal(jac: np.ndarray):
        # rescale to a unit-diagonal normal matrix; parameters with zero
        # sensitivity get scale 0 and are frozen
        hess = jac.T @ jac
        d = np.sqrt(np.diag(hess))
        ok = np.isfinite(d) & (d > 0.0)
        dinv = np.zeros_like(d)
        dinv[ok] = 1.0 / d[ok]
        hs = dinv[:, None] * hess * dinv[None, :]
        np.fill_diagonal(hs, np.where(ok, 1.0, 0.0))
        return hs, dinv, ok

    r = residuals(p)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    message = "max iterations reached"
    it = 0
    for it in range(1, max_iter + 1):
        jac = weighted_jacobian(p, r)
        grad = jac.T @ r
        if float(np.max(np.abs(grad), initial=0.0)) < 1e-16 * max(cost, 1e-30):
            converged = True
            message = "gradient below tolerance"
            break
        hs, dinv, ok = scaled_normal(jac)
        grad_s = dinv * grad
        accepted = False
        for _ in range(60):
            try:
                ys = np.linalg.solve(hs + lam * np.eye(npar), -grad_s)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            step = dinv * ys
            p_trial = np.clip(p + step, lo, hi)
            r_trial = residuals(p_trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial < cost:
                rel_step = float(np.max(np.abs(p_trial - p) / np.maximum(np.abs(p), 1e-30)))
                df = cost - cost_trial
                p, r, cost = p_trial, r_trial, cost_trial
                lam = max(lam / 3.0, 1e-14)
                accepted = True
                if rel_step < xtol or df < ftol * max(cost, 1e-300):
                    converged = True
                    message = "step/cost below tolerance"
                break
            lam *= 2.0
        if converged:
            break
        if not accepted:
            converged = True
            message = "no downhill step found (local minimum or stalled)"
            break

    # covariance at the solution, via the scaled normal matrix
    jac = weighted_jacobian(p, r)
    dof = max(len(y) - npar, 1)
    chi2 = cost
    reduced = chi2 / dof if len(y) > npar else float("nan")
    hs, dinv, ok = scaled_normal(jac)
    try:
        if not np.all(ok):
            raise np.linalg.LinAlgError
        cov = dinv[:, None] * np.linalg.inv(hs) * dinv[None, :]
        if sigma is None:
            cov = cov * (chi2 / dof)
    except np.linalg.LinAlgError:
        cov = np.full((npar, npar), np.nan)
        converged = False
        message = "singular normal equations (unidentifiable parameters)"
    stderr = {n: float(math.sqrt(abs(cov[i, i]))) if np.isfinite(cov[i, i]) else float("nan")
              for i, n in enumerate(names)}
    return FitResult(param_names=names,
                     params={n: float(v) for n, v in zip(names, p)},
                     stderr=stderr, covariance=cov,
                     reduced_chi2=float(reduced) if reduced == reduced else float("nan"),
                     converged=converged, n_iter=it, message=message)


def stretched_exp(x, params):
    """A exp[-(x / t2)^n]."""
    a, t2, n = params
    return a * np.exp(-np.power(np.asarray(x, dtype=float) / t2, n))


def fit_stretched_exp(curve: DecayCurve, bounds: dict[str, tuple[float, float]] | None = None,
                      fix_n: float | None = None) -> FitResult:
    """Fit A exp[-(x/T2)^n]; the stretch exponent is bounded to (0, 5].

    Initial guesses come from a log-log linearization of -ln(y/A).
    """
    if len(curve) < 4:
        raise FitError("need at least 4 points")
    x, y = curve.x, curve.y
    if float(np.ptp(y)) < 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        # constant data: T2 and n are unidentifiable
        return FitResult(param_names=["A", "T2", "n"],
                         params={"A": float(np.mean(y)), "T2": float("nan"), "n": float("nan")},
                         stderr={k: float("nan") for k in ("A", "T2", "n")},
                         covariance=np.full((3, 3), np.nan), reduced_chi2=float("nan"),
                         converged=False, message="constant curve: decay unidentifiable")
    a0 = float(np.max(y))
    mask = (y > 0.0) & (y < 0.999 * a0) & (x > 0.0)
    if np.count_nonzero(mask) >= 2:
        u = np.log(x[mask])
        v = np.log(-np.log(np.clip(y[mask] / a0, 1e-300, 1.0 - 1e-12)))
        slope, intercept = np.polyfit(u, v, 1)
        n0 = float(np.clip(slope, 0.05, 5.0))
        t20 = float(np.exp(-intercept / n0))
    else:
        n0, t20 = 1.0, float(np.median(x))
    if fix_n is not None:
        def model(xv, params):
            return stretched_exp(xv, (params[0], params[1], fix_n))

        res = least_squares(model, [a0, t20], x, y, sigma=curve.sigma,
                            bounds=[(0.0, np.inf), (1e-300, np.inf)],
                            param_names=["A", "T2"])
        res.params["n"] = fix_n
        res.stderr["n"] = 0.0
        res.param_names = ["A", "T2", "n"]
        return res
    user = bounds or {}
    box = [user.get("A", (0.0, np.inf)),
           user.get("T2", (1e-300, np.inf)),
           user.get("n", (1e-6, 5.0))]
    n0 = min(max(n0, box[2][0]), box[2][1])
    return least_squares(stretched_exp, [a0, t20, n0], x, y, sigma=curve.sigma,
                         bounds=box, param_names=["A", "T2", "n"])


def fit_power_scaling(n_pulses: Sequence[float], t2: Sequence[float],
                      sigma: Sequence[float] | None = None,
                      log_space: bool = True) -> FitResult:
    """Fit T2(N) = T0 N^eta.

    Default is a weighted linear regression in log-log space (exact for
    power-law data); log_space=False runs the nonlinear engine directly.
    """
    n = np.asarray(n_pulses, dtype=float)
    t = np.asarray(t2, dtype=float)
    if n.size < 2 or n.size != t.size:
        raise FitError("need at least two (N, T2) pairs of equal length")
    if np.any(n <= 0.0) or np.any(t <= 0.0):
        raise FitError("N and T2 values must be positive")
    if not log_space:
        def model(xv, params):
            return params[0] * np.power(xv, params[1])

        guess = fit_power_scaling(n, t, sigma, log_space=True)
        return least_squares(model, [guess.params["T0"], guess.params["eta"]], n, t,
                             sigma=None if sigma is None else np.asarray(sigma, dtype=float),
                             bounds=[(1e-300, np.inf), (-10.0, 10.0)],
                             param_names=["T0", "eta"])
    ln_n = np.log(n)
    ln_t = np.log(t)
    if sigma is not None:
        s = np.asarray(sigma, dtype=float)
        weights = (t / s) ** 2  # var(ln t) = (sigma/t)^2
    else:
        weights = np.ones_like(t)
    design = np.column_stack([np.ones_like(ln_n), ln_n])
    w = np.sqrt(weights)
    sol, *_ = np.linalg.lstsq(design * w[:, None], ln_t * w, rcond=None)
    intercept, eta = float(sol[0]), float(sol[1])
    resid = (design @ sol - ln_t) * w
    dof = n.size - 2
    chi2 = float(resid @ resid)
    gram_inv = np.linalg.inv((design * w[:, None]).T @ (design * w[:, None]))
    cov_log = gram_inv if sigma is not None else gram_inv * (chi2 / dof if dof > 0 else 0.0)
    t0 = math.exp(intercept)
    # delta method: T0 = exp(intercept)
    cov = np.array([[cov_log[0, 0] * t0 * t0, cov_log[0, 1] * t0],
                    [cov_log[1, 0] * t0, cov_log[1, 1]]])
    return FitResult(param_names=["T0", "eta"],
                     params={"T0": t0, "eta": eta},
                     stderr={"T0": math.sqrt(abs(cov[0, 0])), "eta": math.sqrt(abs(cov[1, 1]))},
                     covariance=cov,
                     reduced_chi2=chi2 / dof if dof > 0 else float("nan"),
                     converged=True, n_iter=1,
                     message="log-log weighted linear regression"
                             + ("; dof=0, exact interpolation" if dof == 0 else ""))


def rescale_to_unit_amplitude(curve: DecayCurve, fit: FitResult) -> DecayCurve:
    """Divide the data by the fitted amplitude A (presentation helper)."""
    a = fit.params.get("A")
    if a is None or not np.isfinite(a) or a == 0.0:
        raise FitError("fit has no finite amplitude to rescale by")
    sigma = None if curve.sigma is None else curve.sigma / a
    return DecayCurve(x=curve.x, y=curve.y / a, sigma=sigma)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

class DataError(ValueError):
    """Unparseable data file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"data error{where}: {message}")


def read_decay_csv(path: str | Path) -> DecayCurve:
    """Read x,y[,sigma] rows; a header row is detected and skipped."""
    xs: list[float] = []
    ys: list[float] = []
    ss: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(v) for v in row]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise DataError(f"non-numeric row {row!r}", line=lineno) from None
            if len(vals) < 2:
                raise DataError("expected at least two columns (x, y)", line=lineno)
            xs.append(vals[0])
            ys.append(vals[1])
            if len(vals) >= 3:
                ss.append(vals[2])
    if not xs:
        raise DataError("file contains no data rows")
    if ss and len(ss) != len(xs):
        raise DataError("sigma column present only on some rows")
    try:
        return DecayCurve(np.array(xs), np.array(ys), np.array(ss) if ss else None)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def write_decay_csv(path: str | Path, curve: DecayCurve,
                    header: tuple[str, ...] = ("x", "y", "sigma")) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        cols = 3 if curve.sigma is not None else 2
        writer.writerow(header[:cols])
        for i in range(len(curve)):
            row = [repr(float(curve.x[i])), repr(float(curve.y[i]))]
            if curve.sigma is not None:
                row.append(repr(float(curve.sigma[i])))
            writer.writerow(row)


def fit_result_to_json(fit: FitResult, path: str | Path | None = None) -> str:
    payload = {
        "params": fit.params,
        "stderr": fit.stderr,
        "covariance": [[float(v) for v in row] for row in np.atleast_2d(fit.covariance)],
        "reduced_chi2": fit.reduced_chi2,
        "converged": fit.converged,
        "n_iter": fit.n_iter,
        "message": fit.message,
    }
    text = json.dumps(payload, indent=2, allow_nan=True)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
