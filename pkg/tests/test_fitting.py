import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decolab.fitting import (DataError, DecayCurve, FitError, fit_power_scaling,
                             fit_result_to_json, fit_stretched_exp, least_squares,
                             read_decay_csv, rescale_to_unit_amplitude,
                             stretched_exp, write_decay_csv)
from conftest import make_rng
from oracles import wls_normal_equations

X20 = np.linspace(0.5, 30.0, 20)


def test_decay_curve_validation():
    with pytest.raises(ValueError):
        DecayCurve(np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        DecayCurve(np.array([1.0, 2.0]), np.array([1.0]))


def test_stretched_exp_noiseless_recovery():
    y = stretched_exp(X20, (1.0, 11.2, 1.7))
    fit = fit_stretched_exp(DecayCurve(X20, y))
    assert fit.converged
    assert fit.params["A"] == pytest.approx(1.0, rel=1e-3)
    assert fit.params["T2"] == pytest.approx(11.2, rel=1e-3)
    assert fit.params["n"] == pytest.approx(1.7, rel=1e-3)
    assert np.allclose(fit.covariance, fit.covariance.T)


def test_stretched_exp_constant_curve_flagged():
    fit = fit_stretched_exp(DecayCurve(X20, np.full_like(X20, 0.7)))
    assert not fit.converged


def test_stretched_exp_requires_points():
    with pytest.raises(FitError):
        fit_stretched_exp(DecayCurve(np.array([1.0, 2.0, 3.0]), np.array([1.0, 0.5, 0.2])))


def test_fix_n_recovers_plain_exponential():
    y = np.exp(-X20 / 7.3)
    fit = fit_stretched_exp(DecayCurve(X20, y), fix_n=1.0)
    assert fit.params["T2"] == pytest.approx(7.3, rel=1e-9)
    assert fit.params["n"] == 1.0


def test_stretch_exponent_bounded_to_five():
    x = np.linspace(0.5, 2.0, 24)
    y = stretched_exp(x, (1.0, 1.3, 8.0))  # generated beyond the allowed bound
    fit = fit_stretched_exp(DecayCurve(x, y))
    assert fit.params["n"] <= 5.0 + 1e-12


def test_power_scaling_exact():
    n = np.array([1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 24000.0])
    fit = fit_power_scaling(n, 16e-3 * n ** 0.67)
    assert fit.params["T0"] == pytest.approx(16e-3, rel=1e-12)
    assert fit.params["eta"] == pytest.approx(0.67, abs=1e-12)
    lin = fit_power_scaling(n, 1.8e-3 * n)
    assert lin.params["eta"] == pytest.approx(1.0, abs=1e-12)
    assert lin.params["T0"] == pytest.approx(1.8e-3, rel=1e-12)


def test_power_scaling_two_points_exact_interpolation():
    fit = fit_power_scaling([8.0, 64.0], [1e-3, 3e-3])
    assert fit.params["T0"] * 8.0 ** fit.params["eta"] == pytest.approx(1e-3, rel=1e-12)
    assert fit.params["T0"] * 64.0 ** fit.params["eta"] == pytest.approx(3e-3, rel=1e-12)
    assert "dof=0" in fit.message


def test_power_scaling_rejects_nonpositive():
    with pytest.raises(FitError):
        fit_power_scaling([1.0, 2.0, 4.0], [1.0, -2.0, 4.0])


@given(st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=25)
def test_power_scaling_scale_covariance(c):
    n = np.array([2.0, 8.0, 32.0, 128.0])
    t2 = 4e-3 * n ** 0.61
    base = fit_power_scaling(n, t2)
    scaled = fit_power_scaling(n, c * t2)
    assert scaled.params["eta"] == pytest.approx(base.params["eta"], abs=1e-12)
    assert scaled.params["T0"] == pytest.approx(c * base.params["T0"], rel=1e-9)


def test_power_scaling_nonlinear_option_agrees():
    n = np.array([2.0, 8.0, 32.0, 128.0, 512.0])
    t2 = 5e-3 * n ** 0.71
    a = fit_power_scaling(n, t2, log_space=True)
    b = fit_power_scaling(n, t2, log_space=False)
    assert b.params["T0"] == pytest.approx(a.params["T0"], rel=1e-6)
    assert b.params["eta"] == pytest.approx(a.params["eta"], rel=1e-6)


def test_engine_zero_residual_is_immediate():
    def lin(x, p):
        return p[0] * x + p[1]

    res = least_squares(lin, [2.0, -1.0], X20, 2.0 * X20 - 1.0)
    assert res.converged and res.n_iter == 1


def test_engine_matches_normal_equations():
    rng = make_rng(1)
    x = np.linspace(0.0, 1.0, 40)
    y = 1.3 * x + 0.4 + rng.normal(0.0, 0.02, 40)
    sigma = np.full(40, 0.02)

    def lin(xv, p):
        return p[0] * xv + p[1]

    fit = least_squares(lin, [0.0, 0.0], x, y, sigma=sigma)
    design = np.column_stack([x, np.ones_like(x)])
    params, cov = wls_normal_equations(design, y, 1.0 / sigma ** 2)
    assert fit.params["p0"] == pytest.approx(params[0], abs=1e-10)
    assert fit.params["p1"] == pytest.approx(params[1], abs=1e-10)
    assert np.allclose(fit.covariance, cov, rtol=1e-6)


def test_engine_rosenbrock_valley():
    def rosen(xv, p):
        return np.array([10.0 * (p[1] - p[0] ** 2), 1.0 - p[0]])

    res = least_squares(rosen, [-1.2, 1.0], np.zeros(2), np.zeros(2))
    assert res.converged
    assert res.params["p0"] == pytest.approx(1.0, abs=1e-6)
    assert res.params["p1"] == pytest.approx(1.0, abs=1e-6)


def test_engine_bounds_enforced():
    def lin(x, p):
        return p[0] * x

    with pytest.raises(FitError):
        least_squares(lin, [2.0], X20, X20, bounds=[(0.0, 1.0)])
    res = least_squares(lin, [0.5], X20, 3.0 * X20, bounds=[(0.0, 1.0)])
    assert res.params["p0"] == pytest.approx(1.0)


def test_engine_reorder_invariance():
    rng = make_rng(2)
    x = np.linspace(0.1, 5.0, 30)
    y = stretched_exp(x, (0.9, 2.0, 1.3)) + rng.normal(0, 0.005, 30)
    perm = rng.permutation(30)

    fit_a = least_squares(stretched_exp, [1.0, 1.5, 1.0], x, y,
                          param_names=["A", "T2", "n"])
    fit_b = least_squares(stretched_exp, [1.0, 1.5, 1.0], x[perm], y[perm],
                          param_names=["A", "T2", "n"])
    for k in ("A", "T2", "n"):
        assert fit_a.params[k] == pytest.approx(fit_b.params[k], rel=1e-9)


def test_forward_jacobian_matches_central_difference():
    from decolab.fitting import _forward_jacobian

    def model(p):
        return np.array([math.sin(p[0]) * p[1], p[0] * p[1] ** 2, math.exp(0.3 * p[0])])

    p = np.array([0.7, 1.9])
    jac = _forward_jacobian(model, p, model(p))
    central = np.empty_like(jac)
    for i in range(2):
        h = 1e-6 * abs(p[i])
        pp, pm = p.copy(), p.copy()
        pp[i] += h
        pm[i] -= h
        central[:, i] = (model(pp) - model(pm)) / (2 * h)
    assert np.allclose(jac, central, rtol=1e-4)


def test_noisy_recovery_within_reported_errors():
    rng = make_rng(3)
    ok = 0
    trials = 40
    for _ in range(trials):
        y = stretched_exp(X20, (1.0, 11.2, 1.7)) + rng.normal(0.0, 0.01, X20.size)
        fit = fit_stretched_exp(DecayCurve(X20, y, np.full(X20.size, 0.01)))
        if not fit.converged:
            continue
        ok += all(abs(fit.params[k] - v) <= 5.0 * fit.stderr[k]
                  for k, v in (("A", 1.0), ("T2", 11.2), ("n", 1.7)))
    assert ok >= 0.95 * trials


def test_rescale_to_unit_amplitude():
    y = stretched_exp(X20, (1.07, 9.0, 1.2))
    curve = DecayCurve(X20, y)
    fit = fit_stretched_exp(curve)
    rescaled = rescale_to_unit_amplitude(curve, fit)
    assert rescaled.y[0] == pytest.approx(y[0] / fit.params["A"])


def test_csv_round_trip(tmp_path):
    curve = DecayCurve(X20, stretched_exp(X20, (1.0, 5.0, 1.0)), np.full(X20.size, 0.01))
    path = tmp_path / "curve.csv"
    write_decay_csv(path, curve)
    back = read_decay_csv(path)
    assert np.array_equal(back.x, curve.x)
    assert np.array_equal(back.y, curve.y)
    assert np.array_equal(back.sigma, curve.sigma)


def test_csv_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1.0,2.0\noops,3.0\n", encoding="utf-8")
    with pytest.raises(DataError) as err:
        read_decay_csv(path)
    assert err.value.line == 3


def test_fit_result_json(tmp_path):
    fit = fit_stretched_exp(DecayCurve(X20, stretched_exp(X20, (1.0, 5.0, 1.0))))
    text = fit_result_to_json(fit, tmp_path / "fit.json")
    assert '"params"' in text and (tmp_path / "fit.json").exists()
