"""Command-line front end: simulations, Monte Carlo baths, fits and growth
calculators, with CSV/JSON outputs and SVG plots.

Numeric arguments accept unit suffixes (5ms, 280us, 2.95mG, 22MHz, 15nW,
0.0442%); times and fields are converted to SI on parsing, linewidths are
kept in MHz (the diffusion model's working unit).  Every output records the
seed; rerunning with the same seed reproduces files byte for byte.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 fit non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .constants import MG_TO_TESLA, TORR_TO_PA
from .noise import (AcFieldModel, AmplitudeScaleProcess, ConfigError,
                    load_field_config, table1_model)
from . import bath as bathmod
from . import diffusion as diff
from . import growth
from .feedforward import ShotConfig, run_feedforward
from .fitting import (DataError, DecayCurve, FitError, fit_power_scaling,
                      fit_stretched_exp, fit_result_to_json, read_decay_csv,
                      stretched_exp)
from .plotsvg import SvgPlot, histogram_plot, quick_line_plot
from .sequences import PulseSequence, expectation_unsynchronized, ramsey_envelope

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NOCONV = 4


class NonConvergence(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# unit parsing
# ---------------------------------------------------------------------------

_TIME_SUFFIX = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_FIELD_SUFFIX = {"T": 1.0, "G": 1e-4, "mG": MG_TO_TESLA}
_FREQ_MHZ_SUFFIX = {"GHz": 1e3, "MHz": 1.0, "kHz": 1e-3, "Hz": 1e-6}
_POWER_NW_SUFFIX = {"uW": 1e3, "nW": 1.0, "pW": 1e-3}
_PRESSURE_PA_SUFFIX = {"Pa": 1.0, "Torr": TORR_TO_PA, "mbar": 100.0}


def parse_quantity(text: str, kind: str) -> float:
    """Parse '1.25ms' style values; bare numbers are taken in the base unit."""
    tables = {"time": _TIME_SUFFIX, "field": _FIELD_SUFFIX, "freq_mhz": _FREQ_MHZ_SUFFIX,
              "power_nw": _POWER_NW_SUFFIX, "pressure": _PRESSURE_PA_SUFFIX}
    text = text.strip()
    if kind == "fraction":
        if text.endswith("%"):
            return float(text[:-1]) / 100.0
        return float(text)
    table = tables[kind]
    for suffix in sorted(table, key=len, reverse=True):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * table[suffix]
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse quantity {text!r} as {kind}") from None


def parse_range(text: str, kind: str, default_points: int = 101) -> np.ndarray:
    """'start:stop[:step]' with unit suffixes; start:stop uses a uniform grid."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"range {text!r} must be start:stop[:step]")
    lo = parse_quantity(parts[0], kind)
    hi = parse_quantity(parts[1], kind)
    if len(parts) == 3:
        step = parse_quantity(parts[2], kind)
        if step <= 0:
            raise ConfigError("range step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(max(n, 0))
    return np.linspace(lo, hi, default_points)


def _time(text: str) -> float:
    return parse_quantity(text, "time")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    config_path: str
    seed: int
    output_dir: str
    version: str


class OutputWriter:
    def __init__(self, out_dir: Path, command: str, seed: int, config_path: str):
        self.out_dir = out_dir
        self.seed = seed
        self.command = command
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(command=command, config_path=config_path, seed=seed,
                               output_dir=str(out_dir), version=__version__)
        (out_dir / "run_manifest.json").write_text(
            json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")

    def _stamp(self) -> str:
        return f"# decolab {__version__} command={self.command} seed={self.seed}"

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(self._stamp() + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        payload = {"seed": self.seed, "version": __version__, **payload}
        path.write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n",
                        encoding="utf-8")
        return path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _load_model(name: str) -> AcFieldModel:
    if name in ("table1", "default"):
        return table1_model()
    return load_field_config(name)


def _print_config(args: argparse.Namespace, model: AcFieldModel | None = None) -> None:
    if not getattr(args, "print_config", False):
        return
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    print(json.dumps(resolved, default=str, indent=2))
    if model is not None:
        for c in model.components:
            print(f"# component f={c.frequency} Hz B={c.amplitude / MG_TO_TESLA} mG "
                  f"phi={c.phase} rad")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_model(args.config or args.model)
    _print_config(args, model)
    out = OutputWriter(Path(args.out), f"simulate {args.sequence}", args.seed,
                       args.config or args.model)
    rows = []
    if args.sequence == "feedforward":
        taus = parse_range(args.tau_range, "time", args.points)
        taus = taus[taus > 0.0]
        rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(args.seed)))
        drift = None if args.frozen_drift else AmplitudeScaleProcess(
            sigma=args.drift_sigma, correlation_time=args.drift_correlation)
        cfg = ShotConfig(n_shots=args.shots)
        outcomes = run_feedforward(model, taus, cfg, drift, rng,
                                   n_repetitions=args.repetitions)
        for o in outcomes:
            rows.append([o.tau, o.x_raw, o.y_raw, o.phi_estimate, o.c_expectation,
                         args.seed])
        path = out.csv("feedforward.csv",
                       ["tau_s", "x_raw", "y_raw", "phi_estimate_rad", "c_expectation",
                        "seed"], rows)
        cs = [o.c_expectation for o in outcomes]
        quick_line_plot(out.out_dir / "feedforward.svg", [o.tau for o in outcomes],
                        [cs], ["<C>"], title="feedforward echo", xlabel="tau (s)",
                        ylabel="<C>", styles=["points"])
        print(path)
        return EXIT_OK

    if args.sequence == "ramsey":
        times = parse_range(args.t_range, "time", args.points)
        times = times[times > 0.0]
        if args.envelope:
            vals = ramsey_envelope(model, (args.a_min, args.a_max), times,
                                   n_t0=args.n_t0, n_a=args.n_a)
        else:
            vals = np.array([expectation_unsynchronized(model, PulseSequence.ramsey(float(t)),
                                                        args.n_t0) for t in times])
        for t, v in zip(times, vals):
            rows.append(["ramsey", 0, t, t, v])
    else:
        n_pulses = 1 if args.sequence == "hahn" else args.n
        taus = parse_range(args.tau_range, "time", args.points)
        taus = taus[taus > 0.0]
        for tau in taus:
            seq = (PulseSequence.hahn(float(tau)) if args.sequence == "hahn"
                   else PulseSequence.cpmg(n_pulses, float(tau)))
            val = expectation_unsynchronized(model, seq, args.n_t0)
            rows.append([args.sequence, n_pulses, tau, seq.total_time, val])

    path = out.csv("sweep.csv",
                   ["sequence_kind", "n_pulses", "tau_s", "t_total_s", "expectation"],
                   rows)
    if rows:
        xs = [r[3] for r in rows]
        ys = [r[4] for r in rows]
        quick_line_plot(out.out_dir / "sweep.svg", xs, [ys], [args.sequence],
                        title=f"{args.sequence} sweep", xlabel="total time (s)",
                        ylabel="expectation")
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bath
# ---------------------------------------------------------------------------

def cmd_bath(args: argparse.Namespace) -> int:
    _print_config(args)
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(args.seed)))
    if args.bath_command == "t2star":
        out = OutputWriter(Path(args.out), "bath t2star", args.seed, "-")
        cfg = bathmod.BathConfig(concentration=args.chi)
        dist = bathmod.t2star_distribution(cfg, args.n_baths, rng)
        out.csv("t2star.csv", ["t2star_us"], [[v * 1e6] for v in dist.samples])
        scale_us = dist.half_normal_scale * 1e6
        ci = 1.96 * dist.scale_stderr() * 1e6
        out.json("t2star_summary.json", {
            "chi": args.chi, "n_baths": args.n_baths,
            "scale_us": scale_us, "ci95_us": [scale_us - ci, scale_us + ci],
        })
        scale = dist.half_normal_scale
        finite = dist.samples[np.isfinite(dist.samples)]
        histogram_plot(out.out_dir / "t2star_hist.svg", finite * 1e6, bins=60,
                       overlay_pdf=lambda x: (math.sqrt(2 / math.pi) / (scale * 1e6)
                                              * np.exp(-x ** 2 / (2 * (scale * 1e6) ** 2))),
                       title=f"T2* distribution, chi={args.chi}", xlabel="T2* (us)")
        print(out.out_dir / "t2star_summary.json")
        return EXIT_OK

    out = OutputWriter(Path(args.out), "bath likelihood", args.seed, "-")
    est = bathmod.electron_bath_likelihood(args.rho_ppb, args.t2_lower, args.n_centres,
                                           rng, n_baths=args.n_baths)
    out.json("likelihood.json", {
        "rho_ppb": args.rho_ppb, "t2_lower_s": args.t2_lower,
        "n_centres": args.n_centres, "likelihood": est.likelihood,
        "stderr": est.stderr, "exceedance": est.exceedance,
        "exceedance_stderr": est.exceedance_stderr, "n_baths": est.n_baths,
    })
    print(out.out_dir / "likelihood.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _plot_fit(out: OutputWriter, name: str, curve: DecayCurve, model_y, label: str) -> None:
    plot = SvgPlot(title=label, xlabel="x", ylabel="y")
    plot.add_line(curve.x, curve.y, "data", "points")
    plot.add_line(curve.x, model_y, "fit")
    plot.write(out.out_dir / name)


def _read_xy_flexible(path: str) -> DecayCurve:
    """Read x,y[,sigma]; sweep CSVs are recognized by their header and read
    as (t_total_s, expectation)."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.lstrip().startswith("#") or not line.strip():
                continue
            header = [h.strip() for h in line.split(",")]
            break
        else:
            raise DataError("file contains no data rows")
    if "t_total_s" in header and "expectation" in header:
        ix, iy = header.index("t_total_s"), header.index("expectation")
        xs, ys = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#") or row == header:
                    continue
                xs.append(float(row[ix]))
                ys.append(float(row[iy]))
        order = np.argsort(xs)
        return DecayCurve(np.asarray(xs)[order], np.asarray(ys)[order])
    return read_decay_csv(path)


def cmd_fit(args: argparse.Namespace) -> int:
    _print_config(args)
    out = OutputWriter(Path(args.out), f"fit {args.fit_command}", args.seed, "-")

    if args.fit_command == "decay":
        curve = _read_xy_flexible(args.data)
        fit = fit_stretched_exp(curve, fix_n=args.fix_n)
        out.json("fit_decay.json", json.loads(fit_result_to_json(fit)))
        _plot_fit(out, "fit_decay.svg", curve, stretched_exp(curve.x, fit.values()),
                  "stretched exponential fit")
        print(out.out_dir / "fit_decay.json")
        if not fit.converged:
            raise NonConvergence(fit.message)
        return EXIT_OK

    if args.fit_command == "scaling":
        curve = read_decay_csv(args.data)
        fit = fit_power_scaling(curve.x, curve.y, curve.sigma)
        if len(curve) == 2:
            print("warning: two points, dof=0, exact interpolation", file=sys.stderr)
        out.json("fit_scaling.json", json.loads(fit_result_to_json(fit)))
        model_y = fit.params["T0"] * np.power(curve.x, fit.params["eta"])
        _plot_fit(out, "fit_scaling.svg", curve, model_y, "power-law scaling fit")
        print(out.out_dir / "fit_scaling.json")
        return EXIT_OK

    if args.fit_command == "arrhenius":
        curve = read_decay_csv(args.data)  # columns: T_K, dPdt_Pa_s
        leak, fit = growth.fit_arrhenius(curve.x, curve.y, volume=args.volume)
        out.json("fit_arrhenius.json", {
            **json.loads(fit_result_to_json(fit)),
            "q_leak_Pa_m3_s": leak.q_leak, "q0_Pa_m3_s": leak.q0, "e_a_J": leak.e_a,
        })
        _plot_fit(out, "fit_arrhenius.svg", curve,
                  leak.throughput(curve.x) / leak.volume, "Arrhenius throughput fit")
        print(out.out_dir / "fit_arrhenius.json")
        if not fit.converged:
            raise NonConvergence(fit.message)
        return EXIT_OK

    if args.fit_command == "diffusion":
        entries = diff.read_manifest(args.manifest)
        datasets = []
        for power, path in entries:
            _, backward = diff.read_diffusion_csv(path)
            datasets.append(diff.PowerDataset(power, backward))
        fit = diff.joint_fit_backward(datasets, gamma_h_fixed=args.gamma_h)
        payload = {"gamma_i_MHz": fit.params["gamma_i"],
                   "gamma_h_MHz_fixed": args.gamma_h,
                   "reduced_chi2": fit.reduced_chi2, "converged": fit.converged,
                   "per_power": {}}
        for ds in datasets:
            tag = f"{ds.power_nw:g}nW"
            payload["per_power"][tag] = {
                "D_MHz2_per_s": fit.params[f"D_{tag}"], "C0": fit.params[f"C0_{tag}"],
                "D_stderr": fit.stderr[f"D_{tag}"], "C0_stderr": fit.stderr[f"C0_{tag}"],
            }
        out.json("fit_diffusion.json", payload)
        plot = SvgPlot(title="joint backward diffusion fit", xlabel="tau_d (s)",
                       ylabel="counts")
        for i, ds in enumerate(datasets):
            tag = f"{ds.power_nw:g}nW"
            model = diff.OuDiffusionModel(fit.params[f"D_{tag}"], fit.params["gamma_i"])
            line = diff.HomogeneousLine(fit.params[f"C0_{tag}"], args.gamma_h)
            ys = [diff.counts_no_ionization(model, line, float(t)) for t in ds.curve.x]
            plot.add_line(ds.curve.x, ds.curve.y, tag, "points")
            plot.add_line(ds.curve.x, ys, "")
        plot.write(out.out_dir / "fit_diffusion.svg")
        print(out.out_dir / "fit_diffusion.json")
        if not fit.converged:
            raise NonConvergence(fit.message)
        return EXIT_OK

    # ionization
    forward, _ = diff.read_diffusion_csv(args.data)
    model = diff.OuDiffusionModel(d_coeff=args.d_coeff, gamma_i=args.gamma_i)
    line = diff.HomogeneousLine(c0=args.c0, gamma_h=args.gamma_h)
    fit = diff.fit_ionization_rate(diff.PowerDataset(args.power, forward), model, line,
                                   forward_rescale=args.forward_rescale)
    out.json("fit_ionization.json", {
        **json.loads(fit_result_to_json(fit)),
        "S_per_s": fit.params["S"], "forward_rescale": args.forward_rescale,
    })
    print(out.out_dir / "fit_ionization.json")
    if not fit.converged:
        raise NonConvergence(fit.message)
    return EXIT_OK


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------

def cmd_growth(args: argparse.Namespace) -> int:
    _print_config(args)
    out = OutputWriter(Path(args.out), f"growth {args.growth_command}", args.seed, "-")
    if args.growth_command == "chi":
        chi = growth.chi_from_flows(args.f0, args.f1)
        out.json("growth_chi.json", {
            "f0_sccm": args.f0, "f1_sccm": args.f1, "chi": chi,
            "chi_percent": 100.0 * chi, "ratio_13c_12c": growth.chi_to_ratio(chi),
        })
        print(out.out_dir / "growth_chi.json")
        return EXIT_OK
    if args.growth_command == "nitrogen":
        n2 = args.n2_molps
        if n2 is None:
            leak = growth.LeakModel(q_leak=args.q_leak)
            n2 = growth.n2_molar_flow(leak, args.pressure)
        if args.eta is not None:
            ppb = growth.nitrogen_ppb(args.eta, n2, args.ch4_sccm)
            payload = {"eta": args.eta, "nitrogen_ppb": ppb}
        else:
            bounds = growth.nitrogen_bounds(n2, args.ch4_sccm)
            payload = {"eta_lower": bounds.eta_lower, "eta_upper": bounds.eta_upper,
                       "nitrogen_ppb_lower": bounds.lower_ppb,
                       "nitrogen_ppb_upper": bounds.upper_ppb}
        payload.update({"n2_mol_per_s": n2, "n2_sccm": growth.molar_flow_to_sccm(n2),
                        "ch4_sccm": args.ch4_sccm})
        out.json("growth_nitrogen.json", payload)
        print(out.out_dir / "growth_nitrogen.json")
        return EXIT_OK
    # leak
    curve = read_decay_csv(args.data)
    leak, fit = growth.fit_arrhenius(curve.x, curve.y, volume=args.volume)
    out.json("growth_leak.json", {
        "q_leak_Pa_m3_s": leak.q_leak, "q0_Pa_m3_s": leak.q0, "e_a_J": leak.e_a,
        "volume_m3": leak.volume, "converged": fit.converged,
        "stderr": fit.stderr,
    })
    print(out.out_dir / "growth_leak.json")
    if not fit.converged:
        raise NonConvergence(fit.message)
    return EXIT_OK


# ---------------------------------------------------------------------------
# diffusion predict
# ---------------------------------------------------------------------------

def cmd_diffusion(args: argparse.Namespace) -> int:
    _print_config(args)
    out = OutputWriter(Path(args.out), "diffusion predict", args.seed, "-")
    model = diff.OuDiffusionModel(d_coeff=args.d_coeff, gamma_i=args.gamma_i)
    line = diff.HomogeneousLine(c0=args.c0, gamma_h=args.gamma_h)
    taus = parse_range(args.tau_range, "time", args.points)
    taus = taus[taus > 0.0]
    rows = []
    if args.sink_s > 0.0:
        sink = diff.IonizationSink(strength_s=args.sink_s,
                                   forward_rescale=args.forward_rescale)
        solver = diff.SinkSolver(model, sink)
        taus = taus[taus >= solver.min_valid_time]
        for t in taus:
            backward = diff.counts_no_ionization(model, line, float(t), args.detuning)
            ionizing = solver.counts(line, float(t), args.detuning)
            rows.append([t, sink.forward_rescale * ionizing, backward, 0.0])
    else:
        for t in taus:
            backward = diff.counts_no_ionization(model, line, float(t), args.detuning)
            rows.append([t, args.forward_rescale * backward, backward, 0.0])
    path = out.csv("diffusion_predict.csv",
                   ["tau_d_s", "counts_forward", "counts_backward", "stderr"], rows)
    if rows:
        quick_line_plot(out.out_dir / "diffusion_predict.svg",
                        [r[0] for r in rows],
                        [[r[2] for r in rows], [r[1] for r in rows]],
                        ["backward", "forward"], title="check-probe counts",
                        xlabel="tau_d (s)", ylabel="counts")
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decolab",
                                     description="decoherence / spectral-diffusion toolkit")
    parser.add_argument("--version", action="version", version=f"decolab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--config", default=None, help="field-model config file")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for interface compatibility; execution is "
                             "single-threaded and output order is canonical")
    common.add_argument("--print-config", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="pulse-sequence and feedforward simulations")
    sim_sub = sim.add_subparsers(dest="sequence", required=True)
    for kind in ("ramsey", "hahn", "cpmg", "feedforward"):
        p = sim_sub.add_parser(kind, parents=[common])
        p.add_argument("--model", default="table1",
                       help="'table1' or a field-model config path")
        p.add_argument("--n-t0", type=int, default=400)
        p.add_argument("--points", type=int, default=101)
        if kind == "ramsey":
            p.add_argument("--t-range", required=True)
            p.add_argument("--envelope", action="store_true")
            p.add_argument("--a-min", type=float, default=0.85)
            p.add_argument("--a-max", type=float, default=1.27)
            p.add_argument("--n-a", type=int, default=21)
        else:
            p.add_argument("--tau-range", required=True)
        if kind == "cpmg":
            p.add_argument("--n", type=int, required=True)
        if kind == "feedforward":
            p.add_argument("--shots", type=int, default=50)
            p.add_argument("--repetitions", type=int, default=12)
            p.add_argument("--drift-sigma", type=float, default=0.01)
            p.add_argument("--drift-correlation", type=float, default=3.0)
            p.add_argument("--frozen-drift", action="store_true")
        p.set_defaults(func=cmd_simulate)

    bath_p = sub.add_parser("bath", help="spin-bath Monte Carlo")
    bath_sub = bath_p.add_subparsers(dest="bath_command", required=True)
    p = bath_sub.add_parser("t2star", parents=[common])
    p.add_argument("--chi", type=lambda s: parse_quantity(s, "fraction"), required=True)
    p.add_argument("--n-baths", type=int, default=10000)
    p.set_defaults(func=cmd_bath)
    p = bath_sub.add_parser("likelihood", parents=[common])
    p.add_argument("--rho-ppb", type=float, required=True)
    p.add_argument("--t2-lower", type=_time, required=True)
    p.add_argument("--n-centres", type=int, required=True)
    p.add_argument("--n-baths", type=int, default=20000)
    p.set_defaults(func=cmd_bath)

    fit_p = sub.add_parser("fit", help="curve fits")
    fit_sub = fit_p.add_subparsers(dest="fit_command", required=True)
    p = fit_sub.add_parser("decay", parents=[common])
    p.add_argument("--data", required=True)
    p.add_argument("--fix-n", type=float, default=None)
    p.set_defaults(func=cmd_fit)
    p = fit_sub.add_parser("scaling", parents=[common])
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_fit)
    p = fit_sub.add_parser("diffusion", parents=[common])
    p.add_argument("--manifest", required=True)
    p.add_argument("--gamma-h", type=lambda s: parse_quantity(s, "freq_mhz"), default=22.0)
    p.set_defaults(func=cmd_fit)
    p = fit_sub.add_parser("ionization", parents=[common])
    p.add_argument("--data", required=True)
    p.add_argument("--power", type=lambda s: parse_quantity(s, "power_nw"), default=0.0)
    p.add_argument("--gamma-i", type=lambda s: parse_quantity(s, "freq_mhz"), required=True)
    p.add_argument("--d-coeff", type=float, required=True, help="MHz^2/s")
    p.add_argument("--c0", type=float, required=True)
    p.add_argument("--gamma-h", type=lambda s: parse_quantity(s, "freq_mhz"), default=22.0)
    p.add_argument("--forward-rescale", type=float, default=0.96)
    p.set_defaults(func=cmd_fit)
    p = fit_sub.add_parser("arrhenius", parents=[common])
    p.add_argument("--data", required=True)
    p.add_argument("--volume", type=float, default=11.3e-3)
    p.set_defaults(func=cmd_fit)

    growth_p = sub.add_parser("growth", help="growth calculators")
    growth_sub = growth_p.add_subparsers(dest="growth_command", required=True)
    p = growth_sub.add_parser("chi", parents=[common])
    p.add_argument("--f0", type=float, required=True, help="enriched methane flow (sccm)")
    p.add_argument("--f1", type=float, required=True, help="natural methane flow (sccm)")
    p.set_defaults(func=cmd_growth)
    p = growth_sub.add_parser("nitrogen", parents=[common])
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--ch4-sccm", type=float, required=True)
    p.add_argument("--n2-molps", type=float, default=None)
    p.add_argument("--q-leak", type=float, default=1.5e-8)
    p.add_argument("--pressure", type=lambda s: parse_quantity(s, "pressure"),
                   default=120.0 * TORR_TO_PA)
    p.set_defaults(func=cmd_growth)
    p = growth_sub.add_parser("leak", parents=[common])
    p.add_argument("--data", required=True, help="CSV with T_K, dPdt_Pa_per_s")
    p.add_argument("--volume", type=float, default=11.3e-3)
    p.set_defaults(func=cmd_growth)

    diff_p = sub.add_parser("diffusion", help="spectral-diffusion prediction")
    diff_sub = diff_p.add_subparsers(dest="diff_command", required=True)
    p = diff_sub.add_parser("predict", parents=[common])
    p.add_argument("--gamma-i", type=lambda s: parse_quantity(s, "freq_mhz"), required=True)
    p.add_argument("--d-coeff", type=float, required=True, help="MHz^2/s")
    p.add_argument("--gamma-h", type=lambda s: parse_quantity(s, "freq_mhz"), default=22.0)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--sink-s", type=float, default=0.0)
    p.add_argument("--forward-rescale", type=float, default=0.96)
    p.add_argument("--detuning", type=lambda s: parse_quantity(s, "freq_mhz"), default=0.0)
    p.add_argument("--tau-range", default="1ms:500ms")
    p.add_argument("--points", type=int, default=40)
    p.set_defaults(func=cmd_diffusion)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"decolab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"decolab: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonConvergence, FitError) as exc:
        print(f"decolab: fit did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
