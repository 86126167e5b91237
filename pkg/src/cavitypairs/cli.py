"""Command-line entry point.

Every subcommand reads a ``key = value`` configuration file, writes CSV
traces and a manifest into the output directory, and exits with 0 on
success, 1 for configuration errors, 2 for numerical failures and 3 for
I/O errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .core import TWO_PI, Axis, CavityMode, ProcessConfig, Rectangular, gaussian_pulse
from .errors import ConfigurationError, NumericalError, UnderSampledWarning
from .io import Config, parse_config, read_columns, write_columns, write_manifest
from .kernels import BACKEND

OUTPUT_ENV = "CAVITYPAIRS_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


# ---------------------------------------------------------------------------
# configuration -> model objects
# ---------------------------------------------------------------------------

def _linewidths(cfg: Config):
    if "gamma_si" in cfg:
        g = cfg.number("gamma_si")
        gs = cfg.number("gamma_s", g)
        gi = cfg.number("gamma_i", g)
    elif "t_si" in cfg:
        gs = gi = 1.0 / cfg.number("t_si")
    else:
        gs, gi = cfg.number("gamma_s"), cfg.number("gamma_i")
    return gs, gi


def process_config(cfg: Config, delta: Optional[float] = None) -> ProcessConfig:
    gs, gi = _linewidths(cfg)
    kappa = cfg.number("kappa", 1.0)
    signal = CavityMode.from_linewidth(gs, cfg.number("kappa_s", kappa))
    idler = CavityMode.from_linewidth(gi, cfg.number("kappa_i", kappa))
    pump = None
    if "gamma_p" in cfg:
        pump = CavityMode.from_linewidth(cfg.number("gamma_p"), cfg.number("kappa_p", 0.5))
    if delta is None:
        delta = _delta_values(cfg, 0.5 * (gs + gi))[0]
    base = ProcessConfig(signal, idler, pump, mismatch_delta=delta,
                         pump_detuning=cfg.number("delta_p", 0.0),
                         process_order=cfg.integer("process_order", 1),
                         coupling_strength=cfg.number("coupling_strength", 1.0))
    if "pump_power" in cfg:
        return base.replace(pump_power=cfg.number("pump_power"))
    return base.with_power_ratio(cfg.number("power_ratio", 0.01))


def _delta_values(cfg: Config, gamma_mean: float) -> List[float]:
    if "delta" in cfg:
        return cfg.numbers("delta")
    if "delta_gamma" in cfg:
        return [gamma_mean * x for x in cfg.numbers("delta_gamma")]
    return [0.0]


def _hz(x):
    return np.asarray(x) / TWO_PI


# ---------------------------------------------------------------------------
# subcommands; each returns (tables, results) where tables maps a file
# suffix to a column list
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: Config):
    from .cw import spectrum_cw
    pc = process_config(cfg)
    span = cfg.number("omega_span", 8 * pc.gamma_mean + 2 * abs(pc.delta))
    n = cfg.integer("points", 2001)
    w = np.linspace(-0.5 * span + 0.5 * pc.delta, 0.5 * span + 0.5 * pc.delta, n)
    cols = [("omega_over_2pi", "Hz", _hz(w)),
            ("S_signal", "arb", spectrum_cw(w, pc, "signal")),
            ("S_idler", "arb", spectrum_cw(w, pc, "idler"))]
    return {"": cols}, {}


def cmd_flux_cw(cfg: Config):
    from .cw import flux_cw
    pc = process_config(cfg)
    span = cfg.number("delta_span", 10 * pc.gamma_mean)
    n = cfg.integer("points", 1001)
    d = np.linspace(-0.5 * span, 0.5 * span, n)
    f = np.asarray(flux_cw(pc, d))
    cols = [("delta_over_2pi", "Hz", _hz(d)), ("flux", "arb", f), ("flux_normalized", "", f / f.max())]
    return {"": cols}, {"result.fwhm_hz": repr(float(_hz(2 * pc.gamma_mean)))}


def _pulse(cfg: Config, pc: ProcessConfig, rate: float, grid: Optional[Axis] = None):
    amp = math.sqrt(pc.pump_power)
    shape = cfg.text("pulse", "rectangular")
    if shape == "rectangular":
        tau = cfg.number("tau_p") if "tau_p" in cfg else cfg.number("tau_p_gamma", 10.0) / rate
        return Rectangular(amp, tau), tau
    if shape == "gaussian":
        width = cfg.number("pulse_width") if "pulse_width" in cfg else cfg.number("pulse_width_gamma", 2.0) / rate
        center = cfg.number("pulse_center", 4 * width)
        return gaussian_pulse(grid, width, center, amp), center + 4 * width
    raise ConfigurationError(f"unknown pulse shape {shape!r}")


def cmd_flux_pulsed(cfg: Config):
    from .cw import flux_cw
    from .pulsed import flux_pulsed, flux_rect_closed
    pc0 = process_config(cfg)
    g = pc0.gamma_mean
    deltas = _delta_values(cfg, g)
    tau = cfg.number("tau_p") if "tau_p" in cfg else cfg.number("tau_p_gamma", 10.0) / g
    t_end = cfg.number("t_end", 2 * tau)
    step_limit = 0.05 / max(pc0.gamma_s, pc0.gamma_i, g + max(abs(d) for d in deltas))
    dt = cfg.number("dt", min(1e-3 / g, step_limit))
    n = max(int(round(t_end / dt)) + 1, 2)
    grid = Axis(0.0, t_end / (n - 1), n, "t", "s")
    env, _ = _pulse(cfg, pc0, g, grid)
    cols = [("t", "s", grid.values), ("t_gamma", "", grid.values * g)]
    for k, d in enumerate(deltas):
        pc = pc0.replace(mismatch_delta=d)
        tr = flux_pulsed(pc, env, grid, cfg.text("which", "signal"),
                         delta_spread=cfg.number("delta_spread", 0.0))
        cols.append((f"n_delta{k}", "n_cw", np.asarray(tr.values) / flux_cw(pc)))
        if isinstance(env, Rectangular) and pc.gamma_s == pc.gamma_i and pc.pump is None:
            cols.append((f"closed_delta{k}", "n_cw", flux_rect_closed(grid.values, g, pc.delta, env.duration)))
    if pc0.pump is not None:
        from .pump import cw_intracavity_energy, intracavity_envelope
        resp = intracavity_envelope(env, pc0.pump, pc0.pump_detuning, grid)
        e_ss = cw_intracavity_energy(pc0.pump_power, pc0.pump, 0.0)
        cols.append(("pump_energy", "E_ss", np.abs(resp.sample(grid).values) ** 2 / e_ss))
    results = {f"result.delta{k}_hz": repr(float(_hz(d))) for k, d in enumerate(deltas)}
    return {"": cols}, results


def cmd_xcorr(cfg: Config):
    from .cw import cross_correlation_cw
    pc = process_config(cfg)
    span = cfg.number("tau_span", 16.0 / min(pc.gamma_s, pc.gamma_i))
    n = cfg.integer("points", 1601)
    tau = np.linspace(-0.5 * span, 0.5 * span, n)
    cols = [("tau", "s", tau), ("g2_si_shape", "", cross_correlation_cw(tau, pc.gamma_s, pc.gamma_i))]
    return {"": cols}, {}


def cmd_acorr(cfg: Config):
    from .cw import autocorrelation_cw, autocorrelation_fwhm
    pc0 = process_config(cfg)
    g = pc0.gamma_mean
    span = cfg.number("tau_span", 20.0 / g)
    n = cfg.integer("points", 2001)
    tau = np.linspace(-0.5 * span, 0.5 * span, n)
    cols = [("tau", "s", tau), ("tau_gamma", "", tau * g)]
    results = {}
    for k, d in enumerate(_delta_values(cfg, g)):
        pc = pc0.replace(mismatch_delta=d)
        cols.append((f"g2_delta{k}", "", autocorrelation_cw(tau, pc)))
        results[f"result.fwhm_gamma_delta{k}"] = repr(autocorrelation_fwhm(pc) * g)
        results[f"result.g2_zero_delta{k}"] = repr(float(autocorrelation_cw(0.0, pc)))
    return {"": cols}, results


def cmd_pump_response(cfg: Config):
    from .pump import cw_intracavity_energy, rect_pulse_response
    if "gamma_p" not in cfg:
        raise ConfigurationError("pump-response needs gamma_p_over_2pi")
    mode = CavityMode.from_linewidth(cfg.number("gamma_p"), cfg.number("kappa_p", 0.5))
    gp = mode.linewidth_total
    power = cfg.number("input_power", 1.0)
    tau = cfg.number("tau_p") if "tau_p" in cfg else cfg.number("tau_p_gamma_p", 10.0) / gp
    t_end = cfg.number("t_end", 2 * tau)
    n = cfg.integer("points", 4001)
    grid = Axis(0.0, t_end / (n - 1), n, "t", "s")
    if "delta_p" in cfg:
        dps = cfg.numbers("delta_p")
    else:
        dps = [gp * x for x in cfg.numbers("delta_p_gamma_p", [0.0, 1.0, 3.0])]
    e_ss = cw_intracavity_energy(power, mode, 0.0)
    cols = [("t", "s", grid.values), ("t_gamma_p", "", grid.values * gp)]
    for k, dp in enumerate(dps):
        resp = rect_pulse_response(Rectangular(math.sqrt(power), tau), mode, dp, grid)
        cols.append((f"energy_dp{k}", "E_ss", resp.stored_energy / e_ss))
    return {"": cols}, {f"result.delta_p{k}_hz": repr(float(_hz(d))) for k, d in enumerate(dps)}


def cmd_langevin_check(cfg: Config):
    from . import langevin as lv
    from .cw import autocorrelation_cw, flux_cw, spectrum_cw
    pc = process_config(cfg)
    g = pc.gamma_mean
    ks = lv.build_kernels(pc)
    tau = np.linspace(0.0, cfg.number("tau_max_gamma", 10.0) / g, cfg.integer("points", 201))
    g2l = lv.g2_functions(ks, tau)
    g2c = autocorrelation_cw(tau, pc)
    w = np.linspace(-6 * g + 0.5 * pc.delta, 6 * g + 0.5 * pc.delta, 241)
    sl, _ = lv.spectra_out(ks, w)
    sc = spectrum_cw(w, pc)
    deltas = np.linspace(-3 * g, 3 * g, 7)
    ratios = np.array([lv.flux_out(pc.replace(mismatch_delta=d))[0] / flux_cw(pc.replace(mismatch_delta=d))
                       for d in deltas])
    scale = sl[len(w) // 2] / sc[len(w) // 2]
    results = {
        "result.g2_ss_max_rel_dev": repr(float(np.max(np.abs(g2l["ss"] / g2c - 1)))),
        "result.spectrum_max_rel_dev": repr(float(np.max(np.abs(sl / (scale * sc) - 1)))),
        "result.flux_ratio_rel_spread": repr(float(np.ptp(ratios) / np.mean(ratios))),
        "result.commutator_weight": repr(lv.commutator_weight(ks)),
    }
    tables = {
        "": [("tau", "s", tau), ("g2_ss_langevin", "", g2l["ss"]), ("g2_ss_closed", "", g2c),
             ("g2_si_langevin", "", g2l["si"])],
        "-spectrum": [("omega_over_2pi", "Hz", _hz(w)), ("S_s_langevin", "1", sl),
                      ("S_s_closed", "arb", sc)],
    }
    return tables, results


def _sweep_point(args):
    from .estimation import estimate_mismatch, synthetic_sweep
    pc, dp, noise, seed, gamma_si = args
    sw = synthetic_sweep(pc, dp, noise, seed)
    fit = estimate_mismatch(sw, gamma_si)
    return fit


def cmd_sweep(cfg: Config):
    gs, gi = _linewidths(cfg)
    if "gamma_p" not in cfg:
        raise ConfigurationError("sweep needs gamma_p_over_2pi")
    deltas = cfg.numbers("delta0", [TWO_PI * x for x in (0.0, -5e6, -10e6, -22.2e6)])
    span = cfg.number("delta_p_span", TWO_PI * 100e6)
    n = cfg.integer("points", 201)
    noise = cfg.number("noise", 0.0)
    repeats = cfg.integer("repeats", 1)
    seed = cfg.integer("seed", 0)
    dp = np.linspace(-0.5 * span, 0.5 * span, n)
    seeds = np.random.SeedSequence(seed).spawn(len(deltas) * repeats)
    jobs = []
    for a, d in enumerate(deltas):
        pc = process_config(cfg, delta=d)
        for r in range(repeats):
            jobs.append((pc, dp, noise, seeds[a * repeats + r], 0.5 * (gs + gi)))
    with ThreadPoolExecutor(max_workers=cfg.integer("workers", os.cpu_count() or 1)) as pool:
        fits = list(pool.map(_sweep_point, jobs))
    true = np.repeat(deltas, repeats)
    cols = [("delta0_true_over_2pi", "Hz", _hz(true)),
            ("delta0_estimate_over_2pi", "Hz", _hz([f["delta0"] for f in fits])),
            ("fwhm_over_2pi", "Hz", _hz([f["fwhm_check"] for f in fits])),
            ("converged", "", [float(f.converged) for f in fits]),
            ("repeat", "", np.tile(np.arange(repeats), len(deltas)))]
    return {"": cols}, {"rng": "PCG64", "seed": str(seed)}


def _load_trace(path: str):
    from .core import Trace
    header, data = read_columns(path)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ConfigurationError(f"{path}: need at least two columns")
    return Trace(Axis.from_values(data[:, 0]), data[:, 1]), header


def cmd_fit(cfg: Config):
    from .estimation import fit_double_exponential, fit_lorentzian
    trace, header = _load_trace(cfg.text("input"))
    model = cfg.text("model", "lorentzian")
    if model == "lorentzian":
        fit = fit_lorentzian(trace)
    elif model == "inverted-lorentzian":
        fit = fit_lorentzian(trace, inverted=True)
    elif model == "double-exponential":
        fit = fit_double_exponential(trace)
    elif model == "symmetric-double-exponential":
        fit = fit_double_exponential(trace, symmetric=True)
    else:
        raise ConfigurationError(f"unknown model {model!r}")
    fitted = _model_values(model, fit, trace.x)
    cols = [(header[0], "", trace.x), ("data", "", trace.values), ("model", "", fitted)]
    return {"": cols}, {"result.x_column": header[0]}, fit


def _model_values(model: str, fit, x):
    from .estimation import double_exponential, lorentzian
    if "lorentzian" in model:
        return lorentzian(x, fit["center"], fit["fwhm"], fit["amplitude"], fit["offset"],
                          inverted=model.startswith("inverted"))
    return double_exponential(x, fit["peak_position"], fit["decay_time_left"], fit["decay_time_right"],
                              fit["amplitude"], fit["background"])


def cmd_events(cfg: Config, outdir: Path, prefix: str):
    from .estimation import fit_double_exponential
    from .eventgen import RNG_ALGORITHM, coincidence_histogram, sample_pairs, write_events_csv
    pc = process_config(cfg)
    seed = cfg.integer("seed", 0)
    ev = sample_pairs(pc, cfg.number("pair_rate", 1e3), cfg.number("duration", 50.0),
                      cfg.number("efficiency_s", 1.0), cfg.number("efficiency_i", 1.0), seed,
                      cfg.number("accidental_rate_s", 0.0), cfg.number("accidental_rate_i", 0.0))
    hist = coincidence_histogram(ev, cfg.number("bin_width", 2.2e-9),
                                 cfg.number("window", 10.0 / min(pc.gamma_s, pc.gamma_i)))
    if cfg.integer("write_events", 1):
        write_events_csv(ev, outdir / f"{prefix}events-list.csv")
    fit = fit_double_exponential(hist, symmetric=bool(cfg.integer("symmetric", 1)))
    cols = [("tau", "s", hist.x), ("coincidences", "counts", hist.values)]
    results = {"rng": RNG_ALGORITHM, "seed": str(seed),
               "result.coincidences": repr(float(np.sum(hist.values))),
               "result.t_si_fit": repr(fit["decay_time_right"])}
    return {"": cols}, results, fit


def cmd_mismatch(cfg: Config):
    from .estimation import read_sweep_csv, estimate_mismatch
    sweep = read_sweep_csv(cfg.text("input"))
    gs, gi = _linewidths(cfg)
    fit = estimate_mismatch(sweep, 0.5 * (gs + gi), cfg.integer("process_order", 1))
    x = sweep.pump_detuning
    level = 1.0 - np.asarray(sweep.reflection.values)
    norm = np.where(level > 1e-9, np.asarray(sweep.counts.values) / np.where(level > 1e-9, level, 1), 0.0)
    cols = [("delta_p_over_2pi", "Hz", _hz(x)), ("normalized_counts", "1/s", norm)]
    return {"": cols}, {"result.delta0_hz": repr(float(_hz(fit["delta0"])))}, fit


COMMANDS = {
    "spectrum": cmd_spectrum,
    "flux-cw": cmd_flux_cw,
    "flux-pulsed": cmd_flux_pulsed,
    "xcorr": cmd_xcorr,
    "acorr": cmd_acorr,
    "pump-response": cmd_pump_response,
    "langevin-check": cmd_langevin_check,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "events": cmd_events,
    "mismatch": cmd_mismatch,
}


def _execute(command: str, cfg: Config, outdir: Path, prefix: str) -> None:
    func = COMMANDS[command]
    if command == "events":
        out = func(cfg, outdir, prefix)
    else:
        out = func(cfg)
    tables, results = out[0], out[1]
    fit = out[2] if len(out) > 2 else None
    outdir.mkdir(parents=True, exist_ok=True)
    stem = prefix + command
    for suffix, cols in tables.items():
        write_columns(outdir / f"{stem}{suffix}.csv", cols)
    if fit is not None:
        (outdir / f"{stem}.fit.txt").write_text(fit.report())
        (outdir / f"{stem}.fit.json").write_text(json.dumps(fit.as_dict(), indent=2))
    extra = {"engine_version": __version__, "backend": BACKEND}
    extra["seed"] = cfg.text("seed", "none")
    extra.update(results)
    write_manifest(outdir / f"{stem}.manifest.txt", command, cfg, extra)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cavitypairs", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in list(COMMANDS) + ["replay"]:
        sp = sub.add_parser(name)
        if name == "replay":
            sp.add_argument("manifest", help="manifest written by an earlier run")
        else:
            sp.add_argument("--config", "-c", help="configuration file (key = value)")
            sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                            help="extra configuration line, may repeat")
        sp.add_argument("--output-dir", "-o", default=None,
                        help=f"output directory (default ${OUTPUT_ENV} or .)")
        sp.add_argument("--prefix", default="", help="prefix for output file names")
    return p


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = ""
        if args.command == "replay":
            text = Path(args.manifest).read_text()
        elif args.config:
            text = Path(args.config).read_text()
        if args.command != "replay":
            text += "\n" + "\n".join(args.set)
        cfg = parse_config(text)
        command = args.command
        if command == "replay":
            command = cfg.text("command")
            if command not in COMMANDS:
                raise ConfigurationError(f"manifest names unknown command {command!r}")
        outdir = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or ".")
        with warnings.catch_warnings():
            warnings.simplefilter("error", UnderSampledWarning)
            try:
                _execute(command, cfg, outdir, args.prefix)
            except UnderSampledWarning as exc:
                raise NumericalError(str(exc)) from exc
    except ConfigurationError as exc:
        print(f"cavitypairs: configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"cavitypairs: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cavitypairs: I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
