"""Command-line surface binding the library into reproducible runs.

Every subcommand is a pure function of (config, input files, seed):
rerunning with the same inputs produces byte-identical output files.
Exit codes: 0 success, 2 validation problem (config, CSV, domain),
3 fit failure.  Seed precedence is ``--seed`` over ``THERMOQ_SEED``
over the config seed.  Each run writes ``report.json`` listing every
emitted file with its SHA-256 content hash; set ``THERMOQ_TIMESTAMP``
to pin the report timestamp.

All emitted frequencies and rates are in Hz (omega/2pi); column names
carry the units.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, decoherence, io, spectra
from .cavity import (PORT_LABELS, StarkSweepPoint, ac_stark_shift,
                     calibrate_attenuation)
from .config import RunConfig, load_config
from .constants import TWO_PI
from .errors import ConfigError, FitError, ValidationError
from .experiments import simulate_campaign
from .spectral import (fit_knee_spectrum, fit_white_floor_vs_temp,
                       psd_estimate)
from .tlssim import (sample_ensemble, simulate_microscopic,
                     simulate_phenomenological)


def _hz(omega: float) -> float:
    return float(omega) / TWO_PI


def _jsonable(value):
    """Make a value JSON-safe; non-finite floats become null."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _effective_seed(args, fallback: int) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("THERMOQ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(
                f"THERMOQ_SEED must be an integer, got {env!r}") from None
    return fallback


def _spawn_seeds(seed: int, n: int) -> list:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1)[0]) for child in children]


def _require_config(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("this command requires --config")
    return load_config(args.config)


def _output_dir(args, run: RunConfig | None) -> Path:
    if args.output_dir is not None:
        out = Path(args.output_dir)
    elif run is not None:
        out = Path(run.output_dir)
    else:
        out = Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: tuple, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fit_payload(fit) -> dict:
    return {
        "beta": fit.beta,
        "beta_err": fit.beta_err,
        "omega_c_hz": _hz(fit.omega_c) if math.isfinite(fit.omega_c) else None,
        "omega_c_err_hz": (_hz(fit.omega_c_err)
                           if math.isfinite(fit.omega_c_err) else None),
        "mu_w_per_hz": fit.mu,
        "mu_err_w_per_hz": fit.mu_err,
        "amplitude": fit.amplitude,
        "amplitude_err": fit.amplitude_err,
        "fit_window_hz": [_hz(fit.fit_window[0]), _hz(fit.fit_window[1])],
        "degenerate": fit.degenerate,
    }


def cmd_rates(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    budget = decoherence.rate_budget(
        run.circuit, run.geometry, S_delta=run.s_delta,
        T_a=run.port("antenna").temperature,
        gamma_phi_photon_shot=run.gamma_phi_photon_shot)
    payload = {f"{name}_hz": _hz(getattr(budget, name)) for name in (
        "gamma1_total", "gamma1_0", "gamma1_antenna", "gamma1_purcell",
        "gamma1_sideband", "gamma_mix", "gamma1_residual", "gamma_phi_0",
        "gamma_phi_2nd_antenna", "gamma_phi_photon_shot")}
    payload["notes"] = budget.notes
    payload["warnings"] = list(budget.warnings)
    _write_json(out / "rates.json", payload)
    return out, [args.config], ["rates.json"]


def cmd_stark_sweep(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    alpha = args.alpha if args.alpha is not None else \
        run.port("readout").attenuation
    circuit = run.circuit
    kappas = (circuit.kappa_x, circuit.kappa_a, circuit.kappa_tot)
    points = []
    for temp in np.linspace(args.t_min, args.t_max, args.points):
        n_x = spectra.bose_occupation(circuit.omega_r, float(temp))
        shift = ac_stark_shift(n_x, 0.0, circuit.chi, kappas, alpha)
        points.append(StarkSweepPoint(float(temp), float(shift)))
    io.write_stark_sweep(out / "stark_sweep.csv", points)
    return out, [args.config], ["stark_sweep.csv"]


def cmd_calibrate(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    sweep = io.read_stark_sweep(args.input)
    result = calibrate_attenuation(sweep, args.port, run.circuit,
                                   alpha=args.alpha)
    payload = {"port": args.port,
               "intercept_hz": _hz(result.parameters["intercept"]),
               "intercept_err_hz": _hz(result.stderr("intercept"))}
    if args.port == "readout":
        payload["alpha"] = result.parameters["alpha"]
        payload["alpha_err"] = result.stderr("alpha")
    else:
        payload["kappa_a_hz"] = _hz(result.parameters["kappa_a"])
        payload["kappa_a_err_hz"] = _hz(result.stderr("kappa_a"))
    _write_json(out / "calibration.json", payload)
    return out, [args.config, args.input], ["calibration.json"]


def cmd_gamma1_sweep(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    circuit = run.circuit
    rates = decoherence.component_rates(circuit, run.s_delta)
    rows = []
    for n in np.linspace(0.0, args.n_max, args.points):
        n = float(n)
        antenna = decoherence.gamma1_antenna_model(
            n, circuit.gamma1_0, circuit.gamma1_antenna)
        dispersive = decoherence.gamma1_dispersive_model(
            n, n, rates, circuit.gamma1_0)
        resonant = decoherence.delta_gamma1_res(n, rates)
        rows.append((io.render_float(n), io.hz_token(antenna),
                     io.hz_token(dispersive), io.hz_token(resonant)))
    _write_csv(out / "gamma1_sweep.csv",
               ("photon_number", "gamma1_antenna_hz",
                "gamma1_dispersive_hz", "delta_gamma1_res_hz"), rows)
    return out, [args.config], ["gamma1_sweep.csv"]


def cmd_dephasing_sweep(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    rows = []
    for temp in np.linspace(args.t_min, args.t_max, args.points):
        rate = decoherence.dephasing_second_order(float(temp), run.geometry)
        rows.append((io.render_float(float(temp)), io.hz_token(rate)))
    _write_csv(out / "dephasing_sweep.csv", ("temp_k", "gamma_phi_hz"), rows)
    return out, [args.config], ["dephasing_sweep.csv"]


def _tls_series(run: RunConfig, mode: str, seed: int):
    duration = run.campaign.duration
    dt = 1.0 / run.campaign.point_rate
    if mode == "phenomenological":
        if run.phenomenological is None:
            raise ConfigError(
                "phenomenological block required for --mode phenomenological")
        p = run.phenomenological
        return simulate_phenomenological(
            p.mean, p.beta, p.knee, p.white_sigma, duration, dt, seed)
    ensemble_seed, dynamics_seed = _spawn_seeds(seed, 2)
    ensemble = sample_ensemble(
        dataclasses.replace(run.tls, seed=ensemble_seed))
    return simulate_microscopic(
        ensemble, run.circuit.omega_q0, run.campaign.temperature,
        duration, dt, dynamics_seed, base_gamma1=run.tls.base_gamma1)


def cmd_tls_sim(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    seed = _effective_seed(args, run.seed)
    series = _tls_series(run, args.mode, seed)
    io.write_time_series(out / "gamma1_series.csv", series)
    return out, [args.config], ["gamma1_series.csv"]


def cmd_psd_fit(args):
    out = _output_dir(args, None)
    series = io.read_time_series(args.input)
    spectrum = psd_estimate(series, bins_per_decade=args.bins_per_decade)
    io.write_spectrum(out / "spectrum.csv", spectrum)
    fit = fit_knee_spectrum(spectrum)
    _write_json(out / "psd_fit.json", _fit_payload(fit))
    return out, [args.input], ["spectrum.csv", "psd_fit.json"]


def cmd_floor_fit(args):
    out = _output_dir(args, None)
    points = io.read_floor_points(args.input)
    fit = fit_white_floor_vs_temp(points)
    _write_json(out / "floor_fit.json", {
        "mu0_w_per_hz": fit.mu0, "mu0_err_w_per_hz": fit.mu0_err,
        "a_w_per_hz_per_k": fit.a, "a_err_w_per_hz_per_k": fit.a_err,
        "x": fit.x, "x_err": fit.x_err,
        "x_unidentifiable": fit.x_unidentifiable,
    })
    return out, [args.input], ["floor_fit.json"]


def cmd_campaign(args):
    run = _require_config(args)
    out = _output_dir(args, run)
    seed = _effective_seed(args, run.seed)
    source_seed, measure_seed = _spawn_seeds(seed, 2)
    source = _tls_series(run, args.mode, source_seed)
    campaign_config = dataclasses.replace(run.campaign, seed=measure_seed)
    result = simulate_campaign(campaign_config, source)
    io.write_time_series(out / "campaign_series.csv", result.series)
    spectrum = psd_estimate(result.series)
    io.write_spectrum(out / "campaign_psd.csv", spectrum)
    fit = fit_knee_spectrum(spectrum)
    _write_json(out / "campaign_fit.json", _fit_payload(fit))
    values = result.series.values
    _write_json(out / "campaign_summary.json", {
        "n_points": int(values.size),
        "n_gaps": len(result.gap_indices),
        "gamma1_mean_hz": _hz(float(np.mean(values))),
        "gamma1_std_hz": _hz(float(np.std(values))),
    })
    return out, [args.config], ["campaign_series.csv", "campaign_psd.csv",
                                "campaign_fit.json", "campaign_summary.json"]


def _write_report(out: Path, command: str, inputs: list, outputs: list) -> None:
    timestamp = os.environ.get("THERMOQ_TIMESTAMP")
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat()
    report = {
        "command": command,
        "inputs": {str(path): _sha256(path) for path in inputs},
        "outputs": [{"path": name, "sha256": _sha256(out / name)}
                    for name in sorted(outputs)],
        "version": __version__,
        "timestamp": timestamp,
    }
    _write_json(out / "report.json", report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoq",
        description="Transmon decoherence under thermal fields: rate "
                    "budgets, sweeps, TLS simulation, and spectral fits.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_, *, config=False, seeded=False):
        cmd = sub.add_parser(name, help=help_)
        cmd.set_defaults(handler=handler)
        cmd.add_argument("--output-dir", default=None,
                         help="directory for output files")
        if config:
            cmd.add_argument("--config", required=True,
                             help="JSON run configuration")
        if seeded:
            cmd.add_argument("--seed", type=int, default=None,
                             help="override THERMOQ_SEED and the config seed")
        return cmd

    add("rates", cmd_rates,
        "decoherence rate budget as JSON", config=True)

    cmd = add("stark-sweep", cmd_stark_sweep,
              "model ac-Stark shift vs readout temperature", config=True)
    cmd.add_argument("--t-min", type=float, default=0.05)
    cmd.add_argument("--t-max", type=float, default=1.5)
    cmd.add_argument("--points", type=int, default=15)
    cmd.add_argument("--alpha", type=float, default=None,
                     help="line attenuation (default: readout port value)")

    cmd = add("calibrate", cmd_calibrate,
              "fit attenuation or antenna coupling from a Stark sweep",
              config=True)
    cmd.add_argument("--input", required=True, help="Stark sweep CSV")
    cmd.add_argument("--port", choices=("readout", "antenna"),
                     required=True)
    cmd.add_argument("--alpha", type=float, default=None,
                     help="known attenuation (antenna calibration)")

    cmd = add("gamma1-sweep", cmd_gamma1_sweep,
              "relaxation-rate models vs photon number", config=True)
    cmd.add_argument("--n-max", type=float, default=2.0)
    cmd.add_argument("--points", type=int, default=41)

    cmd = add("dephasing-sweep", cmd_dephasing_sweep,
              "second-order antenna dephasing vs temperature", config=True)
    cmd.add_argument("--t-min", type=float, default=0.05)
    cmd.add_argument("--t-max", type=float, default=1.5)
    cmd.add_argument("--points", type=int, default=30)

    cmd = add("tls-sim", cmd_tls_sim,
              "simulate a fluctuating gamma1(t) record", config=True,
              seeded=True)
    cmd.add_argument("--mode", choices=("microscopic", "phenomenological"),
                     default="microscopic")

    cmd = add("psd-fit", cmd_psd_fit,
              "bin a gamma1 series into a PSD and fit the knee model")
    cmd.add_argument("--input", required=True, help="gamma1 series CSV")
    cmd.add_argument("--bins-per-decade", type=int, default=16)

    cmd = add("floor-fit", cmd_floor_fit,
              "fit the white-floor temperature scaling")
    cmd.add_argument("--input", required=True,
                     help="CSV of temp_k,psd_w_per_hz points")

    cmd = add("campaign", cmd_campaign,
              "full pipeline: gamma1 source, repeated relaxation "
              "experiments, PSD, knee fit", config=True, seeded=True)
    cmd.add_argument("--mode", choices=("microscopic", "phenomenological"),
                     default="microscopic")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out, inputs, outputs = args.handler(args)
        _write_report(out, args.command, inputs, outputs)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
