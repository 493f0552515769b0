"""``chiralsim`` command-line front end.

Subcommands read a TOML config (see :mod:`chiralsim.config`) and write
plot-ready CSV or JSON into ``--out``. Exit codes: 0 success, 2 config or
input error, 3 numerical failure, 4 run ended before the system emptied.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import chirality as ch
from . import emission as em
from . import scattering as sc
from . import wavepacket as wp
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DomainError,
    FormatError,
    IncompleteRunWarning,
    NumericalError,
    SingularityError,
    UndefinedMetricError,
)
from .io import config_hash, json_text, write_csv, write_json
from .params import to_ghz

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INCOMPLETE = 4


def thread_count():
    """Worker threads for sweeps from ``CHIRALSIM_THREADS`` (default: logical cores)."""
    raw = os.environ.get("CHIRALSIM_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CHIRALSIM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"CHIRALSIM_THREADS must be a positive integer, got {raw!r}")
    return n


class _Run:
    """Output plumbing shared by the subcommands."""

    def __init__(self, out_dir, fmt, cfg_text):
        self.out = Path(out_dir)
        self.fmt = fmt
        self.hash = config_hash(cfg_text)
        self.written = []

    def table(self, stem, header, rows):
        rows = list(rows)
        if self.fmt == "json":
            cols = {h: [r[i] for r in rows] for i, h in enumerate(header)}
            path = self.out / f"{stem}.json"
            write_json(path, {"chiralsim_version": __version__, "config_sha256": self.hash, "columns": cols})
        else:
            path = self.out / f"{stem}.csv"
            write_csv(path, header, rows, self.hash)
        self.written.append(path)
        return path

    def summary(self, stem, payload):
        payload = {"chiralsim_version": __version__, "config_sha256": self.hash, **payload}
        path = self.out / f"{stem}.json"
        write_json(path, payload)
        self.written.append(path)
        return path

    def sidecar(self, command, argv, status):
        meta = {
            "command": command,
            "argv": list(argv),
            "exit_status": status,
            "outputs": [p.name for p in self.written],
            "config_sha256": self.hash,
            "chiralsim_version": __version__,
            "numpy_version": np.__version__,
            "python_version": sys.version.split()[0],
        }
        write_json(self.out / "run_meta.json", meta)


def _unit_label(cfg: RunConfig):
    return "ghz" if cfg.units == "ghz" else "kappa_i"


def _require_kind(cfg: RunConfig, kind):
    if cfg.run_kind != kind:
        raise ConfigError(f"this subcommand needs a [{kind}] section, config has {cfg.run_kind!r}")


def _params_report(params, scale_to_ghz):
    out = {}
    for name in ("omega_c", "omega_q", "kappa_i", "kappa_ex", "gamma_q", "g"):
        out[name] = scale_to_ghz(getattr(params, name))
    out["h_abs"] = scale_to_ghz(abs(params.h))
    out["h_phase_deg"] = math.degrees(math.atan2(params.h.imag, params.h.real))
    out["d"] = params.chirality_d
    return out


def cmd_derive(cfg: RunConfig, run: _Run):
    p = cfg.params
    if cfg.units == "ghz":
        ghz_part = _params_report(p, to_ghz)
        kappa_part = _params_report(p.scaled(p.kappa_i), float)
    else:
        kappa_part = _params_report(p, float)
        ghz_part = None
        if cfg.kappa_i_rad is not None:
            ghz_part = _params_report(p.scaled(1.0 / cfg.kappa_i_rad), to_ghz)
    report = {"units": cfg.units, "spec_level": cfg.spec_level, "ghz": ghz_part, "kappa_i": kappa_part}
    report.update(cfg.extras)
    sys.stdout.write(json_text(report))
    if run is not None:
        run.summary("derive", report)
    return EXIT_OK


def _spectrum_rows(points, cfg):
    for pt in points:
        try:
            eta = pt.contrast
        except UndefinedMetricError:
            eta = float("nan")
        yield (cfg.from_rate(pt.delta.delta_c), pt.t_plus.real, pt.t_plus.imag, pt.t_minus.real,
               pt.t_minus.imag, pt.t_cap_plus, pt.t_cap_minus, eta)


def cmd_spectrum(cfg: RunConfig, run: _Run):
    _require_kind(cfg, "spectrum")
    r = cfg.run
    deltas = np.linspace(cfg.to_rate(r["from"]), cfg.to_rate(r["to"]), r["steps"])
    points = sc.spectrum(cfg.params, sc.detuning_grid(cfg.params, deltas))
    unit = _unit_label(cfg)
    run.table("spectrum", [f"delta_{unit}", "t_plus_re", "t_plus_im", "t_minus_re", "t_minus_im",
                           "T_plus", "T_minus", "eta"], _spectrum_rows(points, cfg))
    try:
        report = sc.isolation_metrics(points, r["threshold"]).as_dict(cfg.from_rate, unit)
    except UndefinedMetricError as exc:
        # The spectrum itself is still valid (e.g. an empty critically coupled
        # ring); only the resonant ratios are undefined.
        nearest = min(points, key=lambda p: abs(p.delta.delta_c))
        report = {"contrast": None, "insertion_loss_db": sc.insertion_loss_db(nearest.t_cap_plus),
                  f"bandwidth_{unit}": None, "bandwidth_truncated": None, "threshold": r["threshold"],
                  "t_plus": nearest.t_cap_plus, "t_minus": nearest.t_cap_minus, "metrics_error": str(exc)}
    run.summary("metrics", report)
    return EXIT_OK


def _pulse(cfg: RunConfig, p_dimless):
    r = cfg.run
    if r["bandwidth_kappa"] is not None:
        sigma = r["bandwidth_kappa"] * p_dimless.kappa
    else:
        sigma = cfg.to_rate(r["bandwidth"]) / cfg.params.kappa_i
    split = {"dual": None, "forward": (1.0, 0.0), "backward": (0.0, 1.0)}[r["inputs"]]
    carrier = cfg.to_rate(r["carrier_detuning"]) / cfg.params.kappa_i
    return wp.PulseSpec.from_bandwidth(sigma, offset=r["offset"], amplitude_split=split, carrier_detuning=carrier)


def _wavepacket_once(p, pulse, t_end, n_modes, dt, sample_every=10, snapshot_times=()):
    grid = wp.KGrid.for_pulse(pulse, t_end, n_modes=n_modes)
    dt = wp.default_dt(p, grid) if dt is None else dt
    traj = wp.propagate(p, grid, pulse, t_end, dt=dt, sample_every=sample_every, snapshot_times=snapshot_times)
    t_plus, t_minus = wp.transmissions(traj.initial, traj.final)
    return grid, dt, traj, t_plus, t_minus


def cmd_wavepacket(cfg: RunConfig, run: _Run, check_grid=False):
    _require_kind(cfg, "wavepacket")
    r = cfg.run
    p = cfg.dimensionless
    pulse = _pulse(cfg, p)
    t_end = r["t_end"] if r["t_end"] is not None else wp.suggest_t_end(p, pulse)
    grid, dt, traj, t_plus, t_minus = _wavepacket_once(
        p, pulse, t_end, r["n_modes"], r["dt"], r["sample_every"], r["snapshot_times"])
    run.table("trajectory", ["t", "norm_c", "norm_d", "abs_ea2", "abs_eb2", "abs_eq2"],
              zip(traj.times, traj.norm_c, traj.norm_d, traj.abs_ea2, traj.abs_eb2, traj.abs_eq2))
    for i, ts in enumerate(sorted(traj.snapshots)):
        plus, minus = wp.position_profile(traj.snapshots[ts])
        run.table(f"snapshot_{i:02d}", ["x", "abs_phi_plus2", "abs_phi_minus2"], zip(grid.x, plus, minus))
    summary = {
        "time_unit": "1/kappa_i",
        "t_end": t_end, "dt": dt, "n_modes": grid.n_modes, "domain_length": grid.domain_length,
        "tau_p": pulse.tau_p, "residual": traj.residual,
        "norm_final": float(traj.norm[-1]),
        "channels_mix": wp.channels_mix(p),
        "snapshot_times": sorted(traj.snapshots),
    }
    if t_plus is not None:
        summary["T_plus"] = t_plus
    if t_minus is not None:
        summary["T_minus"] = t_minus
    if r["extract_spectrum"]:
        ps = wp.spectrum_via_pulse(p, grid, pulse, t_end=t_end, dt=dt)
        keep = np.flatnonzero(ps.mask)
        ref_p, ref_m = sc.transmission_closed_form(p, sc.Detuning(ps.delta[keep], ps.delta[keep] + p.omega_c - p.omega_q))
        run.table("pulse_spectrum", ["delta_kappa_i", "T_plus", "T_minus", "T_plus_steady", "T_minus_steady"],
                  zip(ps.delta[keep], ps.t_plus[keep], ps.t_minus[keep], np.abs(ref_p) ** 2, np.abs(ref_m) ** 2))
        summary["pulse_spectrum_max_deviation"] = float(max(
            np.max(np.abs(ps.t_plus[keep] - np.abs(ref_p) ** 2)),
            np.max(np.abs(ps.t_minus[keep] - np.abs(ref_m) ** 2))))
    if check_grid:
        fine_dt = dt / 2.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IncompleteRunWarning)
            _, _, _, fp, fm = _wavepacket_once(p, pulse, t_end, 2 * grid.n_modes, fine_dt, 10**9)
        deltas = {}
        if t_plus is not None:
            deltas["T_plus"] = abs(fp - t_plus)
        if t_minus is not None:
            deltas["T_minus"] = abs(fm - t_minus)
        summary["grid_check"] = {"n_modes": 2 * grid.n_modes, "dt": fine_dt, "deltas": deltas,
                                 "within_1e-3": all(v < 1e-3 for v in deltas.values())}
    run.summary("summary", summary)
    return EXIT_OK


def cmd_emission(cfg: RunConfig, run: _Run):
    _require_kind(cfg, "emission")
    r = cfg.run
    p = cfg.dimensionless
    kappa_rad = cfg.kappa_i_rad
    if cfg.units == "ghz":
        to_dimless = lambda t_ns: t_ns * 1e-9 * kappa_rad  # noqa: E731
        time_col, time_scale = "t_ns", 1e9 / kappa_rad
    else:
        to_dimless = float
        time_col, time_scale = "t_kappa_i", 1.0
    t_end = to_dimless(r["t_end"]) if r["t_end"] is not None else em.auto_t_end(p, r["residual_tol"])
    dt = to_dimless(r["dt"]) if r["dt"] is not None else None
    if r["preload_mode"] is not None:
        init = (0.0, 1.0, 0.0) if r["preload_mode"] == "a" else (0.0, 0.0, 1.0)
        trace = em.evolve_amplitudes(p, init, t_end, dt, residual_tol=r["residual_tol"])
    else:
        dip = em.DipoleInit(r["polarization"], r["initial_excitation"])
        trace = em.evolve_emission(p, dip, t_end, dt)
    run.table("trace", [time_col, "eq2", "ea2", "eb2", "flux_port1", "flux_port2", "n_port1", "n_port2", "n_loss"],
              zip(trace.times * time_scale, trace.e_q2, trace.e_a2, trace.e_b2,
                  trace.flux_port1 / time_scale, trace.flux_port2 / time_scale,
                  trace.n_port1, trace.n_port2, trace.n_loss))
    n1, n2 = float(trace.n_port1[-1]), float(trace.n_port2[-1])
    summary = {
        "n_waveguide": em.waveguide_collection(trace),
        "n_port1": n1, "n_port2": n2, "n_loss": float(trace.n_loss[-1]),
        "residual": trace.residual, "budget_error": trace.budget_error,
        "flux_peaks": len(em.flux_peaks(trace)),
        "bare_cavity_collection": em.bare_cavity_collection(p.kappa_ex, p.kappa_i),
        "time_column": time_col, "t_end": t_end * time_scale,
    }
    summary["directionality"] = em.directionality(trace)[2] if n1 + n2 > 0 else None
    run.summary("summary", summary)
    return EXIT_OK


def _swept_params(cfg: RunConfig, value):
    p = cfg.params
    name = cfg.sweep.parameter
    if name == "D":
        return p.with_(chirality_d=value)
    if name == "h_abs":
        phase = p.h / abs(p.h) if p.h != 0 else 1.0
        return p.with_(h=cfg.to_rate(value) * phase)
    return p.with_(**{name: cfg.to_rate(value)})


def _sweep_metric(cfg: RunConfig, value):
    sw = cfg.sweep
    params = _swept_params(cfg, value)
    if sw.delta_window is not None:
        lo, hi, n = sw.delta_window
        deltas = np.linspace(cfg.to_rate(lo), cfg.to_rate(hi), n)
    else:
        deltas = np.linspace(-6.0 * params.kappa, 6.0 * params.kappa, 2401)
    m = sc.isolation_metrics(sc.spectrum(params, sc.detuning_grid(params, deltas)), sw.threshold)
    return {
        "contrast": m.contrast,
        "loss": m.insertion_loss_db,
        "bandwidth": cfg.from_rate(m.bandwidth),
        "t_plus": m.t_plus,
        "t_minus": m.t_minus,
    }[sw.metric]


def cmd_sweep(cfg: RunConfig, run: _Run):
    _require_kind(cfg, "sweep")
    values = list(cfg.sweep.values)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        metrics = list(pool.map(lambda v: _sweep_metric(cfg, v), values))
    run.table("sweep", ["value", cfg.sweep.metric], zip(values, metrics))
    return EXIT_OK


def cmd_field_analyze(input_path, run: _Run):
    fmap = ch.read_field_map(input_path)
    cmap = ch.chirality_map(fmap)
    run.table("chirality_map", ["x", "y", "z", "c", "d", "defined"], ch.chirality_rows(cmap))
    report = {"input": Path(input_path).name, "cells": int(np.prod(fmap.shape)),
              "defined_cells": int(np.count_nonzero(cmap.defined))}
    try:
        report["mode_volume_m3"] = ch.mode_volume(fmap)
    except FormatError as exc:
        report["mode_volume_m3"] = None
        report["mode_volume_error"] = str(exc)
    run.summary("field_report", report)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="chiralsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chiralsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("derive", "spectrum", "wavepacket", "emission", "sweep", "field-analyze"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "field-analyze", help="TOML run configuration")
        sp.add_argument("--out", help="output directory (default: output.dir of the config)")
        sp.add_argument("--format", choices=("csv", "json"), help="table format (default: output.format)")
        sp.add_argument("--check-grid", action="store_true",
                        help="wavepacket: rerun with doubled modes and halved step, report deltas")
        if name == "field-analyze":
            sp.add_argument("input", nargs="?", help="field-map CSV (default: field.input of the config)")
    return parser


def _dispatch(args, argv):
    cfg = load_config(args.config) if args.config else None
    if args.command == "field-analyze":
        if args.input:
            input_path = Path(args.input)
        elif cfg is not None and cfg.run_kind == "field":
            input_path = cfg.base_dir / cfg.run["input"]
        else:
            raise ConfigError("field-analyze needs an input file or a [field] section with field.input")
        text = cfg.text if cfg is not None else _read_for_hash(input_path)
    else:
        text = cfg.text
    out_dir = args.out or (cfg.output["dir"] if cfg is not None else ".")
    fmt = args.format or (cfg.output["format"] if cfg is not None else "csv")
    run = _Run(out_dir, fmt, text)
    if args.command == "derive":
        status = cmd_derive(cfg, run if args.out else None)
        return status, run
    handlers = {
        "spectrum": lambda: cmd_spectrum(cfg, run),
        "wavepacket": lambda: cmd_wavepacket(cfg, run, args.check_grid),
        "emission": lambda: cmd_emission(cfg, run),
        "sweep": lambda: cmd_sweep(cfg, run),
        "field-analyze": lambda: cmd_field_analyze(input_path, run),
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IncompleteRunWarning)
        status = handlers[args.command]()
    incomplete = [w for w in caught if issubclass(w.category, IncompleteRunWarning)]
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if incomplete:
        status = EXIT_INCOMPLETE
    return status, run


def _read_for_hash(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {str(path)!r}: {exc.strerror}") from exc


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    run = None
    try:
        status, run = _dispatch(args, argv)
    except (ConfigError, FormatError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SingularityError, UndefinedMetricError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if run is not None and run.written:
        run.sidecar(args.command, argv, status)
        for path in run.written:
            print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
