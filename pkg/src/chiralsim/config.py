"""TOML run configuration with flat dotted keys.

A config fixes the unit mode, the system (either raw rates or resonator and
emitter specs), exactly one run section and optional output settings::

    units = "ghz"              # rates are X in "2 pi x X GHz"; or "kappa_i"
    system.kappa_i = 4.94
    system.kappa_ex = 4.94
    system.g = 6.86
    system.gamma_q = 0.00494
    system.d = -0.99
    spectrum.from = -15.0
    spectrum.to = 15.0
    spectrum.steps = 1201

Every problem is reported as :class:`ConfigError` naming the offending key.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ChiralsimError, ConfigError
from .params import EmitterSpec, ResonatorSpec, SystemParams, ghz, resolve, zero_point_field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

UNITS = ("ghz", "kappa_i")
RUN_SECTIONS = ("spectrum", "wavepacket", "emission", "sweep", "field")
SWEEP_PARAMETERS = ("g", "D", "h_abs", "gamma_q", "kappa_ex")
SWEEP_METRICS = ("contrast", "loss", "bandwidth", "t_plus", "t_minus")

_REQUIRED = object()

_RAW_SYSTEM = {
    "omega_c": 0.0, "omega_q": 0.0, "kappa_i": _REQUIRED, "kappa_ex": _REQUIRED,
    "gamma_q": _REQUIRED, "g": _REQUIRED, "h_abs": 0.0, "h_phase_deg": 0.0, "d": -1.0,
}
_SPEC_SYSTEM = {"h_abs": 0.0, "h_phase_deg": 0.0, "d": -1.0}
_RESONATOR = {
    "wavelength_um": _REQUIRED, "q_intrinsic": _REQUIRED, "kappa_ex_ratio": _REQUIRED,
    "mode_volume_um3": _REQUIRED, "n_core": 3.48, "n_clad": 1.0,
}
_EMITTER = {"dipole_debye": _REQUIRED, "wavelength_um": _REQUIRED, "gamma_override": None}

_RUN_KEYS = {
    "spectrum": {"from": _REQUIRED, "to": _REQUIRED, "steps": _REQUIRED, "threshold": 0.5},
    "wavepacket": {
        "bandwidth_kappa": None, "bandwidth": None, "offset": None, "inputs": "dual",
        "n_modes": 4096, "t_end": None, "dt": None, "sample_every": 10,
        "snapshot_times": [], "carrier_detuning": 0.0,
        "extract_spectrum": False,
    },
    "emission": {
        "polarization": "sigma_plus", "initial_excitation": 1.0, "t_end": None, "dt": None,
        "residual_tol": 1e-4, "preload_mode": None,
    },
    "sweep": {
        "parameter": _REQUIRED, "from": None, "to": None, "steps": None, "values": None,
        "metric": _REQUIRED, "threshold": 0.5,
        "delta_from": None, "delta_to": None, "delta_steps": 2401,
    },
    "field": {"input": _REQUIRED},
}
_OUTPUT = {"dir": ".", "format": "csv"}


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep; ``values`` are in config units (D is dimensionless)."""

    parameter: str
    values: tuple
    metric: str
    threshold: float = 0.5
    delta_window: tuple | None = None

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}")
        if self.metric not in SWEEP_METRICS:
            raise ConfigError(f"sweep.metric must be one of {SWEEP_METRICS}, got {self.metric!r}")
        if len(self.values) < 2:
            raise ConfigError("sweep needs at least 2 values")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration.

    ``params`` is in the config's own units: rad/s for ``ghz`` and multiples
    of kappa_i for ``kappa_i``. ``kappa_i_rad`` is the absolute kappa_i in
    rad/s when it is known.
    """

    units: str
    params: SystemParams
    kappa_i_rad: float | None
    run_kind: str | None
    run: dict
    output: dict
    text: str
    base_dir: Path
    spec_level: bool = False
    sweep: SweepSpec | None = None
    extras: dict = field(default_factory=dict)

    def to_rate(self, value):
        """Config-unit number to the internal rate unit of ``params``."""
        return ghz(value) if self.units == "ghz" else float(value)

    def from_rate(self, rate):
        return rate / ghz(1.0) if self.units == "ghz" else float(rate)

    @property
    def dimensionless(self) -> SystemParams:
        """The system with every rate divided by kappa_i."""
        return self.params.scaled(self.params.kappa_i)


def _take(section: dict, schema: dict, prefix: str) -> dict:
    if not isinstance(section, dict):
        raise ConfigError(f"{prefix} must be a table of keys")
    unknown = sorted(set(section) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key {prefix}.{unknown[0]}")
    out = {}
    for key, default in schema.items():
        if key in section:
            out[key] = section[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required key {prefix}.{key}")
        else:
            out[key] = default
    return out


def _number(value, key, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{key} must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(f"{key} must be non-negative, got {value!r}")
    return value


def _integer(value, key, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _complex_h(h_abs, phase_deg):
    return h_abs * complex(math.cos(math.radians(phase_deg)), math.sin(math.radians(phase_deg)))


def _system(doc: dict, units: str):
    """Return ``(params, kappa_i_rad, spec_level, extras)``."""
    sysd = doc.get("system", {})
    spec_level = "resonator" in doc or "emitter" in doc
    if not spec_level:
        s = _take(sysd, _RAW_SYSTEM, "system")
        vals = {k: _number(v, f"system.{k}") for k, v in s.items()}
        for k in ("kappa_i", "kappa_ex", "gamma_q", "g", "h_abs"):
            _number(vals[k], f"system.{k}", nonneg=True)
        _number(vals["kappa_i"], "system.kappa_i", positive=True)
        if units == "kappa_i" and vals["kappa_i"] != 1.0:
            raise ConfigError("system.kappa_i must equal 1 when units = 'kappa_i'")
        conv = ghz if units == "ghz" else float
        h = _complex_h(conv(vals["h_abs"]), vals["h_phase_deg"])
        try:
            params = SystemParams(
                omega_c=conv(vals["omega_c"]), omega_q=conv(vals["omega_q"]),
                kappa_i=conv(vals["kappa_i"]), kappa_ex=conv(vals["kappa_ex"]),
                gamma_q=conv(vals["gamma_q"]), g=conv(vals["g"]), h=h, chirality_d=vals["d"],
            )
        except ChiralsimError as exc:
            raise ConfigError(f"system: {exc}") from exc
        return params, (params.kappa_i if units == "ghz" else None), False, {}

    for k in ("resonator", "emitter"):
        if k not in doc:
            raise ConfigError(f"spec-level input needs a [{k}] section")
    s = _take(sysd, _SPEC_SYSTEM, "system")
    r = _take(doc["resonator"], _RESONATOR, "resonator")
    e = _take(doc["emitter"], _EMITTER, "emitter")
    try:
        resonator = ResonatorSpec(
            wavelength_c=_number(r["wavelength_um"], "resonator.wavelength_um", positive=True) * 1e-6,
            q_intrinsic=_number(r["q_intrinsic"], "resonator.q_intrinsic"),
            kappa_ex_ratio=_number(r["kappa_ex_ratio"], "resonator.kappa_ex_ratio", nonneg=True),
            mode_volume=_number(r["mode_volume_um3"], "resonator.mode_volume_um3", positive=True) * 1e-18,
            n_core=_number(r["n_core"], "resonator.n_core"),
            n_clad=_number(r["n_clad"], "resonator.n_clad"),
        )
        base = resolve(resonator, EmitterSpec(
            dipole_debye=_number(e["dipole_debye"], "emitter.dipole_debye", positive=True),
            wavelength_q=_number(e["wavelength_um"], "emitter.wavelength_um", positive=True) * 1e-6,
        ))
    except ConfigError:
        raise
    except ChiralsimError as exc:
        raise ConfigError(f"resonator/emitter: {exc}") from exc
    kappa_i_rad = base.kappa_i
    to_rad = ghz if units == "ghz" else (lambda v: float(v) * kappa_i_rad)
    gamma = base.gamma_q
    if e["gamma_override"] is not None:
        gamma = to_rad(_number(e["gamma_override"], "emitter.gamma_override", nonneg=True))
    h = _complex_h(to_rad(_number(s["h_abs"], "system.h_abs", nonneg=True)),
                   _number(s["h_phase_deg"], "system.h_phase_deg"))
    try:
        params = base.with_(gamma_q=gamma, h=h, chirality_d=_number(s["d"], "system.d"))
    except ChiralsimError as exc:
        raise ConfigError(f"system: {exc}") from exc
    if units == "kappa_i":
        params = params.scaled(kappa_i_rad)
    extras = {"zero_point_field_v_per_m": zero_point_field(base.omega_c, resonator.mode_volume)}
    return params, kappa_i_rad, True, extras


def _run_section(doc: dict):
    present = [k for k in RUN_SECTIONS if k in doc]
    if len(present) > 1:
        raise ConfigError(f"exactly one run section allowed, found {present}")
    if not present:
        return None, {}
    kind = present[0]
    return kind, _take(doc[kind], _RUN_KEYS[kind], kind)


def _sweep_spec(run: dict) -> SweepSpec:
    if run["values"] is not None:
        if any(run[k] is not None for k in ("from", "to", "steps")):
            raise ConfigError("sweep: give either sweep.values or sweep.from/to/steps, not both")
        if not isinstance(run["values"], list):
            raise ConfigError("sweep.values must be a list")
        values = tuple(_number(v, "sweep.values") for v in run["values"])
    else:
        for k in ("from", "to", "steps"):
            if run[k] is None:
                raise ConfigError(f"missing required key sweep.{k}")
        lo, hi = _number(run["from"], "sweep.from"), _number(run["to"], "sweep.to")
        steps = _integer(run["steps"], "sweep.steps", 2)
        if lo == hi:
            raise ConfigError("sweep.from must differ from sweep.to")
        values = tuple(lo + (hi - lo) * i / (steps - 1) for i in range(steps))
    window = None
    if run["delta_from"] is not None or run["delta_to"] is not None:
        if run["delta_from"] is None or run["delta_to"] is None:
            raise ConfigError("sweep.delta_from and sweep.delta_to go together")
        window = (_number(run["delta_from"], "sweep.delta_from"), _number(run["delta_to"], "sweep.delta_to"),
                  _integer(run["delta_steps"], "sweep.delta_steps", 3))
    return SweepSpec(parameter=run["parameter"], values=values, metric=run["metric"],
                     threshold=_number(run["threshold"], "sweep.threshold"), delta_window=window)


def _validate_run(kind: str, run: dict):
    if kind == "spectrum":
        _number(run["from"], "spectrum.from")
        _number(run["to"], "spectrum.to")
        _integer(run["steps"], "spectrum.steps", 2)
        if run["from"] >= run["to"]:
            raise ConfigError("spectrum.from must be below spectrum.to")
        _number(run["threshold"], "spectrum.threshold")
    elif kind == "wavepacket":
        if (run["bandwidth_kappa"] is None) == (run["bandwidth"] is None):
            raise ConfigError("wavepacket needs exactly one of wavepacket.bandwidth_kappa, wavepacket.bandwidth")
        for k in ("bandwidth_kappa", "bandwidth"):
            if run[k] is not None:
                _number(run[k], f"wavepacket.{k}", positive=True)
        if run["inputs"] not in ("dual", "forward", "backward"):
            raise ConfigError("wavepacket.inputs must be 'dual', 'forward' or 'backward'")
        n = _integer(run["n_modes"], "wavepacket.n_modes", 16)
        if n & (n - 1):
            raise ConfigError("wavepacket.n_modes must be a power of two")
        for k in ("t_end", "dt", "offset"):
            if run[k] is not None:
                _number(run[k], f"wavepacket.{k}", positive=True)
        _integer(run["sample_every"], "wavepacket.sample_every", 1)
        if not isinstance(run["snapshot_times"], list):
            raise ConfigError("wavepacket.snapshot_times must be a list")
        for v in run["snapshot_times"]:
            _number(v, "wavepacket.snapshot_times", nonneg=True)
        _number(run["carrier_detuning"], "wavepacket.carrier_detuning")
        if not isinstance(run["extract_spectrum"], bool):
            raise ConfigError("wavepacket.extract_spectrum must be true or false")
    elif kind == "emission":
        if run["polarization"] not in ("sigma_plus", "sigma_minus"):
            raise ConfigError("emission.polarization must be 'sigma_plus' or 'sigma_minus'")
        ie = _number(run["initial_excitation"], "emission.initial_excitation")
        if not 0 < ie <= 1:
            raise ConfigError("emission.initial_excitation must lie in (0, 1]")
        for k in ("t_end", "dt"):
            if run[k] is not None:
                _number(run[k], f"emission.{k}", positive=True)
        _number(run["residual_tol"], "emission.residual_tol", positive=True)
        if run["preload_mode"] not in (None, "a", "b"):
            raise ConfigError("emission.preload_mode must be 'a' or 'b'")
    elif kind == "field":
        if not isinstance(run["input"], str):
            raise ConfigError("field.input must be a path string")


def parse_config(text: str, base_dir=".") -> RunConfig:
    """Parse and validate config text; relative paths resolve against ``base_dir``."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    known = {"units", "system", "resonator", "emitter", "output", *RUN_SECTIONS}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]}")
    units = doc.get("units", "ghz")
    if units not in UNITS:
        raise ConfigError(f"units must be one of {UNITS}, got {units!r}")
    kind, run = _run_section(doc)
    field_only = kind == "field" and "system" not in doc and "resonator" not in doc
    if field_only:
        params, kappa_i_rad, spec_level, extras = None, None, False, {}
    else:
        params, kappa_i_rad, spec_level, extras = _system(doc, units)
    if kind is not None:
        _validate_run(kind, run)
    output = _take(doc.get("output", {}), _OUTPUT, "output")
    if output["format"] not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")
    sweep = _sweep_spec(run) if kind == "sweep" else None
    return RunConfig(units=units, params=params, kappa_i_rad=kappa_i_rad, run_kind=kind, run=run,
                     output=output, text=text, base_dir=Path(base_dir), spec_level=spec_level, sweep=sweep,
                     extras=extras)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
    return parse_config(text, base_dir=path.parent)
