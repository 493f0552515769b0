"""Physical constants, user-facing device specs and the derived rate record.

All rates are angular (rad/s). Frequencies quoted as "2 pi x X GHz" convert
with :func:`ghz`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    eps0: float = 8.8541878128e-12  # F/m
    c_light: float = 2.99792458e8  # m/s
    debye: float = 3.33564e-30  # C m

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise DomainError(f"{f.name} must be positive")


CONSTANTS = PhysicalConstants()


def ghz(value):
    """Angular rate for a frequency written as ``2 pi x value GHz``."""
    return 2.0 * math.pi * 1e9 * value


def to_ghz(rate):
    """Inverse of :func:`ghz`."""
    return rate / (2.0 * math.pi * 1e9)


def omega_from_wavelength(wavelength, constants=CONSTANTS):
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    return 2.0 * math.pi * constants.c_light / wavelength


def _require_positive(**kwargs):
    for name, value in kwargs.items():
        if not (np.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ResonatorSpec:
    """Ring resonator as quoted in a design: wavelength, intrinsic Q, mode volume."""

    wavelength_c: float
    q_intrinsic: float
    kappa_ex_ratio: float
    mode_volume: float
    n_core: float = 3.48
    n_clad: float = 1.0

    def __post_init__(self):
        _require_positive(wavelength_c=self.wavelength_c, mode_volume=self.mode_volume)
        if not self.q_intrinsic > 1:
            raise DomainError(f"q_intrinsic must exceed 1, got {self.q_intrinsic!r}")
        if not self.kappa_ex_ratio >= 0:
            raise DomainError("kappa_ex_ratio must be non-negative")
        if not self.n_core > self.n_clad > 0:
            raise DomainError("need n_core > n_clad > 0")


@dataclass(frozen=True)
class EmitterSpec:
    dipole_debye: float
    wavelength_q: float
    gamma_override: float | None = None

    def __post_init__(self):
        _require_positive(dipole_debye=self.dipole_debye, wavelength_q=self.wavelength_q)
        if self.gamma_override is not None and not self.gamma_override >= 0:
            raise DomainError("gamma_override must be non-negative")


@dataclass(frozen=True)
class SystemParams:
    """Every rate of the emitter / two-mode resonator / waveguide system.

    Attributes are angular rates. The record is unit-agnostic in practice:
    dividing everything by ``kappa_i`` (see :meth:`scaled`) gives the
    dimensionless form used by the time-domain code.

    ``h`` is the complex CW/CCW backscattering rate and ``chirality_d`` the
    optical chirality D in [-1, 1] at the emitter position.
    """

    omega_c: float
    omega_q: float
    kappa_i: float
    kappa_ex: float
    gamma_q: float
    g: float
    h: complex = 0j
    chirality_d: float = -1.0

    def __post_init__(self):
        for name in ("omega_c", "omega_q", "kappa_i", "kappa_ex", "gamma_q", "g", "chirality_d"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not np.isfinite(complex(self.h)):
            raise DomainError("h must be finite")
        for name in ("kappa_i", "kappa_ex", "gamma_q", "g"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if abs(self.chirality_d) > 1:
            raise DomainError(f"|chirality_d| must be <= 1, got {self.chirality_d!r}")
        object.__setattr__(self, "h", complex(self.h))

    @property
    def kappa(self):
        """Total amplitude decay rate of each resonator mode."""
        return self.kappa_i + self.kappa_ex

    def scaled(self, unit):
        """Return a copy with every rate and frequency divided by ``unit``."""
        if not unit > 0:
            raise DomainError("unit must be positive")
        return replace(
            self,
            omega_c=self.omega_c / unit,
            omega_q=self.omega_q / unit,
            kappa_i=self.kappa_i / unit,
            kappa_ex=self.kappa_ex / unit,
            gamma_q=self.gamma_q / unit,
            g=self.g / unit,
            h=self.h / unit,
        )

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class StarkSpec:
    rabi: float
    detuning: float
    base_detuning: float = 0.0

    def __post_init__(self):
        if self.detuning == 0:
            raise DomainError("Stark laser detuning must be non-zero")


def zero_point_field(omega_c, mode_volume, constants=CONSTANTS):
    """Vacuum field amplitude sqrt(hbar w / 2 eps0 V) in V/m."""
    _require_positive(omega_c=omega_c, mode_volume=mode_volume)
    return math.sqrt(constants.hbar * omega_c / (2.0 * constants.eps0 * mode_volume))


def coupling_strength(dipole_debye, e0, constants=CONSTANTS):
    """Emitter-mode coupling |d| E0 / hbar for a dipole given in Debye."""
    _require_positive(dipole_debye=dipole_debye, e0=e0)
    return dipole_debye * constants.debye * e0 / constants.hbar


def spontaneous_rate(dipole_debye, omega_q, constants=CONSTANTS):
    """Free-space emitter decay |d|^2 w^3 / (3 pi eps0 hbar c^3).

    The frequency enters cubed; a quadratic form is dimensionally wrong.
    """
    _require_positive(dipole_debye=dipole_debye, omega_q=omega_q)
    d = dipole_debye * constants.debye
    return d**2 * omega_q**3 / (3.0 * math.pi * constants.eps0 * constants.hbar * constants.c_light**3)


def kappa_from_q(omega_c, q_intrinsic):
    _require_positive(omega_c=omega_c)
    if not q_intrinsic > 1:
        raise DomainError(f"quality factor must exceed 1, got {q_intrinsic!r}")
    return omega_c / q_intrinsic


def stark_shift(spec: StarkSpec):
    """Optical Stark shift and the resulting detuning of the suppressed transition.

    Returns ``(delta_ose, delta_minus)`` with ``delta_ose = 2 rabi^2 / detuning``
    and ``delta_minus = base_detuning + 2 delta_ose``.
    """
    if spec.detuning == 0:
        raise DomainError("Stark laser detuning must be non-zero")
    delta_ose = 2.0 * spec.rabi**2 / spec.detuning
    return delta_ose, spec.base_detuning + 2.0 * delta_ose


def resolve(resonator: ResonatorSpec, emitter: EmitterSpec, h: complex = 0j, d: float = -1.0,
            constants: PhysicalConstants = CONSTANTS) -> SystemParams:
    """Derive the full rate record from device-level specs."""
    if abs(d) > 1:
        raise DomainError(f"|D| must be <= 1, got {d!r}")
    omega_c = omega_from_wavelength(resonator.wavelength_c, constants)
    omega_q = omega_from_wavelength(emitter.wavelength_q, constants)
    kappa_i = kappa_from_q(omega_c, resonator.q_intrinsic)
    e0 = zero_point_field(omega_c, resonator.mode_volume, constants)
    g = coupling_strength(emitter.dipole_debye, e0, constants)
    if emitter.gamma_override is not None:
        gamma_q = float(emitter.gamma_override)
    else:
        gamma_q = spontaneous_rate(emitter.dipole_debye, omega_q, constants)
    return SystemParams(
        omega_c=omega_c,
        omega_q=omega_q,
        kappa_i=kappa_i,
        kappa_ex=resonator.kappa_ex_ratio * kappa_i,
        gamma_q=gamma_q,
        g=g,
        h=complex(h),
        chirality_d=float(d),
    )


def nominal_design():
    """Resonator and emitter specs of the silicon ring / InAs dot reference design."""
    resonator = ResonatorSpec(
        wavelength_c=1.556e-6,
        q_intrinsic=3.9e4,
        kappa_ex_ratio=1.0,
        mode_volume=1.55e-18,
        n_core=3.48,
        n_clad=1.0,
    )
    emitter = EmitterSpec(dipole_debye=20.0, wavelength_q=1.556e-6)
    return resonator, emitter
