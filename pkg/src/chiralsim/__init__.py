"""Chiral emitter-resonator single-photon isolator models.

Submodules
----------
params
    Physical constants, device specs and the derived rate record.
chirality
    Optical chirality of guided fields, the coupling split and field maps.
scattering
    Steady-state single-photon transmission through the coupled system.
wavepacket
    Time-domain propagation of single-photon packets on a discretized waveguide.
emission
    Spontaneous emission into the resonator and waveguide ports.
config, cli
    TOML run configuration and the ``chiralsim`` command-line front end.
"""
from .errors import (
    ChiralsimError,
    ConfigError,
    DomainError,
    FormatError,
    IncompleteRunWarning,
    NumericalError,
    SingularityError,
    UndefinedChiralityError,
    UndefinedMetricError,
)
from .params import SystemParams, ghz, nominal_design, resolve, to_ghz

__version__ = "0.1.0"

__all__ = [
    "ChiralsimError",
    "ConfigError",
    "DomainError",
    "FormatError",
    "IncompleteRunWarning",
    "NumericalError",
    "SingularityError",
    "SystemParams",
    "UndefinedChiralityError",
    "UndefinedMetricError",
    "__version__",
    "ghz",
    "nominal_design",
    "resolve",
    "to_ghz",
]
