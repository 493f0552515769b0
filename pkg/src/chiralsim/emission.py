"""Spontaneous emission of the chirally coupled emitter into the ring and waveguide.

In the single-excitation sector the state is three amplitudes: emitter
``e_q`` and the CCW/CW mode amplitudes ``e_a``/``e_b``. Mode amplitudes
decay at ``kappa_i + kappa_ex``; mode a leaks into port 2 and mode b into
port 1, each at photon-flux rate ``2 kappa_ex |e|^2``. Cumulative port and
loss totals are integrated alongside the amplitudes by the same RK4 step.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .chirality import split_coupling
from .errors import DomainError, IncompleteRunWarning, UndefinedMetricError
from .integrators import check_finite, default_step, rk4_step
from .params import SystemParams

SIGMA_PLUS = "sigma_plus"
SIGMA_MINUS = "sigma_minus"


@dataclass(frozen=True)
class DipoleInit:
    polarization: str = SIGMA_PLUS
    initial_excitation: float = 1.0

    def __post_init__(self):
        if self.polarization not in (SIGMA_PLUS, SIGMA_MINUS):
            raise DomainError(f"polarization must be {SIGMA_PLUS!r} or {SIGMA_MINUS!r}")
        if not 0 < self.initial_excitation <= 1:
            raise DomainError("initial_excitation must lie in (0, 1]")


@dataclass(frozen=True)
class EmissionTrace:
    times: np.ndarray
    e_q2: np.ndarray
    e_a2: np.ndarray
    e_b2: np.ndarray
    flux_port1: np.ndarray
    flux_port2: np.ndarray
    n_port1: np.ndarray
    n_port2: np.ndarray
    n_loss: np.ndarray
    initial_excitation: float
    residual_tol: float = 1e-4

    @property
    def residual(self):
        return float(self.e_q2[-1] + self.e_a2[-1] + self.e_b2[-1])

    @property
    def complete(self):
        return self.residual < self.residual_tol

    @property
    def budget_error(self):
        """Largest deviation of ports + losses + stored excitation from the initial value."""
        total = self.n_port1 + self.n_port2 + self.n_loss + self.e_q2 + self.e_a2 + self.e_b2
        return float(np.max(np.abs(total - self.initial_excitation)))


def evolve_amplitudes(params: SystemParams, initial, t_end, dt=None, couplings=None,
                      residual_tol=1e-4) -> EmissionTrace:
    """Integrate the free decay of arbitrary initial amplitudes ``(e_q, e_a, e_b)``.

    ``couplings`` overrides the ``(g_a, g_b)`` split derived from the chirality.
    """
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    if couplings is None:
        cc = split_coupling(params.g, params.chirality_d)
        couplings = (cc.g_a, cc.g_b)
    ga, gb = (complex(c) for c in couplings)
    kappa = params.kappa
    gamma = params.gamma_q
    h = params.h
    hc = np.conj(h)
    if dt is None:
        dt = default_step(kappa, params.g, gamma)
    n_steps = int(np.ceil(t_end / dt))
    dt = t_end / n_steps

    kex2 = 2.0 * params.kappa_ex
    ki2 = 2.0 * params.kappa_i
    g2 = 2.0 * gamma

    def rhs(_t, y):
        # y = (e_q, e_a, e_b, n_port1, n_port2, n_loss); the running totals are
        # integrated with the amplitudes so they share the fourth-order accuracy.
        eq, ea, eb = y[0], y[1], y[2]
        pa, pb, pq = (ea * np.conj(ea)).real, (eb * np.conj(eb)).real, (eq * np.conj(eq)).real
        return np.array([
            -gamma * eq - 1j * (ga * ea + gb * eb),
            -kappa * ea - 1j * np.conj(ga) * eq - 1j * hc * eb,
            -kappa * eb - 1j * np.conj(gb) * eq - 1j * h * ea,
            kex2 * pb,
            kex2 * pa,
            ki2 * (pa + pb) + g2 * pq,
        ])

    y = np.zeros(6, dtype=complex)
    y[:3] = np.asarray(initial, dtype=complex)
    states = np.empty((n_steps + 1, 6), dtype=complex)
    states[0] = y
    for i in range(n_steps):
        y = rk4_step(rhs, i * dt, y, dt)
        states[i + 1] = y
        if (i & 1023) == 0:
            check_finite(i * dt, amplitudes=y)
    check_finite(t_end, amplitudes=y)

    times = np.arange(n_steps + 1) * dt
    pops = np.abs(states[:, :3]) ** 2
    e_q2, e_a2, e_b2 = pops[:, 0], pops[:, 1], pops[:, 2]
    totals = states[:, 3:].real
    trace = EmissionTrace(
        times=times, e_q2=e_q2, e_a2=e_a2, e_b2=e_b2,
        flux_port1=kex2 * e_b2, flux_port2=kex2 * e_a2,
        n_port1=totals[:, 0], n_port2=totals[:, 1], n_loss=totals[:, 2],
        initial_excitation=float(pops[0].sum()), residual_tol=residual_tol,
    )
    if not trace.complete:
        warnings.warn(
            f"residual excitation {trace.residual:.3g} >= {residual_tol:g} at t_end={t_end!r}",
            IncompleteRunWarning, stacklevel=2,
        )
    return trace


def evolve_emission(params: SystemParams, dipole: DipoleInit, t_end, dt=None) -> EmissionTrace:
    """Emission from an excited emitter with a circular dipole.

    A sigma+ dipole couples to the CCW mode with ``alpha g`` and to the CW mode
    with ``beta g``; a sigma- dipole swaps the two couplings.
    """
    cc = split_coupling(params.g, params.chirality_d)
    couplings = (cc.g_a, cc.g_b) if dipole.polarization == SIGMA_PLUS else (cc.g_b, cc.g_a)
    amp = np.sqrt(dipole.initial_excitation)
    return evolve_amplitudes(params, (amp, 0.0, 0.0), t_end, dt, couplings=couplings)


def waveguide_collection(trace: EmissionTrace) -> float:
    """Total excitation delivered to the waveguide (both ports), ``n_port1 + n_port2`` at the end."""
    if not trace.complete:
        warnings.warn("collection evaluated on an incomplete trace", IncompleteRunWarning, stacklevel=2)
    return float(trace.n_port1[-1] + trace.n_port2[-1])


def directionality(trace: EmissionTrace):
    """``(n_port1, n_port2, (n2 - n1)/(n2 + n1))``; +1 means everything left through port 2."""
    n1, n2 = float(trace.n_port1[-1]), float(trace.n_port2[-1])
    if n1 + n2 == 0:
        raise UndefinedMetricError("no excitation reached the waveguide")
    return n1, n2, (n2 - n1) / (n2 + n1)


def bare_cavity_collection(kappa_ex, kappa_i):
    """Fraction of a stored cavity photon that leaves through the waveguide."""
    if kappa_ex < 0 or kappa_i < 0 or kappa_ex + kappa_i <= 0:
        raise DomainError("need non-negative rates with kappa_ex + kappa_i > 0")
    return kappa_ex / (kappa_ex + kappa_i)


def flux_peaks(trace: EmissionTrace, rel_height=1e-3):
    """Times of local maxima in the total waveguide flux above ``rel_height`` of the peak."""
    flux = trace.flux_port1 + trace.flux_port2
    idx, _ = find_peaks(flux, height=rel_height * flux.max())
    return trace.times[idx]


def auto_t_end(params: SystemParams, residual_tol=1e-4, margin=1.5):
    """End time for which the slowest internal eigenmode has decayed below ``residual_tol``."""
    cc = split_coupling(params.g, params.chirality_d)
    ga, gb = cc.g_a, cc.g_b
    m = np.array([
        [-params.gamma_q, -1j * ga, -1j * gb],
        [-1j * np.conj(ga), -params.kappa, -1j * np.conj(params.h)],
        [-1j * np.conj(gb), -1j * params.h, -params.kappa],
    ])
    slowest = -np.max(np.linalg.eigvals(m).real)
    if not slowest > 0:
        raise DomainError("system has an undamped mode; choose t_end explicitly")
    return margin * np.log(1.0 / residual_tol) / (2.0 * slowest)
