"""Steady-state single-photon scattering off the chiral emitter-ring system.

Two independent routes give the transmission amplitudes:

* :func:`transmission_closed_form` transcribes the analytic amplitudes, and
* :func:`solve_direction` assembles the stationary real-space equations
  (waveguide jump conditions at the coupling point plus the three internal
  amplitudes) and solves them as a linear system.

The waveguide normalization uses v_g = 1, so the point coupling is
``V = sqrt(2 kappa_ex)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chirality import split_coupling
from .errors import DomainError, SingularityError, UndefinedMetricError
from .params import SystemParams

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class Detuning:
    """Probe detunings from the resonator (``delta_c``) and the emitter (``delta_q``)."""

    delta_c: float
    delta_q: float

    @classmethod
    def probe(cls, params: SystemParams, delta_c):
        """Detuning pair for one probe frequency, given its offset from omega_c."""
        return cls(float(delta_c), float(delta_c + params.omega_c - params.omega_q))


def detuning_grid(params: SystemParams, deltas_c):
    return [Detuning.probe(params, d) for d in np.asarray(deltas_c, dtype=float)]


@dataclass(frozen=True)
class DirectionalSolution:
    t: complex
    r: complex
    e_a: complex
    e_b: complex
    e_q: complex


@dataclass(frozen=True)
class ScatterPoint:
    delta: Detuning
    t_plus: complex
    t_minus: complex
    r_plus: complex
    r_minus: complex
    forward: DirectionalSolution
    backward: DirectionalSolution

    @property
    def t_cap_plus(self):
        return abs(self.t_plus) ** 2

    @property
    def t_cap_minus(self):
        return abs(self.t_minus) ** 2

    @property
    def contrast(self):
        return _contrast(self.t_cap_plus, self.t_cap_minus)


@dataclass(frozen=True)
class IsolationMetrics:
    contrast: float
    insertion_loss_db: float
    bandwidth: float
    threshold: float
    t_plus: float
    t_minus: float
    truncated: bool = False

    def as_dict(self, convert=None, unit="ghz"):
        """JSON-ready dict; ``convert`` maps the bandwidth to the reporting ``unit``."""
        width = convert(self.bandwidth) if convert else self.bandwidth
        return {
            "contrast": self.contrast,
            "insertion_loss_db": self.insertion_loss_db,
            f"bandwidth_{unit}": width,
            "bandwidth_truncated": self.truncated,
            "threshold": self.threshold,
            "t_plus": self.t_plus,
            "t_minus": self.t_minus,
        }


def _couplings(params: SystemParams):
    cc = split_coupling(params.g, params.chirality_d)
    return cc.g_a, cc.g_b


def _closed_form(dc, dq, ga, gb, kex, h):
    gsum = abs(ga) ** 2 + abs(gb) ** 2
    cross = np.conj(ga) * gb * h + ga * np.conj(gb) * np.conj(h)
    hh = abs(h) ** 2
    num = dc * (dc * dq - gsum) + dq * kex**2 - cross - dq * hh + 1j * (abs(gb) ** 2 - abs(ga) ** 2) * kex
    den = (dc + 1j * kex) * (dq * (dc + 1j * kex) - gsum) - cross - dq * hh
    return num, den


def transmission_closed_form(params: SystemParams, delta: Detuning):
    """Analytic forward and backward transmission amplitudes ``(t_plus, t_minus)``.

    Accepts scalar or array detunings. Raises :class:`SingularityError` if a
    denominator vanishes exactly.
    """
    if not params.kappa_ex > 0:
        raise DomainError("closed-form transmission needs kappa_ex > 0")
    ga, gb = _couplings(params)
    dc = np.asarray(delta.delta_c, dtype=float) + 1j * params.kappa_i
    dq = np.asarray(delta.delta_q, dtype=float) + 1j * params.gamma_q
    num_p, den_p = _closed_form(dc, dq, ga, gb, params.kappa_ex, params.h)
    num_m, den_m = _closed_form(dc, dq, gb, ga, params.kappa_ex, params.h)
    for den in (den_p, den_m):
        bad = np.atleast_1d(den == 0)
        if bad.any():
            at = np.atleast_1d(delta.delta_c)[np.argmax(bad)] if np.ndim(delta.delta_c) else delta.delta_c
            raise SingularityError(f"transmission denominator vanishes at delta_c={at!r}")
    t_plus, t_minus = num_p / den_p, num_m / den_m
    if np.ndim(t_plus) == 0:
        return complex(t_plus), complex(t_minus)
    return t_plus, t_minus


def _system_matrices(params: SystemParams, delta_c, delta_q, direction):
    """Stacked 3x3 systems in (e_a, e_b, e_q) and their drive vectors."""
    ga, gb = _couplings(params)
    h = params.h
    v = math.sqrt(2.0 * params.kappa_ex)
    dc = np.atleast_1d(np.asarray(delta_c, dtype=float)) + 1j * params.kappa_i
    dq = np.atleast_1d(np.asarray(delta_q, dtype=float)) + 1j * params.gamma_q
    n = dc.shape[0]
    m = np.zeros((n, 3, 3), dtype=complex)
    # Each waveguide jump condition folds into a -i kappa_ex self-energy.
    m[:, 0, 0] = dc + 1j * params.kappa_ex
    m[:, 0, 1] = -np.conj(h)
    m[:, 0, 2] = -np.conj(ga)
    m[:, 1, 0] = -h
    m[:, 1, 1] = dc + 1j * params.kappa_ex
    m[:, 1, 2] = -np.conj(gb)
    m[:, 2, 0] = -ga
    m[:, 2, 1] = -gb
    m[:, 2, 2] = dq
    rhs = np.zeros((n, 3), dtype=complex)
    rhs[:, 0 if direction == FORWARD else 1] = v
    return m, rhs, v


def _solve_stack(params, delta_c, delta_q, direction):
    if direction not in (FORWARD, BACKWARD):
        raise DomainError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
    m, rhs, v = _system_matrices(params, delta_c, delta_q, direction)
    try:
        amp = np.linalg.solve(m, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        for i in range(m.shape[0]):
            try:
                np.linalg.solve(m[i], rhs[i])
            except np.linalg.LinAlgError:
                at = np.atleast_1d(delta_c)[i]
                raise SingularityError(f"steady-state system singular at delta_c={at!r}") from None
        raise
    e_a, e_b, e_q = amp[:, 0], amp[:, 1], amp[:, 2]
    if direction == FORWARD:
        t = 1.0 - 1j * v * e_a
        r = -1j * v * e_b
    else:
        t = 1.0 - 1j * v * e_b
        r = -1j * v * e_a
    return t, r, e_a, e_b, e_q


def solve_direction(params: SystemParams, delta: Detuning, direction: str) -> DirectionalSolution:
    """Transmission, reflection and internal amplitudes for a single input port.

    ``forward`` injects from port 1 (right-moving, drives the CCW mode a);
    ``backward`` injects from port 2 (left-moving, drives the CW mode b).
    """
    t, r, ea, eb, eq = _solve_stack(params, delta.delta_c, delta.delta_q, direction)
    return DirectionalSolution(complex(t[0]), complex(r[0]), complex(ea[0]), complex(eb[0]), complex(eq[0]))


def _points(params, deltas):
    dc = np.array([d.delta_c for d in deltas], dtype=float)
    dq = np.array([d.delta_q for d in deltas], dtype=float)
    fw = _solve_stack(params, dc, dq, FORWARD)
    bw = _solve_stack(params, dc, dq, BACKWARD)
    pts = []
    for i, d in enumerate(deltas):
        f = DirectionalSolution(*(complex(x[i]) for x in fw))
        b = DirectionalSolution(*(complex(x[i]) for x in bw))
        pts.append(ScatterPoint(d, f.t, b.t, f.r, b.r, f, b))
    return pts


def steady_state_solve(params: SystemParams, delta: Detuning) -> ScatterPoint:
    """Solve both input directions at one detuning."""
    return _points(params, [delta])[0]


def spectrum(params: SystemParams, deltas) -> list[ScatterPoint]:
    """Steady-state scattering at every detuning, in input order."""
    deltas = list(deltas)
    if not deltas:
        raise DomainError("detuning list is empty")
    try:
        return _points(params, deltas)
    except SingularityError as exc:
        raise SingularityError(f"spectrum: {exc}") from exc


# Transmissions below this are round-off of an exact zero (amplitudes carry ~1e-16 error).
ZERO_TRANSMISSION = 1e-24


def _contrast(tp, tm):
    total = tp + tm
    if total <= ZERO_TRANSMISSION:
        raise UndefinedMetricError("isolation contrast undefined: T+ + T- = 0")
    return (tp - tm) / total


def insertion_loss_db(t_plus_power):
    with np.errstate(divide="ignore"):
        return float(-10.0 * np.log10(t_plus_power))


def isolation_metrics(points, threshold=0.5) -> IsolationMetrics:
    """Contrast and insertion loss at the grid point nearest zero detuning,
    plus the width of the contiguous window around it where contrast >= threshold.

    Window edges are linearly interpolated between grid points. If the window
    reaches the end of the grid, ``truncated`` is set and the width is a lower bound.
    """
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    pts = sorted(points, key=lambda p: p.delta.delta_c)
    if not pts:
        raise DomainError("empty spectrum")
    x = np.array([p.delta.delta_c for p in pts])
    tp = np.array([p.t_cap_plus for p in pts])
    tm = np.array([p.t_cap_minus for p in pts])
    i0 = int(np.argmin(np.abs(x)))
    eta0 = _contrast(tp[i0], tm[i0])
    total = tp + tm
    with np.errstate(invalid="ignore", divide="ignore"):
        eta = np.where(total > ZERO_TRANSMISSION, (tp - tm) / total, -np.inf)

    truncated = False
    if eta[i0] < threshold:
        width = 0.0
    else:
        hi = i0
        while hi + 1 < len(x) and eta[hi + 1] >= threshold:
            hi += 1
        if hi + 1 < len(x):
            right = x[hi] + (eta[hi] - threshold) / (eta[hi] - eta[hi + 1]) * (x[hi + 1] - x[hi])
        else:
            right, truncated = x[hi], True
        lo = i0
        while lo - 1 >= 0 and eta[lo - 1] >= threshold:
            lo -= 1
        if lo - 1 >= 0:
            left = x[lo] - (eta[lo] - threshold) / (eta[lo] - eta[lo - 1]) * (x[lo] - x[lo - 1])
        else:
            left, truncated = x[lo], True
        width = float(right - left)
    return IsolationMetrics(
        contrast=float(eta0),
        insertion_loss_db=insertion_loss_db(tp[i0]),
        bandwidth=width,
        threshold=float(threshold),
        t_plus=float(tp[i0]),
        t_minus=float(tm[i0]),
        truncated=truncated,
    )


def bare_mode_amplitudes(kappa, kappa_ex, h, delta_in, drive=1.0):
    """Steady CCW/CW amplitudes of the empty ring driven through mode a.

    ``kappa`` is the total amplitude decay rate and ``delta_in`` the drive
    detuning in the rotating frame of the resonator (``delta_in = omega_c -
    omega``). Returns ``(a, b)``.

    ``b`` carries ``-i conj(h)``; the full solver couples b to a through ``h``
    instead, so for complex ``h`` the two differ in the phase of ``b`` only.
    ``|b / a|`` and the transmission are identical.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    s = 1j * np.asarray(delta_in, dtype=float) + kappa
    den = s**2 + abs(h) ** 2
    if np.any(den == 0):
        raise SingularityError("bare-mode denominator vanishes")
    feed = math.sqrt(2.0 * kappa_ex) * drive
    a = s * feed / den
    b = -1j * np.conj(h) * feed / den
    if np.ndim(a) == 0:
        return complex(a), complex(b)
    return a, b


def bare_transmission(kappa_i, kappa_ex, h, delta_c):
    """Transmission of the empty ring for a probe at ``delta_c = omega - omega_c``."""
    a, _ = bare_mode_amplitudes(kappa_i + kappa_ex, kappa_ex, h, -np.asarray(delta_c, dtype=float))
    return 1.0 - math.sqrt(2.0 * kappa_ex) * a


@dataclass(frozen=True)
class ChiralityPoint:
    d: float
    contrast: float
    insertion_loss_db: float


def contrast_vs_chirality(params: SystemParams, d_grid) -> list[ChiralityPoint]:
    """Contrast and insertion loss on resonance (h = 0) for each chirality D <= 0."""
    out = []
    for d in d_grid:
        if not -1.0 <= d <= 0.0:
            raise DomainError(f"chirality grid must lie in [-1, 0], got {d!r}")
        p = params.with_(chirality_d=float(d), h=0j)
        t_plus, t_minus = transmission_closed_form(p, Detuning.probe(p, 0.0))
        tp, tm = abs(t_plus) ** 2, abs(t_minus) ** 2
        out.append(ChiralityPoint(float(d), float(_contrast(tp, tm)), insertion_loss_db(tp)))
    return out
