"""Optical chirality of evanescent fields and the chiral coupling split.

Circular components use the unconjugated projections
``E . e_sigma- = (Ex - i Ey)/sqrt(2)`` and ``E . e_sigma+ = (Ex + i Ey)/sqrt(2)``;
only the in-plane components enter C and D.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError, UndefinedChiralityError

FORWARD = "forward"
BACKWARD = "backward"

FIELD_COLUMNS = ("x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez", "eps")


@dataclass(frozen=True)
class FieldSample:
    ex: complex
    ey: complex
    ez: complex = 0j
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    permittivity: float = 1.0

    def conjugate(self):
        return FieldSample(
            np.conj(self.ex), np.conj(self.ey), np.conj(self.ez), self.position, self.permittivity
        )


@dataclass(frozen=True)
class ChiralCoupling:
    d: float
    alpha: float
    beta: float
    g_a: complex
    g_b: complex


def _circular_intensities(ex, ey):
    ex = np.asarray(ex, dtype=complex)
    ey = np.asarray(ey, dtype=complex)
    if np.any(np.isnan(ex)) or np.any(np.isnan(ey)):
        raise DomainError("field components contain NaN")
    minus = np.abs(ex - 1j * ey) ** 2 / 2.0
    plus = np.abs(ex + 1j * ey) ** 2 / 2.0
    return minus, plus


def intensity_difference(sample: FieldSample) -> float:
    """C = |E.e_sigma-|^2 - |E.e_sigma+|^2."""
    minus, plus = _circular_intensities(sample.ex, sample.ey)
    return float(minus - plus)


def optical_chirality(sample: FieldSample) -> float:
    """D in [-1, 1]; +1 for a pure sigma- field, -1 for sigma+, 0 for linear."""
    minus, plus = _circular_intensities(sample.ex, sample.ey)
    total = float(minus + plus)
    if total == 0.0:
        raise UndefinedChiralityError("chirality undefined for a zero in-plane field")
    return float(np.clip((minus - plus) / total, -1.0, 1.0))


def evanescent_ratio(n_core, n_clad):
    """Estimate |E_phi|/|E_r| = sqrt(1 - (n_clad/n_core)^2) of a guided evanescent tail."""
    if not (n_clad > 0 and n_core > n_clad):
        raise DomainError("need n_core > n_clad > 0 for a guided evanescent field")
    return math.sqrt(1.0 - (n_clad / n_core) ** 2)


def model_evanescent_field(ratio, direction=FORWARD) -> FieldSample:
    """Unit-norm elliptical field E_r +/- i E_phi with |E_phi|/|E_r| = ratio.

    x is the transverse (radial) axis and y the longitudinal one. The forward
    branch carries ``-i ratio`` on y, which makes it sigma+-dominant (D < 0).
    """
    if not 0.0 <= ratio <= 1.0:
        raise DomainError(f"ratio must lie in [0, 1], got {ratio!r}")
    if direction not in (FORWARD, BACKWARD):
        raise DomainError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
    sign = -1.0 if direction == FORWARD else 1.0
    norm = math.sqrt(1.0 + ratio**2)
    return FieldSample(ex=1.0 / norm + 0j, ey=sign * 1j * ratio / norm)


def split_coupling(g, d) -> ChiralCoupling:
    """Split a total coupling g between the CCW (a) and CW (b) modes.

    alpha = sqrt((1 - D)/2), beta = sqrt((1 + D)/2); both couplings are
    taken real and non-negative, so any relative phase lives in ``h``.
    """
    if abs(d) > 1:
        raise DomainError(f"|D| must be <= 1, got {d!r}")
    if g < 0:
        raise DomainError("g must be non-negative")
    alpha = math.sqrt((1.0 - d) / 2.0)
    beta = math.sqrt((1.0 + d) / 2.0)
    return ChiralCoupling(d=float(d), alpha=alpha, beta=beta, g_a=complex(alpha * g), g_b=complex(beta * g))


@dataclass(frozen=True)
class FieldMap:
    """Complex field on a complete rectangular grid.

    Arrays have shape ``(nx, ny, nz)``; ``axes`` holds the sorted coordinates
    along each direction and ``spacing`` the cell size (which may come from a
    header comment for singleton axes, or be ``None`` if unknown).
    """

    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    eps: np.ndarray
    axes: tuple[np.ndarray, np.ndarray, np.ndarray]
    spacing: tuple[float | None, float | None, float | None]

    def __post_init__(self):
        shape = self.ex.shape
        if len(shape) != 3 or 0 in shape:
            raise FormatError("field arrays must be non-empty and three-dimensional")
        for name in ("ey", "ez", "eps"):
            if getattr(self, name).shape != shape:
                raise FormatError(f"{name} shape {getattr(self, name).shape} != {shape}")
        if tuple(len(a) for a in self.axes) != shape:
            raise FormatError("axis lengths do not match the field shape")
        for s in self.spacing:
            if s is not None and not s > 0:
                raise FormatError("grid spacing must be positive")

    @property
    def shape(self):
        return self.ex.shape

    def sample(self, i, j, k) -> FieldSample:
        pos = (float(self.axes[0][i]), float(self.axes[1][j]), float(self.axes[2][k]))
        return FieldSample(
            complex(self.ex[i, j, k]), complex(self.ey[i, j, k]), complex(self.ez[i, j, k]),
            pos, float(self.eps[i, j, k]),
        )

    def samples(self):
        for idx in np.ndindex(self.shape):
            yield self.sample(*idx)

    def conjugate(self):
        return FieldMap(np.conj(self.ex), np.conj(self.ey), np.conj(self.ez), self.eps, self.axes, self.spacing)

    @classmethod
    def from_function(cls, func, x, y, z, eps=1.0, spacing=None):
        """Sample ``func(X, Y, Z) -> (ex, ey, ez)`` on the outer product of the axes."""
        x, y, z = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (x, y, z))
        X, Y, Z = np.meshgrid(x, y, z, indexing="ij")
        ex, ey, ez = (np.broadcast_to(np.asarray(c, dtype=complex), X.shape).copy() for c in func(X, Y, Z))
        eps_arr = np.broadcast_to(np.asarray(eps(X, Y, Z) if callable(eps) else eps, dtype=float), X.shape).copy()
        if spacing is None:
            spacing = tuple(_uniform_spacing(a, name) for a, name in zip((x, y, z), "xyz"))
        return cls(ex, ey, ez, eps_arr, (x, y, z), tuple(spacing))


def _uniform_spacing(axis, name):
    if len(axis) < 2:
        return None
    steps = np.diff(axis)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0):
        raise FormatError(f"{name} axis is not uniformly spaced")
    return float(steps[0])


def mode_volume(fmap: FieldMap) -> float:
    """Effective mode volume: integral of eps |E|^2 over the grid / max of eps |E|^2."""
    dens = fmap.eps * (np.abs(fmap.ex) ** 2 + np.abs(fmap.ey) ** 2 + np.abs(fmap.ez) ** 2)
    peak = float(dens.max())
    if not peak > 0:
        raise DomainError("mode volume undefined for an all-zero field")
    if any(s is None for s in fmap.spacing):
        missing = [n for n, s in zip("xyz", fmap.spacing) if s is None]
        raise FormatError(f"cell size along {', '.join(missing)} unknown; supply '# d{missing[0]}=<m>'")
    cell = fmap.spacing[0] * fmap.spacing[1] * fmap.spacing[2]
    return float(dens.sum() * cell / peak)


@dataclass(frozen=True)
class ChiralityMap:
    c: np.ndarray
    d: np.ndarray
    defined: np.ndarray
    axes: tuple[np.ndarray, np.ndarray, np.ndarray]


def chirality_map(fmap: FieldMap) -> ChiralityMap:
    """Per-sample C and D; samples without in-plane field get ``defined = False`` and D = NaN."""
    minus, plus = _circular_intensities(fmap.ex, fmap.ey)
    total = minus + plus
    defined = total > 0
    d = np.full(total.shape, np.nan)
    d[defined] = np.clip((minus[defined] - plus[defined]) / total[defined], -1.0, 1.0)
    return ChiralityMap(c=minus - plus, d=d, defined=defined, axes=fmap.axes)


# --- field-map files -------------------------------------------------------

_SPACING_RE = re.compile(r"#\s*d([xyz])\s*=\s*([0-9eE.+\-]+)")


def parse_field_map(text: str) -> FieldMap:
    """Parse the field-map CSV format (see README) into a :class:`FieldMap`."""
    header_spacing = {}
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _SPACING_RE.match(stripped)
            if m:
                try:
                    header_spacing[m.group(1)] = float(m.group(2))
                except ValueError as exc:
                    raise FormatError(f"bad spacing comment: {stripped}") from exc
            continue
        body.append(stripped)
    if not body:
        raise FormatError("field map has no header row")
    reader = csv.reader(io.StringIO("\n".join(body)))
    columns = [c.strip() for c in next(reader)]
    required = [c for c in FIELD_COLUMNS if c != "z"]
    missing = [c for c in required if c not in columns]
    if missing:
        raise FormatError(f"field map missing columns: {missing}")
    rows = list(reader)
    if not rows:
        raise FormatError("field map has no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise FormatError(f"non-numeric entry in field map: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise FormatError("ragged rows in field map")
    col = {name: data[:, i] for i, name in enumerate(columns)}
    z = col.get("z", np.zeros(len(data)))
    coords = (col["x"], col["y"], z)

    axes = tuple(np.unique(c) for c in coords)
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(data):
        raise FormatError(f"grid is not rectangular/complete: {len(data)} rows for shape {shape}")
    idx = tuple(np.searchsorted(a, c) for a, c in zip(axes, coords))
    flat = np.ravel_multi_index(idx, shape)
    if len(np.unique(flat)) != len(flat):
        raise FormatError("duplicate grid points in field map")

    def grid(values):
        out = np.empty(len(data), dtype=values.dtype)
        out[flat] = values
        return out.reshape(shape)

    spacing = []
    for axis, name in zip(axes, "xyz"):
        s = _uniform_spacing(axis, name)
        spacing.append(s if s is not None else header_spacing.get(name))
    return FieldMap(
        ex=grid(col["re_ex"] + 1j * col["im_ex"]),
        ey=grid(col["re_ey"] + 1j * col["im_ey"]),
        ez=grid(col["re_ez"] + 1j * col["im_ez"]),
        eps=grid(col["eps"]),
        axes=axes,
        spacing=tuple(spacing),
    )


def read_field_map(path) -> FieldMap:
    return parse_field_map(Path(path).read_text())


def format_field_map(fmap: FieldMap) -> str:
    """Serialize a map back to CSV, row-major over (x, y, z)."""
    out = io.StringIO()
    for name, s in zip("xyz", fmap.spacing):
        if s is not None and len(fmap.axes["xyz".index(name)]) == 1:
            out.write(f"# d{name}={s!r}\n")
    out.write(",".join(FIELD_COLUMNS) + "\n")
    for i, j, k in np.ndindex(fmap.shape):
        ex, ey, ez = fmap.ex[i, j, k], fmap.ey[i, j, k], fmap.ez[i, j, k]
        vals = (fmap.axes[0][i], fmap.axes[1][j], fmap.axes[2][k],
                ex.real, ex.imag, ey.real, ey.imag, ez.real, ez.imag, fmap.eps[i, j, k])
        out.write(",".join(repr(float(v)) for v in vals) + "\n")
    return out.getvalue()


def chirality_rows(cmap: ChiralityMap):
    """Rows ``(x, y, z, c, d, defined)`` in row-major grid order."""
    for i, j, k in np.ndindex(cmap.c.shape):
        yield (float(cmap.axes[0][i]), float(cmap.axes[1][j]), float(cmap.axes[2][k]),
               float(cmap.c[i, j, k]), float(cmap.d[i, j, k]), int(cmap.defined[i, j, k]))
