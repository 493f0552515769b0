import math

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from chiralsim import chirality as ch
from chiralsim.errors import DomainError, FormatError, UndefinedChiralityError

finite = st.floats(-1e3, 1e3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def brute_d(ex, ey):
    """Chirality straight from the circular-basis projections."""
    e_minus = np.array([1, -1j]) / math.sqrt(2)
    e_plus = np.array([1, 1j]) / math.sqrt(2)
    field = np.array([ex, ey])
    im, ip = abs(field @ e_minus) ** 2, abs(field @ e_plus) ** 2
    return (im - ip) / (im + ip)


def test_intensity_difference_basis_cases():
    # E.e_sigma- = (ex - i ey)/sqrt(2) takes all of E = e_x + i e_y
    s = ch.FieldSample(1.0, 1j)
    assert ch.intensity_difference(s) == pytest.approx(2.0)
    s = ch.FieldSample(1.0, -1j)
    assert ch.intensity_difference(s) == pytest.approx(-2.0)
    assert ch.intensity_difference(ch.FieldSample(1.0, 0.0)) == 0.0
    rho = 0.96
    s = ch.FieldSample(1.0, rho * 1j)
    assert abs(ch.intensity_difference(s)) / (1 + rho**2) == pytest.approx(2 * rho / (1 + rho**2), rel=1e-12)
    assert abs(ch.intensity_difference(s)) / (1 + rho**2) == pytest.approx(0.999, abs=5e-4)


def test_nan_rejected():
    with pytest.raises(DomainError):
        ch.intensity_difference(ch.FieldSample(np.nan, 1.0))


def test_optical_chirality_cases():
    assert ch.optical_chirality(ch.FieldSample(1.0, 1j)) == 1.0
    assert ch.optical_chirality(ch.FieldSample(1.0, -1j)) == -1.0
    assert ch.optical_chirality(ch.FieldSample(1.0, 1.0)) == 0.0
    assert abs(ch.optical_chirality(ch.model_evanescent_field(0.9578))) == pytest.approx(0.9991, abs=1e-4)
    with pytest.raises(UndefinedChiralityError):
        ch.optical_chirality(ch.FieldSample(0.0, 0.0, ez=1.0))


@hyp.given(ex=cplx, ey=cplx)
def test_chirality_bounds_and_brute_force(ex, ey):
    hyp.assume(abs(ex) + abs(ey) > 1e-6)
    d = ch.optical_chirality(ch.FieldSample(ex, ey))
    assert -1.0 <= d <= 1.0
    assert d == pytest.approx(brute_d(ex, ey), abs=1e-9)


@hyp.given(ex=cplx, ey=cplx)
def test_conjugation_antisymmetry(ex, ey):
    hyp.assume(abs(ex) + abs(ey) > 1e-6)
    s = ch.FieldSample(ex, ey)
    assert ch.optical_chirality(s.conjugate()) == pytest.approx(-ch.optical_chirality(s), abs=1e-12)


def test_evanescent_ratio():
    assert ch.evanescent_ratio(3.48, 1.0) == pytest.approx(0.95782, abs=1e-5)
    assert ch.evanescent_ratio(3.48, 1.0) == pytest.approx(0.96, abs=5e-3)
    assert ch.evanescent_ratio(2.0, 2.0 - 1e-9) < 1e-4
    with pytest.raises(DomainError):
        ch.evanescent_ratio(1.0, 1.5)


@hyp.given(rho=st.floats(0.0, 1.0))
def test_model_field_closed_form(rho):
    fw = ch.model_evanescent_field(rho, ch.FORWARD)
    bw = ch.model_evanescent_field(rho, ch.BACKWARD)
    assert abs(fw.ex) ** 2 + abs(fw.ey) ** 2 == pytest.approx(1.0, rel=1e-12)
    d_fw, d_bw = ch.optical_chirality(fw), ch.optical_chirality(bw)
    assert abs(d_fw) == pytest.approx(2 * rho / (1 + rho**2), abs=1e-12)
    assert d_fw <= 0.0
    assert d_bw == pytest.approx(-d_fw, abs=1e-15)


def test_model_field_limits():
    assert ch.optical_chirality(ch.model_evanescent_field(0.0)) == 0.0
    assert ch.optical_chirality(ch.model_evanescent_field(1.0)) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(DomainError):
        ch.model_evanescent_field(1.2)


def test_split_coupling_examples():
    c = ch.split_coupling(2.0, -0.99)
    assert (c.alpha, c.beta) == pytest.approx((math.sqrt(0.995), math.sqrt(0.005)), abs=1e-15)
    c = ch.split_coupling(2.0, 0.0)
    assert c.alpha == c.beta == pytest.approx(1 / math.sqrt(2))
    c = ch.split_coupling(3.0, -1.0)
    assert (c.alpha, c.beta, c.g_a, c.g_b) == (1.0, 0.0, 3.0, 0.0)
    with pytest.raises(DomainError):
        ch.split_coupling(1.0, -1.1)


def test_split_coupling_normalization_bulk():
    rng = np.random.default_rng(7)
    for d, g in zip(rng.uniform(-1, 1, 10_000), rng.uniform(0, 10, 10_000)):
        c = ch.split_coupling(g, d)
        assert abs(c.alpha**2 + c.beta**2 - 1.0) <= 1e-12
        assert abs(abs(c.g_a) ** 2 + abs(c.g_b) ** 2 - g * g) <= 1e-12 * max(1.0, g * g)


def _box(n=5, spacing=0.1):
    ax = np.arange(n) * spacing
    return ch.FieldMap.from_function(lambda X, Y, Z: (np.ones_like(X), 0 * X, 0 * X), ax, ax, ax)


def test_mode_volume_uniform_and_delta():
    fmap = _box()
    assert ch.mode_volume(fmap) == pytest.approx(5**3 * 0.1**3, rel=1e-12)
    ax = np.arange(4) * 0.5
    spike = ch.FieldMap.from_function(
        lambda X, Y, Z: ((X == 0.5) & (Y == 1.0) & (Z == 0.0), 0 * X, 0 * X), ax, ax, ax)
    assert ch.mode_volume(spike) == pytest.approx(0.125, rel=1e-12)
    zero = ch.FieldMap.from_function(lambda X, Y, Z: (0 * X, 0 * X, 0 * X), ax, ax, ax)
    with pytest.raises(DomainError):
        ch.mode_volume(zero)


def test_mode_volume_gaussian_oracle():
    w = 1.0
    ax = np.linspace(-6, 6, 61)
    fmap = ch.FieldMap.from_function(lambda X, Y, Z: (np.exp(-(X**2 + Y**2 + Z**2) / (2 * w**2)), 0 * X, 0 * X),
                                     ax, ax, ax)
    assert ch.mode_volume(fmap) == pytest.approx(math.pi**1.5 * w**3, rel=1e-2)


def test_chirality_map_cases():
    ax = np.linspace(0, 1, 3)
    plus = ch.FieldMap.from_function(lambda X, Y, Z: (np.ones_like(X), -1j * np.ones_like(X), 0 * X), ax, ax, ax)
    cmap = ch.chirality_map(plus)
    assert np.all(cmap.d == -1.0) and np.all(cmap.defined)
    assert np.array_equal(ch.chirality_map(plus.conjugate()).d, -cmap.d)
    holes = ch.FieldMap.from_function(lambda X, Y, Z: (X, 0 * X, np.ones_like(X)), ax, ax, ax)
    hm = ch.chirality_map(holes)
    assert not hm.defined[0].any() and np.isnan(hm.d[0]).all()
    assert hm.defined[1:].all()


def test_ring_profile_model_field():
    rho = ch.evanescent_ratio(3.48, 1.0)
    s = ch.model_evanescent_field(rho)
    ax = np.linspace(-1, 1, 9)
    fmap = ch.FieldMap.from_function(lambda X, Y, Z: (s.ex * np.exp(-X**2), s.ey * np.exp(-X**2), 0 * X),
                                     ax, ax, [0.0], spacing=(0.25, 0.25, 0.1))
    assert np.allclose(np.abs(ch.chirality_map(fmap).d), 0.999, atol=1e-3)


def test_field_map_csv_round_trip():
    ax = np.linspace(0, 1e-6, 4)
    fmap = ch.FieldMap.from_function(lambda X, Y, Z: (X + 1j, 2 * Y - 0.5j, Z), ax, ax, [0.0],
                                     eps=lambda X, Y, Z: 1 + X * 1e6, spacing=(ax[1], ax[1], 2e-7))
    text = ch.format_field_map(fmap)
    assert text.startswith("# dz=")
    back = ch.parse_field_map(text)
    for name in ("ex", "ey", "ez", "eps"):
        assert np.array_equal(getattr(back, name), getattr(fmap, name))
    assert back.spacing == pytest.approx(fmap.spacing)
    assert ch.mode_volume(back) == pytest.approx(ch.mode_volume(fmap), rel=1e-12)


def test_field_map_format_errors():
    header = ",".join(ch.FIELD_COLUMNS)
    with pytest.raises(FormatError):
        ch.parse_field_map("x,y\n0,0\n")
    with pytest.raises(FormatError):  # incomplete grid
        ch.parse_field_map(header + "\n0,0,0,1,0,0,0,0,0,1\n1,0,0,1,0,0,0,0,0,1\n0,1,0,1,0,0,0,0,0,1\n")
    with pytest.raises(FormatError):
        ch.parse_field_map(header + "\n0,0,0,abc,0,0,0,0,0,1\n")
    single = ch.parse_field_map(header + "\n0,0,0,1,0,0,0,0,0,1\n1,0,0,1,0,0,0,0,0,1\n")
    with pytest.raises(FormatError):
        ch.mode_volume(single)
