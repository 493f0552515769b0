import math

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from chiralsim import scattering as sc
from chiralsim.errors import DomainError, SingularityError, UndefinedMetricError
from chiralsim.params import SystemParams, ghz


def nominal(**kw):
    base = dict(omega_c=0.0, omega_q=0.0, kappa_i=1.0, kappa_ex=1.0, gamma_q=1e-3, g=1.39, h=0j,
                chirality_d=-0.99)
    base.update(kw)
    return SystemParams(**base)


def at(delta, params=None):
    params = params or nominal()
    return sc.Detuning.probe(params, delta)


rates = st.floats(0.01, 5.0)
random_params = st.builds(
    SystemParams,
    omega_c=st.just(0.0),
    omega_q=st.floats(-2.0, 2.0),
    kappa_i=rates,
    kappa_ex=rates,
    gamma_q=st.floats(1e-3, 2.0),
    g=st.floats(0.0, 5.0),
    h=st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)),
    chirality_d=st.floats(-1.0, 1.0),
)


@hyp.settings(max_examples=60, deadline=None)
@hyp.given(params=random_params, seed=st.integers(0, 2**32 - 1))
def test_solver_matches_closed_form(params, seed):
    deltas = np.random.default_rng(seed).uniform(-10, 10, 200)
    pts = sc.spectrum(params, sc.detuning_grid(params, deltas))
    tp, tm = sc.transmission_closed_form(params, sc.Detuning(deltas, deltas + params.omega_c - params.omega_q))
    for pt, a, b in zip(pts, tp, tm):
        assert abs(pt.t_plus - a) <= 1e-10 * max(1.0, abs(a))
        assert abs(pt.t_minus - b) <= 1e-10 * max(1.0, abs(b))
        assert pt.t_cap_plus <= 1 + 1e-9 and pt.t_cap_minus <= 1 + 1e-9


@hyp.settings(max_examples=40, deadline=None)
@hyp.given(params=random_params, delta=st.floats(-10, 10))
def test_direction_swap_symmetry(params, delta):
    flipped = params.with_(chirality_d=-params.chirality_d)
    a = sc.transmission_closed_form(params, at(delta, params))
    b = sc.transmission_closed_form(flipped, at(delta, flipped))
    assert a[0] == pytest.approx(b[1], abs=1e-12)
    assert a[1] == pytest.approx(b[0], abs=1e-12)


@hyp.settings(max_examples=40, deadline=None)
@hyp.given(kex=rates, g=st.floats(0.0, 5.0), d=st.floats(-1, 1), delta=st.floats(-10, 10),
           dq=st.floats(-2, 2))
def test_lossless_flux_conservation(kex, g, d, delta, dq):
    p = SystemParams(0.0, dq, 0.0, kex, 0.0, g, 0j, d)
    hyp.assume(abs(delta - dq) > 1e-3)
    pt = sc.steady_state_solve(p, at(delta, p))
    assert abs(pt.t_plus) ** 2 + abs(pt.r_plus) ** 2 == pytest.approx(1.0, abs=1e-9)
    assert abs(pt.t_minus) ** 2 + abs(pt.r_minus) ** 2 == pytest.approx(1.0, abs=1e-9)


def test_fig3a_resonance():
    tp, tm = sc.transmission_closed_form(nominal(), at(0.0))
    assert abs(tp) ** 2 == pytest.approx(0.988, abs=1e-3)
    assert abs(tm) ** 2 < 1e-4


def test_empty_critically_coupled_resonator():
    p = nominal(g=0.0)
    tp, tm = sc.transmission_closed_form(p, at(0.0, p))
    assert tp == 0 and tm == 0
    deltas = np.linspace(-4, 4, 401)
    t = np.array([pt.t_cap_plus for pt in sc.spectrum(p, sc.detuning_grid(p, deltas))])
    assert np.argmin(t) == 200
    assert np.all(np.diff(t[:201]) < 0) and np.all(np.diff(t[200:]) > 0)


@pytest.mark.parametrize("g,gamma", [(1.39, 1e-3), (0.5, 0.2), (3.0, 1e-4)])
def test_resonant_oracle(g, gamma):
    p = nominal(g=g, gamma_q=gamma, chirality_d=-1.0)
    pt = sc.steady_state_solve(p, at(0.0, p))
    assert pt.t_plus == pytest.approx(g * g / (g * g + 2 * gamma), abs=1e-10)
    assert abs(pt.t_minus) < 1e-10


def test_lossless_emitter_line_shapes():
    """gamma_q = 0, D = -1, h = 0, critical coupling."""
    p = nominal(gamma_q=0.0, chirality_d=-1.0, g=1.39)
    g, ki = 1.39, 1.0
    deltas = np.linspace(-5, 5, 1000)
    tp, tm = sc.transmission_closed_form(p, sc.Detuning(deltas, deltas))
    x = deltas**2 - g * g
    assert np.allclose(np.abs(tp) ** 2, x**2 / (x**2 + 4 * deltas**2 * ki**2), atol=1e-9, rtol=0)
    assert np.allclose(np.abs(tm) ** 2, deltas**2 / (deltas**2 + 4 * ki**2), atol=1e-9, rtol=0)


def test_internal_amplitudes():
    p = nominal(g=0.0)
    pt = sc.steady_state_solve(p, at(0.3, p))
    assert pt.forward.e_q == 0 and pt.forward.e_b == 0
    assert pt.backward.e_q == 0 and pt.backward.e_a == 0
    p = nominal(chirality_d=-1.0)
    assert sc.steady_state_solve(p, at(0.7, p)).forward.e_b == 0


def test_solve_direction_matches_pair():
    p = nominal(h=0.4 - 0.3j)
    pt = sc.steady_state_solve(p, at(0.2, p))
    assert sc.solve_direction(p, at(0.2, p), sc.FORWARD).t == pt.t_plus
    assert sc.solve_direction(p, at(0.2, p), sc.BACKWARD).t == pt.t_minus
    with pytest.raises(DomainError):
        sc.solve_direction(p, at(0.2, p), "sideways")


def test_exact_singularity_reported():
    p = SystemParams(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0j, -1.0)
    with pytest.raises(SingularityError):
        sc.transmission_closed_form(p, at(0.0, p))
    with pytest.raises(SingularityError):
        sc.spectrum(p, [at(0.5, p), at(0.0, p)])


def test_isolation_metrics_fig3a():
    p = nominal()
    pts = sc.spectrum(p, sc.detuning_grid(p, np.linspace(-5, 5, 2001)))
    m = sc.isolation_metrics(pts)
    assert m.contrast >= 0.99
    assert 0.04 <= m.insertion_loss_db <= 0.06
    assert m.insertion_loss_db == pytest.approx(-10 * math.log10(m.t_plus), rel=1e-12)
    assert 0.5 * p.kappa <= m.bandwidth <= 1.1 * p.kappa
    assert not m.truncated


def test_isolation_metrics_edge_cases():
    p = nominal(chirality_d=0.0)
    m = sc.isolation_metrics(sc.spectrum(p, sc.detuning_grid(p, np.linspace(-1, 1, 21))))
    assert m.contrast == pytest.approx(0.0, abs=1e-14)
    assert m.bandwidth == 0.0
    empty = nominal(g=0.0)
    with pytest.raises(UndefinedMetricError):
        sc.isolation_metrics(sc.spectrum(empty, sc.detuning_grid(empty, [-0.1, 0.0, 0.1])))
    with pytest.raises(DomainError):
        sc.isolation_metrics(sc.spectrum(p, [at(0.0, p)]), threshold=1.0)


def test_bandwidth_truncated_flag():
    p = nominal()
    m = sc.isolation_metrics(sc.spectrum(p, sc.detuning_grid(p, np.linspace(-0.2, 0.2, 41))))
    assert m.truncated and m.bandwidth == pytest.approx(0.4)


def _bandwidth(g, threshold=0.5):
    p = nominal(g=g)
    pts = sc.spectrum(p, sc.detuning_grid(p, np.linspace(-12, 12, 4801)))
    return sc.isolation_metrics(pts, threshold).bandwidth


@pytest.mark.parametrize("threshold", [0.3, 0.5, 0.9])
def test_bandwidth_monotone_in_g(threshold):
    widths = [_bandwidth(g, threshold) for g in (1.0, 1.5, 2.0)]
    assert widths[0] < widths[1] < widths[2]


def test_contrast_vs_chirality_oracle():
    p = nominal(gamma_q=1e-9, h=0.5j)
    ds = np.linspace(-1, 0, 41)
    curve = sc.contrast_vs_chirality(p, ds)
    for point, d in zip(curve, ds):
        assert point.contrast == pytest.approx(-2 * d / (1 + d * d), abs=1e-6)
    assert curve[0].contrast == pytest.approx(1.0, abs=1e-12)
    assert curve[-1].contrast == pytest.approx(0.0, abs=1e-12)
    eta = [c.contrast for c in curve]
    assert np.all(np.diff(eta) < 0)
    with pytest.raises(DomainError):
        sc.contrast_vs_chirality(p, [0.2])


def test_contrast_at_half_chirality_with_emitter_loss():
    (pt,) = sc.contrast_vs_chirality(nominal(), [-0.5])
    assert pt.contrast == pytest.approx(0.8, abs=0.01)
    (pt,) = sc.contrast_vs_chirality(nominal(), [-1.0])
    assert 1 - pt.contrast < 1e-3


@pytest.mark.parametrize("gamma_ghz,loss_db", [(0.3, 0.57), (0.6, 1.07), (1.0, 1.70)])
def test_insertion_loss_against_emitter_decay(gamma_ghz, loss_db):
    p = SystemParams(0.0, 0.0, ghz(4.94), ghz(4.94), ghz(gamma_ghz), ghz(1.39 * 4.94), 0j, -0.99)
    tp, _ = sc.transmission_closed_form(p, at(0.0, p))
    assert sc.insertion_loss_db(abs(tp) ** 2) == pytest.approx(loss_db, abs=0.03)


def test_bare_mode_amplitudes():
    kappa, kex = 2.0, 1.0
    for h in (0.3, 1.0 + 1.0j, 2.0j):
        a, b = sc.bare_mode_amplitudes(kappa, kex, h, 0.0)
        assert abs(b / a) ** 2 == pytest.approx(abs(h) ** 2 / kappa**2, rel=1e-12)
    a, b = sc.bare_mode_amplitudes(kappa, kex, 0.0, 0.4)
    assert b == 0
    a, b = sc.bare_mode_amplitudes(kappa, kex, kappa, 0.0)
    assert abs(b / a) ** 2 == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        sc.bare_mode_amplitudes(0.0, 0.5, 1.0j, 0.0)


@pytest.mark.parametrize("h", [1.0, 1.0j, 0.6 - 0.8j])
def test_bare_spectrum_matches_two_mode_solution(h):
    p = nominal(g=0.0, h=h)
    deltas = np.linspace(-4, 4, 161)
    pts = sc.spectrum(p, sc.detuning_grid(p, deltas))
    bare = np.abs(sc.bare_transmission(p.kappa_i, p.kappa_ex, p.h, deltas)) ** 2
    assert np.allclose([pt.t_cap_plus for pt in pts], bare, atol=1e-12)


def test_strong_backscattering_splits_the_dip():
    p = nominal(g=0.0, h=3.0)
    deltas = np.linspace(-6, 6, 1201)
    t = np.array([pt.t_cap_plus for pt in sc.spectrum(p, sc.detuning_grid(p, deltas))])
    left, right = deltas[np.argmin(t[:600])], deltas[601 + np.argmin(t[601:])]
    assert t[600] > t.min() + 0.1
    assert left == pytest.approx(-right, abs=1e-9)
    assert abs(right) == pytest.approx(3.0, rel=0.2)


def test_backscattering_changes_fig3a_slightly():
    ref = sc.transmission_closed_form(nominal(), at(0.0))
    bs = sc.transmission_closed_form(nominal(h=1.0), at(0.0))
    assert abs(abs(ref[0]) ** 2 - abs(bs[0]) ** 2) < 0.05
    assert abs(abs(ref[1]) ** 2 - abs(bs[1]) ** 2) < 0.05
    # within 0.1 kappa of resonance; further out the shift reaches ~0.08
    deltas = np.linspace(-0.2, 0.2, 41)
    a = sc.spectrum(nominal(), sc.detuning_grid(nominal(), deltas))
    b = sc.spectrum(nominal(h=1.0), sc.detuning_grid(nominal(h=1.0), deltas))
    assert max(abs(x.t_cap_plus - y.t_cap_plus) for x, y in zip(a, b)) < 0.05
    assert max(abs(x.t_cap_minus - y.t_cap_minus) for x, y in zip(a, b)) < 0.05
