import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fewphoton import eigenstates as es
from fewphoton.model import SystemParams, even_transmission

P = SystemParams(coupling_v=0.4, gamma_prime=0.05)
LOSSLESS = SystemParams(coupling_v=0.4)


def random_ks(rng, n):
    return rng.uniform(9.0, 11.0, n)


def test_plane_wave():
    assert es.plane_wave(0.0, 3.7) == pytest.approx((2 * np.pi) ** -0.5)
    k = 2.3
    assert es.plane_wave(k, 1.1 + 2 * np.pi / k) == pytest.approx(es.plane_wave(k, 1.1))


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_plane_wave_modulus(k, x):
    assert abs(es.plane_wave(k, x)) == pytest.approx((2 * np.pi) ** -0.5)


def test_theta_midpoint_convention():
    assert es.theta(0.0) == 0.5 and es.theta(-1e-300) == 0 and es.theta(1e-300) == 1


def test_bound_state_domain():
    with pytest.raises(ValueError):
        es.bound_state([10.0], [1.0], P)
    with pytest.raises(ValueError):
        es.bound_state([10.0] * 6, np.arange(6.0), P)
    with pytest.raises(ValueError):
        es.eigenstate_g(5, [10.0] * 5, np.arange(5.0), P)
    assert es.bound_state([9.9, 10.1], [1.0, 0.5], P) == 0


def test_two_body_bound_state_equals_explicit_form(rng):
    for _ in range(100):
        ks = random_ks(rng, 2)
        xs = rng.uniform(-3, 3, 2)
        assert es.bound_state(ks, xs, P) == pytest.approx(es.bound_two(*ks, *xs, P), abs=1e-15)


@pytest.mark.parametrize("n", [3, 4])
def test_general_bound_state_equals_explicit_forms_after_symmetrization(rng, n):
    """The general and explicit forms place momenta differently; they agree once summed over momenta."""
    ks = random_ks(rng, n)
    xs = np.sort(rng.uniform(-2, 4, (n, 50)), axis=0)
    general = es.symmetrized_bound(ks, xs, P)
    explicit = es.symmetrized_bound(ks, xs, P, explicit=True)
    assert np.max(np.abs(general - explicit)) < 1e-12 * np.max(np.abs(general))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_open_boundary_plane_wave(rng, n):
    ks = random_ks(rng, n)
    xs = -rng.uniform(0.01, 20, (n, 500))
    assert np.max(np.abs(es.eigenstate_g(n, ks, xs, P) - es.free_boson(ks, xs))) <= 1e-12


def test_single_photon_eigenstate():
    k = 10.2
    tb = even_transmission(k, P)
    assert es.eigenstate_g(1, [k], [-0.7], P) == pytest.approx(es.plane_wave(k, -0.7))
    assert es.eigenstate_g(1, [k], [0.7], P) == pytest.approx(tb * es.plane_wave(k, 0.7))
    assert es.eigenstate_e(1, [k], None, P) == pytest.approx(1j / (2 * np.sqrt(np.pi) * P.coupling_v) * (tb - 1))


def test_e1_vanishes_like_inverse_coupling_on_resonance():
    vals = [abs(es.eigenstate_e(1, [10.0], None, SystemParams(coupling_v=v))) for v in (1.0, 2.0, 4.0)]
    assert vals[0] / vals[1] == pytest.approx(2.0, rel=1e-6)
    assert vals[1] / vals[2] == pytest.approx(2.0, rel=1e-6)


def test_e_requires_coupling():
    with pytest.raises(ValueError):
        es.eigenstate_e(1, [10.0], None, SystemParams(coupling_v=0.0))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bosonic_symmetry(rng, n):
    ks = random_ks(rng, n)
    xs = rng.uniform(-3, 3, (n, 40))
    g = es.eigenstate_g(n, ks, xs, P)
    for i in range(n - 1):
        sw = xs.copy()
        sw[[i, i + 1]] = sw[[i + 1, i]]
        assert np.max(np.abs(es.eigenstate_g(n, ks, sw, P) - g)) <= 1e-12


@pytest.mark.parametrize("n,tol", [(1, 1e-8), (2, 1e-6), (3, 1e-5), (4, 1e-5)])
def test_schrodinger_residual(rng, n, tol):
    ks = random_ks(rng, n)
    xs = rng.uniform(-3, 3, (n, 20))
    if n == 1:
        xs = -np.abs(xs) - 0.1
    assert np.max(es.schrodinger_residual(n, ks, xs, P, h=1e-4)) <= tol


def test_residual_rejects_bad_stencils():
    with pytest.raises(ValueError):
        es.schrodinger_residual(2, [10.0, 10.1], [1e-5, 1.0], P)
    with pytest.raises(ValueError):
        es.schrodinger_residual(2, [10.0, 10.1], [1.0, 1.0 + 1e-5], P)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_emitter_equation(rng, n):
    """e_n from the jump of g_n and g_n(0, ..) from the midpoint rule solve the emitter equation."""
    ks = random_ks(rng, n)
    xs = rng.uniform(-3, 3, (n - 1, 10)) if n > 1 else None
    assert np.max(es.emitter_residual(n, ks, xs, P)) < 1e-6


def test_midpoint_value_single_photon():
    k = 10.15
    t = 0.5 * (1 + even_transmission(k, P))
    assert es.midpoint_value(1, [k], [0.0], P) == pytest.approx(t / np.sqrt(2 * np.pi), rel=1e-8)


def test_midpoint_value_is_eta_independent(rng):
    ks = random_ks(rng, 3)
    xs = np.array([0.3, 0.0, -1.2])
    eta = es.default_eta(ks, P)
    a = es.midpoint_value(3, ks, xs, P, eta)
    b = es.midpoint_value(3, ks, xs, P, eta / 10)
    assert abs(a - b) <= 1e-8 * abs(a)
    with pytest.raises(ValueError):
        es.midpoint_value(2, ks[:2], [0.3, 0.2], P)


def test_midpoint_feeds_e2_consistently(rng):
    """Integrating the emitter equation's source reproduces e_2 from the jump (emitter residual at n = 2)."""
    ks = random_ks(rng, 2)
    x = np.array([[0.8, -1.3]])
    e2 = es.eigenstate_e(2, ks, x, P)
    jump = es.one_sided(2, ks, x, P, +1) - es.one_sided(2, ks, x, P, -1)
    assert np.allclose(e2, 2j / P.vbar * jump)


def _e2_jump(ks, p, c=1e-12, eta=1e-14):
    """|e_2(0+) - e_2(0-)|; the inner one-sided offset must sit well below c."""
    plus = es.eigenstate_e(2, ks, [[c]], p, eta)
    minus = es.eigenstate_e(2, ks, [[-c]], p, eta)
    return float(np.max(np.abs(plus - minus)))


def test_e2_continuity(rng):
    for _ in range(5):
        assert _e2_jump(random_ks(rng, 2), LOSSLESS) <= 1e-10


def test_continuity_fixes_bound_state_normalization(rng, monkeypatch):
    """The emitter equation holds term by term; continuity of e_2 is what pins the bound-state weight."""
    ks = random_ks(rng, 2)
    original = es.bound_two
    monkeypatch.setitem(es._EXPLICIT, 2, lambda *a: 1.01 * original(*a))
    assert _e2_jump(ks, LOSSLESS) > 1e-4


def test_bound_coefficient(rng):
    for _ in range(10):
        ks = random_ks(rng, 2)
        x1 = rng.uniform(0.1, 3, 5)
        x2 = x1 + rng.uniform(0, 4, 5)
        got = es.bound_coefficient(ks, np.stack([x1, x2]), LOSSLESS)
        assert np.max(np.abs(got - es.bound_coefficient_expected(ks, LOSSLESS))) <= 1e-10


def test_no_growing_mode_across_the_emitter(rng):
    assert es.growth_exponent(random_ks(rng, 2), P) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_bound_state_decay_rate(rng, n):
    rate = es.decay_rate(n, random_ks(rng, n), P, rng=rng)
    assert rate == pytest.approx(P.gamma / 2, rel=1e-2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0.05, 1.0))
def test_bound_state_vanishes_unless_ordered(xs, v):
    p = SystemParams(coupling_v=v)
    xs = np.array(xs)
    val = es.bound_state([9.8, 10.0, 10.3], xs, p)
    if np.any(np.diff(xs) < 0):
        assert val == 0
