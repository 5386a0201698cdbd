import numpy as np
import pytest

from fewphoton.coherent import (
    FockTable,
    default_x_grid,
    fock_table,
    g2_curve,
    g2_from_state,
    g2_regime,
    number_distribution,
)
from fewphoton.model import GaussianPacket, SystemParams, chiral_coefficients

LOSSY = dict(gamma_prime=0.1)


def coherent(nbar=0.5, k0=10.0, delta=0.1):
    return GaussianPacket(k0, delta, nbar)


def test_decoupled_g2_is_flat():
    curve = g2_curve(coherent(), SystemParams(coupling_v=0.0, **LOSSY))
    assert np.allclose(curve.values, 1.0, atol=1e-12)


@pytest.mark.parametrize("v", [0.1, 0.34, 0.45, 0.8])
def test_g2_tends_to_one_and_is_nonnegative(v):
    p = SystemParams(coupling_v=v, **LOSSY)
    curve = g2_curve(coherent(), p, np.linspace(0, 30 / p.gamma, 301))
    assert np.all(curve.values >= 0)
    assert curve.values[-1] == pytest.approx(1.0, abs=0.02)
    assert not curve.unreliable.any()


def test_default_grid_and_gamma_axis():
    p = SystemParams(coupling_v=0.3, **LOSSY)
    xs = default_x_grid(p)
    assert xs[0] == 0 and np.all(np.diff(xs) > 0)
    assert g2_curve(coherent(), p).gamma_x[-1] == pytest.approx(15.0)


def test_g2_rejects_large_nbar():
    with pytest.raises(ValueError):
        g2_curve(coherent(nbar=1.5), SystemParams(coupling_v=0.3))


def test_vanishing_transmission_is_flagged():
    # lossless, resonant and very narrow: transmission is almost exactly zero
    curve = g2_curve(coherent(delta=1e-4), SystemParams(coupling_v=1.0), [0.0])
    assert curve.unreliable.all() and np.isnan(curve.values).all()


@pytest.mark.parametrize("v,regime,lo,hi", [(0.38, "antibunched", 0, 1), (0.45, "bunched", 1, np.inf),
                                            (0.16, "antibunched", 0.8, 1)])
def test_regimes(v, regime, lo, hi):
    kind, g0 = g2_regime(coherent(), SystemParams(coupling_v=v, **LOSSY))
    assert kind == regime and lo <= g0 < hi


@pytest.mark.parametrize("v", [0.2, 0.4])
def test_state_based_g2_matches_at_coincidence(v):
    """Correlation from the scattered RR state agrees with the closed form at x = 0."""
    pkt = coherent()
    p = SystemParams(coupling_v=v, **LOSSY)
    closed = g2_curve(pkt, p, [0.0]).values[0]
    state = g2_from_state(pkt, p, [0.0])[0]
    assert abs(closed - state) <= 0.05
    assert abs(closed - state) <= 1e-5 * max(1.0, closed)


def test_state_based_g2_reaches_monochromatic_limit():
    """At nonzero separation the bound term carries exp(i(k - eps)x); a narrow detuned packet shows it."""
    p = SystemParams(coupling_v=0.4)
    k = p.epsilon + p.gamma
    t, r = chiral_coefficients(k, p)
    xs = np.array([0.0, 1.0, 3.0]) / p.gamma
    mono = np.abs(1 - (r / t) ** 2 * np.exp((1j * (k - p.epsilon) - p.gamma / 2) * xs)) ** 2
    errs = [np.max(np.abs(g2_from_state(coherent(k0=k, delta=p.gamma / s), p, xs) - mono)) for s in (8, 32)]
    assert errs[1] < errs[0] and errs[1] < 5e-3


@pytest.mark.parametrize("reference", ["incident", "transmitted"])
def test_decoupled_number_distribution_is_poissonian(reference):
    d = number_distribution(coherent(nbar=0.7), SystemParams(coupling_v=0.0), reference=reference)
    assert np.allclose(d.ratios, 1.0, atol=1e-6)
    assert d.captured >= 0.98


def test_number_distribution_validation():
    with pytest.raises(ValueError):
        number_distribution(coherent(nbar=2.0), SystemParams(coupling_v=0.1))
    with pytest.raises(ValueError):
        number_distribution(coherent(), SystemParams(coupling_v=0.1), reference="mean")


def test_weak_beam_keeps_vacuum_probability(strong_table):
    d = number_distribution(coherent(nbar=0.2), strong_table.params, table=strong_table)
    assert 0.9 <= d.ratios[0] <= 1.1
    assert d.captured >= 0.98
    assert np.all(d.probs >= 0) and d.probs.sum() <= 1 + 1e-6


def test_strong_coupling_redistributes_one_photon_weight(strong_table):
    d = number_distribution(coherent(nbar=1.0), strong_table.params, table=strong_table)
    assert d.ratios[1] < 1 < min(d.ratios[2], d.ratios[3])
    assert d.remainder == pytest.approx(1 - d.captured)


def test_fock_table_lookup():
    t = FockTable(SystemParams(coupling_v=0.1), {1: {"R": 0.4, "L": 0.6}})
    assert t.transmitted(0, 0) == 1 and t.transmitted(0, 1) == 0
    assert t.transmitted(1, 0) == 0.6 and t.transmitted(1, 1) == 0.4


def test_coincidence_g2_rises_through_one():
    vs = np.arange(0.34, 0.4501, 0.01)
    g0 = [g2_curve(coherent(), SystemParams(coupling_v=v, **LOSSY), [0.0]).values[0] for v in vs]
    assert np.all(np.diff(g0) > 0)
    assert g0[4] < 1 < g0[-1]
