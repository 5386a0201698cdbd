import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fewphoton.quadrature import ChebPanels, LineInterpolant, QuadratureSpec, UniformTable, line_rule


def gauss_lorentz(x, c, g, mu, s):
    return (g / np.pi) / ((x - c) ** 2 + g ** 2) * np.exp(-((x - mu) ** 2) / (2 * s * s)) / np.sqrt(2 * np.pi * s * s)


def reference(c, g, mu, s):
    f = lambda x: gauss_lorentz(x, c, g, mu, s)
    return integrate.quad(f, mu - 12 * s, mu + 12 * s, points=[c], limit=500, epsabs=1e-15, epsrel=1e-13)[0]


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(window_halfwidth=3)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="monte-carlo")
    assert QuadratureSpec().at_level(2).level == 2


@settings(max_examples=25, deadline=None)
@given(st.floats(0.002, 1.0), st.floats(-0.3, 0.3))
def test_line_rule_gaussian_lorentzian(g, offset):
    c, mu, s = 10.0, 10.0 + offset, 0.1
    x, w = line_rule([[c]], g, [mu], s, level=1, tails=False)
    assert (w * gauss_lorentz(x, c, g, mu, s)).sum() == pytest.approx(reference(c, g, mu, s), rel=1e-6)


def test_levels_converge():
    c, g, mu, s = 10.0, 0.01, 10.05, 0.1
    ref = reference(c, g, mu, s)
    errs = []
    for lev in range(-2, 3):
        x, w = line_rule([[c]], g, [mu], s, level=lev, tails=False)
        errs.append(abs((w * gauss_lorentz(x, c, g, mu, s)).sum() - ref))
    assert errs[-1] < 1e-10
    assert errs[0] > errs[-1]


def test_tails_integrate_lorentzian():
    x, w = line_rule([[0.0]], 0.1, [0.0], 0.1, level=2)
    f = (0.1 / np.pi) / (x ** 2 + 0.01)
    assert (w * f).sum() == pytest.approx(1.0, abs=1e-8)


def test_batched_rows_are_independent():
    pts = np.array([[10.0], [10.3]])
    x, w = line_rule(pts, 0.05, [10.0, 10.1], 0.1, level=0)
    for i in range(2):
        xi, wi = line_rule(pts[i:i + 1], 0.05, [[10.0, 10.1][i]], 0.1, level=0)
        f = lambda y: 1 / ((y - pts[i, 0]) ** 2 + 0.0025)
        assert (w[i] * f(x[i])).sum() == pytest.approx((wi[0] * f(xi[0])).sum(), rel=1e-8)


def test_interpolants():
    f = lambda x: np.exp(1j * x) / (x - 10 + 0.2j)
    xs = np.linspace(9, 11, 77)
    cheb = ChebPanels(np.linspace(9, 11, 9), f, order=14)
    assert np.max(np.abs(cheb(xs) - f(xs))) < 1e-6
    tab = UniformTable(9, 11, 4001, f)
    assert np.max(np.abs(tab(xs) - f(xs))) < 1e-9
    smooth = lambda x: 1 / ((x - 10 + 0.2j) * (x - 10 - 3j))
    li = LineInterpolant(smooth, [10.0], 0.2, 10.0, 0.1, window=10, level=1)
    wide = np.array([5.0, 8.0, 10.0, 12.5, 40.0])
    assert np.max(np.abs(li(wide) - smooth(wide))) < 1e-6
