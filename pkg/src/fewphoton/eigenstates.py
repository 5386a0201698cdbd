"""Real-space n-photon scattering eigenstates of the even-mode problem.

Conventions
-----------
* ``ks`` is a length-n sequence of momenta, ``xs`` an array whose first axis
  has length n; any trailing axes are treated as a batch of sample points.
* theta(0) = 1/2.
* g_n is discontinuous across every x_i = 0; values on the hyperplanes use
  the average of the one-sided limits (``midpoint_value``).
* The general n-body bound state and the explicit low-order bound states put
  the momenta on different positions. Both are correct only once summed
  over momentum permutations, which is what g_n does.
"""
from __future__ import annotations

from itertools import permutations
from math import factorial

import numpy as np

from .model import SystemParams, even_transmission

MAX_BOUND_N = 5
MAX_G_N = 4
INV_SQRT_2PI = 1.0 / np.sqrt(2 * np.pi)


def plane_wave(k, x):
    """h_k(x) = exp(ikx) / sqrt(2 pi)."""
    return INV_SQRT_2PI * np.exp(1j * np.asarray(k) * np.asarray(x))


def theta(x):
    return np.heaviside(np.asarray(x, dtype=float), 0.5)


def _prep(ks, xs, n=None):
    ks = np.asarray(ks, dtype=float)
    xs = np.asarray(xs, dtype=float)
    if ks.ndim != 1:
        raise ValueError("ks must be a 1-D sequence of momenta")
    if xs.shape[:1] != ks.shape:
        raise ValueError(f"need as many positions as momenta, got {xs.shape[:1]} vs {ks.shape}")
    if n is not None and len(ks) != n:
        raise ValueError(f"expected {n} momenta, got {len(ks)}")
    return ks, xs


def _decay(p: SystemParams, spread):
    return np.exp((-0.5 * p.gamma - 1j * p.epsilon) * np.abs(spread))


def bound_state(ks, xs, p: SystemParams):
    """General n-body bound state B_{k1..kn}(x1..xn), 2 <= n <= 5.

    Nonzero only for x1 <= x2 <= ... <= xn. The first and last momenta both
    sit on the last position.
    """
    ks, xs = _prep(ks, xs)
    n = len(ks)
    if not 2 <= n <= MAX_BOUND_N:
        raise ValueError(f"bound_state needs 2 <= n <= {MAX_BOUND_N}, got n={n}")
    tm = even_transmission(ks, p) - 1
    order = np.prod([theta(xs[i + 1] - xs[i]) for i in range(n - 1)], axis=0)
    waves = plane_wave(ks[0], xs[-1]) * plane_wave(ks[-1], xs[-1])
    for i in range(1, n - 1):
        waves = waves * plane_wave(ks[i], xs[i])
    return -((-2.0) ** (n - 2)) * np.prod(tm) * order * waves * _decay(p, xs[-1] - xs[0])


# Explicit low-order bound states, written out term by term and kept apart
# from the general form so each can check the other.

def bound_two(k1, k2, x1, x2, p: SystemParams):
    tm = (even_transmission(k1, p) - 1) * (even_transmission(k2, p) - 1)
    return -tm * plane_wave(k1, x2) * plane_wave(k2, x2) * _decay(p, x2 - x1) * theta(x2 - x1)


def bound_three(k1, k2, k3, x1, x2, x3, p: SystemParams):
    tm = np.prod([even_transmission(k, p) - 1 for k in (k1, k2, k3)])
    return (2 * tm * plane_wave(k1, x2) * plane_wave(k2, x3) * plane_wave(k3, x3)
            * _decay(p, x3 - x1) * theta(x3 - x2) * theta(x2 - x1))


def bound_four(k1, k2, k3, k4, x1, x2, x3, x4, p: SystemParams):
    tm = np.prod([even_transmission(k, p) - 1 for k in (k1, k2, k3, k4)])
    return (-4 * tm * plane_wave(k1, x2) * plane_wave(k2, x3) * plane_wave(k3, x4) * plane_wave(k4, x4)
            * _decay(p, x4 - x1) * theta(x4 - x3) * theta(x3 - x2) * theta(x2 - x1))


_EXPLICIT = {2: bound_two, 3: bound_three, 4: bound_four}


def bound_explicit(ks, xs, p: SystemParams):
    ks, xs = _prep(ks, xs)
    return _EXPLICIT[len(ks)](*ks, *xs, p)


def symmetrized_bound(ks, xs, p: SystemParams, explicit: bool = False):
    """Sum of the bound state over all momentum permutations."""
    ks, xs = _prep(ks, xs)
    f = bound_explicit if explicit else bound_state
    return sum(f(ks[list(perm)], xs, p) for perm in permutations(range(len(ks))))


def single(k, x, p: SystemParams):
    """g_k(x) = h_k(x) [theta(-x) + tbar_k theta(x)]."""
    return plane_wave(k, x) * (theta(-x) + even_transmission(k, p) * theta(x))


def free_boson(ks, xs):
    """Symmetrized plane-wave product (1/n!) sum_Q prod h_{k_i}(x_{Q_i})."""
    ks, xs = _prep(ks, xs)
    n = len(ks)
    out = 0
    for q in permutations(range(n)):
        out = out + np.prod([plane_wave(ks[i], xs[q[i]]) for i in range(n)], axis=0)
    return out / factorial(n)


def _cluster(ks, xs, p):
    """A bound cluster with its entry step theta(x_first)."""
    if len(ks) == 1:
        return single(ks[0], xs[0], p)
    return _EXPLICIT[len(ks)](*ks, *xs, p) * theta(xs[0])


# cluster sizes of every term in g_n, outermost plane waves first
_TERMS = {
    1: [(1,)],
    2: [(1, 1), (2,)],
    3: [(1, 1, 1), (1, 2), (3,)],
    4: [(1, 1, 1, 1), (1, 1, 2), (1, 3), (2, 2), (4,)],
}


def eigenstate_g(n: int, ks, xs, p: SystemParams):
    """g_n(x1..xn) as the sum over permutations of cluster terms.

    The first term is a pure plane-wave product summed over position
    permutations only; every term that contains a bound cluster is summed
    over both momentum and position permutations. The whole is divided by n!.
    """
    if not 1 <= n <= MAX_G_N:
        raise ValueError(f"eigenstate_g supports 1 <= n <= {MAX_G_N}, got n={n}")
    ks, xs = _prep(ks, xs, n)
    perms = list(permutations(range(n)))
    total = 0
    for sizes in _TERMS[n]:
        p_perms = [tuple(range(n))] if max(sizes) == 1 else perms
        for pp in p_perms:
            for qq in perms:
                term, start = 1, 0
                for s in sizes:
                    idx = slice(start, start + s)
                    term = term * _cluster([ks[i] for i in pp[idx]], [xs[i] for i in qq[idx]], p)
                    start += s
                total = total + term
    return total / factorial(n)


def default_eta(ks, p: SystemParams) -> float:
    """Offset for one-sided limits, tied to the shortest physical length."""
    scales = [1.0 / p.gamma if p.gamma > 0 else np.inf]
    kmax = float(np.max(np.abs(ks))) if len(ks) else 0.0
    if kmax > 0:
        scales.append(1.0 / kmax)
    scale = min(scales)
    return 1e-9 * (scale if np.isfinite(scale) else 1.0)


def _with_first(x0, rest):
    rest = np.asarray(rest, dtype=float)
    return np.concatenate([np.full((1,) + rest.shape[1:], x0), rest], axis=0)


def one_sided(n, ks, rest, p: SystemParams, side: int, eta=None):
    """g_n(0^{+/-}, rest) evaluated at x1 = side * eta."""
    eta = default_eta(ks, p) if eta is None else eta
    return eigenstate_g(n, ks, _with_first(side * eta, rest), p)


def midpoint_value(n: int, ks, xs, p: SystemParams, eta: float | None = None):
    """g_n at a point with one coordinate exactly 0: mean of the one-sided limits."""
    ks, xs = _prep(ks, xs, n)
    zero = np.flatnonzero(np.all(xs.reshape(n, -1) == 0, axis=1))
    if zero.size == 0:
        raise ValueError("midpoint_value needs one position equal to 0")
    i = zero[0]
    rest = np.delete(xs, i, axis=0)
    return 0.5 * (one_sided(n, ks, rest, p, +1, eta) + one_sided(n, ks, rest, p, -1, eta))


def eigenstate_e(n: int, ks, xs, p: SystemParams, eta: float | None = None):
    """Emitter-excited amplitude e_n(x1..x_{n-1}) = (n i / Vbar) [g_n(0+, ..) - g_n(0-, ..)]."""
    if p.coupling_v == 0:
        raise ValueError("eigenstate_e is undefined at V = 0 (emitter decoupled)")
    ks = np.asarray(ks, dtype=float)
    xs = np.asarray(xs, dtype=float).reshape((n - 1,) + np.shape(xs)[1:]) if n > 1 else np.zeros((0,))
    jump = one_sided(n, ks, xs, p, +1, eta) - one_sided(n, ks, xs, p, -1, eta)
    return n * 1j / p.vbar * jump


# Fourth-order central difference along the diagonal (all coordinates shifted together).
_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def _diag_derivative(f, xs, h):
    return sum(c * f(xs + s * h) for s, c in _STENCIL) / (12 * h)


def _check_stencil(xs, h, reach=2):
    xs = np.asarray(xs, dtype=float)
    if np.any(np.abs(xs) <= reach * h):
        raise ValueError("finite-difference stencil straddles a discontinuity at x_i = 0")
    n = xs.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if np.any(np.abs(xs[i] - xs[j]) <= h):
                raise ValueError("positions coincide within the stencil step")


def schrodinger_residual(n: int, ks, xs, p: SystemParams, h: float = 1e-4, floor: float = 1e-300):
    """|[-i sum_j d_j - E] g_n| / (|g_n| + floor) at points away from every x_i = 0."""
    ks, xs = _prep(ks, xs, n)
    _check_stencil(xs, h)
    g = lambda y: eigenstate_g(n, ks, y, p)
    res = -1j * _diag_derivative(g, xs, h) - ks.sum() * g(xs)
    return np.abs(res) / (np.abs(g(xs)) + floor)


def emitter_residual(n: int, ks, xs, p: SystemParams, h: float = 1e-4, eta: float | None = None):
    """Residual of the emitter equation, normalized by |n Vbar g_n(0, ..)|.

    [-i sum_j d_j - E + eps - i Gamma'/2] e_n + n Vbar g_n(0, x1..x_{n-1}) with
    e_n taken from the jump of g_n and g_n(0, ..) from the midpoint rule.
    """
    ks = np.asarray(ks, dtype=float)
    xs = np.asarray(xs, dtype=float).reshape((n - 1,) + np.shape(xs)[1:]) if n > 1 else np.zeros((0,))
    if n > 1:
        _check_stencil(xs, h)
    e = lambda y: eigenstate_e(n, ks, y, p, eta)
    deriv = _diag_derivative(e, xs, h) if n > 1 else 0
    mid = 0.5 * (one_sided(n, ks, xs, p, +1, eta) + one_sided(n, ks, xs, p, -1, eta))
    drive = n * p.vbar * mid
    res = -1j * deriv + (p.epsilon - ks.sum() - 0.5j * p.gamma_prime) * e(xs) + drive
    return np.abs(res) / np.abs(drive)


def decay_rate(n: int, ks, p: SystemParams, spreads=None, rng=None):
    """Fit the exponential decay rate of |B^(n)| against the spread x_n - x_1."""
    rng = np.random.default_rng(rng)
    spreads = np.linspace(0.5, 20.0, 40) / p.gamma if spreads is None else np.asarray(spreads)
    vals = []
    for s in spreads:
        inner = np.sort(rng.uniform(0, s, n - 2))
        xs = np.concatenate([[0.3], 0.3 + inner, [0.3 + s]])
        vals.append(abs(bound_state(ks, xs, p)))
    slope = np.polyfit(spreads, np.log(vals), 1)[0]
    return -slope


def bound_coefficient(ks, xs, p: SystemParams):
    """Bound-term amplitude B extracted from g_2 in 0 < x1 <= x2.

    g_2 = t1 t2 h h (symmetrized) + B exp(iE x2) exp((-Gamma/2 - i eps)(x2 - x1)).
    """
    ks = np.asarray(ks, dtype=float)
    x1, x2 = np.asarray(xs, dtype=float)
    if np.any(x1 <= 0) or np.any(x2 < x1):
        raise ValueError("need 0 < x1 <= x2")
    t = even_transmission(ks, p)
    plane = t[0] * t[1] * free_boson(ks, np.stack([x1, x2]))
    rest = eigenstate_g(2, ks, np.stack([x1, x2]), p) - plane
    return rest / (np.exp(1j * ks.sum() * x2) * _decay(p, x2 - x1))


def bound_coefficient_expected(ks, p: SystemParams):
    tm = even_transmission(np.asarray(ks, dtype=float), p) - 1
    return -tm[0] * tm[1] / (2 * np.pi)


def growth_exponent(ks, p: SystemParams, spreads=None):
    """Fitted exponent of |g_2| against x2 - x1 in the region x1 < 0 < x2.

    A value > 0 would signal a growing exp(+Gamma (x2 - x1)/2) component.
    """
    spreads = np.linspace(0.5, 20.0, 40) / p.gamma if spreads is None else np.asarray(spreads)
    x1 = -0.5 * spreads
    x2 = 0.5 * spreads
    vals = np.abs(eigenstate_g(2, ks, np.stack([x1, x2]), p))
    return np.polyfit(spreads, np.log(vals), 1)[0]
