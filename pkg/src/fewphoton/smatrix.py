"""Momentum-space output amplitudes for right-incident Fock packets.

The even mode carries all of the scattering; the odd mode is free. An
n-photon product packet is split photon by photon into even and odd parts,
the even j-photon part is replaced by its scattered form ``phi_j`` and the
result is projected back onto right-(R) and left-(L) going channels.

Conventions. A j-photon even output is written as
``integral d^j p phi_j(p) e†(p_1)...e†(p_j)|0>`` for the packet
``(A†)^j|0>`` with ``A† = integral alpha(k) e†(k)``. Sector amplitudes
``Psi`` are normalised so that the probability of the sector is
``integral |Psi|^2`` over all momenta of the sector (R momenta first, then
L momenta, L momenta given as positive magnitudes, i.e. photon energies).
``OutputAmplitude.bracket`` returns the projection <k_1..k_n|out>, for
which the 1/(#R)! 1/(#L)! multiplicity factors apply.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, factorial
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import wofz

from .model import GaussianPacket, SystemParams, even_transmission, lorentz, packet_amplitude, tbar_minus_one
from .quadrature import LineInterpolant, QuadratureSpec, UniformTable, line_rule

# |Q/2 - k0| beyond this many packet widths: Gaussian factor < 1e-17
PAIR_CUTOFF = 9
PAIR_TABLE_SIZE = 8001

SECTORS = {
    1: ("R", "L"),
    2: ("RR", "RL", "LL"),
    3: ("RRR", "RRL", "RLL", "LLL"),
}


class EvenKernel:
    """Scattered even-mode j-photon amplitudes phi_j for j <= n.

    phi_1 = t̄ alpha
    phi_2 = t̄ t̄ alpha alpha + two-body bound part
    phi_3 = prod t̄ alpha + sum over pairings t̄ alpha x (two-body part) + three-body part
    """

    def __init__(self, n: int, pkt: GaussianPacket, params: SystemParams, spec: QuadratureSpec | None = None):
        if not 0 <= n <= 3:
            raise ValueError("even kernels are available for n <= 3")
        self.n = n
        self.pkt = pkt
        self.p = params
        self.spec = spec or QuadratureSpec()
        self.decoupled = params.gamma_c == 0.0
        self._pair_table = None

    # single-photon pieces
    def alpha(self, k):
        return packet_amplitude(k, self.pkt)

    def tbar(self, k):
        return even_transmission(k, self.p)

    def lor(self, k):
        return lorentz(k, self.p)

    def pair(self, q):
        """J(Q) from a cubic table of the smooth factor J(Q) (Q - 2 z)."""
        q = np.asarray(q, dtype=float)
        if self.decoupled:
            return np.zeros(q.shape, dtype=complex)
        if self._pair_table is None:
            d, k0 = self.pkt.delta, self.pkt.k0
            lo, hi = 2 * k0 - 2 * PAIR_CUTOFF * d, 2 * k0 + 2 * PAIR_CUTOFF * d
            z2 = 2 * self.p.pole
            self._pair_table = UniformTable(lo, hi, PAIR_TABLE_SIZE, lambda x: self.pair_exact(x) * (x - z2))
        t = self._pair_table
        inside = (q > t.x[0]) & (q < t.x[-1])
        out = np.zeros(q.shape, dtype=complex)
        out[inside] = t(q[inside]) / (q[inside] - 2 * self.p.pole)
        return out

    def pair_exact(self, q):
        """J(Q) = integral dk' alpha(k') alpha(Q-k') (t̄_k'-1)(t̄_{Q-k'}-1), closed form.

        With t̄-1 = -i Gamma_c L and partial fractions the integral reduces to a
        Gaussian against one pole, i.e. a Faddeeva function.
        """
        q = np.asarray(q, dtype=float)
        if self.decoupled:
            return np.zeros(q.shape, dtype=complex)
        d, k0, z = self.pkt.delta, self.pkt.k0, self.p.pole
        m = 0.5 * q
        gauss = np.exp(-((m - k0) ** 2) / (2 * d * d)) / np.sqrt(2 * np.pi * d * d)
        cauchy = -1j * np.pi * wofz((m - z) / (np.sqrt(2) * d))
        return -(self.p.gamma_c ** 2) * gauss * 2.0 / (q - 2 * z) * cauchy

    def pair_quad(self, q, halfwidth=None):
        """Same integral by adaptive quadrature (independent route)."""
        d, k0 = self.pkt.delta, self.pkt.k0
        w = (halfwidth or self.spec.window_halfwidth) * d
        out = []
        for qq in np.atleast_1d(q):
            f = lambda k: self.alpha(k) * self.alpha(qq - k) * tbar_minus_one(k, self.p) * tbar_minus_one(qq - k, self.p)
            pts = sorted({self.p.epsilon, qq - self.p.epsilon})
            lo, hi = k0 - w, k0 + w
            pts = [x for x in pts if lo < x < hi]
            re = integrate.quad(lambda k: f(k).real, lo, hi, points=pts or None, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            im = integrate.quad(lambda k: f(k).imag, lo, hi, points=pts or None, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            out.append(re + 1j * im)
        return np.array(out).reshape(np.shape(q))

    # bound parts
    def phi2_bound(self, p1, p2):
        if self.decoupled:
            return np.zeros(np.broadcast(p1, p2).shape, dtype=complex)
        return -0.5j / np.pi * (self.lor(p1) + self.lor(p2)) * self.pair(np.asarray(p1) + p2)

    def three_body_g(self, c, total, level=None):
        """G(c, P) = integral dk alpha(k)(t̄_k-1) L(c-k) J(P-k)."""
        c, total = np.broadcast_arrays(np.asarray(c, dtype=float), np.asarray(total, dtype=float))
        shape = c.shape
        c, total = c.ravel(), total.ravel()
        eps = self.p.epsilon
        pts = np.stack([np.full_like(c, eps), c - eps, total - 2 * eps], axis=1)
        lev = self.spec.level + 1 if level is None else level
        x, w = line_rule(pts, 0.5 * self.p.gamma, np.full_like(c, self.pkt.k0), self.pkt.delta,
                         window=self.spec.window_halfwidth, level=lev, tails=False)
        f = self.alpha(x) * tbar_minus_one(x, self.p) * self.lor(c[:, None] - x) * self.pair(total[:, None] - x)
        return (w * f).sum(1).reshape(shape)

    def g_slab(self, total: float):
        """Interpolant of q -> G(P - q, P) at fixed total momentum P."""
        eps = self.p.epsilon
        return LineInterpolant(
            lambda q: self.three_body_g(total - q, np.full_like(q, total)),
            [eps, total - 2 * eps], 0.5 * self.p.gamma, self.pkt.k0, self.pkt.delta,
            window=self.spec.window_halfwidth, level=self.spec.level + 1,
        )

    def phi3_bound(self, p1, p2, p3, gfunc: Callable | None = None):
        """Three-body bound part plus nothing else (pairings are separate)."""
        p1, p2, p3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p1, p2, p3)))
        if self.decoupled:
            return np.zeros(p1.shape, dtype=complex)
        total = p1 + p2 + p3
        ps = (p1, p2, p3)
        lors = [self.lor(v) for v in ps]
        out = np.zeros(p1.shape, dtype=complex)
        for w in range(3):
            g = gfunc(ps[w]) if gfunc is not None else self.three_body_g(total - ps[w], total)
            out += g * sum(lors[u] for u in range(3) if u != w)
        return -out / (2 * np.pi ** 2)

    def phi3_pairings(self, p1, p2, p3):
        ps = (p1, p2, p3)
        out = 0
        for s in range(3):
            a, b = [ps[i] for i in range(3) if i != s]
            out = out + self.tbar(ps[s]) * self.alpha(ps[s]) * self.phi2_bound(a, b)
        return out

    def phi(self, j: int, pts, part: str = "full", gfunc=None):
        """phi_j at pts (..., j); part in {"full", "pw", "bs"}."""
        pts = np.asarray(pts, dtype=float)
        if j == 0:
            return np.ones(pts.shape[:-1], dtype=complex) if part != "bs" else np.zeros(pts.shape[:-1], complex)
        cols = [pts[..., i] for i in range(j)]
        pw = np.prod([self.tbar(c) * self.alpha(c) for c in cols], axis=0)
        if part == "pw":
            return pw
        if j == 1 or self.decoupled:
            bs = np.zeros_like(pw)
        elif j == 2:
            bs = self.phi2_bound(*cols)
        elif j == 3:
            bs = self.phi3_pairings(*cols) + self.phi3_bound(*cols, gfunc=gfunc)
        else:
            raise ValueError("j <= 3")
        return bs if part == "bs" else pw + bs

    def __call__(self, pts, part="full"):
        return self.phi(self.n, pts, part)


def compose_sector(pts, n_r: int, n_l: int, phi: Callable, alpha: Callable, cache: dict | None = None):
    """Sector amplitude from even-space amplitudes.

    phi(j, cols) returns the (symmetric) even amplitude for the columns
    ``cols`` of pts; results are cached by column set so several sectors
    evaluated on the same nodes share work.
    """
    pts = np.asarray(pts, dtype=float)
    n = n_r + n_l
    cache = {} if cache is None else cache

    def phi_cols(j, cols):
        key = (j, tuple(sorted(cols)))
        if key not in cache:
            cache[key] = phi(j, pts[..., list(key[1])])
        return cache[key]

    def alpha_col(i):
        key = ("a", i)
        if key not in cache:
            cache[key] = alpha(pts[..., i])
        return cache[key]

    r_idx = list(range(n_r))
    l_idx = list(range(n_r, n))
    total = 0
    for j in range(n + 1):
        for a in range(max(0, j - n_l), min(j, n_r) + 1):
            b = n_r - a
            if b > n - j:
                continue
            coef = comb(n, j) * comb(j, a) * comb(n - j, b) * (-1) ** (n - j - b)
            acc, cnt = 0, 0
            for s in combinations(r_idx, a):
                for t in combinations(l_idx, j - a):
                    term = phi_cols(j, s + t)
                    for i in r_idx + l_idx:
                        if i not in s and i not in t:
                            term = term * alpha_col(i)
                    acc = acc + term
                    cnt += 1
            total = total + coef * acc / cnt
    return total * np.sqrt(factorial(n_r) * factorial(n_l) / factorial(n)) / 2 ** n


@dataclass
class OutputAmplitude:
    """Smooth output amplitude of one R/L sector, split into PW and BS parts."""

    sector: str
    kernel: EvenKernel

    @property
    def n(self):
        return len(self.sector)

    @property
    def n_r(self):
        return self.sector.count("R")

    @property
    def n_l(self):
        return self.sector.count("L")

    def _eval(self, pts, part, cache=None, gfunc=None):
        k = self.kernel
        return compose_sector(pts, self.n_r, self.n_l, lambda j, q: k.phi(j, q, part, gfunc=gfunc), k.alpha, cache)

    def eval(self, pts, cache=None, gfunc=None):
        return self._eval(pts, "full", cache, gfunc)

    def pw(self, pts, cache=None):
        return self._eval(pts, "pw", cache)

    def bs(self, pts):
        return self.eval(pts) - self.pw(pts)

    def bracket(self, pts):
        """<k_1 .. k_n | out>, the projection onto the momentum basis."""
        return np.sqrt(factorial(self.n_r) * factorial(self.n_l)) * self.eval(pts)

    __call__ = eval


def even_kernel(n: int, pkt: GaussianPacket, p: SystemParams, spec: QuadratureSpec | None = None) -> EvenKernel:
    if n > 3:
        raise ValueError("even kernels are available for n <= 3")
    return EvenKernel(n, pkt, p, spec)


def combine_sectors(n: int, pkt: GaussianPacket, p: SystemParams, spec: QuadratureSpec | None = None):
    kern = even_kernel(n, pkt, p, spec)
    return [OutputAmplitude(s, kern) for s in SECTORS[n]]


def bound_kernel_2(k1, k2, pkt: GaussianPacket, p: SystemParams, halfwidth: float = 10.0, lower: float | None = None):
    """Two-photon bound amplitude of the RR sector by 1D quadrature.

    [-i/2pi L(k1) - i/2pi L(k2)] * integral_{k'>0} alpha(k') alpha(k1+k2-k') r r.
    The integration runs over k0 +- halfwidth*delta unless ``lower`` is
    given, in which case it runs over (lower, k0 + 40 delta), where the
    Gaussian factor has long vanished. Returns (value, error_estimate).
    """
    from .model import chiral_coefficients

    e = float(k1) + float(k2)

    def f(k):
        _, r1 = chiral_coefficients(k, p)
        _, r2 = chiral_coefficients(e - k, p)
        return packet_amplitude(k, pkt) * packet_amplitude(e - k, pkt) * r1 * r2

    if lower is None:
        lo, hi = pkt.k0 - halfwidth * pkt.delta, pkt.k0 + halfwidth * pkt.delta
    else:
        lo, hi = lower, pkt.k0 + 40 * pkt.delta
    pts = [x for x in (p.epsilon, e - p.epsilon, pkt.k0) if lo < x < hi]
    kw = dict(limit=500, epsabs=1e-15, epsrel=1e-12)
    if pts:
        kw["points"] = pts
    re, er = integrate.quad(lambda k: f(k).real, lo, hi, **kw)
    im, ei = integrate.quad(lambda k: f(k).imag, lo, hi, **kw)
    pre = -0.5j / np.pi * (lorentz(k1, p) + lorentz(k2, p))
    return pre * (re + 1j * im), abs(pre) * np.hypot(er, ei)
