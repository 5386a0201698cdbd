"""Coherent-state observables: transmitted g2(x) and photon-number statistics.

For n̄ <= 1 the two-photon component dominates the correlation, so g2 is
evaluated from single-photon integrals,

    g2(x) = |A^2 - B^2 exp(-Gamma x / 2)|^2 / |A|^4,
    A = integral alpha t,  B = integral alpha r,

and the number distribution from Poisson-weighted Fock sector
probabilities up to three photons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import exp, factorial

import numpy as np

from .fock import prob_one, prob_three, prob_two
from .model import GaussianPacket, SystemParams, chiral_coefficients, packet_amplitude
from .quadrature import QuadratureSpec, line_rule
from .smatrix import EvenKernel, OutputAmplitude

MAX_PHOTONS = 3
UNRELIABLE_DENOMINATOR = 1e-12
TRUNCATION_WARN = 0.05


@dataclass
class CorrelationCurve:
    xs: np.ndarray
    values: np.ndarray
    params: SystemParams
    packet: GaussianPacket
    unreliable: np.ndarray

    @property
    def gamma_x(self) -> np.ndarray:
        return self.params.gamma * self.xs

    def at_zero(self) -> float:
        return float(self.values[np.argmin(np.abs(self.xs))])


def default_x_grid(p: SystemParams, points: int = 60, gamma_x_max: float = 15.0) -> np.ndarray:
    """0 followed by log-spaced separations up to gamma_x_max / Gamma."""
    if p.gamma <= 0:
        raise ValueError("the default grid is scaled by 1/Gamma, which needs Gamma > 0")
    return np.concatenate([[0.0], np.geomspace(1e-2, gamma_x_max, points - 1)]) / p.gamma


def g2_components(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None):
    """(A, B) = (integral alpha t, integral alpha r) for a unit-norm packet."""
    q = q or QuadratureSpec()
    x, w = line_rule([p.epsilon], 0.5 * p.gamma, [pkt.k0], pkt.delta, q.window_halfwidth, level=2, tails=False)
    x, w = x[0], w[0]
    t, r = chiral_coefficients(x, p)
    a = packet_amplitude(x, pkt)
    return complex((w * a * t).sum()), complex((w * a * r).sum())


def g2_curve(pkt: GaussianPacket, p: SystemParams, xs=None, q: QuadratureSpec | None = None) -> CorrelationCurve:
    if pkt.nbar > 1:
        raise ValueError(f"g2 uses the two-photon truncation, valid for nbar <= 1 (got {pkt.nbar})")
    pkt.check_narrowband()
    xs = default_x_grid(p) if xs is None else np.asarray(xs, dtype=float)
    a, b = g2_components(pkt, p, q)
    den = abs(a) ** 4
    num = np.abs(a * a - b * b * np.exp(-0.5 * p.gamma * np.abs(xs))) ** 2
    bad = np.full(xs.shape, den < UNRELIABLE_DENOMINATOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(bad, np.nan, num / den)
    return CorrelationCurve(xs, vals, p, pkt, bad)


def g2_regime(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None):
    """("antibunched" | "bunched", g2(0)), judged against 1."""
    g0 = g2_curve(pkt, p, [0.0], q).values[0]
    return ("antibunched" if g0 < 1 else "bunched"), float(g0)


def g2_from_state(pkt: GaussianPacket, p: SystemParams, xs, halfwidth: float = 8.0, nodes: int = 401,
                  anchor: float = 0.0) -> np.ndarray:
    """g2 from the scattered two-photon state itself (independent check).

    Returns |Psi_RR(x1, x1 + x)|^2 / (|psi_R(x1)|^2 |psi_R(x1 + x)|^2) at
    x1 = anchor, where Psi_RR is the position-space RR sector amplitude and
    psi_R the transmitted one-photon amplitude. The plane-wave part of
    Psi_RR is Fourier transformed on a uniform grid. The bound part only
    decays like a Lorentzian in k1 - k2, so that direction is done by
    residues: with f(E) its value divided by L(k1) + L(k2) on the diagonal,
    the transform is -i integral dE f(E) exp(iE max(x1, x2)) exp(-(i eps + Gamma/2)|x2 - x1|).
    """
    k = np.linspace(pkt.k0 - halfwidth * pkt.delta, pkt.k0 + halfwidth * pkt.delta, nodes)
    dk = k[1] - k[0]
    kern = EvenKernel(2, pkt, p)
    rr = OutputAmplitude("RR", kern)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    pw = rr.pw(np.stack([k1, k2], axis=-1))
    t, _ = chiral_coefficients(k, p)
    single = packet_amplitude(k, pkt) * t
    xs = np.asarray(xs, dtype=float)
    x2 = anchor + xs
    ft = lambda x: np.exp(1j * np.outer(np.atleast_1d(x), k)) * dk / np.sqrt(2 * np.pi)
    e1 = ft(anchor)[0]
    e2 = ft(x2)
    psi_pw = e2 @ (pw.T @ e1)

    energies = np.linspace(2 * pkt.k0 - 2 * halfwidth * pkt.delta, 2 * pkt.k0 + 2 * halfwidth * pkt.delta,
                           4 * nodes)
    half = 0.5 * energies
    diag = np.stack([half, half], axis=-1)
    f = rr.bs(diag) / (2 * kern.lor(half))
    de = energies[1] - energies[0]
    top = np.maximum(anchor, x2)
    sep = np.abs(x2 - anchor)
    psi_bs = -1j * (np.exp(1j * np.outer(top, energies)) @ f) * de
    psi_bs = psi_bs * np.exp(-(1j * p.epsilon + 0.5 * p.gamma) * sep)

    psi1_a = e1 @ single
    psi1_b = e2 @ single
    return np.abs(psi_pw + psi_bs) ** 2 / (abs(psi1_a) ** 2 * np.abs(psi1_b) ** 2)


@dataclass
class FockTable:
    """Sector probabilities for n = 1..3 at one parameter point (independent of n̄)."""

    params: SystemParams
    sectors: dict[int, dict[str, float]]
    messages: list[str] = field(default_factory=list)

    def transmitted(self, n: int, m: int) -> float:
        """Probability of m transmitted photons out of an n-photon Fock input."""
        if n == 0:
            return 1.0 if m == 0 else 0.0
        return self.sectors[n].get("R" * m + "L" * (n - m), 0.0)


def fock_table(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None,
               q3: QuadratureSpec | None = None) -> FockTable:
    unit = GaussianPacket(pkt.k0, pkt.delta, 1.0)
    sectors, msgs = {}, []
    for n, fn, spec in ((1, prob_one, q), (2, prob_two, q), (3, prob_three, q3)):
        res = fn(unit, p, spec)
        sectors[n] = {name: e.total for name, e in res.sectors.items()}
        msgs += [f"n={n}: {m}" for m in res.messages]
    return FockTable(p, sectors, msgs)


@dataclass
class NumberDistribution:
    nbar: float
    probs: np.ndarray
    poisson: np.ndarray
    reference: str
    reference_mean: float
    captured: float
    messages: list[str] = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.probs / self.poisson

    @property
    def remainder(self) -> float:
        return 1.0 - self.captured


def poisson(mean: float, m: int) -> float:
    return exp(-mean) * mean ** m / factorial(m)


def number_distribution(pkt: GaussianPacket, p: SystemParams, q: QuadratureSpec | None = None,
                        reference: str = "transmitted", table: FockTable | None = None) -> NumberDistribution:
    """Transmitted photon-number distribution P_0..P_3 and its Poisson reference.

    P_m = sum_{n=m}^{3} w_n P^(n)(m transmitted), w_n = exp(-n̄) n̄^n / n!.
    ``reference="incident"`` compares with a Poisson law of the incident n̄.
    ``reference="transmitted"`` uses the transmitted mean, corrected for the
    truncation by dividing through by the captured incident mean:
    n̄_T = n̄ * sum m P_m / sum_{m<=3} m w_m.
    """
    if pkt.nbar > 1:
        raise ValueError(f"the three-photon truncation is valid for nbar <= 1 (got {pkt.nbar})")
    if reference not in ("incident", "transmitted"):
        raise ValueError(f"reference must be 'incident' or 'transmitted', got {reference!r}")
    table = table or fock_table(pkt, p, q)
    nbar = pkt.nbar
    w = np.array([poisson(nbar, n) for n in range(MAX_PHOTONS + 1)])
    probs = np.array([sum(w[n] * table.transmitted(n, m) for n in range(m, MAX_PHOTONS + 1))
                      for m in range(MAX_PHOTONS + 1)])
    captured = float(w.sum())
    m = np.arange(MAX_PHOTONS + 1)
    if reference == "incident":
        mean = nbar
    else:
        in_mean = float((m * w).sum())
        mean = nbar * float((m * probs).sum()) / in_mean if in_mean > 0 else 0.0
    ref = np.array([poisson(mean, k) for k in m])
    msgs = list(table.messages)
    if 1 - captured > TRUNCATION_WARN:
        msgs.append(f"truncation at {MAX_PHOTONS} photons leaves {1 - captured:.3f} of the incident state")
    return NumberDistribution(nbar, probs, ref, reference, mean, captured, msgs)
