"""Physical parameters and single-photon scattering coefficients.

Units are hbar = c = 1; momenta, energies and rates share one unit.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_DELTA = 0.1
DEFAULT_EPSILON = 100 * DEFAULT_DELTA
NARROWBAND_RATIO = 20.0


class NarrowbandWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemParams:
    epsilon: float = DEFAULT_EPSILON
    coupling_v: float = 0.5
    gamma_prime: float = 0.0

    def __post_init__(self):
        if self.coupling_v < 0 or self.gamma_prime < 0:
            raise ValueError("coupling_v and gamma_prime must be non-negative")

    @property
    def gamma_c(self) -> float:
        """Emission rate into the waveguide, 2 V^2."""
        return 2.0 * self.coupling_v ** 2

    @property
    def gamma(self) -> float:
        return self.gamma_c + self.gamma_prime

    @property
    def vbar(self) -> float:
        """Coupling of the even mode, sqrt(2) V."""
        return np.sqrt(2.0) * self.coupling_v

    @property
    def pole(self) -> complex:
        """Complex resonance epsilon - i Gamma/2."""
        return complex(self.epsilon, -0.5 * self.gamma)

    def replace(self, **kw) -> "SystemParams":
        d = dict(epsilon=self.epsilon, coupling_v=self.coupling_v, gamma_prime=self.gamma_prime)
        d.update(kw)
        return SystemParams(**d)


@dataclass(frozen=True)
class GaussianPacket:
    k0: float = DEFAULT_EPSILON
    delta: float = DEFAULT_DELTA
    nbar: float = 1.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")

    @property
    def narrowband(self) -> bool:
        return self.k0 / self.delta >= NARROWBAND_RATIO

    def check_narrowband(self) -> bool:
        if not self.narrowband:
            warnings.warn(
                f"packet is not narrowband: k0/delta = {self.k0 / self.delta:.3g} < {NARROWBAND_RATIO}",
                NarrowbandWarning,
                stacklevel=2,
            )
        return self.narrowband


def lorentz(k, p: SystemParams):
    """1 / (k - epsilon + i Gamma/2)."""
    return 1.0 / (np.asarray(k) - p.pole)


def even_transmission(k, p: SystemParams):
    """Transmission coefficient of the chiral even mode.

    The fully decoupled point (V = 0, Gamma' = 0, k = epsilon) is defined
    as 1, its analytic limit.
    """
    k = np.asarray(k, dtype=float)
    if p.gamma_c == 0.0:
        return np.ones_like(k, dtype=complex)[()]
    d = k - p.epsilon + 0.5j * p.gamma_prime
    return ((d - 0.5j * p.gamma_c) / (d + 0.5j * p.gamma_c))[()]


def tbar_minus_one(k, p: SystemParams):
    """t̄_k - 1 = -i Gamma_c / (k - epsilon + i Gamma/2), finite at V = 0."""
    if p.gamma_c == 0.0:
        return np.zeros_like(np.asarray(k, dtype=float), dtype=complex)[()]
    return -1j * p.gamma_c * lorentz(k, p)


def chiral_coefficients(k, p: SystemParams):
    """Lab-frame (t, r) = ((t̄+1)/2, (t̄-1)/2)."""
    tb = even_transmission(k, p)
    return 0.5 * (tb + 1.0), 0.5 * (tb - 1.0)


def packet_amplitude(k, pkt: GaussianPacket, kind: str = "fock"):
    """Gaussian spectral amplitude; coherent packets carry an extra sqrt(nbar)."""
    k = np.asarray(k, dtype=float)
    a = (2 * np.pi * pkt.delta ** 2) ** -0.25 * np.exp(-((k - pkt.k0) ** 2) / (4 * pkt.delta ** 2))
    if kind == "fock":
        return a[()]
    if kind == "coherent":
        return (np.sqrt(pkt.nbar) * a)[()]
    raise ValueError(f"unknown packet kind {kind!r}")
