"""Few-photon transport through a two-level emitter side-coupled to a waveguide."""
from .model import GaussianPacket, SystemParams, chiral_coefficients, even_transmission
from .quadrature import QuadratureSpec

__all__ = ["GaussianPacket", "SystemParams", "QuadratureSpec", "chiral_coefficients", "even_transmission"]
