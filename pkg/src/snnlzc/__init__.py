"""Spiking-network simulation with a Lempel-Ziv-complexity readout.

Three-layer networks of leaky integrate-and-fire or adaptive neurons are
driven by Poisson-encoded binary sequences, trained by backpropagation,
STDP, or the Tempotron rule, and classified by nearest-centroid matching
on the normalized LZ76 complexity of their output spike trains.
"""

from .core import SeedSpec, SpikeTrain, TimeGrid, derive_rng
from .kernels import BACKEND
from .lzc import LzcResult, lz76_parse, lzc_normalized

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "LzcResult",
    "SeedSpec",
    "SpikeTrain",
    "TimeGrid",
    "derive_rng",
    "lz76_parse",
    "lzc_normalized",
    "__version__",
]
