"""Simulation of a full-duplex four-node network that recycles part of the
received power by splitting it between the decoding chain and an energy
harvester."""

from . import approximation, channel, energy, ofdm, precoding, rates, whitening
from .exceptions import SimulationError

__version__ = "0.1.0"

__all__ = ["approximation", "channel", "energy", "ofdm", "precoding", "rates", "whitening",
           "SimulationError", "__version__"]
