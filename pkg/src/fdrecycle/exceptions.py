"""Exception types raised by the simulator."""


class SimulationError(Exception):
    """Base class for numerical failures inside the link simulator."""


class NullspaceDimensionMismatch(SimulationError):
    """The numerical null space of a constraint matrix has the wrong size."""

    def __init__(self, expected, found):
        super().__init__(f"null space has {found} dimensions, expected {expected}")
        self.expected = expected
        self.found = found


class NotPositiveDefinite(SimulationError):
    pass


class AllGainsZero(SimulationError):
    pass


class SaturatedRegime(SimulationError):
    """Decoding was requested for a splitting ratio that saturates the RX chain."""


class DegenerateAnchors(SimulationError):
    pass


class OutOfScopeRegime(SimulationError):
    pass


class DimensionMismatch(SimulationError):
    pass


class ConfigError(ValueError):
    """Invalid scenario configuration."""
