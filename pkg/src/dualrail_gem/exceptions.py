"""Exception hierarchy shared by all modules."""


class GemError(Exception):
    """Base class for errors raised by this package."""


class ResonanceError(GemError, ValueError):
    """A detuning sits inside the guard band around a one-photon resonance."""


class ZeroCouplingError(GemError, ValueError):
    """Both circular coupling components vanish, so no coupled mode exists."""


class InstabilityError(GemError, RuntimeError):
    """The time step violates the phase-per-step stability bound."""


class NumericalError(GemError, RuntimeError):
    """NaN/inf encountered or a conservation check failed."""


class ConfigError(GemError, ValueError):
    """Scenario configuration could not be parsed or validated."""


class DegenerateBeatError(GemError, ValueError):
    """Beat analysis is impossible (zero rail splitting or vanishing fringe)."""
